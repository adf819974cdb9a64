import numpy as np
import pytest
from numpy.testing import assert_allclose

from lib.errors import Degenerate, NonCausalZ, NotTemporalGauge
from lib.exact_solutions import EQUATOR, stationary_schwarzschild
from lib.mass_geometry import (BoundaryScan, HorizonNode, HorizonProfile, ScanEdge, calibrate_tau, classify,
                               curvature_conditions, divergence_threshold, energy_condition, extrinsic_curvature,
                               horizon_profile, horizon_root, horizon_roots, killing_residual, mass_generic,
                               mass_grid, mass_temporal_gauge, mass_values, nabla_x, require_nondegenerate,
                               stay_criterion, temporal_gauge_mass)
from lib.types import MassSource, RegionTag

ROWS = [0.3, 0.8, 1.2]


def spatial_rows(rhos):
    return np.array([[rho, EQUATOR[0], EQUATOR[1]] for rho in rhos])


@pytest.mark.parametrize("rho", ROWS)
def test_schwarzschild_horizon_matches_closed_form(schwarzschild, rho):
    log_x = horizon_root(schwarzschild.metric, rho, EQUATOR)
    assert log_x == pytest.approx(float(schwarzschild.horizon_closed(np.asarray(rho))), rel=1e-9)


def test_vectorized_roots_agree_with_scalar_roots(schwarzschild):
    roots = horizon_roots(schwarzschild.metric, spatial_rows(ROWS))
    expected = [horizon_root(schwarzschild.metric, rho, EQUATOR) for rho in ROWS]
    assert_allclose(roots, expected, rtol=1e-10)


def test_vectorized_roots_with_closed_form_mass(schwarzschild):
    roots = horizon_roots(schwarzschild.metric, spatial_rows(ROWS), mass=schwarzschild.m_closed)
    expected = [float(schwarzschild.horizon_closed(np.asarray(rho))) for rho in ROWS]
    assert_allclose(roots, expected, rtol=1e-10)


def test_regions_on_either_side_of_the_horizon(schwarzschild):
    log_x = horizon_root(schwarzschild.metric, 0.8, EQUATOR)
    above = classify(schwarzschild.metric, np.array([log_x + 0.5, 0.8, *EQUATOR]))
    below = classify(schwarzschild.metric, np.array([log_x - 0.5, 0.8, *EQUATOR]))
    assert above.tag is RegionTag.EXTERIOR
    assert below.tag is RegionTag.INTERIOR
    assert above.m < 0 < below.m


def test_mass_generic_sample(schwarzschild):
    y = np.array([-2.0, 0.8, *EQUATOR])
    sample = mass_generic(schwarzschild.metric, y)
    assert sample.source is MassSource.GENERIC
    assert sample.m == pytest.approx(float(mass_values(schwarzschild.metric, y)), rel=1e-12)
    assert sample.dm_dt == sample.grad[0]
    assert sample.dm_dt < 0


def test_horizon_profile_nodes_are_actual_horizons(schwarzschild):
    profile = horizon_profile(schwarzschild.metric, spatial_rows(ROWS))
    assert len(profile.ok) == len(ROWS)
    for node in profile.ok:
        assert node.tag is RegionTag.HORIZON_ACTUAL
        assert node.dm_dt < 0
    assert_allclose(profile.omega1, ROWS)
    assert profile.height(0.8, EQUATOR) == pytest.approx(profile.X[1], rel=1e-12)


def test_require_nondegenerate():
    node = HorizonNode(0.5, 0.5, EQUATOR, -1.0, 0.0, 0.0, RegionTag.HORIZON_APPARENT, "degenerate")
    with pytest.raises(Degenerate):
        require_nondegenerate(HorizonProfile((node,), None))


def test_mass_grid_shape(schwarzschild):
    values = mass_grid(schwarzschild.metric, [-3.0, -0.1], spatial_rows(ROWS))
    assert values.shape == (2, 3)
    assert np.all(values[1] < 0)


def test_divergence_threshold(schwarzschild):
    threshold = divergence_threshold(schwarzschild.metric, 0.8, EQUATOR, 10.0)
    y = np.array([threshold, 0.8, *EQUATOR])
    assert float(mass_values(schwarzschild.metric, y)) == pytest.approx(10.0, rel=1e-8)


def test_temporal_gauge_mass_matches_generic(synthetic, synthetic_samples):
    generic = mass_values(synthetic.metric, synthetic_samples)
    closed = temporal_gauge_mass(synthetic.metric, synthetic_samples)
    assert_allclose(closed, generic, rtol=1e-8)
    assert_allclose(closed, synthetic.m_closed(synthetic_samples), rtol=1e-12)


def test_temporal_gauge_requires_gauge(schwarzschild):
    with pytest.raises(NotTemporalGauge):
        temporal_gauge_mass(schwarzschild.metric, np.array([-1.0, 0.8, *EQUATOR]))


def test_synthetic_curvature_conditions(synthetic, synthetic_samples):
    report = curvature_conditions(synthetic.metric, synthetic_samples)
    assert report.strict_fraction == 1.0
    assert report.general_fraction == 1.0
    assert np.all(report.trK < 0)
    assert_allclose(report.K_grad, 0.0, atol=1e-14)
    assert report.sign_agreement == 1.0


def test_extrinsic_curvature_trace_sign(synthetic):
    x = synthetic.chart.to_x(np.array([-0.5, 2.0, *EQUATOR]))
    curvature = extrinsic_curvature(synthetic.metric, x)
    assert curvature.trK < 0
    assert curvature.tau > 0


def test_closed_form_time_derivative_matches_finite_differences(synthetic, synthetic_samples):
    sample = mass_temporal_gauge(synthetic.metric, synthetic_samples[4])
    assert sample.source is MassSource.TEMPORAL_GAUGE
    assert sample.dm_dt == pytest.approx(sample.diagnostics["dm_dt_fd"], rel=1e-5)
    calibration = calibrate_tau(synthetic.metric, synthetic_samples[:3])
    assert calibration["median_ratio"] == pytest.approx(1.0, rel=1e-5)
    assert calibration["samples"] == 3


def test_energy_condition_for_past_directed_time(synthetic, synthetic_samples):
    report = energy_condition(synthetic.metric, lambda y: np.array([-1.0, 0.0, 0.0, 0.0]), synthetic_samples)
    assert report.minimum > 0
    assert report.black_hole_exists


def test_energy_condition_rejects_spacelike_fields(synthetic, synthetic_samples):
    with pytest.raises(NonCausalZ):
        energy_condition(synthetic.metric, lambda y: np.array([0.0, 0.0, 1.0, 0.0]), synthetic_samples[:1])


def test_nabla_x_forms_agree():
    Z = np.array([0.7, 0.1, -0.2, 0.3])
    grad = np.array([-2.0, 0.5, 1.0, -0.4])
    direct, covariant = nabla_x(Z, grad)
    assert direct == pytest.approx(covariant)


def test_stay_criterion_exit_and_stay(schwarzschild):
    profile = horizon_profile(schwarzschild.metric, spatial_rows([0.8]))
    X = profile.X[0]
    start = 0.5 * X

    def curve(s):
        return [0.8, *EQUATOR]

    leaving = stay_criterion(schwarzschild.metric, profile, curve, lambda s: np.array([1.0, 0.0, 0.0, 0.0]),
                             start, 1.0)
    assert not leaving.stays
    assert leaving.exit_s == pytest.approx(X - start, rel=1e-6)
    assert leaving.identity_gap < 1e-12
    # the integration ends on the crossing itself
    assert leaving.s[-1] == pytest.approx(leaving.exit_s, rel=1e-12)
    assert leaving.margin[-1] == pytest.approx(0.0, abs=1e-12)
    assert np.all(leaving.margin[:-1] < 0)

    staying = stay_criterion(schwarzschild.metric, profile, curve, lambda s: np.array([-1.0, 0.0, 0.0, 0.0]),
                             start, 1.0)
    assert staying.stays
    assert staying.exit_s is None
    assert staying.s[-1] == pytest.approx(1.0)
    assert np.all(staying.margin < 0)


def test_killing_residual_vanishes_for_stationary_metric(synthetic):
    y = np.array([-1.0, 0.8, *EQUATOR])
    assert killing_residual(stationary_schwarzschild(1.0), y) < 1e-12
    assert killing_residual(synthetic.metric, np.array([-1.0, 2.0, *EQUATOR])) > 1e-6


def test_scan_edge_sequences():
    finite = ScanEdge("r->1", lambda a: 1.0, lambda a: 2.0)
    assert finite.rho(3, EQUATOR) == pytest.approx(1.125)
    assert finite.distance(3, EQUATOR) == pytest.approx(0.125)
    infinite = ScanEdge("r->inf", lambda a: np.inf, lambda a: 2.0)
    assert infinite.rho(3, EQUATOR) == pytest.approx(16.0)
    assert infinite.distance(3, EQUATOR) == pytest.approx(1.0 / 16.0)
    assert BoundaryScan((finite,)).depth == 40
