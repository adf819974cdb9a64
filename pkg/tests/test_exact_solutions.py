from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_allclose

from lib.dual import Dual
from lib.errors import BranchMismatch, InvalidSigma
from lib.exact_solutions import (EQUATOR, catalog, closed_horizon_or_none, ergosphere_crossing, ergosphere_radius,
                                 kerr_boyer_lindquist, make_kerr, make_reissner_nordstrom, make_roberts,
                                 make_schwarzschild, make_synthetic_collapse, mass_ratio_grid, rn_compactifier,
                                 stationary_schwarzschild, synthetic_compactifier, verdict)
from lib.mass_geometry import horizon_root, mass_values
from lib.tensor_core import signature
from lib.types import CatalogId, MassSource, Verdict


def chart_points(entry, log_omega0=(-3.0, -1.0, -0.2), n=5):
    rows = entry.horizon_grid(n)
    return np.array([[L, *row] for L in log_omega0 for row in rows])


def test_schwarzschild_closed_time_derivative_matches_dual(schwarzschild):
    y = chart_points(schwarzschild)
    direction = np.zeros_like(y)
    direction[:, 0] = 1.0
    slope = schwarzschild.m_closed(Dual(y, direction)).eps
    assert_allclose(slope * np.exp(-y[:, 0]), schwarzschild.dm_closed(y), rtol=1e-12)


def test_schwarzschild_closed_mass_has_positive_factor(schwarzschild):
    ratios = mass_ratio_grid(schwarzschild, chart_points(schwarzschild))
    assert np.all(np.isfinite(ratios))
    assert np.all(ratios > 0)


@pytest.mark.parametrize("r", [3.0, 5.0])
def test_rn_subextremal_horizon(rn_sub, r):
    log_x = horizon_root(rn_sub.metric, r, EQUATOR)
    assert log_x == pytest.approx(float(rn_sub.horizon_closed(np.asarray(r))), rel=1e-8)


def test_rn_closed_mass_shares_sign_with_generic(rn_sub):
    ratios = mass_ratio_grid(rn_sub, chart_points(rn_sub))
    finite = ratios[np.isfinite(ratios)]
    assert finite.size > 0
    assert np.all(finite > 0)


@pytest.mark.parametrize("M, Q, branch", [
    (1.0, 0.5, CatalogId.RN_SUB),
    (1.0, 2.0, CatalogId.RN_SUPER),
    (1.0, 1.0, CatalogId.RN_EXTREMAL),
])
def test_rn_branch_detection(M, Q, branch):
    assert make_reissner_nordstrom(M, Q).id is branch


def test_rn_branch_mismatch():
    with pytest.raises(BranchMismatch):
        make_reissner_nordstrom(1.0, 2.0, branch=CatalogId.RN_SUB)
    with pytest.raises(BranchMismatch, match="inside the horizon"):
        make_reissner_nordstrom(1.0, 0.5, h=rn_compactifier(1.0, 2.0, "alternate"))
    with pytest.raises(ValueError, match="Invalid compactifier"):
        rn_compactifier(1.0, 0.5, "other")


def test_roberts_requires_positive_scale():
    with pytest.raises(InvalidSigma):
        make_roberts(-0.6)
    entry = make_roberts(0.1)
    assert entry.expected.verdict is Verdict.NOT_NAKED


def test_roberts_horizon():
    entry = make_roberts(0.1)
    r = 3.0
    log_x = horizon_root(entry.metric, r, EQUATOR)
    assert log_x == pytest.approx(float(entry.horizon_closed(np.asarray(r))), rel=1e-8)


def test_kerr_parameter_checks():
    with pytest.raises(BranchMismatch):
        make_kerr(1.0, 1.0)
    with pytest.raises(ValueError, match="Invalid M"):
        make_kerr(-1.0, 0.5)


@pytest.mark.parametrize("theta", [np.pi / 3, 0.5 * np.pi])
def test_kerr_ergosphere_crossing(theta):
    entry = make_kerr(1.0, 0.5)
    assert ergosphere_crossing(entry, theta) == pytest.approx(ergosphere_radius(1.0, 0.5, theta), rel=1e-9)


def test_boyer_lindquist_is_lorentzian_and_reduces_to_schwarzschild():
    x = np.array([0.0, 3.0, 1.0, 0.2])
    assert signature(kerr_boyer_lindquist(1.0, 0.5, x)) == (1, 3, 0)
    schwarzschild_x = make_schwarzschild(1.0).x_metric(x)
    assert_allclose(kerr_boyer_lindquist(1.0, 0.0, x).full, schwarzschild_x, rtol=1e-14)


def test_synthetic_closed_mass():
    entry = make_synthetic_collapse()
    y = chart_points(entry)
    L, r = y[:, 0], y[:, 1]
    B = 1.0 - 4.0 * r**-2.0 * L
    assert_allclose(entry.m_closed(y), 8.0 * r * (L**2 - B**-4), rtol=1e-12)
    assert entry.closed_source is MassSource.TEMPORAL_GAUGE


def test_synthetic_parameter_checks():
    with pytest.raises(ValueError, match="Invalid kappa"):
        make_synthetic_collapse(-1.0)
    with pytest.raises(ValueError, match="Invalid profile"):
        make_synthetic_collapse(profile="spherical")
    with pytest.raises(ValueError, match="Invalid compactifier"):
        synthetic_compactifier("other")


def test_stationary_metric_requires_positive_mass():
    with pytest.raises(ValueError, match="Invalid M"):
        stationary_schwarzschild(0.0)


@pytest.mark.parametrize("name, params, family", [
    ("schwarzschild", {"M": 2.0}, CatalogId.SCHWARZSCHILD),
    ("rn", {"Q": 0.5}, CatalogId.RN_SUB),
    ("Reissner_Nordstrom", {"Q": 3.0}, CatalogId.RN_SUPER),
    ("roberts", {"sigma": 0.2}, CatalogId.ROBERTS),
    ("kerr", {"a": 0.3}, CatalogId.KERR),
    ("synthetic", {"kappa": 2.0, "compactifier": "alternate"}, CatalogId.SYNTHETIC_COLLAPSE),
])
def test_catalog_lookup(name, params, family):
    assert catalog(name, **params).id is family


def test_catalog_rejects_unknown_metric():
    with pytest.raises(ValueError, match="Invalid metric"):
        catalog("minkowski")


def test_grid_and_ratio_validation(schwarzschild):
    with pytest.raises(ValueError, match="Invalid grid size"):
        schwarzschild.horizon_grid(1)
    with pytest.raises(ValueError, match="no closed-form mass"):
        mass_ratio_grid(replace(schwarzschild, m_closed=None), chart_points(schwarzschild))
    assert closed_horizon_or_none(replace(schwarzschild, horizon_closed=None), 0.5) is None


# h(r₊) = h(r*) = π/2 − arctan e for the exponential-lapse compactifier of RN
EXPONENTIAL_EDGE = 0.5 * np.pi - np.arctan(np.e)


@pytest.mark.slow
@pytest.mark.parametrize("name, params, expected, passageway", [
    ("schwarzschild", {"M": 1.0}, Verdict.NAKED, 0.0),
    ("rn", {"M": 1.0, "Q": 2.0}, Verdict.NOT_NAKED, None),
    ("rn", {"M": 2.0, "Q": 1.0}, Verdict.NAKED, EXPONENTIAL_EDGE),
    ("rn", {"M": 2.0, "Q": 1.0, "compactifier": "alternate"}, Verdict.NAKED, 1.0 / (3.0 + np.sqrt(3.0))),
    ("rn", {"M": 1.0, "Q": 1.0}, Verdict.NAKED, EXPONENTIAL_EDGE),
    ("roberts", {"sigma": 0.1}, Verdict.NOT_NAKED, None),
    ("kerr", {"M": 1.0, "a": 0.5}, Verdict.NAKED, np.arctan(1.0 / (1.0 + np.sqrt(0.75)))),
])
def test_passageways_at_fixed_locations(name, params, expected, passageway):
    result = verdict(catalog(name, **params))
    assert result.verdict is expected
    found = np.array([point.omega1 for point in result.limit_points])
    if passageway is None:
        assert found.size == 0
    else:
        assert found.size > 0
        assert_allclose(found, passageway, atol=1e-9)


@pytest.mark.slow
def test_schwarzschild_passageway_is_the_corner_only(schwarzschild):
    result = verdict(schwarzschild)
    outcomes = {trace.label: trace.outcome for trace in result.traces}
    assert outcomes == {"omega1->pi/2": "excluded", "omega1->0": "decays"}
    (point,) = result.limit_points
    assert (point.log_omega0, point.omega1) == (float("-inf"), 0.0)


def test_schwarzschild_chart_slope_vanishes_toward_the_corner(schwarzschild):
    slope = schwarzschild.scan.slope
    w = np.array([1e-2, 1e-3, 1e-4])
    y = np.column_stack([schwarzschild.horizon_closed(w), w, np.full(3, EQUATOR[0]), np.full(3, EQUATOR[1])])
    assert_allclose(slope(y), -w, rtol=2e-2)
    far = np.array([[float(schwarzschild.horizon_closed(np.asarray(1.4))), 1.4, *EQUATOR]])
    assert abs(slope(far)[0]) > 1.0


def test_kerr_boyer_lindquist_mass_matches_the_pullback():
    entry = make_kerr(1.0, 0.5)
    y = np.array([[-0.5, 3.0, np.pi / 3, 0.0], [-2.0, 2.2, 0.5 * np.pi, 0.0], [-0.1, 6.0, 1.0, 0.3]])
    assert_allclose(entry.scan.mass(y), mass_values(entry.pullback, y), rtol=1e-8)


def test_kerr_scan_reaches_the_outer_horizon():
    entry = make_kerr(1.0, 0.5)
    r_plus = 1.0 + np.sqrt(0.75)
    assert entry.scan_metric is entry.pullback
    assert [edge.limit(EQUATOR) for edge in entry.scan.edges] == [r_plus, np.inf]
    # inside the ergoregion, between r₊ and r*(π/2) = 2
    rho = r_plus + 1e-6
    log_x = horizon_root(entry.scan_metric, rho, EQUATOR, mass=entry.scan.mass)
    slope = entry.scan.slope(np.array([log_x, rho, *EQUATOR]))
    sigma, delta = r_plus**2 + 1e-6 * 2 * r_plus, 1e-6 * np.sqrt(3.0)
    assert slope == pytest.approx(-2.0 * np.sqrt(delta * sigma / (r_plus**2 + 0.25) ** 2), rel=1e-3)
