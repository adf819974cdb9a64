import numpy as np
import pytest

from lib.errors import HypothesisViolated, NonConvergent
from lib.exact_solutions import make_synthetic_collapse
from lib.penrose_bound import (DeformationFamily, MassModel, QuadratureGrid, boundary_terms, conserved_drift,
                               conserved_integral, euler_residual, functional_I_area, functional_J,
                               isoperimetric_endpoints, lagrange_multiplier, multiplier_denominator, penrose_bound,
                               positivity_lemma, refinement_study, second_variation, second_variation_sign,
                               total_mass_squared)
from lib.verification import DRIFT_TOL, ISOPERIMETRIC_TOL

AREA = 2.0 * np.pi**2


def constant_mass(value):
    return MassModel(lambda y: np.full(np.shape(y)[:-1], value))


def quadratic_mass():
    return MassModel(lambda y: y[..., 0] * y[..., 0] + 1.0, exact=True, name="L^2 + 1")


@pytest.fixture
def grid():
    return QuadratureGrid(1.0, nodes=16, angle_nodes=2)


def family_for(model, grid, log_X=-1.0, **kwargs):
    return DeformationFamily(model=model, metric=None, grid=grid,
                             log_X=np.full(len(grid.spatial), log_X), **kwargs)


@pytest.mark.parametrize("kwargs, message", [
    ({"omega_max": 0.0}, "Invalid omega_max"),
    ({"omega_max": 1.0, "nodes": 0}, "Invalid node counts"),
    ({"omega_max": 1.0, "levels": 1}, "Invalid cutoff levels"),
    ({"omega_max": 1.0, "cutoff": 2.0}, "Invalid cutoff"),
])
def test_quadrature_grid_validation(kwargs, message):
    with pytest.raises(ValueError, match=message):
        QuadratureGrid(**kwargs)


def test_quadrature_grid_layout(grid):
    assert len(grid.spatial) == 16 * (grid.levels + 1) * 2 * 2
    assert len(grid.main) == 16 * 2 * 2
    doubled = grid.doubled()
    assert (doubled.nodes, doubled.angle_nodes) == (32, 4)


def test_integrate_extrapolates_the_cutoff(grid):
    estimate = grid.integrate(grid.spatial.omega1)
    assert estimate.value == pytest.approx(AREA, rel=1e-10)
    assert len(estimate.partials) == grid.levels + 1
    truncated = grid.integrate(grid.spatial.omega1, extrapolate=False)
    assert truncated.value < estimate.value


def test_integrate_rejects_non_finite_values(grid):
    values = np.ones(len(grid.spatial))
    values[3] = np.nan
    with pytest.raises(NonConvergent, match="non-finite"):
        grid.integrate(values)


def test_mass_model_rejects_unknown_source():
    with pytest.raises(TypeError):
        MassModel.of(42)


@pytest.mark.parametrize("value, expected", [(0.0, 0.0), (1.0, AREA), (2.5, 2.5 * AREA)])
def test_total_mass_squared_of_constant_mass(grid, value, expected):
    assert total_mass_squared(constant_mass(value), grid).value == pytest.approx(expected, rel=1e-10, abs=1e-14)


def test_deformation_family_validation(grid):
    model = constant_mass(1.0)
    with pytest.raises(ValueError, match="Invalid amplitude"):
        family_for(model, grid, amplitude=0.3)
    with pytest.raises(ValueError, match="Invalid band"):
        family_for(model, grid, band=0.0)
    with pytest.raises(HypothesisViolated):
        family_for(model, grid, log_X=0.0)


def test_deformation_family_endpoints(grid):
    family = family_for(constant_mass(1.0), grid)
    X = np.exp(-1.0)
    np.testing.assert_allclose(family.value(family.s_lo), X * np.exp(0.1))
    np.testing.assert_allclose(family.value(family.s_hi), X * np.exp(-0.1))
    np.testing.assert_allclose(family.value(np.zeros(len(family.nodes))), X)
    perturbed = family.perturbed(0.1, seed=3)
    np.testing.assert_allclose(perturbed.value(perturbed.s_lo), family.top)
    np.testing.assert_allclose(perturbed.value(perturbed.s_hi), family.bottom)


def test_functional_J_of_constant_deformation_vanishes(grid):
    family = family_for(constant_mass(1.0), grid).constant()
    assert functional_J(family).value == pytest.approx(0.0, abs=1e-14)


def test_functional_J_of_straight_deformation(grid):
    family = family_for(constant_mass(1.0), grid)
    width = 2.0 * np.exp(-1.0) * np.sinh(0.1)
    assert functional_J(family).value == pytest.approx(-width * AREA, rel=1e-10)


def test_boundary_terms_of_constant_mass(grid):
    top, bottom = boundary_terms(family_for(constant_mass(1.0), grid))
    assert top.value == pytest.approx(AREA, rel=1e-10)
    assert bottom.value == pytest.approx(AREA, rel=1e-10)


@pytest.mark.parametrize("position", [-0.5, 0.0, 0.5])
def test_euler_residual_vanishes_on_straight_deformation(grid, position):
    family = family_for(quadratic_mass(), grid)
    assert euler_residual(family, position) < 1e-6


def test_euler_residual_vanishes_on_perturbed_deformation(grid):
    family = family_for(quadratic_mass(), grid).perturbed(0.1, seed=7)
    assert euler_residual(family, 0.25) < 1e-6


def test_euler_residual_needs_enough_nodes():
    family = family_for(quadratic_mass(), QuadratureGrid(1.0, nodes=2, angle_nodes=2))
    with pytest.raises(NonConvergent, match="4 needed"):
        euler_residual(family)


def test_second_variation_identity_on_synthetic_collapse(synthetic, synthetic_samples):
    result = second_variation(synthetic, synthetic_samples)
    assert result.identity_gap < 1e-8
    assert result.ok
    assert result.conditions is not None and np.all(result.conditions)
    assert second_variation_sign(synthetic, synthetic_samples)


def test_second_variation_sign_detects_growing_mass():
    samples = np.array([[-1.0, 0.5, 1.0, 0.0], [-0.5, 0.2, 2.0, 1.0]])
    growing = MassModel(lambda y: y[..., 0] + 5.0, exact=True)
    assert not second_variation_sign(growing, samples)


def test_bound_requires_temporal_gauge(schwarzschild):
    with pytest.raises(HypothesisViolated, match="temporal gauge"):
        penrose_bound(schwarzschild)


@pytest.mark.slow
def test_bound_holds_for_synthetic_collapse(synthetic):
    report = penrose_bound(synthetic, QuadratureGrid.for_chart(synthetic.chart, 16))
    assert report.holds
    assert report.denominator_trK < 0
    assert report.horizon_convention in ("event-horizon", "apparent-profile")


def test_positivity_lemma_hypotheses(grid):
    # m = −(L + 1) changes sign on the horizon X̃ = e⁻¹
    family = family_for(MassModel(lambda y: -(y[..., 0] + 1.0)), grid)
    report = positivity_lemma(family)
    assert report.checked == len(family.nodes)
    assert report.violations == 0
    assert np.all(report.phi_left > 0)
    assert np.all(report.phi_right < 0)


def test_refinement_study_of_exact_quantity(grid):
    values, order = refinement_study(lambda g: total_mass_squared(constant_mass(1.0), g).value, grid)
    np.testing.assert_allclose(values, AREA, rtol=1e-10)
    assert order == float("inf")


@pytest.fixture(scope="module")
def synthetic_family(synthetic):
    grid = QuadratureGrid.for_chart(synthetic.chart, 4, angle_nodes=2)
    return DeformationFamily.from_horizon(synthetic, grid)


def test_deformed_slices_move_off_the_horizon_area(synthetic_family):
    check = isoperimetric_endpoints(synthetic_family)
    assert check.area > 0
    assert check.area == pytest.approx(functional_I_area(synthetic_family).value, rel=1e-14)
    # √|ḡ| grows with t, and t grows as ω⁰ falls
    assert check.p_minus < check.area < check.p_plus
    assert check.mismatch > ISOPERIMETRIC_TOL
    assert check.transport_gap < 1e-6
    assert conserved_drift(synthetic_family) > DRIFT_TOL


def test_static_slices_keep_the_horizon_area():
    entry = make_synthetic_collapse(kappa=0.0)
    grid = QuadratureGrid.for_chart(entry.chart, 4, angle_nodes=2)
    family = DeformationFamily.from_heights(entry, grid, np.full(len(grid.spatial), -1.0))
    check = isoperimetric_endpoints(family)
    assert check.mismatch < 1e-14
    assert check.transport_gap < 1e-14
    assert conserved_drift(family) == 0.0


def test_conserved_integral_on_the_horizon(synthetic, synthetic_family):
    denominator = multiplier_denominator(synthetic_family)
    assert denominator.value < 0
    assert conserved_integral(synthetic_family).value == pytest.approx(denominator.value, rel=1e-12)
    top, bottom = boundary_terms(synthetic_family)
    expected = (top.value - bottom.value) / denominator.value
    assert lagrange_multiplier(synthetic, family=synthetic_family) == pytest.approx(expected, rel=1e-12)
