"""Acceptance suites run by `verify`: each check records what was measured against what was expected."""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from lib.compactification import ConformalFactorSpec, delta_star
from lib.errors import ConfhorError, InconclusiveRefinement
from lib.exact_solutions import catalog, make_schwarzschild, verdict
from lib.mass_geometry import (chart_domain, classify, gradient_scale, horizon_profile, mass_temporal_gauge,
                               stay_criterion)
from lib.penrose_bound import (EULER_POSITIONS, DeformationFamily, QuadratureGrid, euler_residual,
                               penrose_bound)
from lib.tensor_core import DerivativeConfig, ScalarField, derive
from lib.types import DerivativeScheme, RegionTag, Verdict, VerifySuite

logger = logging.getLogger('confhor.verify')

DELTA_TOL = 1e-12
HORIZON_TOL = 1e-8
REGION_OFFSET = 1e-3
LIMIT_TOL = 1e-9
EULER_TOL = 1e-6
DRIFT_TOL = 1e-5
ISOPERIMETRIC_TOL = 1e-8
TRANSPORT_TOL = 1e-8
STAY_TOL = 1e-6
GRADIENT_SAMPLES = 2000
VALUE_TOL = 1e-5
SIGNIFICANT = 1e-6


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    measured: object
    expected: object
    detail: Optional[str] = None

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        text = f"[{status}] {self.suite}/{self.name}: measured {self.measured}, expected {self.expected}"
        return f"{text} ({self.detail})" if self.detail else text


def _delta_star_checks():
    rng = np.random.default_rng(0)
    directions = rng.normal(size=(100, 3))
    directions /= np.linalg.norm(directions, axis=1)[:, None]
    r = rng.uniform(0.5, 5.0, 100)
    xs = directions * r[:, None]
    kappa, (a, b, c) = 0.7, (2.0, 1.0, 0.5)
    cases = (
        ("reciprocal-r", ConformalFactorSpec.reciprocal_r(), np.full_like(r, 2.0)),
        ("reciprocal-r2", ConformalFactorSpec.reciprocal_r2(), np.full_like(r, 3.0)),
        ("gaussian", ConformalFactorSpec.gaussian(1.0, kappa), 1.0 + kappa * r),
        ("rational", ConformalFactorSpec.rational(a, b, c), (b + 3.0 * c * r * r) / (b + c * r * r)),
    )
    for name, spec, exact in cases:
        error = float(np.max(np.abs(delta_star(xs, spec) - exact)))
        yield CheckResult("remark33", name, error < DELTA_TOL, error, f"< {DELTA_TOL:g}")


def _regions_match(metric, node):
    X = node.X
    base = [node.rho] + list(node.angles)
    above = classify(metric, np.array([np.log(min(X + REGION_OFFSET, 1.0))] + base)).tag
    below_omega0 = X - REGION_OFFSET if X > REGION_OFFSET else 0.5 * X
    below = classify(metric, np.array([np.log(below_omega0)] + base)).tag
    return above is RegionTag.EXTERIOR and below is RegionTag.INTERIOR


def _profile_error(entry, rows, threads):
    profile = horizon_profile(entry.metric, rows, threads)
    solved = profile.ok
    closed = np.exp([entry.horizon_closed(np.asarray(node.rho), node.angles) for node in solved])
    error = float(np.max(np.abs(np.array([node.X for node in solved]) - closed))) if solved else float('inf')
    return profile, solved, error


def _horizon_checks(threads=None):
    for M in (0.5, 1.0, 2.0):
        entry = make_schwarzschild(M)
        profile, solved, error = _profile_error(entry, entry.horizon_grid(64), threads)
        yield CheckResult("horizons", f"schwarzschild-M{M:g}", len(solved) == 64 and error < HORIZON_TOL,
                          error, f"< {HORIZON_TOL:g} on 64 nodes", f"{len(solved)} nodes solved")
        mismatched = sum(not _regions_match(entry.metric, node) for node in solved)
        yield CheckResult("horizons", f"schwarzschild-M{M:g}-regions", mismatched == 0, mismatched, 0,
                          "Exterior above and Interior below at ω⁰ = X ± 1e-3")

    for M, Q in ((1.0, 2.0), (2.0, 1.0), (1.0, 1.0)):
        verdicts = {}
        for variant in ("default", "alternate"):
            entry = catalog("rn", M=M, Q=Q, compactifier=variant)
            _, solved, error = _profile_error(entry, entry.horizon_grid(32), threads)
            yield CheckResult("horizons", f"{entry.name}-{variant}", len(solved) == 32 and error < HORIZON_TOL,
                              error, f"< {HORIZON_TOL:g} on 32 nodes", f"{len(solved)} nodes solved")
            try:
                verdicts[variant] = verdict(entry, threads=threads).verdict
            except InconclusiveRefinement:
                verdicts[variant] = None
        yield CheckResult("horizons", f"rn-M{M:g}-Q{Q:g}-compactifier-invariance",
                          verdicts["default"] is not None and verdicts["default"] == verdicts["alternate"],
                          {k: getattr(v, 'value', None) for k, v in verdicts.items()}, "equal verdicts")

    yield from _stay_checks()


def _stay_checks():
    entry = catalog("schwarzschild")
    metric = entry.metric
    omega1, angles = 0.8, [0.5 * np.pi, 0.0]
    rho = float(metric.chart.rho(omega1))
    profile = horizon_profile(metric, np.array([[rho] + angles]))
    X = profile.height(omega1, angles)
    start = 0.5 * X

    def curve(s):
        return [omega1] + angles

    leaving = stay_criterion(metric, profile, curve, lambda s: np.array([1.0, 0.0, 0.0, 0.0]), start, 10.0)
    error = abs(leaving.exit_s - (X - start)) if leaving.exit_s is not None else float('inf')
    yield CheckResult("horizons", "stay-exit-parameter", error < STAY_TOL, error, f"< {STAY_TOL:g}",
                      f"exit at s = {leaving.exit_s}")
    staying = stay_criterion(metric, profile, curve, lambda s: np.array([-1.0, 0.0, 0.0, 0.0]), start, 10.0)
    yield CheckResult("horizons", "stay-nonnegative-energy", staying.stays, staying.stays, True,
                      "∇ₓm ≥ 0 along the curve, s_max = 10")


def _corner(entry):
    return (0.0,)


def _nowhere(entry):
    return ()


def _at_radius(radius):
    """ω¹ = h(radius) through the entry's own compactifier."""
    return lambda entry: (float(entry.chart.omega1(np.asarray(radius, dtype=float))),)


# (family, params, verdict, passageway ω¹ values); radii are r₊ = M + √(M² − Q²) or M + √(M² − a²), r* = M
VERDICT_CASES = (
    ("schwarzschild", {}, Verdict.NAKED, _corner),
    ("rn", {"M": 1.0, "Q": 2.0}, Verdict.NOT_NAKED, _nowhere),
    ("rn", {"M": 2.0, "Q": 1.0}, Verdict.NAKED, _at_radius(2.0 + np.sqrt(3.0))),
    ("rn", {"M": 1.0, "Q": 1.0}, Verdict.NAKED, _at_radius(1.0)),
    ("roberts", {"sigma": 0.1}, Verdict.NOT_NAKED, _nowhere),
    ("kerr", {"M": 1.0, "a": 0.5}, Verdict.NAKED, _at_radius(1.0 + np.sqrt(0.75))),
)


def limits_match(found, targets, tol=LIMIT_TOL):
    """Every found ω¹ sits on a target and every target is found."""
    def close(f, w):
        return abs(f - w) <= tol * max(1.0, abs(w))

    return all(any(close(f, w) for w in targets) for f in found) and \
        all(any(close(f, w) for f in found) for w in targets)


def _verdict_checks(threads=None):
    for name, params, expected, passageways in VERDICT_CASES:
        entry = catalog(name, **params)
        targets = passageways(entry)
        try:
            result = verdict(entry, threads=threads)
        except InconclusiveRefinement as e:
            yield CheckResult("verdicts", entry.name, False, "inconclusive", expected.value, str(e))
            continue
        found = [p.omega1 for p in result.limit_points]
        passed = result.verdict is expected and limits_match(found, targets)
        yield CheckResult("verdicts", entry.name, passed, f"{result.verdict.value} at ω¹ = {found}",
                          f"{expected.value} at ω¹ = {list(targets)}", "; ".join(result.diagnostics) or None)


def _penrose_checks(threads=None):
    entry = catalog("synthetic")
    grid = QuadratureGrid.for_chart(entry.chart)
    report = penrose_bound(entry, grid, threads=threads)
    yield CheckResult("penrose", "bound", report.holds, report.M_sq, f"> {report.rhs_bound:.10g}")
    yield CheckResult("penrose", "euler-straight", report.euler_residual_max < EULER_TOL,
                      report.euler_residual_max, f"< {EULER_TOL:g}")
    yield CheckResult("penrose", "conserved-integral-drift", report.conserved_integral_drift < DRIFT_TOL,
                      report.conserved_integral_drift, f"< {DRIFT_TOL:g}")
    yield CheckResult("penrose", "isoperimetric-endpoints", report.isoperimetric_mismatch < ISOPERIMETRIC_TOL,
                      report.isoperimetric_mismatch, f"< {ISOPERIMETRIC_TOL:g}")
    yield CheckResult("penrose", "isoperimetric-transport", report.isoperimetric_transport_gap < TRANSPORT_TOL,
                      report.isoperimetric_transport_gap, f"< {TRANSPORT_TOL:g}")
    yield CheckResult("penrose", "second-variation", report.second_variation_ok, report.second_variation_ok, True)
    yield CheckResult("penrose", "positivity", report.positivity_violations == 0,
                      report.positivity_violations, 0)

    family = DeformationFamily.from_horizon(entry, grid)
    residuals = [euler_residual(family.perturbed(0.1, seed), s, threads=threads)
                 for seed in range(5) for s in EULER_POSITIONS]
    yield CheckResult("penrose", "euler-perturbed", max(residuals) < EULER_TOL, max(residuals), f"< {EULER_TOL:g}")
    coarse = euler_residual(family, 0.0, step=1e-2, threads=threads)
    fine = euler_residual(family, 0.0, step=5e-3, threads=threads)
    yield CheckResult("penrose", "euler-step-halving", fine <= 0.5 * coarse, fine / coarse, "≤ 0.5")

    doubled = penrose_bound(entry, grid.doubled(), threads=threads)
    yield CheckResult("penrose", "bound-grid-doubling", doubled.holds == report.holds,
                      doubled.holds, report.holds, f"M_sq {doubled.M_sq:.10g}, rhs {doubled.rhs_bound:.10g}")
    swapped = penrose_bound(catalog("synthetic", compactifier="alternate"), threads=threads)
    yield CheckResult("penrose", "bound-compactifier-swap", swapped.holds == report.holds,
                      swapped.holds, report.holds, f"M_sq {swapped.M_sq:.10g}, rhs {swapped.rhs_bound:.10g}")


GRADIENT_CASES = (
    ("schwarzschild", {}),
    ("rn", {"M": 1.0, "Q": 2.0}),
    ("rn", {"M": 2.0, "Q": 1.0}),
    ("roberts", {"sigma": 0.1}),
    ("kerr", {"M": 1.0, "a": 0.5}),
    ("synthetic", {}),
)


def _gradient_samples(entry, rng, count):
    lo, hi = entry.rho_span
    return np.column_stack([rng.uniform(-3.0, -0.05, count), rng.uniform(lo, hi, count),
                            np.full(count, entry.angles[0]), np.full(count, entry.angles[1])])


def _gradient_checks():
    rng = np.random.default_rng(1)
    for name, params in GRADIENT_CASES:
        entry = catalog(name, **params)
        y = _gradient_samples(entry, rng, GRADIENT_SAMPLES)
        decay = np.exp(-y[:, 0])
        field_ = ScalarField(entry.m_closed, chart_domain(entry.chart), closed_form=entry.dual_ready,
                             name=f"{entry.name}-m")
        estimates = {"fd": derive(field_, y, 0, DerivativeConfig(DerivativeScheme.CENTRAL)) * decay}
        if entry.dual_ready:
            estimates["dual"] = derive(field_, y, 0, DerivativeConfig(DerivativeScheme.DUAL)) * decay
        if entry.dm_closed is not None:
            estimates["closed"] = np.asarray(entry.dm_closed(y), dtype=float)
        reference = estimates.get("dual", estimates["fd"])
        significant = np.abs(reference) > SIGNIFICANT * gradient_scale(entry.metric, y)
        names = list(estimates)
        disagreements = sum(int(np.sum(significant & (np.sign(estimates[p]) != np.sign(estimates[q]))))
                            for i, p in enumerate(names) for q in names[i + 1:])
        yield CheckResult("gradients", f"{entry.name}-signs", disagreements == 0, disagreements, 0,
                          f"{'/'.join(names)} on {int(significant.sum())} samples")
        if "dual" in estimates:
            relative = np.abs(estimates["fd"] - estimates["dual"])[significant] / np.abs(reference[significant])
            worst = float(relative.max()) if relative.size else 0.0
            yield CheckResult("gradients", f"{entry.name}-fd-vs-dual", worst < VALUE_TOL, worst, f"< {VALUE_TOL:g}")

    entry = catalog("synthetic")
    y = _gradient_samples(entry, rng, 200)
    disagreements = 0
    for point in y:
        sample = mass_temporal_gauge(entry.metric, point)
        fd = sample.diagnostics["dm_dt_fd"]
        if abs(fd) > SIGNIFICANT * float(gradient_scale(entry.metric, point)):
            disagreements += int(np.sign(fd) != np.sign(sample.dm_dt))
    yield CheckResult("gradients", "temporal-gauge-closed-form-signs", disagreements == 0, disagreements, 0,
                      "extrinsic-curvature form against finite differences")


SUITES = {
    VerifySuite.REMARK33: lambda threads: _delta_star_checks(),
    VerifySuite.HORIZONS: _horizon_checks,
    VerifySuite.VERDICTS: _verdict_checks,
    VerifySuite.PENROSE: _penrose_checks,
    VerifySuite.GRADIENTS: lambda threads: _gradient_checks(),
}


def run_suite(name, threads=None):
    """Run one suite (or all of them, in declaration order) and return its checks."""
    suite = name if isinstance(name, VerifySuite) else VerifySuite.from_input(name)
    selected = [s for s in SUITES if suite is VerifySuite.ALL or s is suite]
    results = []
    for current in selected:
        logger.info(f"Running suite {current.value}")
        try:
            for check in SUITES[current](threads):
                (logger.info if check.passed else logger.warning)(check.line())
                results.append(check)
        except ConfhorError as e:
            logger.error(f"Suite {current.value} aborted: {e}", exc_info=True)
            results.append(CheckResult(current.value, "aborted", False, type(e).__name__, "completion", str(e)))
    passed = sum(check.passed for check in results)
    logger.info(f"{passed}/{len(results)} checks passed")
    return results
