"""Mass function, region classification, horizons and the black-hole criteria."""
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy import integrate

from lib.compactification import CompactPoint
from lib.errors import (ChartError, ConfhorError, Degenerate, HypothesisViolated, InconclusiveRefinement,
                        LinearAlgebraError, NoSignChange, NonCausalZ, NonConvergent, NotTemporalGauge)
from lib.numerics import bisect_vectorized, brent_root, fit_power_law, parallel_map
from lib.tensor_core import (DerivativeConfig, ScalarField, SymMatrix, derive, invert_batch, invert_symmetric,
                             richardson_table)
from lib.types import MassSource, RegionTag, Verdict

logger = logging.getLogger('confhor.mass')

REGION_TOL = 1e-9
GRADIENT_TOL = 1e-6
ROOT_TOL = 1e-10
DEPTH_CAP = 1e250
EDGE_CFG = DerivativeConfig(one_sided=True)


@dataclass(frozen=True)
class MassSample:
    m: float
    dm_dt: float
    grad: Tuple[float, float, float, float]
    source: MassSource
    diagnostics: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class RegionClass:
    tag: RegionTag
    m: float
    dm_dt: float
    tol: float
    dtol: float


@dataclass(frozen=True)
class ExtrinsicCurvature:
    K: np.ndarray
    trK: float
    K_grad: float
    tau: float


# Evaluation helpers on internal coordinates y = (L, ρ, a², a³)

def _as_y(metric, point):
    if isinstance(point, CompactPoint):
        return metric.chart.coords(point)
    return np.asarray(point, dtype=float)


def mass_values(metric, y, strict=False):
    """m = G^{LL} of h = (ω¹)²g on a stack of internal points; NaN where h cannot be inverted."""
    h = metric.conformal_y(np.asarray(y, dtype=float))
    return invert_batch(h, strict=strict)[..., 0, 0]


def inverse_metric(metric, y, strict=False):
    return invert_batch(metric.conformal_y(np.asarray(y, dtype=float)), strict=strict)


def mass_field(metric, name="m"):
    """The generic mass function as a ScalarField over internal coordinates."""
    return ScalarField(lambda y: mass_values(metric, y), chart_domain(metric.chart), name=name)


def chart_domain(chart):
    return [(None, None), tuple(chart.rho_bounds)] + list(chart.angle_box)


def temporal_gauge_field(metric):
    return ScalarField(lambda p: temporal_gauge_mass(metric, p), chart_domain(metric.chart), name="m_tg")


def omega_gradient(metric, field_, y, cfg=None):
    """(∂/∂ω⁰, ∂/∂ω¹, ∂/∂ω², ∂/∂ω³) of a field over internal coordinates."""
    y = np.asarray(y, dtype=float)
    raw = [derive(field_, y, axis, cfg) for axis in range(4)]
    scale = metric.chart.y_to_omega(y)
    return np.stack([raw[a] * scale[..., a] for a in range(4)], axis=-1)


def omega_inverse_metric(metric, y, strict=True):
    """G in the coordinate basis (dω⁰, dω¹, dωᵃ)."""
    y = np.asarray(y, dtype=float)
    g_y = inverse_metric(metric, y, strict=strict)
    scale = 1.0 / metric.chart.y_to_omega(y)
    return g_y * scale[..., :, None] * scale[..., None, :]


def slope_scale(metric, y):
    """Local scale of ∂m/∂L: |m(ω⁰=1)|·ω¹·√|G¹¹|."""
    y = np.asarray(y, dtype=float)
    y_top = y.copy()
    y_top[..., 0] = 0.0
    m_top = np.abs(mass_values(metric, y_top))
    g = omega_inverse_metric(metric, y, strict=False)
    omega1 = metric.chart.omega1(y[..., 1])
    return m_top * omega1 * np.sqrt(np.abs(g[..., 1, 1]))


def gradient_scale(metric, y):
    """Local scale of ∂m/∂ω⁰, e^{−L} times slope_scale."""
    y = np.asarray(y, dtype=float)
    return np.exp(-y[..., 0]) * slope_scale(metric, y)


# Mass samples

def mass_generic(metric, point, cfg=None):
    y = _as_y(metric, point)
    h = SymMatrix.from_full(metric.conformal_y(y))
    g = invert_symmetric(h)
    grad = omega_gradient(metric, mass_field(metric), y, cfg)
    chart = metric.chart
    cross = g[0, 1] * chart.domega1(y[1]) / chart.omega1(y[1])
    return MassSample(float(g[0, 0]), float(grad[0]), tuple(float(v) for v in grad), MassSource.GENERIC,
                      {"cross_term": float(cross)})


def _gauge(metric):
    gauge = getattr(metric, 'temporal_gauge', None)
    if gauge is None:
        raise NotTemporalGauge(f"{getattr(metric, 'name', type(metric).__name__)} is not in temporal gauge")
    return gauge


def _gauge_terms(metric, y):
    gauge = _gauge(metric)
    y = np.asarray(y, dtype=float)
    x = metric.chart.to_x(y)
    t, xs = x[..., 0], x[..., 1:]
    density = gauge.density(t, xs)
    spatial_inv = np.linalg.inv(gauge.spatial(t, xs))
    grad = gauge.omega_gradient(xs)
    q = np.einsum('...i,...ij,...j->...', grad, spatial_inv, grad)
    omega1 = gauge.omega(xs)
    return gauge, x, density, spatial_inv, grad, q, omega1


def temporal_gauge_mass(metric, y):
    """m = (1/(ω¹)²)(−1/|ḡ| + (ln ω⁰)² q/(ω¹)²), q = ḡⁱʲ∂ᵢω¹∂ⱼω¹, vectorized."""
    y = np.asarray(y, dtype=float)
    _, _, density, _, _, q, omega1 = _gauge_terms(metric, y)
    log_omega0 = y[..., 0]
    return (-1.0 / density + log_omega0**2 * q / omega1**2) / omega1**2


def mass_temporal_gauge(metric, point, cfg=None):
    y = _as_y(metric, point)
    _gauge(metric)
    chart = metric.chart
    grad = omega_gradient(metric, temporal_gauge_field(metric), y, cfg)
    curvature = extrinsic_curvature(metric, chart.to_x(y))
    return MassSample(float(temporal_gauge_mass(metric, y)), float(dm_dt_closed_form(metric, curvature, y)),
                      tuple(float(v) for v in grad), MassSource.TEMPORAL_GAUGE,
                      {"dm_dt_fd": float(grad[0])})


def _spatial_rate(gauge, t, xs, cfg):
    if gauge.spatial_rate is not None:
        return gauge.spatial_rate(t, xs)
    cfg = cfg or DerivativeConfig()
    step = cfg.base_step * np.maximum(1.0, np.abs(t))
    estimates = []
    for k in range(cfg.richardson_levels + 1):
        s = step / 2.0**k
        estimates.append((gauge.spatial(t + s, xs) - gauge.spatial(t - s, xs)) / (2.0 * np.asarray(s)[..., None, None]))
    return richardson_table(estimates, 4.0)


def extrinsic_curvature(metric, x, cfg=None):
    """K_ij = −∂₀ḡ_ij/(2τ) with τ = √|ḡ|/Ω, plus trK and K(dω¹, dω¹)."""
    gauge = _gauge(metric)
    x = np.asarray(x, dtype=float)
    t, xs = x[..., 0], x[..., 1:]
    tau = np.sqrt(gauge.density(t, xs)) / gauge.omega(xs)
    rate = _spatial_rate(gauge, t, xs, cfg)
    K = -rate / (2.0 * np.asarray(tau)[..., None, None])
    spatial_inv = np.linalg.inv(gauge.spatial(t, xs))
    trK = np.einsum('...ij,...ji->...', spatial_inv, K)
    grad = gauge.omega_gradient(xs)
    up = np.einsum('...i,...ij->...j', grad, spatial_inv)
    K_grad = np.einsum('...i,...ij,...j->...', up, K, up)
    if np.ndim(trK) == 0:
        return ExtrinsicCurvature(K, float(trK), float(K_grad), float(tau))
    return ExtrinsicCurvature(K, trK, K_grad, tau)


def _dm_bracket(metric, curvature, y):
    _, _, density, _, _, q, omega1 = _gauge_terms(metric, y)
    log_omega0 = np.asarray(y, dtype=float)[..., 0]
    tau, trK, K_grad = curvature.tau, curvature.trK, curvature.K_grad
    return (2.0 * omega1 * tau * trK / density
            + 2.0 * log_omega0 / omega1**2 * (q - log_omega0 * omega1 * tau * K_grad)), omega1


def dm_dt_closed_form(metric, curvature, point):
    """∂m/∂ω⁰ in temporal gauge from K, trK and K(dω¹, dω¹)."""
    y = _as_y(metric, point)
    bracket, omega1 = _dm_bracket(metric, curvature, y)
    value = bracket * np.exp(-y[..., 0]) / omega1**2
    return float(value) if np.ndim(value) == 0 else value


def calibrate_tau(metric, samples, cfg=None):
    """Median ratio of the finite-difference ∂m/∂ω⁰ to the closed form over samples."""
    ratios = []
    for y in np.asarray(samples, dtype=float):
        sample = mass_temporal_gauge(metric, y, cfg)
        if abs(sample.dm_dt) > 0:
            ratios.append(sample.diagnostics["dm_dt_fd"] / sample.dm_dt)
    return {"tau_normalization": "sqrt(|gbar|)/Omega",
            "median_ratio": float(np.median(ratios)) if ratios else float('nan'),
            "samples": len(ratios)}


# Classification and horizons

def _local_scale(metric, y):
    y = np.asarray(y, dtype=float)
    delta = 1e-3 * max(1.0, abs(y[0]))
    ys = np.stack([y, y + [delta, 0, 0, 0], y - [delta, 0, 0, 0]])
    return float(np.nanmax(np.abs(mass_values(metric, ys))))


def classify(metric, point, sample=None):
    y = _as_y(metric, point)
    sample = sample or mass_generic(metric, y)
    tol = REGION_TOL * _local_scale(metric, y)
    dtol = GRADIENT_TOL * float(gradient_scale(metric, y))
    if sample.m < -tol:
        tag = RegionTag.EXTERIOR
    elif sample.m > tol:
        tag = RegionTag.INTERIOR
    elif abs(sample.dm_dt) <= dtol:
        tag = RegionTag.HORIZON_APPARENT
    else:
        tag = RegionTag.HORIZON_ACTUAL
    return RegionClass(tag, sample.m, sample.dm_dt, tol, dtol)


def horizon_root(metric, rho, angles, cap=DEPTH_CAP, mass=None):
    """L = ln X of the horizon on the ω⁰-ray through (ρ, angles); mass replaces the generic m."""
    base = np.array([0.0, rho] + list(angles), dtype=float)

    def m_of(log_omega0):
        y = base.copy()
        y[0] = log_omega0
        value = float(mass(y) if mass is not None else mass_values(metric, y))
        if not np.isfinite(value):
            raise NoSignChange(f"non-finite mass at L = {log_omega0:.3e}, ρ = {rho}")
        return value

    top = m_of(0.0)
    if top >= 0.0:
        raise NoSignChange(f"m(ω⁰=1) = {top:.3e} is not exterior at ρ = {rho}")
    lo, hi = -1.0, 0.0
    while m_of(lo) <= 0.0:
        hi = lo
        lo *= 2.0
        if abs(lo) > cap:
            raise NoSignChange(f"no horizon above ln ω⁰ = -{cap:.1e} at ρ = {rho}")
    return brent_root(m_of, lo, hi)


def horizon_roots(metric, y_spatial, cap=DEPTH_CAP, mass=None):
    """Vectorized horizon heights L for rows (ρ, a², a³); NaN where no sign change.

    mass, when given, replaces the generic m (a closed form on y arrays).
    """
    y_spatial = np.asarray(y_spatial, dtype=float)

    def m_of(log_omega0):
        y = np.concatenate([np.asarray(log_omega0, dtype=float)[..., None], y_spatial], axis=-1)
        return mass(y) if mass is not None else mass_values(metric, y)

    shape = y_spatial.shape[:-1]
    hi = np.zeros(shape)
    lo = -np.ones(shape)
    top = m_of(hi)
    active = np.isfinite(top) & (top < 0)
    for _ in range(int(np.log2(cap)) + 2):
        values = m_of(lo)
        grow = active & np.isfinite(values) & (values <= 0) & (np.abs(lo) <= cap)
        if not np.any(grow):
            break
        hi = np.where(grow, lo, hi)
        lo = np.where(grow, 2.0 * lo, lo)
    roots = bisect_vectorized(m_of, lo, hi)
    return np.where(active, roots, np.nan)


@dataclass(frozen=True)
class HorizonNode:
    rho: float
    omega1: float
    angles: Tuple[float, ...]
    log_X: float
    dm_dt: float
    null_residual: float
    tag: Optional[RegionTag]
    status: str = "ok"

    @property
    def X(self):
        return float(np.exp(self.log_X))


@dataclass(frozen=True)
class HorizonProfile:
    nodes: Tuple[HorizonNode, ...]
    metric: object = field(compare=False, repr=False)

    @property
    def ok(self):
        return [n for n in self.nodes if n.status in ("ok", "degenerate")]

    @property
    def X(self):
        return np.array([n.X for n in self.ok])

    @property
    def log_X(self):
        return np.array([n.log_X for n in self.ok])

    @property
    def omega1(self):
        return np.array([n.omega1 for n in self.ok])

    def height(self, omega1, angles):
        """X̃ at an arbitrary spatial point, solved on demand."""
        return float(np.exp(self.log_height(omega1, angles)))

    def log_height(self, omega1, angles):
        rho = float(self.metric.chart.rho(omega1))
        return horizon_root(self.metric, rho, angles)


def _root_node(metric, rho, angles):
    chart = metric.chart
    omega1 = float(chart.omega1(np.asarray(rho)))
    try:
        log_x = horizon_root(metric, rho, angles)
    except NoSignChange as e:
        logger.warning(f"Horizon node skipped at ρ = {rho:.6g}: {e}")
        return HorizonNode(rho, omega1, tuple(angles), float('nan'), float('nan'), float('nan'), None, "no-sign-change")
    except ChartError as e:
        logger.warning(f"Horizon node outside chart at ρ = {rho:.6g}: {e}")
        return HorizonNode(rho, omega1, tuple(angles), float('nan'), float('nan'), float('nan'), None, "chart-invalid")
    y = np.array([log_x, rho] + list(angles))
    field_ = mass_field(metric)
    raw = np.array([float(derive(field_, y, axis, EDGE_CFG)) for axis in range(4)])
    g = inverse_metric(metric, y)
    # ∂L/∂yⁱ on the root surface; the ω-basis residual is X² times the y-basis one
    slopes = -raw[1:] / raw[0] if raw[0] != 0 else np.zeros(3)
    null = float(np.exp(2.0 * log_x) * (-2.0 * g[0, 1:] @ slopes + slopes @ g[1:, 1:] @ slopes))
    with np.errstate(over='ignore'):
        dm_dt = float(raw[0] * np.exp(-log_x))
    if abs(raw[0]) <= GRADIENT_TOL * float(slope_scale(metric, y)):
        return HorizonNode(rho, omega1, tuple(angles), float(log_x), dm_dt, null, RegionTag.HORIZON_APPARENT, "degenerate")
    return HorizonNode(rho, omega1, tuple(angles), float(log_x), dm_dt, null, RegionTag.HORIZON_ACTUAL)


def horizon_profile(metric, grid, threads=None):
    """Horizon heights on a grid of rows (ρ, a², a³); see HorizonProfile.

    NoSignChange and chart-invalid nodes are recorded with their status and
    skipped; degenerate roots (|∂m/∂ω⁰| ≤ dtol) are kept as apparent candidates.
    """
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    nodes = parallel_map(lambda row: _root_node(metric, float(row[0]), tuple(row[1:])), grid, threads)
    profile = HorizonProfile(tuple(nodes), metric)
    skipped = len(nodes) - len(profile.ok)
    logger.info(f"Horizon profile: {len(profile.ok)} nodes solved, {skipped} skipped")
    return profile


def require_nondegenerate(profile):
    for node in profile.nodes:
        if node.status == "degenerate":
            raise Degenerate(f"|∂m/∂ω⁰| below dtol at ω¹ = {node.omega1:.6g}", node.log_X)


def eikonal_residual(metric, f, point, cfg=None):
    """(∂f/∂ω⁰)·G^{αβ}∂_αf ∂_βf for a field f over ω = (ω⁰, ω¹, ω², ω³)."""
    y = _as_y(metric, point)
    omega = np.array([np.exp(y[0]), float(metric.chart.omega1(y[1]))] + list(y[2:]))
    df = np.array([float(derive(f, omega, axis, cfg)) for axis in range(4)])
    g = omega_inverse_metric(metric, y)
    return float(df[0] * (df @ g @ df))


# Naked singularities

@dataclass(frozen=True)
class ScanEdge:
    """A chart edge approached along ρ_k = limit + (reference − limit)·2^{−k}, or ρ_k = reference·2^k at infinity."""
    label: str
    limit: Callable
    reference: Callable

    def rho(self, k, angles):
        limit, reference = self.limit(angles), self.reference(angles)
        if np.isinf(limit):
            return reference * 2.0**k
        return limit + (reference - limit) * 2.0**-k

    def distance(self, k, angles):
        limit = self.limit(angles)
        rho = self.rho(k, angles)
        return 1.0 / rho if np.isinf(limit) else abs(rho - limit)


@dataclass(frozen=True)
class BoundaryScan:
    """Edges and refinement settings of a naked-singularity scan.

    mass and slope, when given, are closed forms on y arrays that replace the
    generic m and the normalized slope ν̂ at the horizon roots.
    """
    edges: Tuple[ScanEdge, ...]
    angles: Tuple[Tuple[float, float], ...] = ((0.5 * np.pi, 0.0),)
    depth: int = 40
    dtol: float = GRADIENT_TOL
    fit_points: int = 8
    decay_exponent: float = 0.25
    flat_exponent: float = 0.05
    mass: Optional[Callable] = field(default=None, compare=False)
    slope: Optional[Callable] = field(default=None, compare=False)


@dataclass(frozen=True)
class EdgeTrace:
    label: str
    angles: Tuple[float, ...]
    omega1_limit: float
    distances: Tuple[float, ...]
    slopes: Tuple[float, ...]
    log_roots: Tuple[float, ...]
    exponent: float
    outcome: str


@dataclass(frozen=True)
class NakedVerdict:
    verdict: Verdict
    limit_points: Tuple[CompactPoint, ...]
    traces: Tuple[EdgeTrace, ...] = ()
    diagnostics: Tuple[str, ...] = ()


def normalized_slope(metric, rho, angles, log_root):
    """ν̂ = ∂_L m / (|m(ω⁰=1)|·ω¹·√G¹¹) at a horizon root; minus twice the lapse for the catalog."""
    y = np.array([log_root, rho] + list(angles))
    dm = float(derive(mass_field(metric), y, 0))
    return dm / float(slope_scale(metric, y))


def _scan_edge(metric, edge, angles, scan):
    distances, slopes, roots = [], [], []
    for k in range(scan.depth + 1):
        rho = edge.rho(k, angles)
        try:
            log_root = horizon_root(metric, rho, angles, mass=scan.mass)
            if scan.slope is not None:
                slope = float(scan.slope(np.array([log_root, rho] + list(angles))))
            else:
                slope = normalized_slope(metric, rho, angles, log_root)
        except (ConfhorError, FloatingPointError) as e:
            logger.info(f"{edge.label} scan stopped at k = {k}: {e}")
            break
        if not np.isfinite(slope):
            break
        distances.append(edge.distance(k, angles))
        slopes.append(slope)
        roots.append(log_root)
        if abs(slope) < scan.dtol:
            break
    limit = edge.limit(angles)
    omega1_limit = 0.0 if np.isinf(limit) else float(metric.chart.omega1(np.asarray(limit)))
    tail = slice(-scan.fit_points, None)
    exponent = fit_power_law(distances[tail], slopes[tail]) if len(slopes) >= 2 else float('nan')
    magnitudes = np.abs(slopes[tail])
    if slopes and abs(slopes[-1]) < scan.dtol:
        outcome = "decays"
    elif len(slopes) < 3:
        outcome = "inconclusive"
    elif exponent >= scan.decay_exponent and np.all(np.diff(magnitudes) < 0):
        outcome = "decays"
    elif exponent <= scan.flat_exponent:
        outcome = "excluded"
    else:
        outcome = "inconclusive"
    return EdgeTrace(edge.label, tuple(angles), omega1_limit, tuple(distances), tuple(slopes), tuple(roots),
                     float(exponent), outcome)


def _reaches_corner(trace):
    roots = trace.log_roots
    return trace.omega1_limit == 0.0 and len(roots) >= 2 and roots[-1] < roots[0]


def apparent_closure(metric, scan, threads=None):
    """Limit points of the apparent horizon found by refinement toward the chart edges.

    A decaying edge contributes the boundary point (0, ω¹_limit, angles); along
    an edge with ω¹ → 0 that point is the corner (0, 0) the horizon runs into.
    A corner reached without decay is kept as a diagnostic only.
    """
    jobs = [(edge, angles) for angles in scan.angles for edge in scan.edges]
    traces = parallel_map(lambda job: _scan_edge(metric, job[0], job[1], scan), jobs, threads)
    limit_points, diagnostics = [], []
    for trace in traces:
        logger.info(f"Edge {trace.label} at angles {trace.angles}: {trace.outcome} (exponent {trace.exponent:.3f})")
        if trace.outcome == "decays":
            limit_points.append(CompactPoint(float('-inf'), trace.omega1_limit, trace.angles))
        elif _reaches_corner(trace):
            diagnostics.append(f"horizon reaches the corner (0, 0) along {trace.label} at angles {trace.angles} "
                               f"without slope decay ({trace.outcome})")
    inconclusive = [t for t in traces if t.outcome == "inconclusive"]
    if inconclusive and not limit_points:
        raise InconclusiveRefinement(
            f"{len(inconclusive)} edge scans neither confirmed nor excluded decay", list(inconclusive))
    verdict = Verdict.NAKED if limit_points else Verdict.NOT_NAKED
    return NakedVerdict(verdict, tuple(limit_points), tuple(traces), tuple(diagnostics))


# Conditions along samples

@dataclass(frozen=True)
class ConditionReport:
    trK: np.ndarray
    K_grad: np.ndarray
    strict_trace: np.ndarray
    general: np.ndarray
    dm_dt_fd: np.ndarray

    @property
    def strict_fraction(self):
        return float(np.mean(self.strict_trace))

    @property
    def general_fraction(self):
        return float(np.mean(self.general))

    @property
    def sign_agreement(self):
        """Fraction of samples where the closed-form bracket and the FD derivative agree in sign."""
        return float(np.mean(self.general == (self.dm_dt_fd < 0)))


def curvature_conditions(metric, samples, cfg=None):
    """Per-sample trK < 0 with K(dω¹, dω¹) ≥ 0, and the full monotonicity inequality."""
    _gauge(metric)
    samples = np.asarray(samples, dtype=float)
    x = metric.chart.to_x(samples)
    curvature = extrinsic_curvature(metric, x, cfg)
    bracket, _ = _dm_bracket(metric, curvature, samples)
    dm_fd = derive(temporal_gauge_field(metric), samples, 0, cfg) * np.exp(-samples[..., 0])
    trK = np.atleast_1d(curvature.trK)
    K_grad = np.atleast_1d(curvature.K_grad)
    return ConditionReport(trK, K_grad, (trK < 0) & (K_grad >= 0), np.atleast_1d(bracket < 0), np.atleast_1d(dm_fd))


def killing_residual(metric, point, cfg=None):
    """max |∂h_{μν}/∂ω⁰| in the coordinate ω basis."""
    y = _as_y(metric, point)
    cfg = cfg or DerivativeConfig()
    step = cfg.base_step * max(1.0, abs(y[0]))
    estimates = []
    for k in range(cfg.richardson_levels + 1):
        s = step / 2.0**k
        up, down = y.copy(), y.copy()
        up[0] += s
        down[0] -= s
        h_up = metric.conformal_omega(up)
        h_down = metric.conformal_omega(down)
        estimates.append((h_up - h_down) / (2.0 * s))
    rate = richardson_table(estimates, 4.0) * np.exp(-y[0])
    return float(np.max(np.abs(rate)))


def nabla_x(Z, grad):
    """∇ₓm = Z⁰∂₀m − Σᵢ Zⁱ∂ᵢm together with the (2Z⁰∇₀ − ∇_Z)m form."""
    Z = np.asarray(Z, dtype=float)
    grad = np.asarray(grad, dtype=float)
    direct = Z[..., 0] * grad[..., 0] - np.sum(Z[..., 1:] * grad[..., 1:], axis=-1)
    covariant = 2.0 * Z[..., 0] * grad[..., 0] - np.sum(Z * grad, axis=-1)
    return direct, covariant


@dataclass(frozen=True)
class StayResult:
    stays: bool
    exit_s: Optional[float]
    s: np.ndarray
    margin: np.ndarray
    identity_gap: float


def stay_criterion(metric, profile, curve, tangent, omega0_start, s_max, rtol=1e-8):
    """Margin ω⁰₀ − X̃(ωⁱ₀) + ∫₀ˢ ∇ₓm/∂₀m along a curve s ↦ ωⁱ(s) with tangent Z(s)."""
    field_ = mass_field(metric)
    gaps = []

    def integrand(s, _):
        omega1, *angles = curve(s)
        rho = float(metric.chart.rho(omega1))
        y = np.array([horizon_root(metric, rho, angles), rho] + list(angles))
        grad = omega_gradient(metric, field_, y)
        dtol = GRADIENT_TOL * float(gradient_scale(metric, y))
        if grad[0] >= -dtol:
            raise HypothesisViolated(f"∂m/∂ω⁰ = {grad[0]:.3e} is not negative on the horizon at s = {s:.6g}")
        direct, covariant = nabla_x(tangent(s), grad)
        gaps.append(abs(direct - covariant))
        return [direct / grad[0]]

    omega1, *angles = curve(0.0)
    start = omega0_start - profile.height(omega1, angles)

    def leaves(s, integral):
        return start + integral[0]
    leaves.terminal = True
    leaves.direction = 1.0

    solution = integrate.solve_ivp(integrand, (0.0, s_max), [0.0], method="RK45", rtol=rtol, atol=1e-12,
                                   events=leaves)
    if solution.status == -1:
        raise NonConvergent(f"Stay integration failed: {solution.message}")
    s_exit = float(solution.t_events[0][0]) if solution.t_events[0].size else None
    margin = start + solution.y[0]
    gap = float(max(gaps)) if gaps else 0.0
    logger.debug(f"Stay integration: {solution.nfev} evaluations, exit at {s_exit}")
    return StayResult(s_exit is None, s_exit, solution.t, margin, gap)


@dataclass(frozen=True)
class EnergyReport:
    values: np.ndarray
    minimum: float
    strict_trace_holds: Optional[bool]

    @property
    def black_hole_exists(self):
        return bool(self.minimum >= 0 and self.strict_trace_holds)


def energy_condition(metric, Z_field, samples, causal_tol=1e-10):
    """∇ₓm over samples for a vector field Z (ω coordinate basis); raises NonCausalZ on spacelike Z."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    field_ = mass_field(metric)
    values = []
    for y in samples:
        Z = np.asarray(Z_field(y), dtype=float)
        h = metric.conformal_omega(y)
        norm = float(Z @ h @ Z)
        if norm > causal_tol * float(np.abs(h).max() * (Z @ Z)):
            raise NonCausalZ(f"h(Z, Z) = {norm:.3e} > 0 at {y.tolist()}")
        grad = omega_gradient(metric, field_, y)
        values.append(nabla_x(Z, grad)[0])
    values = np.array(values, dtype=float)
    strict = None
    if getattr(metric, 'temporal_gauge', None) is not None:
        strict = bool(np.all(curvature_conditions(metric, samples).strict_trace))
    return EnergyReport(values, float(values.min()), strict)


def causal_cone(metric, y, directions=26, radii=(0.0, 0.5, 1.0)):
    """Future-directed causal vectors at y (ω coordinate basis) from an orthonormal frame of h."""
    h = metric.conformal_omega(np.asarray(y, dtype=float))
    eigenvalues, vectors = np.linalg.eigh(h)
    time_index = int(np.argmin(eigenvalues))
    if eigenvalues[time_index] >= 0:
        raise NonCausalZ(f"no timelike direction at {np.asarray(y).tolist()}")
    e0 = vectors[:, time_index] / np.sqrt(-eigenvalues[time_index])
    # future means x⁰ increasing, i.e. ω⁰ decreasing
    if e0[0] > 0:
        e0 = -e0
    spatial = [vectors[:, i] / np.sqrt(eigenvalues[i]) for i in range(4) if i != time_index]
    golden = np.pi * (3.0 - np.sqrt(5.0))
    cone = []
    for j in range(directions):
        z = 1.0 - 2.0 * (j + 0.5) / directions
        rad = np.sqrt(1.0 - z * z)
        n = (rad * np.cos(golden * j), rad * np.sin(golden * j), z)
        for radius in radii:
            cone.append(e0 + radius * sum(c * v for c, v in zip(n, spatial)))
    return np.array(cone)


def causal_cone_minimum(metric, samples):
    """Brute-force minimum of ∇ₓm over a discretized causal cone at each sample."""
    field_ = mass_field(metric)
    minimum = float('inf')
    for y in np.atleast_2d(np.asarray(samples, dtype=float)):
        grad = omega_gradient(metric, field_, y)
        values = nabla_x(causal_cone(metric, y), grad)[0]
        minimum = min(minimum, float(values.min()))
    return minimum


def divergence_threshold(metric, rho, angles, bound, cap=DEPTH_CAP):
    """ln ω⁰ below which m exceeds bound on the ray through (ρ, angles), with a monotonicity check."""
    base = np.array([0.0, rho] + list(angles), dtype=float)

    def m_of(log_omega0):
        y = base.copy()
        y[0] = log_omega0
        return float(mass_values(metric, y))

    lo = -1.0
    while m_of(lo) <= bound:
        lo *= 2.0
        if abs(lo) > cap:
            raise NoSignChange(f"m stays below {bound} down to ln ω⁰ = -{cap:.1e}")
    threshold = brent_root(lambda L: m_of(L) - bound, lo, lo / 2.0 if m_of(lo / 2.0) <= bound else 0.0)
    probe = np.linspace(2.0 * threshold, threshold, 16)
    values = np.array([m_of(L) for L in probe])
    if np.any(np.diff(values) > 0) or np.any(values < bound * (1 - 1e-9)):
        raise NoSignChange(f"m is not monotone below ln ω⁰ = {threshold:.6g}")
    return threshold


def mass_grid(metric, log_omega0, grid):
    """Generic m on every (L, ρ, a², a³) combination of L-values and spatial rows."""
    L = np.asarray(log_omega0, dtype=float)
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    y = np.concatenate([np.broadcast_to(L[:, None, None], (len(L), len(grid), 1)),
                        np.broadcast_to(grid[None], (len(L),) + grid.shape)], axis=-1)
    return mass_values(metric, y)
