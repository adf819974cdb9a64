"""Catalog of exact solutions: charts, closed-form masses, horizon heights and expected verdicts."""
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Tuple

import numpy as np

from lib.compactification import (ClosedFormMetric, MetricSpec, OmegaChart, PulledBackMetric, RadialChart,
                                  RadialCompactifier, TemporalGauge)
from lib.errors import BranchMismatch, InvalidSigma, NoSignChange
from lib.mass_geometry import BoundaryScan, ScanEdge, apparent_closure, mass_values
from lib.numerics import brent_root
from lib.tensor_core import SymMatrix
from lib.types import CatalogId, MassSource, Verdict

logger = logging.getLogger('confhor.catalog')

EXTREMAL_TOL = 1e-12
ERGO_TOL = 1e-12
ROBERTS_EPS_R = 1e-6
EQUATOR = (0.5 * np.pi, 0.0)

__all__ = ["RadialCompactifier", "CatalogEntry", "ExpectedVerdict", "make_schwarzschild",
           "make_reissner_nordstrom", "make_roberts", "make_kerr", "make_synthetic_collapse",
           "stationary_schwarzschild", "kerr_boyer_lindquist", "kerr_bl_mass", "mass_ratio_grid", "catalog",
           "verdict"]


@dataclass(frozen=True)
class ExpectedVerdict:
    verdict: Verdict
    limit_omega1: Tuple[float, ...] = ()
    note: str = ""


@dataclass(frozen=True)
class CatalogEntry:
    """One exact solution on its compact chart.

    metric evaluates h = (ω¹)²g in the chart's internal coordinates; m_closed,
    when present, is the closed-form mass of the source named by
    closed_source, with dm_closed its ∂/∂ω⁰ and horizon_closed the height
    ln X(ρ, angles). dual_ready marks closed forms that accept dual numbers.
    scan_metric, when set, is the metric the boundary scan runs on.
    """
    id: CatalogId
    params: dict
    chart: object
    metric: object
    x_metric: Optional[MetricSpec] = None
    m_closed: Optional[Callable] = None
    dm_closed: Optional[Callable] = None
    horizon_closed: Optional[Callable] = None
    closed_source: MassSource = MassSource.CATALOG
    dual_ready: bool = False
    expected: Optional[ExpectedVerdict] = None
    scan: Optional[BoundaryScan] = None
    rho_span: Tuple[float, float] = (0.1, 1.0)
    angles: Tuple[float, float] = EQUATOR
    pullback: Optional[object] = field(default=None, compare=False)
    scan_metric: Optional[object] = field(default=None, compare=False)

    @property
    def name(self):
        return self.id.value

    def horizon_grid(self, n, angles=None):
        """n rows (ρ, a², a³) spread over the entry's radial span."""
        if n < 2:
            raise ValueError(f"Invalid grid size: {n}")
        lo, hi = self.rho_span
        rho = np.geomspace(lo, hi, n) if lo > 0 and hi / lo > 20 else np.linspace(lo, hi, n)
        angles = angles or self.angles
        return np.column_stack([rho, np.full(n, angles[0]), np.full(n, angles[1])])


def _one_minus_lapse(tan_w):
    return -np.expm1(-tan_w)


def _diag_metric(components):
    shape = np.broadcast(*components).shape
    n = len(components)
    g = np.zeros(shape + (n, n))
    for i, value in enumerate(components):
        g[..., i, i] = value
    return g


# Schwarzschild

def _schwarzschild_chart_metric(M):
    def evaluate(y):
        log_omega0, w, theta = y[..., 0], y[..., 1], y[..., 2]
        t = np.tan(w)
        lapse = np.exp(-t)
        gap = _one_minus_lapse(t)
        B = 4.0 * M * M * (1.0 + t * t) / gap**2
        area = 4.0 * M * M / gap**2
        g = np.zeros(np.shape(w) + (4, 4))
        g[..., 0, 0] = -lapse * w * w
        g[..., 0, 1] = g[..., 1, 0] = -lapse * w * log_omega0
        g[..., 1, 1] = lapse * (B - log_omega0**2)
        g[..., 2, 2] = area
        g[..., 3, 3] = area * np.sin(theta) ** 2
        return (w * w)[..., None, None] * g
    return evaluate


def _schwarzschild_x_metric(M):
    def evaluate(x):
        r, theta = x[..., 1], x[..., 2]
        lapse = 1.0 - 2.0 * M / r
        return _diag_metric([-lapse, 1.0 / lapse, r * r, (r * np.sin(theta)) ** 2])
    return MetricSpec(evaluate, "schwarzschild", valid=lambda x: x[..., 1] > 2.0 * M)


def make_schwarzschild(M=1.0):
    """ω¹ = −arctan ln(1 − 2M/r) chart with the closed-form mass and horizon of that chart."""
    if not M > 0:
        raise ValueError(f"Invalid M: {M} (M > 0 required)")
    chart = OmegaChart(RadialCompactifier.log_lapse(M))
    metric = ClosedFormMetric(_schwarzschild_chart_metric(M), chart, "schwarzschild-chart")

    def scale(y):
        w = y[..., 1]
        t = np.tan(w)
        return (np.exp(t) / w) ** 2 * _one_minus_lapse(t) ** 4 / (4.0 * M * M * (1.0 + t * t) ** 2)

    def m_closed(y):
        t = np.tan(y[..., 1])
        return scale(y) * (y[..., 0] ** 2 - 4.0 * M * M * (1.0 + t * t) / _one_minus_lapse(t) ** 2)

    def dm_closed(y):
        return 2.0 * scale(y) * y[..., 0] / np.exp(y[..., 0])

    def horizon_closed(rho, angles=EQUATOR):
        t = np.tan(rho)
        return -2.0 * M * np.sqrt(1.0 + t * t) / _one_minus_lapse(t)

    def log_slope(y):
        # ∂m/∂L of the chart's own mass, ≈ −ω¹/M on the horizon near ω¹ = 0
        return 2.0 * scale(y) * y[..., 0]

    scan = BoundaryScan((ScanEdge("omega1->pi/2", lambda a: 0.5 * np.pi, lambda a: 1.0),
                         ScanEdge("omega1->0", lambda a: 0.0, lambda a: 0.5)), mass=m_closed,
                        slope=log_slope)
    expected = ExpectedVerdict(Verdict.NAKED, (0.0,),
                               "∂m/∂ω⁰ of the chart mass vanishes only toward ω¹ = 0, where the horizon "
                               "runs into the corner (0, 0); it diverges as r → 2M")
    return CatalogEntry(CatalogId.SCHWARZSCHILD, {"M": M}, chart, metric, _schwarzschild_x_metric(M),
                        m_closed, dm_closed, horizon_closed, dual_ready=True, expected=expected, scan=scan,
                        rho_span=(0.05, 1.5), pullback=PulledBackMetric(_schwarzschild_x_metric(M), chart))


def stationary_schwarzschild(M=1.0):
    """The ω⁰-independent metric approaching Schwarzschild on its horizon, in the ω coordinate basis."""
    if not M > 0:
        raise ValueError(f"Invalid M: {M} (M > 0 required)")
    chart = OmegaChart(RadialCompactifier.log_lapse(M))

    def evaluate(y):
        w, theta = y[..., 1], y[..., 2]
        t = np.tan(w)
        lapse = np.exp(-t)
        gap = _one_minus_lapse(t)
        depth = 2.0 * M * np.sqrt(1.0 + t * t) / gap
        area = 4.0 * M * M / gap**2
        g = np.zeros(np.shape(w) + (4, 4))
        g[..., 0, 0] = -w * w * lapse * np.exp(2.0 * depth)
        g[..., 0, 1] = g[..., 1, 0] = w * depth * lapse * np.exp(depth)
        g[..., 2, 2] = area
        g[..., 3, 3] = area * np.sin(theta) ** 2
        return (w * w)[..., None, None] * g

    return ClosedFormMetric(evaluate, chart, "schwarzschild-stationary", basis="omega")


# Reissner–Nordström

def _rn_branch(M, Q):
    if abs(M - abs(Q)) <= EXTREMAL_TOL * max(M, 1.0):
        return CatalogId.RN_EXTREMAL
    return CatalogId.RN_SUB if M > abs(Q) else CatalogId.RN_SUPER


def rn_compactifier(M, Q, variant="default"):
    """The two radial compactifiers used for RN: the exponential-lapse form and 1/(r + 1)."""
    branch = _rn_branch(M, Q)
    lapse = lambda r: 1.0 - 2.0 * M / r + Q * Q / (r * r)
    dlapse = lambda r: 2.0 * M / (r * r) - 2.0 * Q * Q / r**3
    edge = {CatalogId.RN_SUB: M + np.sqrt(max(M * M - Q * Q, 0.0)), CatalogId.RN_EXTREMAL: M}.get(branch, 0.0)
    if variant == "default":
        if branch is CatalogId.RN_SUPER:
            return RadialCompactifier.arctan_reciprocal()
        return RadialCompactifier.exponential_lapse(lapse, dlapse, edge)
    if variant == "alternate":
        return RadialCompactifier.reciprocal_shifted(1.0, r_min=edge)
    raise ValueError(f"Invalid compactifier: {variant}")


def make_reissner_nordstrom(M, Q, h=None, branch=None):
    if not M > 0:
        raise ValueError(f"Invalid M: {M} (M > 0 required)")
    detected = _rn_branch(M, Q)
    if branch is not None and branch is not detected:
        raise BranchMismatch(f"M = {M}, Q = {Q} is {detected.value}, not {branch.value}")
    if detected is CatalogId.RN_SUB:
        edge = M + np.sqrt(M * M - Q * Q)
    elif detected is CatalogId.RN_EXTREMAL:
        edge = M
    else:
        edge = 0.0
    h = h or rn_compactifier(M, Q)
    if h.r_min < edge:
        raise BranchMismatch(f"compactifier starts at r = {h.r_min}, inside the horizon r = {edge}")
    lapse = lambda r: 1.0 - 2.0 * M / r + Q * Q / (r * r)

    def evaluate(x):
        r, theta = x[..., 1], x[..., 2]
        F = lapse(r)
        return _diag_metric([-F, 1.0 / F, r * r, (r * np.sin(theta)) ** 2])

    x_metric = MetricSpec(evaluate, detected.value, valid=lambda x: (x[..., 1] > edge) & (lapse(x[..., 1]) > 0))
    chart = RadialChart(h)

    def m_closed(y):
        r = y[..., 1]
        F = lapse(r)
        return (-1.0 / F + y[..., 0] ** 2 * h.dh(r) ** 2 * F) / h.h(r) ** 2

    def dm_closed(y):
        r = y[..., 1]
        return 2.0 * y[..., 0] * h.dh(r) ** 2 * lapse(r) / (h.h(r) ** 2 * np.exp(y[..., 0]))

    def horizon_closed(rho, angles=EQUATOR):
        return -1.0 / (np.abs(h.dh(rho)) * lapse(rho))

    if detected is CatalogId.RN_SUPER:
        expected = ExpectedVerdict(Verdict.NOT_NAKED)
        edges = (ScanEdge("r->0", lambda a: 0.0, lambda a: 1.0), ScanEdge("r->inf", lambda a: np.inf, lambda a: 1.0))
        span = (0.05, 20.0)
    else:
        limit = float(h.h(np.asarray(edge)))
        expected = ExpectedVerdict(Verdict.NAKED, (limit,))
        edges = (ScanEdge("r->horizon", lambda a: edge, lambda a: edge + 1.0),
                 ScanEdge("r->inf", lambda a: np.inf, lambda a: edge + 1.0))
        span = (edge * 1.01 + 0.05, edge + 20.0)
    return CatalogEntry(detected, {"M": M, "Q": Q}, chart, PulledBackMetric(x_metric, chart), x_metric,
                        m_closed, dm_closed, horizon_closed, dual_ready=detected is CatalogId.RN_SUPER,
                        expected=expected, scan=BoundaryScan(edges), rho_span=span)


# Roberts

def make_roberts(sigma=0.1, h=None, r_min=1.0):
    """Roberts metric in (ϑ, r, θ, φ) with ϑ = v − r/(1 + 2σ)."""
    if not 1.0 + 2.0 * sigma > 0:
        raise InvalidSigma(f"1 + 2σ must be positive, got σ = {sigma}")
    h = h or RadialCompactifier.arctan_reciprocal(r_min=r_min)
    k = 1.0 + 2.0 * sigma

    def advanced_time(x):
        return x[..., 0] + x[..., 1] / k

    def evaluate(x):
        r, theta = x[..., 1], x[..., 2]
        area = r * (r - 2.0 * sigma * advanced_time(x))
        return _diag_metric([np.full_like(r, -k), np.full_like(r, 1.0 / k), area, area * np.sin(theta) ** 2])

    def valid(x):
        return x[..., 1] > np.maximum(2.0 * sigma * advanced_time(x), ROBERTS_EPS_R)

    x_metric = MetricSpec(evaluate, "roberts", valid=valid)
    chart = RadialChart(h)

    def m_closed(y):
        r = y[..., 1]
        return (-1.0 / k + h.dh(r) ** 2 * k * y[..., 0] ** 2) / h.h(r) ** 2

    def dm_closed(y):
        r = y[..., 1]
        return 2.0 * k * h.dh(r) ** 2 * y[..., 0] / (np.exp(y[..., 0]) * h.h(r) ** 2)

    def horizon_closed(rho, angles=EQUATOR):
        return -1.0 / (np.abs(h.dh(rho)) * k)

    edges = (ScanEdge("r->r_min", lambda a: h.r_min, lambda a: h.r_min + 1.0),
             ScanEdge("r->inf", lambda a: np.inf, lambda a: h.r_min + 1.0))
    return CatalogEntry(CatalogId.ROBERTS, {"sigma": sigma}, chart, PulledBackMetric(x_metric, chart), x_metric,
                        m_closed, dm_closed, horizon_closed, dual_ready=True,
                        expected=ExpectedVerdict(Verdict.NOT_NAKED), scan=BoundaryScan(edges),
                        rho_span=(h.r_min * 1.05 + 0.01, h.r_min + 20.0))


# Kerr

def kerr_terms(M, a, r, theta):
    """Σ, Δ and D = Δ − a²sin²θ."""
    sigma = r * r + (a * np.cos(theta)) ** 2
    delta = r * r + a * a - 2.0 * M * r
    return sigma, delta, delta - (a * np.sin(theta)) ** 2


def ergosphere_radius(M, a, theta):
    return M + np.sqrt(M * M - (a * np.cos(theta)) ** 2)


def _kerr_bl_components(M, a, x):
    r, theta = x[..., 1], x[..., 2]
    sigma, delta, D = kerr_terms(M, a, r, theta)
    s2 = np.sin(theta) ** 2
    g = np.zeros(np.shape(r) + (4, 4))
    g[..., 0, 0] = -D / sigma
    g[..., 0, 3] = g[..., 3, 0] = -a * s2 * (r * r + a * a - delta) / sigma
    g[..., 1, 1] = sigma / delta
    g[..., 2, 2] = sigma
    g[..., 3, 3] = ((r * r + a * a) ** 2 - delta * a * a * s2) * s2 / sigma
    return g


def kerr_boyer_lindquist(M, a, x):
    """The Boyer–Lindquist metric at one point x = (t, r, θ, φ)."""
    return SymMatrix.from_full(_kerr_bl_components(M, a, np.asarray(x, dtype=float)))


def kerr_bl_metric(M, a):
    r_plus = M + np.sqrt(M * M - a * a)
    return MetricSpec(lambda x: _kerr_bl_components(M, a, x), "kerr-boyer-lindquist",
                      valid=lambda x: x[..., 1] > r_plus)


def make_kerr(M=1.0, a=0.5, h=None):
    """Kerr in the diagonal chart valid beyond the ergosurface, Δ − a²sin²θ > 0."""
    if not M > 0:
        raise ValueError(f"Invalid M: {M} (M > 0 required)")
    if not 0 < abs(a) < M:
        raise BranchMismatch(f"Kerr requires 0 < |a| < M, got a = {a}, M = {M}")
    r_plus = M + np.sqrt(M * M - a * a)
    h = h or RadialCompactifier.arctan_reciprocal(r_min=r_plus)

    def evaluate(x):
        r, theta = x[..., 1], x[..., 2]
        sigma, delta, D = kerr_terms(M, a, r, theta)
        # Σ′ = g_tt g_φφ − g_tφ² = −Δ sin²θ
        return _diag_metric([-D / sigma, sigma / delta, sigma, sigma * delta * np.sin(theta) ** 2 / D])

    def valid(x):
        sigma, _, D = kerr_terms(M, a, x[..., 1], x[..., 2])
        return D > ERGO_TOL * sigma

    x_metric = MetricSpec(evaluate, "kerr", valid=valid)
    chart = RadialChart(h)

    def m_closed(y):
        r, theta = y[..., 1], y[..., 2]
        sigma, delta, D = kerr_terms(M, a, r, theta)
        rotation = (a * np.sin(theta) * 2.0 * M * r) ** 2 / (sigma * delta * D)
        return (-sigma / D + h.dh(r) ** 2 * y[..., 0] ** 2 * delta / sigma + rotation) / h.h(r) ** 2

    def dm_closed(y):
        r, theta = y[..., 1], y[..., 2]
        sigma, delta, _ = kerr_terms(M, a, r, theta)
        return 2.0 * h.dh(r) ** 2 * y[..., 0] * delta / (sigma * h.h(r) ** 2 * np.exp(y[..., 0]))

    def horizon_closed(rho, angles=EQUATOR):
        sigma, delta, D = kerr_terms(M, a, rho, angles[0])
        rotation = (a * np.sin(angles[0]) * 2.0 * M * rho) ** 2 / (sigma * delta * D)
        return -np.sqrt(sigma / (delta * h.dh(rho) ** 2) * (sigma / D - rotation))

    thetas = (np.pi / 3, 0.5 * np.pi)
    bl_mass, bl_slope = kerr_bl_mass(M, a, h)
    edges = (ScanEdge("r->r+", lambda ang: r_plus, lambda ang: r_plus + 1.0),
             ScanEdge("r->inf", lambda ang: np.inf, lambda ang: r_plus + 1.0))
    expected = ExpectedVerdict(Verdict.NAKED, (float(h.h(np.asarray(r_plus))),),
                               "scanned on the Boyer–Lindquist pullback, which crosses the ergosurface down to r₊")
    pullback = PulledBackMetric(kerr_bl_metric(M, a), chart)
    return CatalogEntry(CatalogId.KERR, {"M": M, "a": a}, chart, PulledBackMetric(x_metric, chart), x_metric,
                        m_closed, dm_closed, horizon_closed, dual_ready=False, expected=expected,
                        scan=BoundaryScan(edges, angles=tuple((t, 0.0) for t in thetas), mass=bl_mass,
                                          slope=bl_slope),
                        rho_span=(2.0 * M + 0.05, 2.0 * M + 20.0), pullback=pullback, scan_metric=pullback)


def kerr_bl_mass(M, a, h):
    """Closed-form m = G^{LL} of the Boyer–Lindquist pullback and ν̂ at its roots.

    m = (L²h′²Δ − 𝒜/Δ)/(Σ(ω¹)⁴) with 𝒜 = (r² + a²)² − Δa²sin²θ, finite for all
    r > r₊; on the horizon ν̂ = −2√(ΔΣ/𝒜). Near r₊ the generic inverse of the
    pulled-back metric exceeds the condition cap.
    """
    def terms(y):
        r, theta = y[..., 1], y[..., 2]
        sigma, delta, _ = kerr_terms(M, a, r, theta)
        return sigma, delta, (r * r + a * a) ** 2 - delta * (a * np.sin(theta)) ** 2

    def mass(y):
        sigma, delta, area = terms(y)
        r = y[..., 1]
        return ((y[..., 0] * h.dh(r)) ** 2 * delta - area / delta) / (sigma * h.h(r) ** 4)

    def slope(y):
        sigma, delta, area = terms(y)
        return 2.0 * y[..., 0] * np.abs(h.dh(y[..., 1])) * delta * np.sqrt(delta * sigma) / area

    return mass, slope


def ergosphere_crossing(entry, theta):
    """Radius where h(∂/∂ω⁰, ∂/∂ω⁰) of the Boyer–Lindquist pullback changes sign at fixed θ."""
    M, a = entry.params["M"], entry.params["a"]
    metric = entry.pullback
    r_plus = M + np.sqrt(M * M - a * a)

    def time_norm(r):
        return float(metric.conformal_y(np.array([-0.5, r, theta, 0.0]))[0, 0])

    return brent_root(time_norm, r_plus * (1.0 + 1e-9), 4.0 * M + 1.0, rtol=1e-14)


# Synthetic collapse

def synthetic_compactifier(variant="default"):
    if variant == "default":
        return RadialCompactifier.reciprocal_power(2.0, r_min=1.0)
    if variant == "alternate":
        return RadialCompactifier.rational(2.0, 1.0, 1.0, r_min=1.0)
    raise ValueError(f"Invalid compactifier: {variant}")


def make_synthetic_collapse(kappa=4.0, h=None, profile="anisotropic", c2=0.5, p=0.5):
    """Temporal-gauge collapse with ḡ = c²r^{2p}(dr² + B(t)²r²dΩ²), B = 1 + κt.

    profile="isotropic" gives ḡ = a(t)²(dr² + r²dΩ²) with a = 1 + κt and Ω = 1/r
    by default. Lapse densities are the Cartesian ones.
    """
    if kappa < 0:
        raise ValueError(f"Invalid kappa: {kappa} (a non-decreasing scale factor is required)")
    if profile == "isotropic":
        h = h or RadialCompactifier.reciprocal_power(1.0, r_min=1.0)
        c2, p = 1.0, 0.0
    elif profile == "anisotropic":
        h = h or synthetic_compactifier()
    else:
        raise ValueError(f"Invalid profile: {profile}")

    radial_weight = lambda r: c2 * r ** (2.0 * p)
    scale = lambda t: 1.0 + kappa * t
    isotropic = profile == "isotropic"

    def spatial(t, xs):
        r, theta = xs[..., 0], xs[..., 1]
        B = scale(t)
        w = radial_weight(r)
        dr = w * (B * B if isotropic else 1.0)
        return _diag_metric([dr, w * B * B * r * r, w * B * B * (r * np.sin(theta)) ** 2])

    def spatial_rate(t, xs):
        r, theta = xs[..., 0], xs[..., 1]
        growth = 2.0 * scale(t) * kappa * radial_weight(r)
        dr = growth if isotropic else np.zeros_like(growth)
        return _diag_metric([dr, growth * r * r, growth * (r * np.sin(theta)) ** 2])

    def density(t, xs):
        B = scale(t)
        w = radial_weight(xs[..., 0])
        return w**3 * (B**6 if isotropic else B**4)

    def omega_gradient(xs):
        grad = np.zeros(np.shape(xs))
        grad[..., 0] = h.dh(xs[..., 0])
        return grad

    gauge = TemporalGauge(spatial, density, lambda xs: h.h(xs[..., 0]), omega_gradient, spatial_rate)
    chart = RadialChart(h)
    x_metric = MetricSpec.from_temporal_gauge(gauge, f"synthetic-{profile}")

    def m_closed(y):
        L, r = y[..., 0], y[..., 1]
        omega1 = h.h(r)
        B = 1.0 - kappa * omega1 * L
        w = c2 * r ** (2.0 * p)
        dr2 = w * (B * B if isotropic else 1.0)
        D = w**3 * (B**6 if isotropic else B**4)
        q = h.dh(r) ** 2 / dr2
        return (-1.0 / D + L * L * q / omega1**2) / omega1**2

    return CatalogEntry(CatalogId.SYNTHETIC_COLLAPSE, {"kappa": kappa, "c2": c2, "p": p, "profile": profile},
                        chart, PulledBackMetric(x_metric, chart), x_metric, m_closed,
                        closed_source=MassSource.TEMPORAL_GAUGE, dual_ready=True,
                        scan=BoundaryScan((ScanEdge("r->r_min", lambda a: h.r_min, lambda a: h.r_min + 1.0),
                                           ScanEdge("r->inf", lambda a: np.inf, lambda a: h.r_min + 1.0))),
                        rho_span=(h.r_min * 1.05, h.r_min + 10.0))


# Lookup and cross-checks

def mass_ratio_grid(entry, samples):
    """Pointwise m_closed / generic m; NaN where either side is unavailable."""
    if entry.m_closed is None:
        raise ValueError(f"{entry.name} has no closed-form mass")
    samples = np.asarray(samples, dtype=float)
    generic = mass_values(entry.metric, samples)
    with np.errstate(divide='ignore', invalid='ignore'):
        return np.asarray(entry.m_closed(samples), dtype=float) / generic


def catalog(name, M=1.0, Q=None, a=None, sigma=None, compactifier="default", kappa=4.0):
    """Build a catalog entry from CLI names and parameters."""
    family = CatalogId.from_input(name)
    if family == "schwarzschild":
        return make_schwarzschild(M)
    if family == "rn":
        Q = 0.0 if Q is None else Q
        return make_reissner_nordstrom(M, Q, rn_compactifier(M, Q, compactifier))
    if family == "roberts":
        sigma = 0.1 if sigma is None else sigma
        h = None if compactifier == "default" else RadialCompactifier.reciprocal_shifted(1.0, r_min=1.0)
        return make_roberts(sigma, h)
    if family == "kerr":
        a = 0.5 if a is None else a
        r_plus = M + np.sqrt(max(M * M - a * a, 0.0))
        h = None if compactifier == "default" else RadialCompactifier.reciprocal_shifted(1.0, r_min=r_plus)
        return make_kerr(M, a, h)
    return make_synthetic_collapse(kappa, synthetic_compactifier(compactifier))


def verdict(entry, depth=None, threads=None, dtol=None):
    if entry.scan is None:
        raise ValueError(f"{entry.name} has no boundary scan")
    scan = entry.scan if depth is None else replace(entry.scan, depth=depth)
    if dtol is not None:
        scan = replace(scan, dtol=dtol)
    metric = entry.metric if entry.scan_metric is None else entry.scan_metric
    result = apparent_closure(metric, scan, threads)
    logger.info(f"{entry.name}: {result.verdict.value} with {len(result.limit_points)} limit points")
    return result


def closed_horizon_or_none(entry, rho, angles=EQUATOR):
    if entry.horizon_closed is None:
        return None
    try:
        return float(entry.horizon_closed(np.asarray(rho, dtype=float), angles))
    except (FloatingPointError, NoSignChange):
        return None
