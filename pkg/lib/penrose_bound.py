"""Deformations of the black-hole horizon, the mass and area functionals, and the lower bound on the total mass."""
import logging
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable, Optional, Tuple

import numpy as np

from lib.dual import Dual, eps_part, real_part
from lib.errors import DenominatorVanishes, HypothesisViolated, NonCausalZ, NonConvergent, NotTemporalGauge
from lib.mass_geometry import (chart_domain, curvature_conditions, energy_condition, extrinsic_curvature,
                               horizon_roots, mass_values)
from lib.numerics import (aitken, convergence_order, gauss_laguerre, gauss_legendre, gauss_legendre_batch,
                          parallel_map)
from lib.tensor_core import ScalarField, derive

logger = logging.getLogger('confhor.penrose')

DIMENSION = 3
BAND = 0.1
CUTOFF_FRACTION = 1e-4
CUTOFF_LEVELS = 4
ANGLE_NODES = 8
S_STEP = 1e-4
CHUNK = 2048
VANISH_TOL = 1e-12
SIGN_TOL = 1e-10
MAX_AMPLITUDE = 0.2
EULER_POSITIONS = (-0.5, 0.0, 0.5)
DRIFT_POSITIONS = (-1.0, -0.5, 0.0, 0.5, 1.0)
OMEGA0_TOP = float(np.nextafter(1.0, 0.0))


@dataclass(frozen=True)
class MassModel:
    """m on internal coordinates (L, ρ, a², a³) with its L-derivative.

    Dual-ready catalog closed forms are differentiated exactly, anything else
    by Richardson central differences.
    """
    values: Callable
    chart: object = None
    exact: bool = False
    name: str = "m"

    @classmethod
    def of(cls, source):
        if isinstance(source, cls):
            return source
        if getattr(source, 'm_closed', None) is not None and getattr(source, 'dual_ready', False):
            return cls(source.m_closed, source.chart, True, source.name)
        metric = getattr(source, 'metric', source)
        if hasattr(metric, 'conformal_y'):
            return cls(lambda y: mass_values(metric, y), metric.chart, False, getattr(metric, 'name', 'm'))
        if callable(source):
            return cls(source)
        raise TypeError(f"Cannot build a mass model from {type(source).__name__}")

    def scalar_field(self):
        domain = chart_domain(self.chart) if self.chart is not None else [(None, None)] * 4
        return ScalarField(self.values, domain, closed_form=self.exact, name=self.name)

    def omega1(self, rho):
        return self.chart.omega1(rho) if self.chart is not None else np.asarray(rho, dtype=float)

    def with_slope(self, y):
        """(m, ∂m/∂L) at y."""
        y = np.asarray(y, dtype=float)
        if self.exact:
            direction = np.zeros(y.shape)
            direction[..., 0] = 1.0
            value = self.values(Dual(y, direction))
            real = np.broadcast_to(real_part(value), y.shape[:-1])
            return real, np.broadcast_to(eps_part(value), y.shape[:-1])
        return np.asarray(self.values(y), dtype=float), derive(self.scalar_field(), y, 0)


@dataclass(frozen=True)
class CutoffEstimate:
    """A quadrature value extrapolated to ω¹-cutoff → 0 with the partial sums it came from."""
    value: float
    error: float
    partials: Tuple[float, ...] = ()

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True, eq=False)
class SpatialNodes:
    omega1: np.ndarray
    rho: np.ndarray
    angles: np.ndarray
    weights: np.ndarray
    piece: np.ndarray

    def __len__(self):
        return len(self.omega1)

    def points(self, log_omega0, index=slice(None)):
        """y = (L, ρ, a², a³) with the node axis first; log_omega0 has shape (nodes,) or (nodes, k)."""
        L = np.asarray(log_omega0, dtype=float)
        tail = (1,) * (L.ndim - 1)
        rho = np.broadcast_to(self.rho[index].reshape((-1,) + tail), L.shape)
        a2 = np.broadcast_to(self.angles[index, 0].reshape((-1,) + tail), L.shape)
        a3 = np.broadcast_to(self.angles[index, 1].reshape((-1,) + tail), L.shape)
        return np.stack([L, rho, a2, a3], axis=-1)


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor-product Gauss-Legendre rule on H̲ = (0, Ω_max] × angle box for the measure (dω¹/ω¹)dϖ.

    The ω¹ axis is integrated in u = ln ω¹ down to the cutoff ε₁, then over
    `levels` further pieces [ε₁2^{−k}, ε₁2^{−k+1}]; the partial sums are
    extrapolated to ε₁ → 0.
    """
    omega_max: float
    angle_box: Tuple[Tuple[float, float], ...] = ((0.0, np.pi), (-np.pi, np.pi))
    nodes: int = 32
    angle_nodes: int = ANGLE_NODES
    cutoff: Optional[float] = None
    log_axis: bool = True
    levels: int = CUTOFF_LEVELS
    rho_of: Optional[Callable] = None

    def __post_init__(self):
        if not self.omega_max > 0:
            raise ValueError(f"Invalid omega_max: {self.omega_max}")
        if self.nodes < 1 or self.angle_nodes < 1:
            raise ValueError(f"Invalid node counts: {self.nodes}, {self.angle_nodes}")
        if self.levels < 2:
            raise ValueError(f"Invalid cutoff levels: {self.levels} (at least 2 needed for extrapolation)")
        if not 0 < self.eps1 < self.omega_max:
            raise ValueError(f"Invalid cutoff: {self.eps1} outside (0, {self.omega_max})")

    @classmethod
    def for_chart(cls, chart, nodes=32, **kwargs):
        return cls(float(chart.omega_max), tuple(chart.angle_box), nodes, rho_of=chart.rho, **kwargs)

    @property
    def eps1(self):
        return self.cutoff if self.cutoff is not None else CUTOFF_FRACTION * self.omega_max

    def doubled(self):
        return replace(self, nodes=2 * self.nodes, angle_nodes=2 * self.angle_nodes)

    def _bounds(self):
        top = np.log(self.eps1)
        bounds = [(top, np.log(self.omega_max))]
        for k in range(self.levels):
            bounds.append((top - (k + 1) * np.log(2.0), top - k * np.log(2.0)))
        return bounds

    @cached_property
    def spatial(self):
        (t_lo, t_hi), (p_lo, p_hi) = self.angle_box
        theta, w_theta = gauss_legendre(self.angle_nodes, t_lo, t_hi)
        phi, w_phi = gauss_legendre(self.angle_nodes, p_lo, p_hi)
        columns = []
        for piece, (lo, hi) in enumerate(self._bounds()):
            if self.log_axis:
                u, w_u = gauss_legendre(self.nodes, lo, hi)
                omega1, w1 = np.exp(u), w_u
            else:
                omega1, w_omega = gauss_legendre(self.nodes, np.exp(lo), np.exp(hi))
                w1 = w_omega / omega1
            o, a, b = np.meshgrid(omega1, theta, phi, indexing='ij')
            wo, wa, wb = np.meshgrid(w1, w_theta, w_phi, indexing='ij')
            columns.append((o.ravel(), np.column_stack([a.ravel(), b.ravel()]), (wo * wa * wb).ravel(),
                            np.full(o.size, piece)))
        omega1 = np.concatenate([c[0] for c in columns])
        rho = np.asarray(self.rho_of(omega1), dtype=float) if self.rho_of is not None else omega1
        return SpatialNodes(omega1, rho, np.concatenate([c[1] for c in columns]),
                            np.concatenate([c[2] for c in columns]), np.concatenate([c[3] for c in columns]))

    @property
    def main(self):
        """Index of the nodes above the cutoff."""
        return np.flatnonzero(self.spatial.piece == 0)

    def integrate(self, values, extrapolate=True):
        values = np.asarray(values, dtype=float)
        nodes = self.spatial
        if not np.all(np.isfinite(values)):
            raise NonConvergent(f"non-finite integrand at {int(np.sum(~np.isfinite(values)))} quadrature nodes")
        pieces = [np.sum(nodes.weights[nodes.piece == k] * values[nodes.piece == k]) for k in range(self.levels + 1)]
        partials = tuple(float(p) for p in np.cumsum(pieces))
        if not extrapolate:
            return CutoffEstimate(partials[-1], abs(float(pieces[-1])), partials)
        value, error = aitken(partials)
        return CutoffEstimate(float(value), float(error), partials)


def _per_node(fn, count, threads=None):
    """fn(slice) over consecutive node blocks, concatenated along the last axis in node order."""
    blocks = [slice(i, min(i + CHUNK, count)) for i in range(0, count, CHUNK)]
    return np.concatenate(parallel_map(fn, blocks, threads), axis=-1)


def _column(values, like):
    return values.reshape(values.shape + (1,) * (np.ndim(like) - 1))


def smooth_perturbation(nodes, omega_max, seed):
    """A random smooth ψ(ω¹, a², a³) with |ψ| ≤ 1."""
    rng = np.random.default_rng(seed)
    c = rng.uniform(-0.25, 0.25, size=4)
    return (c[0] + c[1] * np.cos(np.pi * nodes.omega1 / omega_max)
            + c[2] * np.cos(nodes.angles[:, 0]) + c[3] * np.sin(nodes.angles[:, 1]))


@dataclass(frozen=True, eq=False)
class DeformationFamily:
    """ω⁰ = T̃(s) = X̃ − slope·s + η·ψ·s(s − s₋)(s₊ − s)/Δ² on the nodes of a quadrature grid.

    Per node s runs over [s₋, s₊] with T̃(s₋) = min(X̃e^Λ, 1) and T̃(s₊) = X̃e^{−Λ},
    Δ = s₊ − s₋. slope = 1 with η = 0 is the straight deformation T̃* = X̃ − s.
    """
    model: MassModel
    metric: object
    grid: QuadratureGrid
    log_X: np.ndarray
    band: float = BAND
    slope: float = 1.0
    amplitude: float = 0.0
    psi: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.band > 0:
            raise ValueError(f"Invalid band: {self.band}")
        if abs(self.amplitude) > MAX_AMPLITUDE:
            raise ValueError(f"Invalid amplitude: {self.amplitude} (|η| ≤ {MAX_AMPLITUDE})")
        if not np.all(self.log_X < 0):
            raise HypothesisViolated("horizon heights must satisfy 0 < X̃ < 1")

    @classmethod
    def from_heights(cls, source, grid, log_X, band=BAND):
        metric = getattr(source, 'metric', source)
        return cls(MassModel.of(source), metric, grid, np.asarray(log_X, dtype=float), band)

    @classmethod
    def from_horizon(cls, source, grid=None, band=BAND):
        """T̃* around the computed horizon heights at every node of the grid."""
        model = MassModel.of(source)
        metric = getattr(source, 'metric', source)
        grid = grid or QuadratureGrid.for_chart(model.chart)
        nodes = grid.spatial
        rows = np.column_stack([nodes.rho, nodes.angles])
        log_X = horizon_roots(metric, rows, mass=model.values if model.exact else None)
        missing = int(np.sum(~np.isfinite(log_X)))
        if missing:
            raise HypothesisViolated(f"no horizon over {missing} of {len(nodes)} quadrature nodes")
        logger.info(f"Deformation family on {len(nodes)} nodes, X̃ in [{np.exp(log_X.min()):.4g}, "
                    f"{np.exp(log_X.max()):.4g}]")
        return cls(model, metric, grid, log_X, band)

    @property
    def nodes(self):
        return self.grid.spatial

    @cached_property
    def X(self):
        return np.exp(self.log_X)

    @cached_property
    def top(self):
        return np.minimum(self.X * np.exp(self.band), OMEGA0_TOP)

    @cached_property
    def bottom(self):
        return self.X * np.exp(-self.band)

    @property
    def s_lo(self):
        return self.X - self.top

    @property
    def s_hi(self):
        return self.X - self.bottom

    @property
    def width(self):
        return self.s_hi - self.s_lo

    def straight(self):
        return replace(self, slope=1.0, amplitude=0.0, psi=None)

    def constant(self):
        return replace(self, slope=0.0, amplitude=0.0, psi=None)

    def perturbed(self, amplitude, seed):
        psi = smooth_perturbation(self.nodes, self.grid.omega_max, seed)
        return replace(self, slope=1.0, amplitude=amplitude, psi=psi)

    def clamp(self, s, index=slice(None)):
        s = np.asarray(s, dtype=float)
        return np.clip(s, _column(self.s_lo[index], s), _column(self.s_hi[index], s))

    def at(self, position, index=slice(None)):
        """Per-node s for a normalized position in [−1, 1]."""
        return self.s_lo[index] + 0.5 * (np.asarray(position, dtype=float) + 1.0) * self.width[index]

    def _bump(self, s, index):
        lo, hi, width = (_column(a[index], s) for a in (self.s_lo, self.s_hi, self.width))
        value = s * (s - lo) * (hi - s) / width**2
        rate = ((s - lo) * (hi - s) + s * (hi - s) - s * (s - lo)) / width**2
        psi = _column(self.psi[index], s)
        return self.amplitude * psi * value, self.amplitude * psi * rate

    def value(self, s, index=slice(None)):
        s = np.asarray(s, dtype=float)
        T = _column(self.X[index], s) - self.slope * s
        if self.amplitude and self.psi is not None:
            T = T + self._bump(s, index)[0]
        return T

    def rate(self, s, index=slice(None)):
        s = np.asarray(s, dtype=float)
        dT = np.full(s.shape, -self.slope)
        if self.amplitude and self.psi is not None:
            dT = dT + self._bump(s, index)[1]
        return dT

    def horizon_points(self, index=slice(None)):
        return self.nodes.points(self.log_X[index], index)


# Slice geometry

def _spatial_metric(metric, x):
    gauge = getattr(metric, 'temporal_gauge', None)
    if gauge is not None:
        return gauge.spatial(x[..., 0], x[..., 1:])
    x_metric = getattr(metric, 'x_metric', None)
    if x_metric is None:
        raise NotTemporalGauge(f"{getattr(metric, 'name', type(metric).__name__)} has no spatial metric")
    return x_metric(x)[..., 1:, 1:]


def slice_density(metric, y):
    """σ = (ω¹)ⁿ√|ḡ|·|∂x¹/∂ω¹|, the density of P₀ against dω¹dϖ."""
    chart = metric.chart
    y = np.asarray(y, dtype=float)
    x = chart.to_x(y)
    omega1 = chart.omega1(y[..., 1])
    stretch = chart.jacobian(y)[..., 1, 1] / chart.domega1(y[..., 1])
    return omega1**DIMENSION * np.sqrt(np.abs(np.linalg.det(_spatial_metric(metric, x)))) * np.abs(stretch)


def slice_density_rate(metric, y):
    """∂σ/∂ω⁰ = e^{−L}σ·ω¹τ·trK, from ∂₀√|ḡ| = −τ trK √|ḡ| and t = −ω¹L."""
    y = np.asarray(y, dtype=float)
    curvature = extrinsic_curvature(metric, metric.chart.to_x(y))
    omega1 = metric.chart.omega1(y[..., 1])
    return np.exp(-y[..., 0]) * slice_density(metric, y) * omega1 * curvature.tau * curvature.trK


# Functionals

def total_mass_squared(source, grid=None, threads=None):
    """𝔐² = ∫ m dω⁰dω¹dϖ = ∫ m* dL (dω¹/ω¹) dϖ with m* = ω⁰ω¹m.

    The L = ln ω⁰ axis is integrated by Gauss-Laguerre, so no ω⁰ cutoff is
    involved; the ω¹ cutoff is extrapolated away.
    """
    model = MassModel.of(source)
    grid = grid or QuadratureGrid.for_chart(model.chart)
    s, w = gauss_laguerre(grid.nodes)
    nodes = grid.spatial

    def inner(block):
        count = block.stop - block.start
        m = model.values(nodes.points(np.broadcast_to(-s, (count, len(s))), block))
        return nodes.omega1[block] * (np.asarray(m, dtype=float) @ w)

    estimate = grid.integrate(_per_node(inner, len(nodes), threads))
    logger.info(f"M_sq = {estimate.value:.10g} (cutoff estimate {estimate.error:.2e})")
    if estimate.value < 0:
        logger.warning(f"M_sq = {estimate.value:.6g} is negative; the total mass is imaginary")
    return estimate


def functional_J(family, threads=None):
    """J(T̃) = ∫∫ (m*(T̃)/T̃)·T̃′ (dω¹/ω¹)dϖ ds, the s-integral per node over [s₋, s₊]."""
    nodes, model = family.nodes, family.model

    def inner(block):
        s, w = gauss_legendre_batch(family.grid.nodes, family.s_lo[block], family.s_hi[block])
        T = family.value(s, block)
        m = model.values(nodes.points(np.log(T), block))
        return np.sum(w * nodes.omega1[block, None] * m * family.rate(s, block), axis=-1)

    return family.grid.integrate(_per_node(inner, len(nodes), threads))


def _node_s(family, s, normalized, block):
    count = block.stop - block.start
    if normalized:
        return family.at(s, block)
    return family.clamp(np.full(count, float(s)), block)


def functional_I_area(family, s=0.0, normalized=False, threads=None):
    """P₀(s) = ∫ σ(T̃(s)) dω¹dϖ on the deformed slice; P₀(0) is the horizon area A.

    s is clamped into [s₋, s₊] per node, or read as a position in [−1, 1] when normalized.
    """
    nodes = family.nodes

    def inner(block):
        s_node = _node_s(family, s, normalized, block)
        y = nodes.points(np.log(family.value(s_node, block)), block)
        return slice_density(family.metric, y) * nodes.omega1[block]

    return family.grid.integrate(_per_node(inner, len(nodes), threads))


def swept_area(family, threads=None):
    """I(T̃) = ∫ P₀ ds with node-dependent s-ranges."""
    nodes = family.nodes

    def inner(block):
        s, w = gauss_legendre_batch(family.grid.nodes, family.s_lo[block], family.s_hi[block])
        y = nodes.points(np.log(family.value(s, block)), block)
        return np.sum(w * slice_density(family.metric, y), axis=-1) * nodes.omega1[block]

    return family.grid.integrate(_per_node(inner, len(nodes), threads))


def euler_residual(family, s=0.0, step=S_STEP, threads=None):
    """Scaled |∂P/∂T̃ − d/ds(∂P/∂T̃′)| at the normalized position s ∈ [−1, 1].

    P(T̃, T̃′) = ∫ω¹m(T̃)T̃′ du dϖ; d/ds is a central difference with step
    `step`·(s₊ − s₋). The result is divided by the quadrature of |∂P/∂T̃|.
    """
    if family.grid.nodes < 4:
        raise NonConvergent(f"{family.grid.nodes} nodes per axis cannot resolve the Euler residual (4 needed)")
    nodes, model = family.nodes, family.model

    def inner(block):
        s_node = family.at(s, block)
        h = step * family.width[block]
        omega1 = nodes.omega1[block]
        T = family.value(s_node, block)
        _, dm_dL = model.with_slope(nodes.points(np.log(T), block))
        dP_dT = omega1 * dm_dL / T * family.rate(s_node, block)
        up = model.values(nodes.points(np.log(family.value(s_node + h, block)), block))
        down = model.values(nodes.points(np.log(family.value(s_node - h, block)), block))
        dS_ds = omega1 * (up - down) / (2.0 * h)
        return np.stack([np.abs(dP_dT - dS_ds), np.abs(dP_dT)])

    parts = _per_node(inner, len(nodes), threads)
    residual = family.grid.integrate(parts[0], extrapolate=False).value
    scale = family.grid.integrate(parts[1], extrapolate=False).value
    return residual / scale if scale > 0 else residual


def boundary_terms(family, threads=None):
    """∂P/∂T̃′ = ∫ω¹m(T̃) du dϖ at the upper end T̃(s₋) and the lower end T̃(s₊) of every node."""
    nodes, model = family.nodes, family.model

    def inner(block):
        omega1 = nodes.omega1[block]
        top = model.values(nodes.points(np.log(family.value(family.s_lo[block], block)), block))
        bottom = model.values(nodes.points(np.log(family.value(family.s_hi[block], block)), block))
        return np.stack([omega1 * top, omega1 * bottom])

    parts = _per_node(inner, len(nodes), threads)
    return family.grid.integrate(parts[0]), family.grid.integrate(parts[1])


def _checked_denominator(family, integrand, label):
    estimate = family.grid.integrate(integrand)
    magnitude = family.grid.integrate(np.abs(integrand), extrapolate=False).value
    if magnitude == 0 or abs(estimate.value) <= VANISH_TOL * magnitude:
        raise DenominatorVanishes(f"{label} vanishes ({estimate.value:.3e}); trK = 0 on the horizon?",
                                  estimate.value)
    return estimate


def multiplier_denominator(family, threads=None):
    """∫(ω¹)ⁿ ∂₀√|ḡ|(X̃) dω¹dϖ, negative when trK < 0."""
    nodes = family.nodes

    def inner(block):
        return slice_density_rate(family.metric, family.horizon_points(block)) * nodes.omega1[block]

    return _checked_denominator(family, _per_node(inner, len(nodes), threads), "∫(ω¹)ⁿ∂₀√|ḡ|(X̃)")


def trace_denominator(family, threads=None):
    """∫(ω¹)^{n+1/2} trK(X̃)/X̃ dω¹dϖ."""
    nodes = family.nodes

    def inner(block):
        x = family.metric.chart.to_x(family.horizon_points(block))
        trK = extrinsic_curvature(family.metric, x).trK
        omega1 = nodes.omega1[block]
        return omega1 ** (DIMENSION + 0.5) * trK / family.X[block] * omega1

    return _checked_denominator(family, _per_node(inner, len(nodes), threads), "∫(ω¹)^{n+1/2}trK/X̃")


def lagrange_multiplier(source, grid=None, band=BAND, family=None, threads=None):
    """λ = (∂P/∂T̃′(T̃(s₋)) − ∂P/∂T̃′(T̃(s₊))) / ∫(ω¹)ⁿ∂₀√|ḡ|(X̃) dω¹dϖ."""
    family = family or DeformationFamily.from_horizon(source, grid, band)
    denominator = multiplier_denominator(family, threads)
    top, bottom = boundary_terms(family, threads)
    value = (top.value - bottom.value) / denominator.value
    logger.info(f"λ = {value:.10g} (denominator {denominator.value:.6g})")
    return value


def conserved_integral(family, s=0.0, normalized=False, threads=None):
    """∫(ω¹)ⁿ ∂₀√|ḡ| dω¹dϖ on the slice ω⁰ = T̃(s)."""
    nodes = family.nodes

    def inner(block):
        s_node = _node_s(family, s, normalized, block)
        y = nodes.points(np.log(family.value(s_node, block)), block)
        return slice_density_rate(family.metric, y) * nodes.omega1[block]

    return family.grid.integrate(_per_node(inner, len(nodes), threads))


def conserved_drift(family, positions=DRIFT_POSITIONS, threads=None):
    """Largest relative change of the conserved integral over normalized positions."""
    values = np.array([conserved_integral(family, p, normalized=True, threads=threads).value for p in positions])
    reference = conserved_integral(family, 0.0, threads=threads).value
    spread = np.max(np.abs(values - reference))
    return float(spread / abs(reference)) if reference != 0 else float(spread)


@dataclass(frozen=True)
class IsoperimetricCheck:
    """P₀ at both ends of a deformation against the horizon area A.

    transport_gap is the relative residual of P₀(s₊) − P₀(s₋) = ∫ T̃′ ∂P₀/∂T̃ ds, node by node.
    """
    p_minus: float
    p_plus: float
    area: float
    transport_gap: float

    @property
    def mismatch(self):
        return max(abs(self.p_minus - self.area), abs(self.p_plus - self.area)) / abs(self.area)


def isoperimetric_endpoints(family, threads=None):
    """P₀ on the slices ω⁰ = T̃(s₋) and ω⁰ = T̃(s₊), A, and the transport identity between the two ends."""
    nodes = family.nodes

    def inner(block):
        omega1 = nodes.omega1[block]
        top, bottom = (slice_density(family.metric, nodes.points(np.log(family.value(s, block)), block))
                       for s in (family.s_lo[block], family.s_hi[block]))
        s, w = gauss_legendre_batch(family.grid.nodes, family.s_lo[block], family.s_hi[block])
        rates = slice_density_rate(family.metric, nodes.points(np.log(family.value(s, block)), block))
        change = np.sum(w * family.rate(s, block) * rates, axis=-1)
        horizon = slice_density(family.metric, family.horizon_points(block))
        return np.stack([omega1 * np.abs(bottom - top - change), omega1 * horizon])

    parts = _per_node(inner, len(nodes), threads)
    gap = (family.grid.integrate(parts[0], extrapolate=False).value
           / family.grid.integrate(parts[1], extrapolate=False).value)
    check = IsoperimetricCheck(functional_I_area(family, -1.0, True, threads).value,
                               functional_I_area(family, 1.0, True, threads).value,
                               functional_I_area(family, 0.0, threads=threads).value, gap)
    logger.info(f"Isoperimetric ends {check.p_minus:.8g}, {check.p_plus:.8g} against A = {check.area:.8g} "
                f"(transport gap {check.transport_gap:.2e})")
    if check.mismatch > SIGN_TOL:
        logger.warning(f"P₀ moves {check.mismatch:.3e} relative to A across the deformation")
    return check


@dataclass(frozen=True, eq=False)
class PositivityReport:
    omega1: np.ndarray
    phi_left: np.ndarray
    phi_right: np.ndarray
    integral: np.ndarray
    hypotheses: np.ndarray

    @property
    def positive(self):
        return self.integral > 0

    @property
    def violations(self):
        return int(np.sum(self.hypotheses & ~self.positive))

    @property
    def checked(self):
        return int(np.sum(self.hypotheses))


def positivity_lemma(family, threads=None):
    """Per node, φ(s) = −m*(X̃ − s)/(X̃ − s) against the two positivity hypotheses.

    The blow-up at s₋ is read on the finite band as φ(s₋) > 0 being the
    largest sampled value; the second hypothesis is φ(s₊) < 0.
    """
    straight = family.straight()
    nodes, model = straight.nodes, straight.model
    n = straight.grid.nodes

    def inner(block):
        omega1 = nodes.omega1[block]
        s, w = gauss_legendre_batch(n, straight.s_lo[block], straight.s_hi[block])
        ends = np.column_stack([straight.s_lo[block], straight.s_hi[block]])
        phi = -omega1[:, None] * model.values(nodes.points(np.log(straight.value(s, block)), block))
        phi_ends = -omega1[:, None] * model.values(nodes.points(np.log(straight.value(ends, block)), block))
        return np.stack([phi_ends[:, 0], phi_ends[:, 1], np.sum(w * phi, axis=-1), np.max(phi, axis=-1)])

    left, right, integral, peak = _per_node(inner, len(nodes), threads)
    hypotheses = (left > 0) & (left >= peak) & (right < 0)
    report = PositivityReport(nodes.omega1, left, right, integral, hypotheses)
    logger.info(f"Positivity: {report.checked} of {len(nodes)} nodes meet both hypotheses, "
                f"{report.violations} with a non-positive s-integral")
    return report


@dataclass(frozen=True, eq=False)
class SecondVariation:
    A: np.ndarray
    m_star: np.ndarray
    identity_gap: float
    conditions: Optional[np.ndarray] = None

    @property
    def ok(self):
        return bool(np.all(self.A <= SIGN_TOL * np.maximum(np.abs(self.m_star), 1.0)))


def second_variation(source, samples):
    """A = ω⁰∂m*/∂ω⁰ − m* = ω¹(ω⁰)²∂m/∂ω⁰ at samples y, both sides computed independently."""
    model = MassModel.of(source)
    y = np.atleast_2d(np.asarray(samples, dtype=float))
    omega1 = model.omega1(y[..., 1])
    omega0 = np.exp(y[..., 0])
    m, dm_dL = model.with_slope(y)
    A = omega1 * omega0 * dm_dL

    def m_star(p):
        real = real_part(p)
        return np.exp(p[..., 0]) * model.omega1(real[..., 1]) * model.values(p)

    star = ScalarField(m_star, model.scalar_field().domain, closed_form=model.exact, name="m*")
    m_star_values = omega0 * omega1 * m
    lhs = derive(star, y, 0) - m_star_values
    scale = np.maximum(np.abs(lhs) + np.abs(A) + np.abs(m_star_values), np.finfo(float).tiny)
    gap = float(np.max(np.abs(lhs - A) / scale))
    conditions = None
    metric = getattr(source, 'metric', None)
    if getattr(metric, 'temporal_gauge', None) is not None:
        conditions = curvature_conditions(metric, y).strict_trace
    return SecondVariation(A, m_star_values, gap, conditions)


def second_variation_sign(source, boundary_samples):
    """True iff ω¹(ω⁰)²∂m/∂ω⁰ ≤ 0 at every sample."""
    result = second_variation(source, boundary_samples)
    if result.identity_gap > 1e-8:
        logger.warning(f"Second-variation identity off by {result.identity_gap:.2e}")
    return result.ok


# The bound

@dataclass(frozen=True)
class BoundReport:
    M_sq: float
    J_at_Tstar: float
    rhs_bound: float
    area_A: float
    euler_residual_max: float
    second_variation_ok: bool
    conserved_integral_drift: float
    M_sq_error: float = 0.0
    lambda_: float = 0.0
    numerator_top: float = 0.0
    numerator_bottom: float = 0.0
    denominator_trK: float = 0.0
    denominator_lambda: float = 0.0
    rhs_multiplier: float = 0.0
    isoperimetric_mismatch: float = 0.0
    isoperimetric_transport_gap: float = 0.0
    positivity_violations: int = 0
    horizon_convention: str = "event-horizon"
    nodes: int = 0

    @property
    def holds(self):
        return self.M_sq > self.rhs_bound


def horizon_convention(metric, samples, count=16):
    """'event-horizon' when ∇ₓm ≥ 0 for Z = −∂/∂ω⁰ on horizon samples, else the H⁺ profile convention."""
    samples = np.asarray(samples, dtype=float)
    picked = samples[::max(1, len(samples) // count)]
    try:
        report = energy_condition(metric, lambda y: np.array([-1.0, 0.0, 0.0, 0.0]), picked)
    except NonCausalZ as e:
        logger.warning(f"Energy condition not testable with Z = −∂/∂ω⁰: {e}")
        return "apparent-profile"
    if report.minimum >= 0:
        return "event-horizon"
    logger.warning(f"∇ₓm reaches {report.minimum:.3e} < 0; the bound uses the H⁺ profile as X̃")
    return "apparent-profile"


def penrose_bound(source, grid=None, band=BAND, threads=None):
    """Assemble the mass, area and boundary terms of the lower bound and check its ingredients."""
    metric = getattr(source, 'metric', source)
    name = getattr(source, 'name', getattr(metric, 'name', 'metric'))
    if getattr(metric, 'temporal_gauge', None) is None:
        raise HypothesisViolated(f"{name}: the bound needs a metric in temporal gauge")
    grid = grid or QuadratureGrid.for_chart(metric.chart)
    family = DeformationFamily.from_horizon(source, grid, band)

    horizon = family.horizon_points(grid.main)
    conditions = curvature_conditions(metric, horizon)
    failing = int(np.sum(~conditions.strict_trace))
    if failing:
        raise HypothesisViolated(f"{name}: trK < 0 with K(dω¹, dω¹) ≥ 0 fails at {failing} of "
                                 f"{len(horizon)} horizon nodes")
    convention = horizon_convention(metric, horizon)

    m_sq = total_mass_squared(source, grid, threads)
    J = functional_J(family, threads)
    area = functional_I_area(family, 0.0, threads=threads)
    top, bottom = boundary_terms(family, threads)
    d_trace = trace_denominator(family, threads)
    d_lambda = multiplier_denominator(family, threads)
    numerator = top.value - bottom.value
    rhs = numerator / d_trace.value * area.value

    euler = max(euler_residual(family, s, threads=threads) for s in EULER_POSITIONS)
    main = grid.main
    band_samples = np.concatenate([
        family.nodes.points(np.log(family.top[main]), main),
        horizon,
        family.nodes.points(np.log(family.bottom[main]), main)])
    second = second_variation(source, band_samples)
    iso = isoperimetric_endpoints(family, threads)
    positivity = positivity_lemma(family, threads)

    report = BoundReport(m_sq.value, J.value, rhs, area.value, euler, second.ok, conserved_drift(family),
                         M_sq_error=m_sq.error, lambda_=numerator / d_lambda.value, numerator_top=top.value,
                         numerator_bottom=bottom.value, denominator_trK=d_trace.value,
                         denominator_lambda=d_lambda.value, rhs_multiplier=numerator / d_lambda.value * area.value,
                         isoperimetric_mismatch=iso.mismatch, isoperimetric_transport_gap=iso.transport_gap,
                         positivity_violations=positivity.violations,
                         horizon_convention=convention, nodes=grid.nodes)
    logger.info(f"{name}: M_sq = {report.M_sq:.8g} {'>' if report.holds else '<='} rhs = {report.rhs_bound:.8g}")
    return report


def refinement_study(quantity, grid, levels=3):
    """quantity(grid) under repeated grid doubling, with the observed convergence order."""
    values = []
    for _ in range(levels):
        values.append(float(quantity(grid)))
        grid = grid.doubled()
    return values, convergence_order(values)
