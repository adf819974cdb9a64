"""Rescaling and compactification charts, their Jacobians, and metric/covector transport."""
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from lib.errors import ChartInvalid, NotInvertible, OutOfRange, PatchViolation
from lib.numerics import bisect_vectorized, newton_polish
from lib.tensor_core import DerivativeConfig, ScalarField, SymMatrix, derive
from lib.types import ConformalKind

logger = logging.getLogger('confhor.chart')

SINGULAR_DELTA = 1e-10
HALF_PI = 0.5 * np.pi


# Metrics in the (x) chart

@dataclass(frozen=True)
class TemporalGauge:
    """Data of a metric g = -(|ḡ|/Ω²)dt² + ḡ_ij dxⁱdxʲ.

    spatial(t, xs) gives ḡ_ij, density(t, xs) the volume density entering the
    lapse, omega(xs) and omega_gradient(xs) the conformal factor ω¹ and ∂ᵢω¹.
    spatial_rate, when given, is the closed form of ∂₀ḡ_ij.
    """
    spatial: Callable
    density: Callable
    omega: Callable
    omega_gradient: Callable
    spatial_rate: Optional[Callable] = None

    def lapse_squared(self, t, xs):
        return self.density(t, xs) / self.omega(xs) ** 2

    def four_metric(self, x):
        x = np.asarray(x, dtype=float)
        t, xs = x[..., 0], x[..., 1:]
        g = np.zeros(x.shape[:-1] + (4, 4))
        g[..., 0, 0] = -self.lapse_squared(t, xs)
        g[..., 1:, 1:] = self.spatial(t, xs)
        return g


@dataclass(frozen=True)
class MetricSpec:
    """A point-evaluable spacetime metric in the (x) chart plus gauge metadata."""
    evaluate: Callable
    name: str = "metric"
    temporal_gauge: Optional[TemporalGauge] = None
    valid: Optional[Callable] = None

    @classmethod
    def from_temporal_gauge(cls, gauge, name="temporal-gauge", valid=None):
        return cls(gauge.four_metric, name=name, temporal_gauge=gauge, valid=valid)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.valid is not None and not np.all(self.valid(x)):
            raise ChartInvalid(f"{self.name}: evaluation requested outside the chart")
        return self.evaluate(x)


# Conformal factors

@dataclass(frozen=True)
class ConformalFactorSpec:
    kind: ConformalKind
    omega_max: float
    params: Tuple[float, ...] = ()
    radial_fn: Optional[Callable] = None
    radial_derivative: Optional[Callable] = None
    general_fn: Optional[Callable] = None
    general_gradient: Optional[Callable] = None

    def __post_init__(self):
        if not self.omega_max > 0:
            raise ValueError(f"Invalid omega_max: {self.omega_max}")

    @classmethod
    def reciprocal_r(cls, omega_max=1.0):
        return cls(ConformalKind.RECIPROCAL_R, omega_max)

    @classmethod
    def reciprocal_r2(cls, omega_max=1.0):
        return cls(ConformalKind.RECIPROCAL_R2, omega_max)

    @classmethod
    def gaussian(cls, amplitude, kappa):
        return cls(ConformalKind.GAUSSIAN, amplitude, (amplitude, kappa))

    @classmethod
    def rational(cls, a, b, c):
        return cls(ConformalKind.RATIONAL, a / b, (a, b, c))

    @classmethod
    def radial_custom(cls, fn, derivative, omega_max):
        return cls(ConformalKind.RADIAL_CUSTOM, omega_max, radial_fn=fn, radial_derivative=derivative)

    @classmethod
    def general(cls, fn, gradient, omega_max):
        return cls(ConformalKind.GENERAL, omega_max, general_fn=fn, general_gradient=gradient)

    def radial(self, r):
        """Ω(r) and Ω′(r) for radial kinds."""
        r = np.asarray(r, dtype=float)
        kind = self.kind
        if kind is ConformalKind.RECIPROCAL_R:
            return 1.0 / r, -1.0 / r**2
        if kind is ConformalKind.RECIPROCAL_R2:
            return 1.0 / r**2, -2.0 / r**3
        if kind is ConformalKind.GAUSSIAN:
            amplitude, kappa = self.params
            value = amplitude * np.exp(-kappa * r)
            return value, -kappa * value
        if kind is ConformalKind.RATIONAL:
            a, b, c = self.params
            q = b + c * r**2
            return a / q, -2.0 * a * c * r / q**2
        if kind is ConformalKind.RADIAL_CUSTOM:
            return self.radial_fn(r), self.radial_derivative(r)
        raise NotInvertible("general conformal factor has no radial profile")

    def value(self, xs):
        xs = np.asarray(xs, dtype=float)
        if self.kind is ConformalKind.GENERAL:
            return self.general_fn(xs)
        return self.radial(np.linalg.norm(xs, axis=-1))[0]

    def gradient(self, xs):
        xs = np.asarray(xs, dtype=float)
        if self.kind is ConformalKind.GENERAL:
            return self.general_gradient(xs)
        r = np.linalg.norm(xs, axis=-1)
        _, d = self.radial(r)
        return (d / r)[..., None] * xs

    def radius_for(self, omega1):
        """Invert Ω(r) = ω¹ on a radial profile."""
        omega1 = np.asarray(omega1, dtype=float)
        kind = self.kind
        if kind is ConformalKind.RECIPROCAL_R:
            return 1.0 / omega1
        if kind is ConformalKind.RECIPROCAL_R2:
            return omega1 ** -0.5
        if kind is ConformalKind.GAUSSIAN:
            amplitude, kappa = self.params
            return -np.log(omega1 / amplitude) / kappa
        if kind is ConformalKind.RATIONAL:
            a, b, c = self.params
            return np.sqrt((a / omega1 - b) / c)
        if kind is ConformalKind.RADIAL_CUSTOM:
            return _invert_monotone(lambda r: self.radial(r)[0], lambda r: self.radial(r)[1], omega1)
        raise NotInvertible("general conformal factor cannot be inverted radially")


def _invert_monotone(fn, derivative, target, r_lo=1e-12):
    """Solve fn(r) = target for r > r_lo with fn monotone decreasing."""
    target = np.asarray(target, dtype=float)
    hi = np.full(target.shape, 1.0)
    for _ in range(200):
        above = fn(hi) >= target
        if not np.any(above):
            break
        hi = np.where(above, 2.0 * hi, hi)
    lo = np.full(target.shape, r_lo)
    samples = np.geomspace(r_lo, float(np.max(hi)), 64)
    values = fn(samples)
    if np.any(np.diff(values) > 0):
        raise NotInvertible("conformal factor is not monotone on the inversion bracket")
    root = bisect_vectorized(lambda r: fn(r) - target, lo, hi, rtol=1e-12)
    if np.any(np.isnan(root)):
        raise NotInvertible(f"no radius with conformal factor {target}")
    return newton_polish(lambda r: fn(r) - target, derivative, root)


# Radial compactifiers ω¹ = h(r)

@dataclass(frozen=True)
class RadialCompactifier:
    """A bounded radial compactifier with h′ of constant sign and h → 0 at infinity."""
    h: Callable
    dh: Callable
    r_min: float
    name: str = "h"
    inverse_fn: Optional[Callable] = None

    @property
    def omega_max(self):
        with np.errstate(divide='ignore', invalid='ignore'):
            return float(self.h(np.asarray(max(self.r_min, 1e-300), dtype=float)))

    def value(self, r):
        return self.h(r)

    def derivative(self, r):
        return self.dh(r)

    def invert(self, omega1):
        omega1 = np.asarray(omega1, dtype=float)
        if self.inverse_fn is not None:
            return self.inverse_fn(omega1)
        lo = np.full(omega1.shape, self.r_min * (1.0 + 1e-15) + 1e-300)
        hi = np.full(omega1.shape, max(1.0, 2.0 * self.r_min))
        for _ in range(400):
            above = self.h(hi) >= omega1
            if not np.any(above):
                break
            hi = np.where(above, 2.0 * hi, hi)
        root = bisect_vectorized(lambda r: self.h(r) - omega1, lo, hi, rtol=1e-13)
        if np.any(np.isnan(root)):
            raise NotInvertible(f"{self.name}: no radius for ω¹ = {omega1}")
        return newton_polish(lambda r: self.h(r) - omega1, self.dh, root)

    def check(self, samples=64):
        """Sampled checks of boundedness, constant sign of h′ and decay at infinity."""
        start = self.r_min + max(1e-6, 1e-6 * self.r_min)
        r = start + np.geomspace(1e-3, 1e6, samples)
        h = self.h(r)
        dh = self.dh(r)
        return bool(np.all(np.isfinite(h)) and (np.all(dh < 0) or np.all(dh > 0))
                    and abs(float(self.h(np.asarray(1e12)))) < 1e-3)

    @classmethod
    def arctan_reciprocal(cls, r_min=0.0):
        return cls(lambda r: np.arctan(1.0 / r), lambda r: -1.0 / (1.0 + r * r), r_min,
                   "arctan(1/r)", lambda w: 1.0 / np.tan(w))

    @classmethod
    def reciprocal_shifted(cls, shift=1.0, r_min=0.0):
        return cls(lambda r: 1.0 / (r + shift), lambda r: -1.0 / (r + shift) ** 2, r_min,
                   f"1/(r+{shift:g})", lambda w: 1.0 / w - shift)

    @classmethod
    def reciprocal_power(cls, k=2.0, r_min=1.0):
        return cls(lambda r: r ** -k, lambda r: -k * r ** (-k - 1.0), r_min,
                   f"r^-{k:g}", lambda w: w ** (-1.0 / k))

    @classmethod
    def rational(cls, a=2.0, b=1.0, c=1.0, r_min=1.0):
        return cls(lambda r: a / (b + c * r * r), lambda r: -2.0 * a * c * r / (b + c * r * r) ** 2, r_min,
                   f"{a:g}/({b:g}+{c:g}r²)", lambda w: np.sqrt((a / w - b) / c))

    @classmethod
    def log_lapse(cls, mass):
        """ω¹ = −arctan ln(1 − 2M/r) on r > 2M."""
        def h(r):
            return -np.arctan(np.log1p(-2.0 * mass / r))

        def dh(r):
            lapse = 1.0 - 2.0 * mass / r
            log_lapse = np.log1p(-2.0 * mass / r)
            return -(2.0 * mass / (r * r * lapse)) / (1.0 + log_lapse * log_lapse)

        return cls(h, dh, 2.0 * mass, "-arctan ln(1-2M/r)",
                   lambda w: 2.0 * mass / -np.expm1(-np.tan(w)))

    @classmethod
    def exponential_lapse(cls, lapse, dlapse, r_edge):
        """ω¹ = arctan exp(1/F(r)) − arctan e, written to stay finite as F → 0⁺."""
        offset = np.arctan(np.e)

        def h(r):
            with np.errstate(divide='ignore'):
                decay = np.exp(-1.0 / np.maximum(lapse(r), 0.0))
            return HALF_PI - np.arctan(decay) - offset

        def dh(r):
            f = lapse(r)
            decay = np.exp(-1.0 / f)
            return -(dlapse(r) / (f * f)) * decay / (1.0 + decay * decay)

        return cls(h, dh, r_edge, "arctan exp(1/F) - arctan e")


# Compact points and charts

@dataclass(frozen=True)
class CompactPoint:
    """ω = (ω⁰, ω¹, angles) stored with L = ln ω⁰ so the ω⁰ → 0 corner stays representable."""
    log_omega0: float
    omega1: float
    angles: Tuple[float, ...] = (HALF_PI, 0.0)

    @classmethod
    def from_omega(cls, omega0, omega1, *angles):
        if not omega0 > 0:
            raise OutOfRange(f"ω⁰ must be positive, got {omega0}")
        return cls(float(np.log(omega0)), float(omega1), tuple(float(a) for a in angles) or (HALF_PI, 0.0))

    @property
    def omega0(self):
        return float(np.exp(self.log_omega0))

    def as_array(self):
        return np.array((self.omega0, self.omega1) + self.angles)

    def validate(self, chart, allow_boundary=False):
        if not self.log_omega0 <= 0.0 or (not allow_boundary and not np.isfinite(self.log_omega0)):
            raise OutOfRange(f"ω⁰ = {self.omega0} outside (0, 1]")
        upper = chart.omega_max
        if not (0.0 <= self.omega1 if allow_boundary else 0.0 < self.omega1) or self.omega1 > upper * (1 + 1e-12):
            raise OutOfRange(f"ω¹ = {self.omega1} outside (0, {upper}]")
        for angle, (lo, hi) in zip(self.angles, chart.angle_box):
            if not lo < angle < hi:
                raise OutOfRange(f"angle {angle} outside ({lo}, {hi})")
        return self


class _Chart:
    """Shared behaviour of the compact charts.

    Internally points are arrays y = (L, ρ, a², a³) where L = ln ω⁰ and ρ is
    the chart's radial label (ω¹ itself or the areal radius r).
    """
    angle_box = ((-HALF_PI, HALF_PI), (-HALF_PI, HALF_PI))

    @property
    def rho_bounds(self):
        return (0.0, None)

    def coords(self, point):
        point.validate(self)
        return np.array((point.log_omega0, float(self.rho(point.omega1))) + point.angles)

    def point(self, y):
        y = np.asarray(y, dtype=float)
        return CompactPoint(float(y[0]), float(self.omega1(y[1])), tuple(float(a) for a in y[2:]))

    def y_to_omega(self, y):
        """∂y/∂ω as the diagonal (1/ω⁰, dρ/dω¹, 1, 1)."""
        y = np.asarray(y, dtype=float)
        diag = np.ones(y.shape)
        diag[..., 0] = np.exp(-y[..., 0])
        diag[..., 1] = 1.0 / self.domega1(y[..., 1])
        return diag


@dataclass(frozen=True)
class ChartMap(_Chart):
    """Cartesian compactification ω = (e^{−x⁰/Ω}, Ω, arctan(xᵃ/Ω)) on one x¹-sign patch."""
    conformal: ConformalFactorSpec
    spatial_patch: int = 1

    def __post_init__(self):
        if self.spatial_patch not in (1, -1):
            raise ValueError(f"Invalid spatial patch: {self.spatial_patch}")

    @property
    def omega_max(self):
        return self.conformal.omega_max

    def omega1(self, rho):
        return rho

    def domega1(self, rho):
        return np.ones_like(np.asarray(rho, dtype=float))

    def rho(self, omega1):
        return np.asarray(omega1, dtype=float)

    def forward(self, x):
        return forward(x, self.conformal)

    def to_x(self, y):
        """Inverse map on the selected patch, y = (L, ω¹, ω², ω³) arrays."""
        y = np.asarray(y, dtype=float)
        if not self.conformal.kind.radial:
            raise NotInvertible("inverse() needs a radial conformal factor")
        log_omega0, omega1, angles = y[..., 0], y[..., 1], y[..., 2:]
        r = self.conformal.radius_for(omega1)
        transverse = omega1[..., None] * np.tan(angles)
        remainder = r**2 - np.sum(transverse**2, axis=-1)
        if np.any(remainder < 0):
            raise PatchViolation(f"r² < Σ(xᵃ)² on the x¹ patch (deficit {float(np.min(remainder)):.3e})")
        x1 = self.spatial_patch * np.sqrt(remainder)
        x0 = -omega1 * log_omega0
        return np.concatenate([x0[..., None], x1[..., None], transverse], axis=-1)

    def jacobian(self, y):
        """∂x/∂y with y = (L, ω¹, ω², ω³), from the analytic inverse."""
        y = np.asarray(y, dtype=float)
        x = self.to_x(y)
        log_omega0, omega1, angles = y[..., 0], y[..., 1], y[..., 2:]
        r = self.conformal.radius_for(omega1)
        _, dr_omega = self.conformal.radial(r)
        tangents = np.tan(angles)
        secants = 1.0 + tangents**2
        jac = np.zeros(y.shape[:-1] + (4, 4))
        jac[..., 0, 0] = -omega1
        jac[..., 0, 1] = -log_omega0
        x1 = x[..., 1]
        transverse = x[..., 2:]
        jac[..., 1, 1] = (r / dr_omega - np.sum(transverse * tangents, axis=-1)) / x1
        for a in range(2):
            jac[..., 1, 2 + a] = -transverse[..., a] * omega1 * secants[..., a] / x1
            jac[..., 2 + a, 1] = tangents[..., a]
            jac[..., 2 + a, 2 + a] = omega1 * secants[..., a]
        return jac

    def spatial_radius(self, x):
        return np.linalg.norm(np.asarray(x)[..., 1:], axis=-1)


@dataclass(frozen=True)
class RadialChart(_Chart):
    """Spherical chart x = (t, r, θ, φ) with ω¹ = h(r), ω⁰ = e^{−t/ω¹}, angles unchanged."""
    compactifier: RadialCompactifier
    angle_box: Tuple = field(default=((0.0, np.pi), (-np.pi, np.pi)))

    @property
    def omega_max(self):
        return self.compactifier.omega_max

    @property
    def rho_bounds(self):
        return (self.compactifier.r_min, None)

    def omega1(self, rho):
        return self.compactifier.h(rho)

    def domega1(self, rho):
        return self.compactifier.dh(rho)

    def rho(self, omega1):
        return self.compactifier.invert(omega1)

    def forward(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x[..., 0] < 0):
            raise OutOfRange(f"x⁰ = {x[..., 0]} is negative")
        if np.any(x[..., 1] <= self.compactifier.r_min):
            raise OutOfRange(f"r = {x[..., 1]} at or below r_min = {self.compactifier.r_min}")
        omega1 = self.compactifier.h(x[..., 1])
        return CompactPoint(float(-x[..., 0] / omega1), float(omega1), tuple(float(a) for a in x[..., 2:]))

    def to_x(self, y):
        y = np.asarray(y, dtype=float)
        x = y.copy()
        x[..., 0] = -self.compactifier.h(y[..., 1]) * y[..., 0]
        return x

    def jacobian(self, y):
        y = np.asarray(y, dtype=float)
        jac = np.broadcast_to(np.eye(4), y.shape[:-1] + (4, 4)).copy()
        jac[..., 0, 0] = -self.compactifier.h(y[..., 1])
        jac[..., 0, 1] = -y[..., 0] * self.compactifier.dh(y[..., 1])
        return jac

    def spatial_radius(self, x):
        return np.asarray(x)[..., 1]


@dataclass(frozen=True)
class OmegaChart(_Chart):
    """The spherical chart of RadialChart labelled by ω¹ itself instead of r."""
    compactifier: RadialCompactifier
    angle_box: Tuple = field(default=((0.0, np.pi), (-np.pi, np.pi)))

    @property
    def omega_max(self):
        return self.compactifier.omega_max

    @property
    def rho_bounds(self):
        return (0.0, self.omega_max)

    def omega1(self, rho):
        return np.asarray(rho, dtype=float)

    def domega1(self, rho):
        return np.ones_like(np.asarray(rho, dtype=float))

    def rho(self, omega1):
        return np.asarray(omega1, dtype=float)

    def forward(self, x):
        return RadialChart(self.compactifier, self.angle_box).forward(x)

    def to_x(self, y):
        y = np.asarray(y, dtype=float)
        x = y.copy()
        x[..., 0] = -y[..., 1] * y[..., 0]
        x[..., 1] = self.compactifier.invert(y[..., 1])
        return x

    def jacobian(self, y):
        y = np.asarray(y, dtype=float)
        r = self.compactifier.invert(y[..., 1])
        jac = np.broadcast_to(np.eye(4), y.shape[:-1] + (4, 4)).copy()
        jac[..., 0, 0] = -y[..., 1]
        jac[..., 0, 1] = -y[..., 0]
        jac[..., 1, 1] = 1.0 / self.compactifier.dh(r)
        return jac

    def spatial_radius(self, x):
        return np.asarray(x)[..., 1]


@dataclass(frozen=True)
class PulledBackMetric:
    """h = (ω¹)²g in the internal y basis, by the chain rule from an (x)-chart metric."""
    x_metric: MetricSpec
    chart: object

    @property
    def temporal_gauge(self):
        return self.x_metric.temporal_gauge

    def valid(self, y):
        if self.x_metric.valid is None:
            return np.ones(np.asarray(y).shape[:-1], dtype=bool)
        return self.x_metric.valid(self.chart.to_x(y))

    def conformal_y(self, y):
        y = np.asarray(y, dtype=float)
        jac = self.chart.jacobian(y)
        g = self.x_metric(self.chart.to_x(y))
        omega1 = self.chart.omega1(y[..., 1])
        h = omega1[..., None, None] ** 2 * np.einsum('...ai,...ab,...bj->...ij', jac, g, jac)
        return 0.5 * (h + np.swapaxes(h, -1, -2))

    def conformal_omega(self, y):
        return to_basis(self.conformal_y(y), y, self.chart)


@dataclass(frozen=True)
class ClosedFormMetric:
    """h = (ω¹)²g given in closed form, in the internal y basis or (basis="omega") the ω coordinate basis."""
    evaluator: Callable
    chart: object
    name: str = "closed-form"
    temporal_gauge: Optional[TemporalGauge] = None
    validity: Optional[Callable] = None
    basis: str = "y"

    def valid(self, y):
        if self.validity is None:
            return np.ones(np.asarray(y).shape[:-1], dtype=bool)
        return self.validity(np.asarray(y, dtype=float))

    def conformal_y(self, y):
        y = np.asarray(y, dtype=float)
        if self.validity is not None and not np.all(self.validity(y)):
            raise ChartInvalid(f"{self.name}: evaluation requested outside the chart")
        h = self.evaluator(y)
        if self.basis == "omega":
            scale = 1.0 / self.chart.y_to_omega(y)
            return h * scale[..., :, None] * scale[..., None, :]
        return h

    def conformal_omega(self, y):
        y = np.asarray(y, dtype=float)
        if self.basis == "omega":
            if self.validity is not None and not np.all(self.validity(y)):
                raise ChartInvalid(f"{self.name}: evaluation requested outside the chart")
            return self.evaluator(y)
        return to_basis(self.evaluator(y), y, self.chart)


# Operations

def forward(x, c):
    """(ω⁰, ω¹, ωᵃ) = (e^{−x⁰/Ω}, Ω, arctan(xᵃ/Ω)) for a Cartesian spacetime point."""
    x = np.asarray(x, dtype=float)
    if x[0] < 0:
        raise OutOfRange(f"x⁰ = {x[0]} is negative")
    omega = float(c.value(x[1:]))
    if not 0.0 < omega <= c.omega_max * (1 + 1e-12):
        raise OutOfRange(f"Ω = {omega} outside (0, {c.omega_max}]")
    angles = tuple(float(a) for a in np.arctan(x[2:] / omega))
    return CompactPoint(float(-x[0] / omega), omega, angles)


def inverse(point, chart):
    y = chart.coords(point)
    return chart.to_x(y)


def delta_star(xs, c):
    """Δ* = 1 − Σ zⁱ ∂Ω/∂xⁱ with z = x/Ω."""
    xs = np.asarray(xs, dtype=float)
    omega = c.value(xs)
    value = 1.0 - np.sum(xs * c.gradient(xs), axis=-1) / omega
    if np.any(np.abs(value) < SINGULAR_DELTA):
        logger.warning(f"Coordinate singularity: |Δ*| < {SINGULAR_DELTA} at {xs.tolist()}")
    return value


def is_coordinate_singular(xs, c):
    return np.abs(delta_star(xs, c)) < SINGULAR_DELTA


def jacobian_determinant(x, c, cfg=None):
    """Numeric det ∂z/∂x for the rescaling z^α = x^α/Ω(xⁱ)."""
    x = np.asarray(x, dtype=float)
    cfg = cfg or DerivativeConfig()
    jac = np.zeros((4, 4))
    for alpha in range(4):
        component = ScalarField(lambda p, a=alpha: p[..., a] / c.value(p[..., 1:]),
                                [(None, None)] * 4, name=f"z{alpha}")
        for beta in range(4):
            jac[alpha, beta] = derive(component, x, beta, cfg)
    return float(np.linalg.det(jac))


def to_basis(h_y, y, chart, basis="coordinate"):
    """Convert h from the internal y basis to the (dω⁰, dω¹, dωᵃ) or b-basis."""
    scale = chart.y_to_omega(y)
    if basis == "b":
        omega = np.ones(np.asarray(y).shape)
        omega[..., 0] = np.exp(y[..., 0])
        omega[..., 1] = chart.omega1(y[..., 1])
        scale = scale * omega
    elif basis != "coordinate":
        raise ValueError(f"Invalid basis: {basis}")
    return h_y * scale[..., :, None] * scale[..., None, :]


def pullback_metric(g, point, chart, basis="coordinate"):
    """h = (ω¹)²g in ω-coordinates at a compact point, by the chain rule."""
    y = chart.coords(point)
    h_y = PulledBackMetric(g, chart).conformal_y(y)
    return SymMatrix.from_full(to_basis(h_y, y, chart, basis))


def omega_jacobian(point, chart):
    """∂x/∂ω in the coordinate basis at a compact point."""
    y = chart.coords(point)
    return chart.jacobian(y) * chart.y_to_omega(y)[None, :]


def pushforward_metric(h, point, chart):
    """Transport h (coordinate ω basis) back to the (x) basis: returns (ω¹)²g(x)."""
    inverse_jac = np.linalg.inv(omega_jacobian(point, chart))
    return SymMatrix.from_full(inverse_jac.T @ h.full @ inverse_jac)


def _b_scale(point, chart):
    y = chart.coords(point)
    scale = np.ones(4)
    scale[1] = point.omega1 / chart.domega1(y[1])
    return chart.jacobian(y), scale


def transform_covector(xi, point, chart):
    """Components of ξ_α dx^α in the b-basis (dω⁰/ω⁰, dω¹/ω¹, dωᵃ)."""
    jac, scale = _b_scale(point, chart)
    return (np.asarray(xi, dtype=float) @ jac) * scale


def transform_vector(v, point, chart):
    """Components of v^α ∂_α along the b-basis vectors (ω⁰∂₀, ω¹∂₁, ∂ₐ)."""
    jac, scale = _b_scale(point, chart)
    return np.linalg.solve(jac, np.asarray(v, dtype=float)) / scale
