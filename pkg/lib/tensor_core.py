"""Point-wise linear algebra and differentiation primitives for Lorentzian metrics."""
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from lib.dual import Dual
from lib.errors import DomainExceeded, IllConditioned, Singular
from lib.types import DerivativeScheme

logger = logging.getLogger('confhor.tensor')

CONDITION_CAP = 1e12
PIVOT_TOL = 1e-14
ZERO_EIGEN_THRESHOLD = 1e-9


@dataclass(frozen=True)
class SymMatrix:
    """Symmetric matrix kept as packed lower-triangular entries."""
    dim: int
    entries: Tuple[float, ...]

    def __post_init__(self):
        expected = self.dim * (self.dim + 1) // 2
        if len(self.entries) != expected:
            raise ValueError(f"Invalid SymMatrix storage: {len(self.entries)} entries for dim {self.dim}")

    @classmethod
    def from_full(cls, array):
        a = np.asarray(array, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"Invalid SymMatrix shape: {a.shape}")
        a = 0.5 * (a + a.T)
        rows, cols = np.tril_indices(a.shape[0])
        return cls(a.shape[0], tuple(float(v) for v in a[rows, cols]))

    @classmethod
    def from_lower(cls, dim, entries):
        return cls(int(dim), tuple(float(v) for v in entries))

    @classmethod
    def identity(cls, dim):
        return cls.from_full(np.eye(dim))

    @classmethod
    def diag(cls, values):
        return cls.from_full(np.diag(np.asarray(values, dtype=float)))

    @property
    def full(self):
        a = np.zeros((self.dim, self.dim))
        rows, cols = np.tril_indices(self.dim)
        a[rows, cols] = self.entries
        a[cols, rows] = self.entries
        a.setflags(write=False)
        return a

    def lower(self):
        return self.entries

    def __getitem__(self, index):
        i, j = index
        if i < j:
            i, j = j, i
        return self.entries[i * (i + 1) // 2 + j]

    def norm_inf(self):
        return float(np.abs(self.full).sum(axis=1).max())


def _equilibrate(a):
    scale = np.sqrt(np.abs(a).max(axis=-1))
    return scale


def invert_symmetric(m, cap=CONDITION_CAP):
    """Inverse of a symmetric matrix with a condition check.

    The matrix is symmetrically equilibrated before factorization; the
    condition estimate is the 1-norm condition of the equilibrated matrix.
    """
    a = m.full if isinstance(m, SymMatrix) else np.asarray(m, dtype=float)
    scale = _equilibrate(a)
    if np.any(scale == 0.0) or not np.all(np.isfinite(scale)):
        raise Singular(f"Matrix has a zero or non-finite row: {a.tolist()}")
    d = 1.0 / scale
    b = a * d[:, None] * d[None, :]
    lu, piv = linalg.lu_factor(b, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= PIVOT_TOL * max(pivots.max(), 1.0):
        raise Singular(f"Pivot {pivots.min():.3e} below tolerance")
    b_inv = linalg.lu_solve((lu, piv), np.eye(a.shape[0]))
    condition = np.abs(b).sum(axis=0).max() * np.abs(b_inv).sum(axis=0).max()
    if condition > cap:
        raise IllConditioned(f"Condition estimate {condition:.3e} exceeds cap {cap:.1e}", condition)
    g = b_inv * d[:, None] * d[None, :]
    return SymMatrix.from_full(g)


def invert_batch(a, cap=CONDITION_CAP, strict=False):
    """Vectorized invert_symmetric over a stack (..., n, n).

    With strict=False singular or ill-conditioned entries come back as NaN
    matrices; with strict=True the first failure raises.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[-1]
    with np.errstate(divide='ignore', invalid='ignore'):
        scale = _equilibrate(a)
        d = 1.0 / scale
        b = a * d[..., :, None] * d[..., None, :]
    bad = ~np.all(np.isfinite(b), axis=(-1, -2))
    b = np.where(bad[..., None, None], np.eye(n), b)
    det = np.linalg.det(b)
    singular = np.abs(det) <= PIVOT_TOL
    b = np.where(singular[..., None, None], np.eye(n), b)
    b_inv = np.linalg.inv(b)
    condition = np.abs(b).sum(axis=-2).max(axis=-1) * np.abs(b_inv).sum(axis=-2).max(axis=-1)
    failed = bad | singular | (condition > cap)
    if strict and np.any(failed):
        worst = float(np.max(np.where(np.isfinite(condition), condition, np.inf)))
        if np.any(bad | singular):
            raise Singular("Singular matrix in batch")
        raise IllConditioned(f"Condition estimate {worst:.3e} exceeds cap {cap:.1e}", worst)
    g = b_inv * d[..., :, None] * d[..., None, :]
    g = 0.5 * (g + np.swapaxes(g, -1, -2))
    return np.where(failed[..., None, None], np.nan, g)


def signature(m, threshold=ZERO_EIGEN_THRESHOLD):
    """Counts of (negative, positive, near-zero) eigenvalues."""
    a = m.full if isinstance(m, SymMatrix) else np.asarray(m, dtype=float)
    eigenvalues = linalg.eigvalsh(a)
    cutoff = threshold * float(np.abs(a).sum(axis=1).max())
    zero = np.abs(eigenvalues) <= cutoff
    return (int(np.sum((eigenvalues < 0) & ~zero)),
            int(np.sum((eigenvalues > 0) & ~zero)),
            int(np.sum(zero)))


@dataclass(frozen=True)
class ScalarField:
    """A point evaluator with a box of validity.

    Points are arrays whose last axis holds the coordinates; first_index is
    the label of that axis' first coordinate (1 for spatial x¹..xⁿ fields).
    """
    evaluator: Callable
    domain: Sequence[Tuple[Optional[float], Optional[float]]]
    closed_form: bool = False
    first_index: int = 0
    name: str = field(default="field", compare=False)

    def check(self, p):
        values = p.real if isinstance(p, Dual) else np.asarray(p, dtype=float)
        for axis, (lo, hi) in enumerate(self.domain):
            component = values[..., axis]
            if lo is not None and np.any(component <= lo):
                raise DomainExceeded(f"{self.name}: coordinate {axis + self.first_index} below {lo}")
            if hi is not None and np.any(component >= hi):
                raise DomainExceeded(f"{self.name}: coordinate {axis + self.first_index} above {hi}")

    def __call__(self, p):
        if not isinstance(p, Dual):
            p = np.asarray(p, dtype=float)
        self.check(p)
        return self.evaluator(p)


@dataclass(frozen=True)
class DerivativeConfig:
    scheme: Optional[DerivativeScheme] = None
    base_step: float = 1e-5
    richardson_levels: int = 2
    one_sided: bool = False

    def __post_init__(self):
        if not self.base_step > 0:
            raise ValueError(f"Invalid base_step: {self.base_step}")
        if self.richardson_levels < 0:
            raise ValueError(f"Invalid richardson_levels: {self.richardson_levels}")

    def resolve(self, f):
        if self.scheme is not None:
            return self.scheme
        return DerivativeScheme.DUAL if f.closed_form else DerivativeScheme.CENTRAL


def _inside(f, p):
    try:
        f.check(p)
        return True
    except DomainExceeded:
        return False


def richardson_table(estimates, factor):
    """Neville-style Richardson elimination over estimates at steps h, h/2, h/4, ..."""
    table = list(estimates)
    power = factor
    while len(table) > 1:
        table = [(power * fine - coarse) / (power - 1.0) for coarse, fine in zip(table, table[1:])]
        power *= factor
    return table[0]


def derive(f, p, axis, cfg=None):
    """Partial derivative of f at p (array of points allowed) along a coordinate axis."""
    cfg = cfg or DerivativeConfig()
    p = np.asarray(p, dtype=float)
    index = axis - f.first_index
    if not 0 <= index < p.shape[-1]:
        raise ValueError(f"Invalid axis {axis} for a {p.shape[-1]}-coordinate field")
    f.check(p)
    direction = np.zeros(p.shape[-1])
    direction[index] = 1.0

    if cfg.resolve(f) is DerivativeScheme.DUAL:
        value = f.evaluator(Dual(p, np.broadcast_to(direction, p.shape)))
        return value.eps if isinstance(value, Dual) else np.zeros_like(np.asarray(value, dtype=float))

    step = cfg.base_step * np.maximum(1.0, np.abs(p[..., index]))[..., None] * direction
    steps = [step / 2.0**k for k in range(cfg.richardson_levels + 1)]
    if _inside(f, p + step) and _inside(f, p - step):
        estimates = [(f.evaluator(p + s) - f.evaluator(p - s)) / (2.0 * s[..., index]) for s in steps]
        return richardson_table(estimates, 4.0)
    if not cfg.one_sided:
        raise DomainExceeded(f"{f.name}: central stencil leaves the domain along axis {axis}")
    sign = 1.0 if _inside(f, p + step) else -1.0
    if not _inside(f, p + sign * step):
        raise DomainExceeded(f"{f.name}: no one-sided stencil fits along axis {axis}")
    base = f.evaluator(p)
    estimates = [(f.evaluator(p + sign * s) - base) / (sign * s[..., index]) for s in steps]
    return richardson_table(estimates, 2.0)
