"""Quadrature, root finding and extrapolation helpers shared by the analysis modules."""
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache

import numpy as np
from scipy import optimize, special

from lib.errors import NoSignChange, NonConvergent

logger = logging.getLogger('confhor.numerics')


@lru_cache(maxsize=64)
def _legendre(n):
    x, w = special.roots_legendre(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n, a=-1.0, b=1.0):
    """Return (nodes, weights) of the n-point Gauss-Legendre rule on [a, b]."""
    if n < 1:
        raise ValueError(f"Invalid Gauss-Legendre order: {n}")
    x, w = _legendre(int(n))
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * x, half * w


def gauss_legendre_batch(n, a, b):
    """Per-interval rules: a and b are arrays, returned nodes have shape a.shape + (n,)."""
    x, w = _legendre(int(n))
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * x, half * w


@lru_cache(maxsize=16)
def gauss_laguerre(n):
    """Nodes and weights for ∫₀^∞ e^{−s} f(s) ds."""
    if n < 1:
        raise ValueError(f"Invalid Gauss-Laguerre order: {n}")
    x, w = special.roots_laguerre(int(n))
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def thread_count():
    """Worker cap from CONFHOR_THREADS (0 or unset means one per CPU)."""
    raw = os.getenv('CONFHOR_THREADS', '0').strip() or '0'
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"Invalid CONFHOR_THREADS: {raw}")
    if value < 0:
        raise ValueError(f"Invalid CONFHOR_THREADS: {raw}")
    return value or (os.cpu_count() or 1)


def parallel_map(fn, items, threads=None):
    """Map fn over items with a thread pool; results keep the input order."""
    items = list(items)
    workers = min(threads or thread_count(), max(len(items), 1))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def brent_root(func, a, b, rtol=4.0 * np.finfo(float).eps, xtol=1e-300, maxiter=200):
    fa, fb = func(a), func(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if np.sign(fa) == np.sign(fb):
        raise NoSignChange(f"No sign change on [{a}, {b}]: f = ({fa}, {fb})")
    return optimize.brentq(func, a, b, xtol=xtol, rtol=rtol, maxiter=maxiter)


def bisect_vectorized(func, lo, hi, rtol=1e-15, maxiter=200):
    """Bisection on many brackets at once.

    func maps an array of abscissae to an array of values of the same shape.
    Entries whose bracket does not change sign come back as NaN.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    f_lo = func(lo)
    f_hi = func(hi)
    valid = np.isfinite(f_lo) & np.isfinite(f_hi) & (np.sign(f_lo) != np.sign(f_hi))
    exact_lo = f_lo == 0.0
    exact_hi = f_hi == 0.0
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        width = np.abs(hi - lo)
        if np.all(~valid | (width <= rtol * np.maximum(np.abs(mid), 1e-300))):
            break
        f_mid = func(mid)
        left = np.sign(f_mid) == np.sign(f_lo)
        lo = np.where(left, mid, lo)
        f_lo = np.where(left, f_mid, f_lo)
        hi = np.where(left, hi, mid)
        f_hi = np.where(left, f_hi, f_mid)
    # regula falsi polish on the final bracket
    denom = f_hi - f_lo
    with np.errstate(divide='ignore', invalid='ignore'):
        root = np.where(denom != 0.0, lo - f_lo * (hi - lo) / denom, 0.5 * (lo + hi))
    root = np.where((root - lo) * (root - hi) <= 0.0, root, 0.5 * (lo + hi))
    root = np.where(exact_lo, lo, np.where(exact_hi, hi, root))
    return np.where(valid | exact_lo | exact_hi, root, np.nan)


def newton_polish(func, dfunc, x):
    """One Newton step, kept only when it does not increase |f|."""
    f = func(x)
    d = dfunc(x)
    with np.errstate(divide='ignore', invalid='ignore'):
        step = np.where(d != 0.0, f / d, 0.0)
    candidate = x - step
    better = np.abs(func(candidate)) <= np.abs(f)
    return np.where(better, candidate, x)


def aitken(values):
    """Aitken delta-squared estimate of the limit of the last three values."""
    if len(values) < 3:
        raise NonConvergent(f"Aitken extrapolation needs three values, got {len(values)}")
    x0, x1, x2 = (float(v) for v in values[-3:])
    d1, d2 = x1 - x0, x2 - x1
    floor = 64.0 * np.finfo(float).eps * max(abs(x0), abs(x1), abs(x2))
    if abs(d2) <= floor:
        return x2, abs(d2)
    if abs(d1) <= floor:
        return x2, abs(d2)
    if abs(d2) >= abs(d1):
        raise NonConvergent(f"Cutoff sequence is not contracting: steps {d1:.3e}, {d2:.3e}")
    denom = d2 - d1
    limit = x2 - d2 * d2 / denom
    return limit, abs(limit - x2)


def richardson(coarse, fine, ratio=2.0, order=2):
    """Richardson extrapolation of two estimates with step ratio and error order."""
    factor = ratio ** order
    return (factor * fine - coarse) / (factor - 1.0)


def fit_power_law(x, y):
    """Fit |y| ~ C x^p by least squares in log-log space; return p."""
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    mask = (x > 0) & (y > 0) & np.isfinite(y)
    if mask.sum() < 2:
        return float('nan')
    slope, _ = np.polyfit(np.log(x[mask]), np.log(y[mask]), 1)
    return float(slope)


def convergence_order(values, ratio=2.0, floor=1e-12):
    """Observed order from three successive refinements.

    Returns inf when the last two values agree to the relative floor.
    """
    v0, v1, v2 = (float(v) for v in values[-3:])
    scale = max(abs(v2), 1e-300)
    e1, e2 = abs(v0 - v1), abs(v1 - v2)
    if e2 <= floor * scale:
        return float('inf')
    if e1 <= floor * scale:
        return 0.0
    return float(np.log(e1 / e2) / np.log(ratio))
