"""Root finding and quadrature helpers used throughout the package."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import RangeError


def invert_increasing(fn, lo, hi, target, rel_tol=1e-12, deriv=None):
    """Solve fn(t) = target for a scalar target, fn strictly increasing on [lo, hi].

    Bracketing bisection down to ``rel_tol`` relative width, followed by a
    Newton polish when ``deriv`` is supplied.  fn(lo) <= target <= fn(hi) is
    required; endpoint targets short-circuit to the endpoints.
    """
    flo = fn(lo)
    fhi = fn(hi)
    if target < flo or target > fhi:
        raise RangeError(f"target {target!r} outside value range [{flo!r}, {fhi!r}]")
    if target == flo:
        return lo
    if target == fhi:
        return hi
    a, b = lo, hi
    for _ in range(200):
        mid = 0.5 * (a + b)
        if fn(mid) < target:
            a = mid
        else:
            b = mid
        if b - a <= rel_tol * max(abs(a), abs(b), 1e-300):
            break
    t = 0.5 * (a + b)
    if deriv is not None:
        for _ in range(3):
            d = deriv(t)
            if d <= 0 or not math.isfinite(d):
                break
            step = (fn(t) - target) / d
            t_new = t - step
            if not (a <= t_new <= b):
                break
            t = t_new
    return t


def invert_increasing_batch(fn, lo, hi, targets, iters=90):
    """Vectorized bisection: solve fn(t) = targets for an array of targets.

    fn must accept numpy arrays and be increasing on [lo, hi].  Targets are
    clipped to the value range; callers are expected to have range-checked.
    """
    targets = np.asarray(targets, dtype=float)
    a = np.full(targets.shape, lo, dtype=float)
    b = np.full(targets.shape, hi, dtype=float)
    for _ in range(iters):
        mid = 0.5 * (a + b)
        below = fn(mid) < targets
        a = np.where(below, mid, a)
        b = np.where(below, b, mid)
    return 0.5 * (a + b)


def golden_max(fn, a, b, iters=80):
    """Golden-section maximization of a unimodal fn on [a, b].

    Returns (argmax, max).  On multimodal input it still returns the best
    point evaluated, which is all the sweep refinements rely on.
    """
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = fn(x1), fn(x2)
    best_x, best_f = (x1, f1) if f1 >= f2 else (x2, f2)
    for _ in range(iters):
        if f1 < f2:
            a = x1
            x1, f1 = x2, f2
            x2 = a + invphi * (b - a)
            f2 = fn(x2)
        else:
            b = x2
            x2, f2 = x1, f1
            x1 = b - invphi * (b - a)
            f1 = fn(x1)
        cand = (x1, f1) if f1 >= f2 else (x2, f2)
        if cand[1] > best_f:
            best_x, best_f = cand
        if b - a <= 1e-14 * max(abs(a), abs(b), 1.0):
            break
    return best_x, best_f


@lru_cache(maxsize=16)
def gauss_rule(order):
    """Cached Gauss-Legendre nodes/weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def gauss_panels(fn, a, b, n_panels, order=16):
    """Composite Gauss-Legendre integral of a smooth vectorized fn on [a, b]."""
    x, w = gauss_rule(order)
    edges = np.linspace(a, b, n_panels + 1)
    width = (b - a) / n_panels
    nodes = edges[:-1, None] + width * x[None, :]
    vals = fn(nodes.ravel()).reshape(n_panels, order)
    return float(np.sum(vals @ w) * width)


def cumulative_gauss(fn, breakpoints, order=16):
    """Integrals of fn over consecutive [b_i, b_{i+1}] intervals, vectorized."""
    pts = np.asarray(breakpoints, dtype=float)
    x, w = gauss_rule(order)
    widths = np.diff(pts)
    nodes = pts[:-1, None] + widths[:, None] * x[None, :]
    vals = fn(nodes.ravel()).reshape(len(widths), order)
    return (vals @ w) * widths


def fit_loglog_slope(x, y):
    """Least-squares slope of log(y) against log(x); ignores nonpositive y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    good = (x > 0) & (y > 0) & np.isfinite(y)
    if good.sum() < 2:
        return float("nan")
    lx, ly = np.log(x[good]), np.log(y[good])
    return float(np.polyfit(lx, ly, 1)[0])


def fit_log2_slope(k, y):
    """Least-squares slope of log2(y) against k; ignores nonpositive y."""
    k = np.asarray(k, dtype=float)
    y = np.asarray(y, dtype=float)
    good = (y > 0) & np.isfinite(y)
    if good.sum() < 2:
        return float("nan")
    return float(np.polyfit(k[good], np.log2(y[good]), 1)[0])


def golden_sequence(count, dims=1, start=0):
    """Low-discrepancy points in [0,1)^dims (additive golden-ratio lattice)."""
    # generalized golden ratios per Roberts; deterministic, no seed needed
    g = 1.0
    for _ in range(12):
        g = (1.0 + g) ** (1.0 / (dims + 1.0))
    alphas = np.array([(1.0 / g) ** (j + 1) for j in range(dims)])
    idx = np.arange(start, start + count, dtype=float)[:, None]
    return np.mod(0.5 + idx * alphas[None, :], 1.0)
