"""Convex graph-curve families and their dyadic calculus.

A graph curve here is a convex function on [0, T] vanishing to second order
at 0, with nonnegative and strictly increasing second derivative.  The module
provides exact derivative evaluators for the built-in families, monotone
inverses, the auxiliary comparison function h(t) = t^2 * gamma''(t), the
dyadic weights w_k = 1/gamma^{-1}(2^-k), the curvature-ratio limit b, and the
doubling partition of [0, T] driven by gamma''.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainError,
    EstimationError,
    RangeError,
    UnsupportedOrderError,
)
from .numerics import fit_log2_slope, invert_increasing

_VALIDATION_POINTS = 257


def _as_float_array(t):
    arr = np.asarray(t, dtype=float)
    return arr, (arr.ndim == 0)


class GraphCurve:
    """Base class: a convex graph profile on [0, domain_end]."""

    family = "abstract"
    has_third_derivative = True

    def __init__(self, domain_end):
        if not (0.0 < domain_end <= 1.0):
            raise DomainError(f"domain_end must lie in (0, 1], got {domain_end}")
        self.domain_end = float(domain_end)
        self._ratio_limit_cache = None
        self._validate()

    # -- family-specific core -------------------------------------------------

    def _eval_impl(self, t, order):
        raise NotImplementedError

    def curvature_ratio(self, t):
        """gamma''(t) / (t * gamma'''(t)), in a cancellation-safe form."""
        raise NotImplementedError

    def params(self):
        raise NotImplementedError

    # -- shared API -----------------------------------------------------------

    _eval_scalar = None

    def eval(self, t, order=0):
        """Evaluate the profile or one of its first three derivatives."""
        if order not in (0, 1, 2, 3):
            raise UnsupportedOrderError(f"order must be 0..3, got {order}")
        if order == 3 and not self.has_third_derivative:
            raise UnsupportedOrderError(
                f"{self.family} curves do not expose third derivatives"
            )
        if isinstance(t, (float, int)) and self._eval_scalar is not None:
            if not -1e-15 <= t <= self.domain_end * (1 + 1e-12):
                raise DomainError(
                    f"argument outside [0, {self.domain_end}] for {self.family} curve"
                )
            return self._eval_scalar(min(max(float(t), 0.0), self.domain_end), order)
        arr, scalar = _as_float_array(t)
        if np.any(arr < -1e-15) or np.any(arr > self.domain_end * (1 + 1e-12)):
            raise DomainError(
                f"argument outside [0, {self.domain_end}] for {self.family} curve"
            )
        arr = np.clip(arr, 0.0, self.domain_end)
        out = self._eval_impl(arr, order)
        return float(out) if scalar else out

    def inverse(self, s):
        """The unique t in [0, T] with gamma(t) = s (bisection + Newton)."""
        T = self.domain_end
        if not 0.0 <= s <= self.eval(T) * (1 + 1e-12):
            raise RangeError(f"{s} outside the range [0, {self.eval(T)}]")
        return invert_increasing(
            lambda t: self.eval(t), 0.0, T, min(s, self.eval(T)),
            deriv=lambda t: self.eval(t, 1),
        )

    def height_bound(self, t):
        """h(t) = t^2 * gamma''(t); dominates gamma and shares its range."""
        arr, scalar = _as_float_array(t)
        out = arr * arr * self.eval(arr, 2)
        return float(out) if scalar else out

    def height_bound_inverse(self, s):
        """The unique t with h(t) = s (h is strictly increasing)."""
        T = self.domain_end
        hT = self.height_bound(T)
        if not 0.0 <= s <= hT * (1 + 1e-12):
            raise RangeError(f"{s} outside the range [0, {hT}] of h")
        deriv = None
        if self.has_third_derivative:
            deriv = lambda t: 2 * t * self.eval(t, 2) + t * t * self.eval(t, 3)
        return invert_increasing(
            self.height_bound, 0.0, T, min(s, hT), deriv=deriv
        )

    def second_derivative_inverse(self, rho):
        """The unique t with gamma''(t) = rho."""
        T = self.domain_end
        g2T = self.eval(T, 2)
        if not 0.0 <= rho <= g2T * (1 + 1e-12):
            raise RangeError(f"{rho} outside the range [0, {g2T}] of gamma''")
        deriv = (lambda t: self.eval(t, 3)) if self.has_third_derivative else None
        return invert_increasing(
            lambda t: self.eval(t, 2), 0.0, T, min(rho, g2T), deriv=deriv
        )

    def dyadic_weight(self, k):
        """w_k = 1 / gamma^{-1}(2^-k); requires 2^-k within gamma's range."""
        s = 2.0 ** (-k)
        if s > self.eval(self.domain_end) * (1 + 1e-12):
            raise RangeError(f"2^-{k} exceeds gamma({self.domain_end})")
        return 1.0 / self.inverse(s)

    def dyadic_weight_extended(self, k):
        """Generalized-inverse weight: 1/T once 2^-k exceeds gamma(T).

        The grid square functions need a finite weight on every dyadic band;
        below the curve's range the generalized inverse saturates at T.
        """
        s = 2.0 ** (-k)
        if s >= self.eval(self.domain_end):
            return 1.0 / self.domain_end
        return 1.0 / self.inverse(s)

    def ratio_limit(self):
        """The limit b of gamma''(t)/(t gamma'''(t)) as t -> 0+.

        Evaluates the ratio on t = T * 2^-j and declares convergence once
        three successive differences drop below 1e-8, returning an Aitken
        extrapolation of the last three values.
        """
        if not self.has_third_derivative:
            raise UnsupportedOrderError(
                f"{self.family} curves do not support the curvature-ratio limit"
            )
        if self._ratio_limit_cache is not None:
            return self._ratio_limit_cache
        vals = []
        for j in range(1, 201):
            vals.append(self.curvature_ratio(self.domain_end * 2.0 ** (-j)))
            if len(vals) >= 4:
                d = np.abs(np.diff(vals[-4:]))
                if np.all(d < 1e-8):
                    v1, v2, v3 = vals[-3:]
                    denom = v3 - 2 * v2 + v1
                    if abs(denom) > 1e-300:
                        extrap = v3 - (v3 - v2) ** 2 / denom
                        if abs(extrap - v3) < 1e-6:
                            v3 = extrap
                    self._ratio_limit_cache = float(v3)
                    return self._ratio_limit_cache
        raise EstimationError(
            "curvature ratio did not converge within 200 dyadic samples"
        )

    def ratio_defect(self, s):
        """tau_b at s: curvature ratio at gamma''^{-1}(s), minus the limit b."""
        g2T = self.eval(self.domain_end, 2)
        if not 0.0 < s <= g2T * (1 + 1e-12):
            raise RangeError(f"{s} outside (0, {g2T}]")
        t = self.second_derivative_inverse(min(s, g2T))
        return TauSample(s=float(s), value=self.curvature_ratio(t) - self.ratio_limit())

    def ratio_defect_threshold(self, bound=0.01, probes=240):
        """Largest dyadic s* found with |tau_b| < bound for sampled s < s*."""
        g2T = self.eval(self.domain_end, 2)
        flags = []
        scales = [g2T * 2.0 ** (-j) for j in range(1, probes)]
        for s in scales:
            t = self.second_derivative_inverse(s)
            if t <= 0 or self.eval(t, 2) == 0.0:
                break
            flags.append(abs(self.curvature_ratio(t) - self.ratio_limit()) < bound)
        for i, flag in enumerate(flags):
            if flag and all(flags[i:]):
                return scales[i]
        raise EstimationError(f"no dyadic threshold with |tau_b| < {bound} found")

    @property
    def k_floor(self):
        """Smallest admissible dyadic index floor k0.

        Every k > k_floor must admit both the weight w_k and the partition
        anchor t_{k,0}, so 2^-k has to sit below gamma(T) as well as below
        gamma''(T)/4.  (On the unit-normalized domain both constraints
        coincide with the usual min{k : 2^-k <= gamma''(1)/4}.)
        """
        T = self.domain_end
        m = min(self.eval(T, 2) / 4.0, self.eval(T))
        return math.ceil(-math.log2(m))

    # -- validation -----------------------------------------------------------

    def _validate(self):
        T = self.domain_end
        # shrink the left edge until gamma'' is representable (flat families
        # underflow to exact zero near 0, which is fine but untestable there)
        lo = T * 2.0 ** -48
        while self.eval(lo, 2) == 0.0 and lo < T / 4:
            lo *= 4.0
        ts = np.geomspace(lo, T, _VALIDATION_POINTS)
        g2 = self.eval(ts, 2)
        if np.any(g2 < 0):
            raise DomainError(f"{self.family}: gamma'' negative on (0, {T}]")
        pos = g2[g2 > 0]
        if pos.size < 2 or np.any(np.diff(pos) <= 0):
            raise DomainError(
                f"{self.family}: gamma'' not strictly increasing on (0, {T}]"
            )
        if self.has_third_derivative:
            g3 = self.eval(ts, 3)
            scale = np.nanmax(np.abs(g3)) + 1.0
            if np.any(g3 < -1e-9 * scale):
                raise DomainError(f"{self.family}: gamma''' negative on (0, {T}]")

    def __repr__(self):
        items = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({items}, domain_end={self.domain_end!r})"


class PowerCurve(GraphCurve):
    """gamma(t) = t^m with m > 2; the finite-type model family."""

    family = "power"

    def __init__(self, m, domain_end=1.0):
        if m <= 2:
            raise DomainError(f"power exponent must exceed 2, got {m}")
        self.m = float(m)
        super().__init__(domain_end)

    def params(self):
        return {"m": self.m}

    def _eval_impl(self, t, order):
        m = self.m
        coef = 1.0
        for j in range(order):
            coef *= m - j
        power = m - order
        out = np.zeros_like(t)
        pos = t > 0
        out[pos] = coef * t[pos] ** power
        if power == 0:
            out[~pos] = coef
        elif power < 0:
            out[~pos] = np.inf
        return out

    def _eval_scalar(self, t, order):
        m = self.m
        coef = 1.0
        for j in range(order):
            coef *= m - j
        power = m - order
        if t == 0.0:
            return coef if power == 0 else (0.0 if power > 0 else math.inf)
        return coef * t ** power

    def curvature_ratio(self, t):
        return 1.0 / (self.m - 2.0)


class _FlatCore(GraphCurve):
    """Shared log-space machinery for exp(-g(t)) profiles.

    g(t) = exp_*^n(C t^-lam) with n >= 0 iterated exponentials.  Derivatives
    are assembled from ln|g'| and the normalized ratios r2 = g''/g'^2 and
    r3 = g'''/g'^3, which stay representable long after g itself overflows:

        gamma'   =  |g'|   exp(-g)
        gamma''  =  g'^2   exp(-g) (1 - r2)
        gamma''' =  |g'|^3 exp(-g) (1 - 3 r2 + r3)
    """

    def __init__(self, iterations, scale_c, lam, domain_end):
        self._n = int(iterations)
        self._c = float(scale_c)
        self._lam = float(lam)
        if self._n < 0 or self._c <= 0 or self._lam <= 0:
            raise DomainError("flat family needs n >= 0, C > 0, lambda > 0")
        super().__init__(domain_end)

    def _ratios(self, t):
        """Returns (ln|g'|, g, r2, r3, ok) on positive t, overflow-guarded."""
        lam, c, n = self._lam, self._c, self._n
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            u = c * t ** (-lam)
            lng1 = math.log(lam * c) - (lam + 1.0) * np.log(t)
            r2 = ((lam + 1.0) / (lam * c)) * t ** lam
            r3 = ((lam + 1.0) * (lam + 2.0) / ((lam * c) ** 2)) * t ** (2 * lam)
            v = u
            ok = np.isfinite(v) & (v < 1e306)
            for _ in range(n):
                lng1 = lng1 + v
                ev = np.exp(-np.minimum(v, 745.0))
                r3 = (r3 + 3.0 * r2 + 1.0) * ev * ev
                r2 = (r2 + 1.0) * ev
                v = np.exp(np.minimum(v, 745.0))
                ok &= v < 1e306
            g = v
        return lng1, g, r2, r3, ok

    def _eval_impl(self, t, order):
        out = np.zeros_like(t)
        pos = t > 0
        if not np.any(pos):
            return out
        lng1, g, r2, r3, ok = self._ratios(t[pos])
        with np.errstate(over="ignore", invalid="ignore"):
            expo = order * lng1 - g
            base = np.where(ok & (expo > -745.0), np.exp(np.minimum(expo, 709.0)), 0.0)
            if order == 0:
                val = base
            elif order == 1:
                val = base
            elif order == 2:
                val = base * (1.0 - r2)
            else:
                val = base * (1.0 - 3.0 * r2 + r3)
        out[pos] = np.where(np.isfinite(val), val, 0.0)
        return out

    def _eval_scalar(self, t, order):
        if t == 0.0:
            return 0.0
        lam, c, n = self._lam, self._c, self._n
        try:
            u = c * t ** (-lam)
        except OverflowError:
            return 0.0
        if not math.isfinite(u):
            return 0.0
        lng1 = math.log(lam * c) - (lam + 1.0) * math.log(t)
        r2 = ((lam + 1.0) / (lam * c)) * t ** lam
        r3 = ((lam + 1.0) * (lam + 2.0) / ((lam * c) ** 2)) * t ** (2 * lam)
        v = u
        for _ in range(n):
            lng1 += v
            if v > 709.0:
                return 0.0
            ev = math.exp(-v)
            r3 = (r3 + 3.0 * r2 + 1.0) * ev * ev
            r2 = (r2 + 1.0) * ev
            v = math.exp(v)
        expo = order * lng1 - v
        if expo <= -745.0:
            return 0.0
        base = math.exp(min(expo, 709.0))
        if order <= 1:
            return base
        if order == 2:
            return base * (1.0 - r2)
        return base * (1.0 - 3.0 * r2 + r3)

    def curvature_ratio(self, t):
        arr, scalar = _as_float_array(t)
        if np.any(arr <= 0):
            raise DomainError("curvature ratio needs t > 0")
        lng1, g, r2, r3, ok = self._ratios(arr)
        with np.errstate(over="ignore", invalid="ignore"):
            amp = np.where(lng1 < 709.0, np.exp(-np.minimum(lng1, 709.0)), 0.0)
            val = amp * (1.0 - r2) / (arr * (1.0 - 3.0 * r2 + r3))
            val = np.where(ok & np.isfinite(val), val, 0.0)
        return float(val) if scalar else val

    def _third_sign_threshold(self):
        """Largest t <= 1 with gamma''' >= 0 on (0, t], found by sign scan."""
        ts = np.geomspace(1e-4, 1.0, 4097)
        _, _, r2, r3, _ = self._ratios(ts)
        sign = 1.0 - 3.0 * r2 + r3
        bad = np.nonzero(sign < 0)[0]
        if bad.size == 0:
            return 1.0
        if bad[0] == 0:
            raise DomainError("no convex initial segment found")
        return float(ts[bad[0] - 1])


class ExpFlatCurve(_FlatCore):
    """gamma(t) = exp(-t^-a); curvature vanishing to infinite order at 0."""

    family = "expflat"

    def __init__(self, a, domain_end=None):
        if a <= 0:
            raise DomainError(f"flatness exponent must be positive, got {a}")
        self.a = float(a)
        if domain_end is None:
            # half the largest point up to which gamma''' stays nonnegative:
            # the smaller root of (a+1)(a+2) x^2 - 3a(a+1) x + a^2 in x = t^a
            x1 = (
                self.a
                * (3.0 * (self.a + 1.0) - math.sqrt((self.a + 1.0) * (5.0 * self.a + 1.0)))
                / (2.0 * (self.a + 1.0) * (self.a + 2.0))
            )
            domain_end = 0.5 * x1 ** (1.0 / self.a)
        super().__init__(0, 1.0, self.a, domain_end)

    def params(self):
        return {"a": self.a}

    def inverse(self, s):
        # closed form is exact and avoids bisection underflow at tiny s
        T = self.domain_end
        gT = self.eval(T)
        if not 0.0 <= s <= gT * (1 + 1e-12):
            raise RangeError(f"{s} outside the range [0, {gT}]")
        if s == 0.0:
            return 0.0
        return min(math.log(1.0 / s) ** (-1.0 / self.a), T)


class IterExpFlatCurve(_FlatCore):
    """gamma(t) = exp(-exp_*^n(C t^-lam)); even flatter than expflat."""

    family = "iterexpflat"

    def __init__(self, n, c, lam, domain_end=None):
        if int(n) < 1:
            raise DomainError("iterexpflat needs at least one exp iteration")
        self.n = int(n)
        self.c = float(c)
        self.lam = float(lam)
        if domain_end is None:
            probe = _FlatCore.__new__(_FlatCore)
            probe._n, probe._c, probe._lam = self.n, self.c, self.lam
            domain_end = 0.5 * probe._third_sign_threshold()
        super().__init__(self.n, self.c, self.lam, domain_end)

    def params(self):
        return {"n": self.n, "c": self.c, "lam": self.lam}


class TabulatedCurve(GraphCurve):
    """Monotone convex interpolation of (t, gamma(t)) samples.

    Exposes derivative orders 0..2 only; third differences of tabulated data
    are numerically unreliable, so the dyadic calculus that needs gamma'''
    rejects these curves.
    """

    family = "tabulated"
    has_third_derivative = False

    def __init__(self, t, y):
        from scipy.interpolate import PchipInterpolator

        t = np.asarray(t, dtype=float)
        y = np.asarray(y, dtype=float)
        if t.ndim != 1 or t.shape != y.shape or t.size < 4:
            raise DomainError("tabulated curves need >= 4 aligned samples")
        if t[0] != 0.0 or y[0] != 0.0:
            raise DomainError("tabulated curves must start at (0, 0)")
        if np.any(np.diff(t) <= 0):
            raise DomainError("sample abscissae must be strictly increasing")
        slopes = np.diff(y) / np.diff(t)
        if np.any(slopes < 0) or np.any(np.diff(slopes) <= 0):
            raise DomainError("samples are not strictly convex increasing")
        self._interp = PchipInterpolator(t, y)
        self._d1 = self._interp.derivative(1)
        self._d2 = self._interp.derivative(2)
        self._knots = (t.copy(), y.copy())
        super().__init__(float(t[-1]))

    def params(self):
        t, y = self._knots
        return {"t": list(t), "y": list(y)}

    def _eval_impl(self, t, order):
        if order == 0:
            return np.asarray(self._interp(t), dtype=float)
        if order == 1:
            return np.asarray(self._d1(t), dtype=float)
        return np.asarray(self._d2(t), dtype=float)

    def curvature_ratio(self, t):
        raise UnsupportedOrderError("tabulated curves have no third derivative")

    def _validate(self):
        # convexity is certified on the data; the pchip second derivative is
        # only piecewise smooth, so the generic grid check does not apply
        ts = np.linspace(self.domain_end * 1e-3, self.domain_end, 64)
        if np.any(self._eval_impl(ts, 2) < -1e-9):
            raise DomainError("interpolated second derivative went negative")


@dataclass(frozen=True)
class TauSample:
    """One sample of the centered curvature ratio tau_b."""

    s: float
    value: float


@dataclass(frozen=True)
class PartitionTable:
    """The doubling partition of [0, T] for one dyadic index k.

    rho[n] doubles from rho[0] = gamma''(t0) until it would exceed half of
    gamma''(T), at which point it jumps to gamma''(T) and the t-sequence
    reaches the domain end; nk is the index of that terminal entry.
    """

    k: int
    t0: float
    rho: tuple
    t: tuple
    nk: int
    ratio_limit: float

    def rows(self):
        return [(self.k, n, self.t[n], self.rho[n]) for n in range(self.nk + 1)]

    def to_csv(self, stream=None):
        own = stream is None
        if own:
            stream = io.StringIO()
        stream.write("k,n,t,rho\r\n")
        for k, n, t, rho in self.rows():
            stream.write(f"{k},{n},{t!r},{rho!r}\r\n")
        if own:
            return stream.getvalue()
        return None


def partition(curve, k):
    """Build the gamma''-doubling partition table at dyadic index k."""
    if k <= curve.k_floor:
        raise DomainError(f"k must exceed k_floor = {curve.k_floor}, got {k}")
    T = curve.domain_end
    t0 = curve.height_bound_inverse(2.0 ** (-k))
    rho0 = curve.eval(t0, 2)
    g2T = curve.eval(T, 2)
    if not 0.0 < rho0 <= 0.5 * g2T:
        raise DomainError(
            f"degenerate partition at k={k}: gamma''(t0) = {rho0} vs gamma''(T) = {g2T}"
        )
    rho = [rho0]
    ts = [t0]
    n = 1
    while True:
        if rho0 <= 2.0 ** (-n - 1) * g2T:
            r = 2.0 ** n * rho0
            tn = curve.second_derivative_inverse(r)
        else:
            r = g2T
            tn = T
        rho.append(r)
        ts.append(tn)
        if r == g2T:
            nk = n
            break
        n += 1
        if n > 2000:
            raise EstimationError("partition failed to terminate")
    limit = curve.ratio_limit() if curve.has_third_derivative else float("nan")
    return PartitionTable(k=k, t0=t0, rho=tuple(rho), t=tuple(ts), nk=nk, ratio_limit=limit)


def partition_brute_force(curve, k, grid_points=10_000_000):
    """Scan oracle for the partition: monotone search on a dense t-grid.

    Independent of the bisection path; used to freeze expected tables.
    """
    T = curve.domain_end
    ts = np.linspace(T / grid_points, T, grid_points)
    h = ts * ts * curve.eval(ts, 2)
    g2 = curve.eval(ts, 2)
    g2T = g2[-1]
    i0 = int(np.searchsorted(h, 2.0 ** (-k)))
    t0 = ts[min(i0, grid_points - 1)]
    rho0 = g2[min(i0, grid_points - 1)]
    rho = [rho0]
    tlist = [t0]
    n = 1
    while True:
        if rho0 <= 2.0 ** (-n - 1) * g2T:
            r = 2.0 ** n * rho0
            j = int(np.searchsorted(g2, r))
            tlist.append(ts[min(j, grid_points - 1)])
            rho.append(r)
        else:
            rho.append(g2T)
            tlist.append(T)
            return PartitionTable(
                k=k, t0=t0, rho=tuple(rho), t=tuple(tlist), nk=n, ratio_limit=float("nan")
            )
        n += 1


@dataclass(frozen=True)
class WeightScan:
    """Sup of 2^{-n(b+eps)} w_k t_{k,n} over a k-range, with per-k trace."""

    eps: float
    ratio_limit: float
    ks: tuple
    per_k: tuple
    max_value: float
    trend_slope: float


def partition_weight_scan(curve, k_max, eps):
    """Scan 2^{-n(b+eps)} * w_k * t_{k,n} over all k in (k_floor, k_max]."""
    if eps <= 0:
        raise DomainError("eps must be positive")
    b = curve.ratio_limit()
    ks = []
    per_k = []
    for k in range(curve.k_floor + 1, k_max + 1):
        table = partition(curve, k)
        w = curve.dyadic_weight(k)
        vals = [
            2.0 ** (-n * (b + eps)) * w * table.t[n] for n in range(table.nk + 1)
        ]
        ks.append(k)
        per_k.append(max(vals))
    if not ks:
        raise DomainError(f"empty k-range: k_floor = {curve.k_floor} >= k_max = {k_max}")
    slope = fit_log2_slope(np.array(ks), np.array(per_k))
    return WeightScan(
        eps=eps,
        ratio_limit=b,
        ks=tuple(ks),
        per_k=tuple(per_k),
        max_value=float(max(per_k)),
        trend_slope=slope,
    )


# -- TOML (de)serialization ----------------------------------------------------

_FAMILIES = {
    "power": (PowerCurve, {"m"}),
    "expflat": (ExpFlatCurve, {"a"}),
    "iterexpflat": (IterExpFlatCurve, {"n", "c", "lam"}),
    "tabulated": (TabulatedCurve, {"t", "y"}),
}


def curve_from_table(table):
    """Build a curve from a parsed TOML table like {family='power', m=4.0}."""
    if "family" not in table:
        raise DomainError("curve table needs a 'family' key")
    family = table["family"]
    if family not in _FAMILIES:
        raise DomainError(f"unknown curve family {family!r}")
    cls, required = _FAMILIES[family]
    allowed = required | {"family", "domain_end"}
    unknown = set(table) - allowed
    if unknown:
        raise DomainError(f"unknown curve keys: {sorted(unknown)}")
    missing = required - set(table)
    if missing:
        raise DomainError(f"missing curve keys: {sorted(missing)}")
    kwargs = {key: table[key] for key in required}
    if "domain_end" in table and family != "tabulated":
        kwargs["domain_end"] = table["domain_end"]
    return cls(**kwargs)


def curve_to_table(curve):
    table = {"family": curve.family}
    table.update(curve.params())
    if curve.family != "tabulated":
        table["domain_end"] = curve.domain_end
    return table
