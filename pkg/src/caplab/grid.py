"""Periodic-torus laboratory for averaging and maximal operators.

Fields live on an n-by-n grid over the unit torus (n a power of two).
Averages over dilated curves are computed by rasterizing the curve measure
onto the grid with bilinear splatting (positive weights, so positivity and
total mass survive exactly) and convolving via FFT.  Dyadic frequency
projectors share the bump profile in :mod:`caplab.bump`, so their
multipliers telescope to exactly 1 on every grid frequency.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .bump import band_bump
from .errors import DomainError, RangeError, ResolutionError, ScaleError
from .numerics import gauss_rule

_HEADER = struct.Struct("<4sIII")
_MAGIC = b"CAPF"


@dataclass
class Field2D:
    """Samples of a function on the unit torus; row i is x2 = i/n."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DomainError("field values must be square")
        n = v.shape[0]
        if n & (n - 1) or n < 4:
            raise DomainError(f"grid size must be a power of two >= 4, got {n}")
        self.values = v

    @property
    def n(self):
        return self.values.shape[0]

    def norm(self, p=2.0):
        """Discrete L^p norm with the continuum normalization (cell area 1/n^2)."""
        v = np.abs(self.values)
        if p == math.inf:
            return float(v.max())
        return float((v ** p).mean() ** (1.0 / p))


def field_of(values):
    return Field2D(np.asarray(values, dtype=float))


def constant_field(n, value=1.0):
    return Field2D(np.full((n, n), float(value)))


def random_bandlimited(n, band, seed):
    """Seeded random real field with spectrum supported in |m| <= band."""
    rng = np.random.default_rng(seed)
    m = np.fft.fftfreq(n, d=1.0 / n)
    m1, m2 = np.meshgrid(m, m, indexing="xy")
    mask = (m1 ** 2 + m2 ** 2) <= band ** 2
    spec = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) * mask
    vals = np.fft.ifft2(spec).real
    nrm = math.sqrt(float((vals ** 2).mean()))
    return Field2D(vals / (nrm if nrm > 0 else 1.0))


def save_field(field, path):
    """CAPF format: 16-byte header (magic, u32 n, u32 reserved, u32 pad),
    then n*n little-endian float64, row-major."""
    v = np.asarray(field.values)
    if np.iscomplexobj(v):
        raise DomainError("CAPF files hold real fields only")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, field.n, 0, 0))
        fh.write(np.ascontiguousarray(v, dtype="<f8").tobytes())


def load_field(path):
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        magic, n, _, _ = _HEADER.unpack(head)
        if magic != _MAGIC:
            raise DomainError(f"not a CAPF field file: magic {magic!r}")
        data = np.frombuffer(fh.read(8 * n * n), dtype="<f8").reshape(n, n)
    return Field2D(data.copy())


# -- dyadic frequency decomposition ---------------------------------------------


def frequency_radii(n):
    m = np.fft.fftfreq(n, d=1.0 / n)
    m1, m2 = np.meshgrid(m, m, indexing="xy")
    return np.hypot(m1, m2)


def k_top(n):
    """Smallest K whose low-pass bump is 1 on all grid frequencies."""
    rmax = math.sqrt(2.0) * n / 2.0
    return math.ceil(math.log2(2.0 * rmax))


@dataclass(frozen=True)
class SpectralProjector:
    """One dyadic band of the inhomogeneous frequency decomposition."""

    k: int
    multiplier: np.ndarray

    def apply(self, field):
        spec = np.fft.fft2(field.values) * self.multiplier
        out = np.fft.ifft2(spec)
        if not np.iscomplexobj(field.values):
            out = out.real
        return Field2D(out)


def projector(n, k):
    if k < 0 or k > k_top(n):
        raise RangeError(f"band {k} outside [0, {k_top(n)}] for n={n}")
    return SpectralProjector(k, band_bump(k, frequency_radii(n)))


def band_project(field, k):
    return projector(field.n, k).apply(field)


# -- curve rasterization and averages ---------------------------------------------


def _body_nodes(body, spacing):
    pts, wts = [], []
    x, w = gauss_rule(8)
    for piece in body.pieces:
        plen = piece.arclength()
        panels = max(1, math.ceil(plen / (8.0 * spacing)))
        edges = np.linspace(0.0, 1.0, panels + 1)
        us = (edges[:-1, None] + np.diff(edges)[:, None] * x[None, :]).ravel()
        speed = piece.speed(us)
        pts.append(piece.point(us))
        wts.append((speed.reshape(panels, 8) * w[None, :]).ravel() * np.diff(edges).repeat(8))
    return np.vstack(pts), np.concatenate(wts)


def _local_nodes(local, spacing):
    eps = local.aperture
    x, w = gauss_rule(8)
    panels = max(2, math.ceil(2.0 * eps / (8.0 * spacing)))
    edges = np.linspace(-eps, eps, panels + 1)
    ts = (edges[:-1, None] + np.diff(edges)[:, None] * x[None, :]).ravel()
    wts = (np.diff(edges)[:, None] * w[None, :]).ravel()
    ys = local.height - local.gamma(np.abs(ts))
    return np.stack([ts, ys], axis=-1), wts


def _interval_nodes(curve, r, spacing):
    x, w = gauss_rule(8)
    panels = max(1, math.ceil(r / (8.0 * spacing)))
    edges = np.linspace(0.0, r, panels + 1)
    ts = (edges[:-1, None] + np.diff(edges)[:, None] * x[None, :]).ravel()
    wts = (np.diff(edges)[:, None] * w[None, :]).ravel()
    ys = curve.eval(ts)
    return np.stack([ts, ys], axis=-1), wts


def splat_kernel(n, positions, weights):
    """Bilinear rasterization of a weighted point measure onto the torus grid."""
    pos = np.asarray(positions, dtype=float) * n
    i = np.floor(pos).astype(np.int64)
    frac = pos - i
    kernel = np.zeros((n, n))
    fx, fy = frac[:, 0], frac[:, 1]
    w = np.asarray(weights, dtype=float)
    ix, iy = i[:, 0] % n, i[:, 1] % n
    jx, jy = (i[:, 0] + 1) % n, (i[:, 1] + 1) % n
    # rows index x2, columns index x1
    np.add.at(kernel, (iy, ix), w * (1 - fx) * (1 - fy))
    np.add.at(kernel, (iy, jx), w * fx * (1 - fy))
    np.add.at(kernel, (jy, ix), w * (1 - fx) * fy)
    np.add.at(kernel, (jy, jx), w * fx * fy)
    return kernel


def _kernel_for(geometry, k, n, wrap="full"):
    from .body import ConvexBody
    from .oscint import LocalCurve

    h = 1.0 / n
    spacing = h / (4.0 * 2.0 ** k)
    if isinstance(geometry, ConvexBody):
        pts, wts = _body_nodes(geometry, spacing)
    elif isinstance(geometry, LocalCurve):
        pts, wts = _local_nodes(geometry, spacing)
    else:  # a graph curve: the one-sided average over [0, T]
        pts, wts = _interval_nodes(geometry, geometry.domain_end, spacing)
    scaled = pts * 2.0 ** k
    ext = scaled.max(axis=0) - scaled.min(axis=0)
    if wrap == "full" and max(ext) >= 0.5:
        raise ScaleError(
            f"dilated curve extent {tuple(ext)} does not fit on the torus"
        )
    if wrap == "vertical" and ext[1] >= 0.5:
        raise ScaleError(f"dilated curve height {ext[1]} does not fit on the torus")
    return splat_kernel(n, scaled, wts)


def _convolve(field, kernel):
    spec = np.fft.fft2(field.values) * np.fft.fft2(kernel)
    out = np.fft.ifft2(spec)
    if not np.iscomplexobj(field.values):
        out = out.real
    return Field2D(out)


def dilated_average(field, geometry, k, wrap="full"):
    """A_k f: convolution of f with the 2^k-dilate of the curve measure.

    geometry may be a ConvexBody (boundary arclength measure), a LocalCurve
    (the aperture average against dt), or a GraphCurve (one-sided average).
    """
    return _convolve(field, _kernel_for(geometry, k, field.n, wrap=wrap))


def lacunary_max(field, geometry, k_min, k_max, wrap="full"):
    """sup over k in [k_min, k_max] of |A_k f| (a lower bound for the full sup)."""
    if k_max < k_min:
        raise DomainError("empty dyadic range")
    from .body import ConvexBody

    if isinstance(geometry, ConvexBody) and not geometry.origin_interior:
        raise DomainError("dilation maximal operator needs the origin inside")
    out = None
    for k in range(k_min, k_max + 1):
        a = np.abs(dilated_average(field, geometry, k, wrap=wrap).values)
        out = a if out is None else np.maximum(out, a)
    return Field2D(out)


# -- thin-strip lower bounds -----------------------------------------------------


@dataclass(frozen=True)
class StripSpec:
    """Geometry of one thin-strip test: full-torus-wide strip of half-height eta."""

    q: float
    eta: float
    k0: int
    ks: tuple
    aperture: float
    height: float


@dataclass(frozen=True)
class StripReport:
    spec: StripSpec
    fractions: tuple      # per k: share of F-points meeting the bound
    bounds: tuple         # per k: the tested lower bound
    partial_sums: tuple   # per k: running sum |F| gamma^{-1}(2^-k eta)^q / (4 eta)
    norm_q: float


def strip_field(n, eta, q):
    """f_eta: the normalized indicator of the strip |x2| <= eta (all x1)."""
    x2 = np.arange(n) / n
    dist = np.minimum(x2, 1.0 - x2)
    rows = dist <= eta * (1 + 1e-12)
    vals = np.zeros((n, n))
    vals[rows, :] = (2.0 * eta) ** (-1.0 / q)
    return Field2D(vals)


def strip_spec(curve, q=2.0, eta_cells=32, n=1024, k_span=4,
               aperture=None, height=1.0 / 16.0):
    """Pick the dyadic range for the strip test on an n-grid.

    k0 is the smallest k with 2^k >= eta * max(1/(4L), 1/gamma(eps)).  The
    strip spans the whole torus in x1, so the averaging curve may wrap in
    x1 with no effect (the strip is x1-invariant); only the vertical extent
    has to fit.
    """
    if eta_cells < 8:
        raise ResolutionError("strip needs at least 8 cells across")
    eta = eta_cells / n
    if aperture is None:
        aperture = 0.85 * curve.domain_end
    g_eps = curve.eval(aperture)
    if g_eps <= 0:
        raise ScaleError("aperture too small: curve vanishes there")
    k0 = math.ceil(math.log2(eta * max(1.0 / (4.0 * height), 1.0 / g_eps)))
    ks = tuple(range(k0, k0 + k_span + 1))
    top = 2.0 ** ks[-1] * height + eta
    if top >= 0.5:
        raise ScaleError(
            f"strip test does not fit: top band at x2={top}; "
            "reduce height or the curve is too flat for this grid"
        )
    if 2.0 ** (-k0) * eta > curve.eval(curve.domain_end):
        raise ScaleError("2^-k0 eta exceeds the curve range; enlarge aperture")
    return StripSpec(q=float(q), eta=eta, k0=k0, ks=ks,
                     aperture=float(aperture), height=float(height))


def strip_test(curve, spec=None, n=1024, slack=0.9, **kw):
    """Check the discrete lower bound M f_eta >= slack * (2 eta)^{-1/q} gamma^{-1}(2^-k eta).

    Returns per-k fractions of F-set grid points meeting the bound, along
    with the running lower-bound sums for the norm chain.
    """
    from .oscint import LocalCurve

    if spec is None:
        spec = strip_spec(curve, n=n, **kw)
    f = strip_field(n, spec.eta, spec.q)
    x2 = np.arange(n) / n
    g_eps = curve.eval(spec.aperture)
    averages = {}
    for k in spec.ks:
        # trim the aperture to the t that can land inside the strip from the
        # tested rows (profile height up to 2 * 2^-k eta); this leaves A_k
        # unchanged on its F-band while keeping the dilated kernel short
        # enough for the torus, and only removes mass elsewhere, so the
        # reported maximal field stays a pointwise lower bound
        eps_k = curve.inverse(min(g_eps, 2.0 ** (1 - k) * spec.eta))
        local = LocalCurve(curve, eps_k, spec.height)
        averages[k] = dilated_average(f, local, k, wrap="vertical").values
    mf = np.maximum.reduce([np.abs(a) for a in averages.values()])
    fractions, bounds, partial = [], [], []
    running = 0.0
    for k in spec.ks:
        ginv = curve.inverse(2.0 ** (-k) * spec.eta)
        bound = slack * (2.0 * spec.eta) ** (-1.0 / spec.q) * ginv
        lo = 2.0 ** k * spec.height
        hi = lo + spec.eta / 4.0
        rows = (x2 >= lo) & (x2 < hi)
        frac = float((mf[rows, :] >= bound).mean()) if rows.any() else 0.0
        fractions.append(frac)
        bounds.append(bound)
        running += (spec.eta / 4.0) * ginv ** spec.q / (4.0 * spec.eta)
        partial.append(running)
    return StripReport(
        spec=spec, fractions=tuple(fractions), bounds=tuple(bounds),
        partial_sums=tuple(partial), norm_q=f.norm(spec.q),
    )


def strip_masks_disjoint(spec, n):
    """True when the F-bands for successive k do not share a grid row."""
    seen = np.zeros(n, dtype=bool)
    x2 = np.arange(n) / n
    for k in spec.ks:
        lo = 2.0 ** k * spec.height
        rows = (x2 >= lo) & (x2 < lo + spec.eta / 4.0)
        if np.any(seen & rows):
            return False
        seen |= rows
    return True


# -- weighted square function ------------------------------------------------------


@dataclass(frozen=True)
class SquareFunctionResult:
    ratio: float          # ||Sf||_p / ||f||_p, nan for zero input (flagged)
    zero_input: bool
    ks: tuple
    weights: tuple


def band_weights(geometry, ks, n_directions=180):
    """w_k from a graph curve or omega_k from a body, for the given bands."""
    from .body import ConvexBody
    from .criterion import sup_cap_function

    if isinstance(geometry, ConvexBody):
        return [1.0 / sup_cap_function(geometry, 2.0 ** (-k), n_directions)
                for k in ks]
    return [geometry.dyadic_weight_extended(k) for k in ks]


def square_function(field, geometry, p=2.0, ks=None, weights=None, wrap="full"):
    """S f: weighted ell^2 sum over bands of the projected averages.

    The average acts once at unit scale; each band k > 0 is then localized
    and weighted.  Returns the field norm ratio with a zero-input flag.
    """
    n = field.n
    if ks is None:
        ks = tuple(range(1, k_top(n) + 1))
    if weights is None:
        weights = band_weights(geometry, ks)
    af = dilated_average(field, geometry, 0, wrap=wrap)
    spec = np.fft.fft2(af.values)
    radii = frequency_radii(n)
    acc = np.zeros((n, n))
    for k, w in zip(ks, weights):
        piece = np.fft.ifft2(spec * band_bump(k, radii))
        if not np.iscomplexobj(field.values):
            piece = piece.real
        acc += (w * np.abs(piece)) ** 2
    sf = Field2D(np.sqrt(acc))
    fn = field.norm(p)
    if fn == 0.0:
        return sf, SquareFunctionResult(float("nan"), True, tuple(ks), tuple(weights))
    return sf, SquareFunctionResult(sf.norm(p) / fn, False, tuple(ks), tuple(weights))


# -- maximal function along the graph curve ----------------------------------------


def along_curve_max(field, curve, min_cells=4):
    """sup over dyadic r of the normalized averages of |f| along (t, gamma(t)).

    Dyadic r = T 2^-j down to min_cells grid cells; for nonnegative f the
    dyadic sup is within a factor 2 of the full sup over r.
    """
    n = field.n
    T = curve.domain_end
    J = int(math.floor(math.log2(T * n / min_cells)))
    if J < 0:
        raise ResolutionError("grid too coarse for even one dyadic scale")
    g = Field2D(np.abs(field.values))
    out = None
    h = 1.0 / n
    for j in range(J + 1):
        r = T * 2.0 ** (-j)
        pts, wts = _interval_nodes(curve, r, h / 4.0)
        kern = splat_kernel(n, pts, wts / r)
        a = _convolve(g, kern).values
        out = a if out is None else np.maximum(out, a)
    return Field2D(out)


# -- hyperbolic cross probe ---------------------------------------------------------


def hyperbolic_multiplier(n, k, eta0_scale=1.0):
    """Gaussian profile of the hyperbolic product at dyadic parameter k."""
    m = np.fft.fftfreq(n, d=1.0 / n)
    m1, m2 = np.meshgrid(m, m, indexing="xy")
    v = (4.0 ** k) * m1 * m2 / eta0_scale
    with np.errstate(over="ignore", under="ignore"):
        return np.exp(-0.5 * v * v)


def hyperbolic_max(field, N, eta0_scale=1.0):
    """sup over |k| <= N of the hyperbolic-multiplier pieces of f."""
    if N < 0:
        raise DomainError("N must be >= 0")
    spec = np.fft.fft2(field.values)
    out = None
    for k in range(-N, N + 1):
        piece = np.fft.ifft2(spec * hyperbolic_multiplier(field.n, k, eta0_scale))
        a = np.abs(piece)
        out = a if out is None else np.maximum(out, a)
    return Field2D(out)


def hyperbolic_comb(n, scale_count, seed):
    """Adversarial test field: random signs along dyadic hyperbola shells."""
    rng = np.random.default_rng(seed)
    spec = np.zeros((n, n), dtype=complex)
    half = n // 2 - 1
    for j in range(scale_count):
        level = 4 ** j
        ms = np.unique(np.geomspace(1, min(level, half), 2 * (j + 1)).astype(int))
        for m in ms:
            m2 = min(max(level // max(m, 1), 1), half)
            spec[m2 % n, m % n] = rng.choice([-1.0, 1.0])
    vals = np.fft.ifft2(spec).real
    nrm = math.sqrt(float((vals ** 2).mean()))
    return Field2D(vals / (nrm if nrm > 0 else 1.0))


@dataclass(frozen=True)
class GrowthReport:
    ns: tuple
    estimates: tuple
    power_exponent: float   # fitted alpha in estimate ~ N^alpha
    sqrt_residual: float    # rms log-residual against the N^(1/2) model
    log_residual: float     # rms log-residual against the log(N) model


def hyperbolic_growth(n, n_max, eta0_scale=1.0, seed=0, n_random=6):
    """Lower-bound estimates of the maximal operator norm for N = 0..n_max.

    The running max over |k| <= N is extended incrementally per field, so
    the per-N estimates are nondecreasing by construction; the report only
    fits reference shapes, it asserts no growth law.
    """
    fields = [random_bandlimited(n, n // 4, seed + i) for i in range(n_random)]
    fields += [hyperbolic_comb(n, min(8, n_max + 1), seed + 1000 + i)
               for i in range(3)]
    estimates = np.zeros(n_max + 1)
    for f in fields:
        spec = np.fft.fft2(f.values)
        fn = f.norm(2.0)
        running = None
        for N in range(n_max + 1):
            ks = [0] if N == 0 else [N, -N]
            for k in ks:
                piece = np.abs(np.fft.ifft2(
                    spec * hyperbolic_multiplier(n, k, eta0_scale)))
                running = piece if running is None else np.maximum(running, piece)
            ratio = float(np.sqrt((running ** 2).mean())) / fn
            estimates[N] = max(estimates[N], ratio)
    ns = np.arange(1, n_max + 1)
    est = estimates[1:]
    alpha = float(np.polyfit(np.log(ns), np.log(est), 1)[0]) if n_max >= 2 else 0.0

    def _residual(model):
        logm = np.log(model)
        shift = np.mean(np.log(est) - logm)
        return float(np.sqrt(np.mean((np.log(est) - logm - shift) ** 2)))

    return GrowthReport(
        ns=tuple(range(n_max + 1)), estimates=tuple(estimates),
        power_exponent=alpha,
        sqrt_residual=_residual(np.sqrt(ns)),
        log_residual=_residual(np.log(ns + 1.0)),
    )


# -- operator norm lower bounds ------------------------------------------------------


@dataclass(frozen=True)
class OpNormEstimate:
    value: float
    best_input: str
    ks: tuple


def opnorm_lower(body, q, n=256, k_min=None, k_max=None, seed=0, n_random=12):
    """Max of ||Mf||_q/||f||_q over strips and random bandlimited fields."""
    diam = body.diameter()
    if k_max is None:
        k_max = int(math.floor(math.log2(0.49 / diam)))
    if k_min is None:
        k_min = k_max - 6
    ks = (k_min, k_max)
    best, label = -1.0, ""
    candidates = []
    for cells in (4, 8, 16, 32):
        f = strip_field(n, cells / n, q)
        candidates.append((f"strip_x2_{cells}", f))
        candidates.append((f"strip_x1_{cells}", Field2D(f.values.T.copy())))
    for i in range(n_random):
        candidates.append((f"random_{i}", random_bandlimited(n, n // 8, seed + i)))
    for label_i, f in candidates:
        mf = lacunary_max(f, body, k_min, k_max)
        ratio = mf.norm(q) / f.norm(q)
        if ratio > best:
            best, label = ratio, label_i
    return OpNormEstimate(value=float(best), best_input=label, ks=ks)
