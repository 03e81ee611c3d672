"""The smooth radial bump behind every dyadic frequency localization here.

``radial_bump`` equals 1 on [0, 1/2], vanishes outside [0, 1), and is C-inf
in between; ``band_bump(k, r)`` is the difference profile selecting the k-th
dyadic shell.  All modules share these two functions so the spectral
projectors, the multiplier scans and the square functions agree bit for bit.
"""

from __future__ import annotations

import numpy as np


def _psi(u):
    out = np.zeros_like(u, dtype=float)
    pos = u > 0
    with np.errstate(divide="ignore", over="ignore"):
        out[pos] = np.exp(-1.0 / u[pos])
    return out


def radial_bump(r):
    """Smooth cutoff: 1 on [0, 1/2], 0 on [1, inf), monotone in between."""
    r = np.asarray(r, dtype=float)
    u = 2.0 * (1.0 - r)
    a = _psi(u)
    b = _psi(1.0 - u)
    out = np.empty_like(u)
    flat_one = u >= 1.0
    flat_zero = u <= 0.0
    mid = ~(flat_one | flat_zero)
    out[flat_one] = 1.0
    out[flat_zero] = 0.0
    out[mid] = a[mid] / (a[mid] + b[mid])
    return out if out.ndim else float(out)


def band_bump(k, r):
    """Dyadic shell profile: bump(2^-k r) - bump(2^-k+1 r) for k >= 1.

    Supported in 2^(k-2) < r < 2^k; at k = 0 this is the low-pass bump
    itself.  Arguments are computed as r * 2.0**-k so repeated evaluations
    telescope exactly in floating point.
    """
    r = np.asarray(r, dtype=float)
    if k == 0:
        return radial_bump(r)
    return radial_bump(r * 2.0 ** (-k)) - radial_bump(r * 2.0 ** (-k + 1))
