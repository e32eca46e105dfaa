"""Discrete Fourier helpers shared by the basis and deconvolution layers.

All transforms live on a periodic spatial window of ``window`` rescaled
units (a power of two so the grid step 2^-G divides it).  A function
sampled on the [0,1] grid with step 2^-G is embedded at the start of the
window; its transform is evaluated on the frequency comb u_p = 2*pi*p /
window.  A band slice keeps |u| <= U, i.e. |p| <= P.

Convention: t*(u) = integral of t(x) exp(-i x u) dx, approximated by the
trapezoid rule on the grid (endpoint samples half-weighted, which matters
because boundary-corrected basis functions do not vanish at 0 and 1).
"""

from __future__ import annotations

from math import floor, pi

import numpy as np

WINDOW = 64


def band_count(U: float, window: int = WINDOW) -> int:
    """Number P of positive frequencies with u_P = 2*pi*P/window <= U."""
    return floor(U * window / (2.0 * pi))


def band_freqs(P: int, window: int = WINDOW) -> np.ndarray:
    """Frequencies u_p for p = -P..P, ascending."""
    return 2.0 * pi * np.arange(-P, P + 1) / window


def forward_band(samples: np.ndarray, G: int, P: int | None, window: int = WINDOW) -> np.ndarray:
    """Trapezoid-corrected DFT of samples given on the 2^G+1 point [0,1] grid.

    ``samples`` may be a matrix (one function per row).  Returns the band
    values for p = -P..P ascending, or the full raw FFT (natural order,
    length window*2^G) if P is None.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    npts = 2**G + 1
    if samples.shape[1] != npts:
        raise ValueError("sample rows do not match the 2^G+1 point grid")
    n = window * 2**G
    arr = np.zeros((samples.shape[0], n))
    arr[:, :npts] = samples
    arr[:, 0] *= 0.5
    arr[:, npts - 1] *= 0.5
    F = np.fft.fft(arr, axis=1) * 2.0**-G
    if P is None:
        return F
    if not 0 <= P < n // 2:
        raise ValueError("band exceeds the FFT frequency range")
    idx = np.arange(-P, P + 1) % n
    return F[:, idx]


def invert_band(
    band: np.ndarray,
    G: int,
    P: int | None,
    q_lo: int,
    q_hi: int,
    window: int = WINDOW,
    imag_tol: float = 1e-8,
) -> np.ndarray:
    """Inverse transform of band values back to spatial samples.

    Returns real samples at grid points q * 2^-G for q = q_lo..q_hi
    (inclusive; negative q wraps around the periodic window, which is how
    the enlarged interval [-pad, 1+pad] is reached).  If P is None the
    input is a full raw FFT array.  The imaginary residue is checked
    against ``imag_tol`` relative to the largest value.
    """
    band = np.atleast_2d(np.asarray(band, dtype=complex))
    n = window * 2**G
    if P is None:
        if band.shape[1] != n:
            raise ValueError("full-band input has wrong length")
        full = band
    else:
        full = np.zeros((band.shape[0], n), dtype=complex)
        idx = np.arange(-P, P + 1) % n
        full[:, idx] = band
    v = np.fft.ifft(full, axis=1) * 2.0**G
    q = np.arange(q_lo, q_hi + 1) % n
    out = v[:, q]
    scale = max(np.abs(out).max(initial=0.0), 1.0)
    if np.abs(out.imag).max(initial=0.0) > imag_tol * scale:
        raise ArithmeticError("inverse transform left a non-negligible imaginary part")
    return out.real
