"""Orthonormal wavelet basis on [0,1] with boundary corrections.

The basis is assembled from the scale-free systems in ``filters.py``:
interior functions are dyadic translates of the Daubechies scaling
function / wavelet, and N functions per side are boundary-corrected so the
family is orthonormal on [0,1] and reproduces polynomials up to degree
N-1.  Index convention for level j (2^j functions per kind):

* k = 0..N-1            left edge, supported on [0, (N+k)/2^j]
* k = N..2^j-N-1        interior, supported on [(k-N+1)/2^j, (k+N)/2^j]
* k = 2^j-N..2^j-1      right edge, supported on [(k-N+1)/2^j, 1]

Point values are exact at the dyadic grid points x = q*2^-G (the cascade
refinement reproduces existing values exactly at each step); evaluation
between grid points is linear interpolation.  Fourier transforms are
computed once per (level, kind) by a trapezoid-corrected DFT on the
periodic window and cached on the band |u| <= U = 2^m_max * 64.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from ..fourier import WINDOW, band_count, band_freqs, forward_band
from .filters import FilterSystem, filter_system, scaling_point_values

KINDS = ("scaling", "wavelet")


@dataclass(frozen=True)
class BasisIndex:
    """One basis function: level j, shift k, kind 'scaling' or 'wavelet'."""

    j: int
    k: int
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if not 0 <= self.k < 2**self.j:
            raise ValueError(f"shift k={self.k} outside level j={self.j}")


def dimension(J: int, m: int) -> int:
    """Dimension of the tensor model space at level m (the square D_m^2).

    The space is V_J (x) V_J plus the three detail blocks at each level
    J < j <= m, so the dimension is 2^{2J} + 3 * sum_{j>J}^{m} 2^{2j}.
    """
    if m < J:
        raise ValueError("model level m must be >= J")
    return 4**J + 3 * sum(4**j for j in range(J + 1, m + 1))


def _mother_values(fs: FilterSystem, depth: int) -> dict:
    """Exact dyadic samples of all mother functions at step 2^-depth.

    Returns arrays for phi, psi (supported [0, 2N-1]) and for each side's
    edge scaling functions and wavelets (function i supported [0, N+i]).
    The right-side mothers are expressed in the reversed filter's own
    coordinates; reflection happens at assembly time.
    """
    N = fs.N
    L = 2 * N - 1
    step = 2**depth
    out = {}
    for side, h, es in (("L", fs.h, fs.left), ("R", fs.h[::-1], fs.right)):
        phi = scaling_point_values(h, depth)
        g = np.asarray(fs.g if side == "L" else wavelet_reversed(fs), dtype=float)
        npsi = L * step + 1
        psi = np.zeros(npsi)
        for p in range(L + 1):
            # psi(i 2^-d) = sqrt(2) sum_p g_p phi(i 2^-(d-1) - p)
            lo = p * step
            i_lo = (lo + 1) // 2
            i_hi = min(npsi - 1, (lo + len(phi) - 1) // 2)
            ii = np.arange(i_lo, i_hi + 1)
            psi[ii] += sqrt(2.0) * g[p] * phi[2 * ii - lo]
        edges = []
        wavs = []
        for i in range(N):
            width = (N + i) * step
            vals = np.zeros(width + 1)
            for n in range(2 * N - 1):
                c = es.coef[i, n]
                if c == 0.0:
                    continue
                src_lo = n * step
                seg = phi[src_lo : src_lo + width + 1]
                vals[: len(seg)] += c * seg
            edges.append(vals)
        for r in range(N):
            width = (N + r) * step
            vals = np.zeros(width + 1)
            ii = np.arange(width + 1)
            for l in range(N):
                c = es.wav_edge[r, l]
                if c == 0.0:
                    continue
                el = edges[l]
                m_ok = 2 * ii < len(el)
                vals[m_ok] += sqrt(2.0) * c * el[2 * ii[m_ok]]
            for m in range(1, 2 * N):
                c = es.wav_int[r, m]
                if c == 0.0:
                    continue
                lo = m * step
                i_lo = (lo + 1) // 2
                i_hi = min(width, (lo + len(phi) - 1) // 2)
                jj = np.arange(i_lo, i_hi + 1)
                vals[jj] += sqrt(2.0) * c * phi[2 * jj - lo]
            wavs.append(vals)
        out[side] = {"phi": phi, "psi": psi, "edges": edges, "wavs": wavs}
    return out


def wavelet_reversed(fs: FilterSystem) -> np.ndarray:
    """Wavelet filter of the reversed scaling filter."""
    h = fs.h[::-1]
    g = h[::-1].copy()
    g[1::2] *= -1.0
    return g


class WaveletBasis:
    """Sampled multiresolution system on [0,1].

    Rows are indexed (j, kind) with a (2^j, 2^G+1) matrix per pair; the
    grid is x_q = q * 2^-G.  Fourier rows are computed lazily per (j,
    kind) on the frequency band |u| <= U and cached.
    """

    def __init__(self, N: int, J: int, m_max: int, G: int):
        if not 2 <= N <= 10:
            raise ValueError("N outside the supported catalog 2..10")
        if 2**J < 2 * N:
            raise ValueError(f"level J={J} too coarse for N={N} boundary blocks")
        if m_max < J:
            raise ValueError("m_max must be >= J")
        if 2**G < 2 ** (m_max + 4):
            raise ValueError("grid exponent G must be at least m_max + 4")
        self.N = N
        self.J = J
        self.m_max = m_max
        self.G = G
        self.U = float(2**m_max * WINDOW)
        self.grid = np.arange(2**G + 1) * 2.0**-G
        self.filters = filter_system(N)
        self._rows: dict = {}
        self._supports: dict = {}
        self._fourier: dict = {}
        self._P = band_count(self.U)
        self.freq = band_freqs(self._P)
        mothers = _mother_values(self.filters, G - J)
        for j in range(J, m_max + 1):
            for kind in KINDS:
                self._assemble_level(j, kind, mothers)

    def _assemble_level(self, j: int, kind: str, mothers: dict) -> None:
        N = self.N
        G = self.G
        stride = 2 ** (j - self.J)
        d = 2 ** (G - j)  # grid points per unit of the level-j argument
        nk = 2**j
        npts = 2**G + 1
        rows = np.zeros((nk, npts))
        sup = np.zeros((nk, 2))
        amp = 2.0 ** (j / 2.0)
        keyL = "edges" if kind == "scaling" else "wavs"
        mo_L = [v[::stride] for v in mothers["L"][keyL]]
        mo_R = [v[::stride] for v in mothers["R"][keyL]]
        inter = (mothers["L"]["phi"] if kind == "scaling" else mothers["L"]["psi"])[::stride]
        for k in range(nk):
            if k < N:
                vals = mo_L[k]
                rows[k, : len(vals)] = amp * vals
                sup[k] = (0.0, (N + k) / 2**j)
            elif k >= nk - N:
                i = nk - 1 - k
                vals = mo_R[i]
                rows[k, npts - len(vals) :] = amp * vals[::-1]
                sup[k] = (1.0 - (N + i) / 2**j, 1.0)
            else:
                m = k - N + 1
                lo = m * d
                rows[k, lo : lo + len(inter)] = amp * inter
                sup[k] = ((k - N + 1) / 2**j, (k + N) / 2**j)
        self._rows[(j, kind)] = rows
        self._supports[(j, kind)] = sup

    def rows(self, j: int, kind: str) -> np.ndarray:
        self._check_level(j, kind)
        return self._rows[(j, kind)]

    def supports(self, j: int, kind: str) -> np.ndarray:
        """Per-shift support intervals [x_lo, x_hi] at one (level, kind)."""
        self._check_level(j, kind)
        return self._supports[(j, kind)]

    def fourier_rows(self, j: int, kind: str) -> np.ndarray:
        """Sampled transforms on the band, one row per shift (cached)."""
        self._check_level(j, kind)
        key = (j, kind)
        if key not in self._fourier:
            self._fourier[key] = forward_band(self._rows[key], self.G, self._P)
        return self._fourier[key]

    def _check_level(self, j: int, kind: str) -> None:
        if kind not in KINDS:
            raise ValueError(f"unknown kind {kind!r}")
        if not self.J <= j <= self.m_max:
            raise ValueError(f"level {j} outside [{self.J}, {self.m_max}]")

    def eval(self, index: BasisIndex, x) -> np.ndarray:
        """Linear-interpolation evaluation; rejects x outside [0,1]."""
        x = np.asarray(x, dtype=float)
        if np.any(x < 0.0) or np.any(x > 1.0):
            raise ValueError("evaluation point outside [0,1]")
        row = self.rows(index.j, index.kind)[index.k]
        pos = x * 2.0**self.G
        i0 = np.minimum(pos.astype(int), 2**self.G - 1)
        frac = pos - i0
        return row[i0] * (1.0 - frac) + row[i0 + 1] * frac

    def families(self) -> list:
        """Stored (level, kind) keys in deterministic order."""
        return [(j, kind) for j in range(self.J, self.m_max + 1) for kind in KINDS]

    def index_range(self, j: int) -> range:
        return range(2**j)

    def dimension(self, m: int) -> int:
        return dimension(self.J, m)


def build_basis(N: int = 2, J: int = 2, m_max: int = 3, G: int | None = None) -> WaveletBasis:
    """Build the sampled basis; G defaults to m_max + 8."""
    if G is None:
        G = m_max + 8
    return WaveletBasis(N, J, m_max, G)


def eval_basis(basis: WaveletBasis, index: BasisIndex, x):
    return basis.eval(index, x)


def enumerate_model(basis: WaveletBasis, m: int) -> list:
    """Tensor basis of the model space at level m, in coefficient order.

    The order is: the V_J (x) V_J block (x-shift major), then per level
    j = J+1..m the scaling(x)wavelet, wavelet(x)scaling, wavelet(x)wavelet
    blocks.  The solver and the coefficient vectors follow this order.
    """
    if not basis.J <= m <= basis.m_max:
        raise ValueError(f"model level {m} outside [{basis.J}, {basis.m_max}]")
    J = basis.J
    pairs = []
    for k in range(2**J):
        for l in range(2**J):
            pairs.append((BasisIndex(J, k, "scaling"), BasisIndex(J, l, "scaling")))
    for j in range(J + 1, m + 1):
        for kx, ky in (("scaling", "wavelet"), ("wavelet", "scaling"), ("wavelet", "wavelet")):
            for k in range(2**j):
                for l in range(2**j):
                    pairs.append((BasisIndex(j, k, kx), BasisIndex(j, l, ky)))
    return pairs


def refinement_matrix(basis: WaveletBasis, j: int, kind: str) -> np.ndarray:
    """Coefficients of level-j functions over level-(j+1) scaling functions.

    Row k holds the expansion phi_{j,k} = sum_q R[k,q] phi_{j+1,q} (or the
    wavelet analogue).  Used to check refinement consistency and the
    orthogonal completeness of V_j + W_j = V_{j+1}.
    """
    fs = basis.filters
    N = fs.N
    nk, nq = 2**j, 2 ** (j + 1)
    R = np.zeros((nk, nq))
    if kind == "scaling":
        edgeL, intL = fs.left.refine_edge, fs.left.refine_int
        edgeR, intR = fs.right.refine_edge, fs.right.refine_int
        filt = fs.h
    else:
        edgeL, intL = fs.left.wav_edge, fs.left.wav_int
        edgeR, intR = fs.right.wav_edge, fs.right.wav_int
        filt = fs.g
    for k in range(nk):
        if k < N:
            R[k, :N] = edgeL[k]
            for m in range(1, 2 * N):
                R[k, m + N - 1] = intL[k, m]
        elif k >= nk - N:
            i = nk - 1 - k
            R[k, nq - N :] = edgeR[i][::-1]
            for m in range(1, 2 * N):
                R[k, nq - N - m] = intR[i, m]
        else:
            m = k - N + 1
            for p in range(2 * N):
                R[k, 2 * m + p + N - 1] = filt[p]
    return R
