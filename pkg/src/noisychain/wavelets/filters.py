"""Daubechies filters and boundary-function machinery for interval bases.

This is the scale-free layer.  It produces the quadrature filter pair,
exact values of the scaling function on dyadic grids, half-line Gram
matrices, and the left/right boundary (edge) function systems needed to
assemble an orthonormal wavelet basis on [0,1].  Everything here is exact
linear algebra on translate coordinates; sampling onto grids happens in
``basis.py``.

Conventions used throughout:

* the filter ``h`` has length 2N and sums to sqrt(2);
* the scaling function ``phi`` is supported on [0, 2N-1] and integrates
  to 1;
* the wavelet filter is ``g[p] = (-1)**p * h[2N-1-p]``, so the mother
  wavelet shares the support [0, 2N-1];
* boundary systems are expressed over the truncated translates
  ``phi(x+n)`` restricted to x >= 0, n = 0..2N-2.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, sqrt

import numpy as np
from mpmath import lu_solve, matrix, mp, mpf, workdps

SUPPORTED_N = tuple(range(2, 11))

# The boundary-system construction runs in extended precision: coordinates
# over truncated translates are exponentially ill-conditioned in N (the
# binomial prototypes are nearly collinear), and in float64 the two-scale
# residual is garbage from N = 6 on.  50 digits leaves the residual around
# 1e-33 at N = 10; the final matrices are O(1) and cast cleanly to float64.
_EDGE_DPS = 50


def daubechies_filter(N: int) -> np.ndarray:
    """Return the length-2N Daubechies (extremal phase) filter, sum sqrt(2).

    Built by spectral factorization: |m0(w)|^2 = cos^{2N}(w/2) P(sin^2(w/2))
    with P the standard degree N-1 binomial polynomial.  The minimum-phase
    root selection reproduces the classical coefficient tables.
    """
    if N not in SUPPORTED_N:
        raise ValueError(f"unsupported filter order N={N}; supported: {SUPPORTED_N}")
    # Roots of P(y) = sum_k C(N-1+k, k) y^k (well conditioned at these
    # degrees), then per root the quadratic z^2 - (2-4y)z + 1 = 0 coming
    # from y = (2 - z - 1/z)/4; keep the branch inside the unit circle.
    pcoef = np.array([comb(N - 1 + k, k) for k in range(N)], dtype=float)
    yroots = np.roots(pcoef[::-1]) if N > 1 else np.array([])
    # Newton-polish in y (simple roots; evaluation by Horner is stable here)
    dcoef = pcoef[1:] * np.arange(1, N)
    for _ in range(50):
        pv = np.polyval(pcoef[::-1], yroots)
        dv = np.polyval(dcoef[::-1], yroots)
        step = pv / dv
        yroots = yroots - step
        if np.abs(step).max(initial=0.0) < 1e-15:
            break
    inside = []
    for y in yroots:
        w = 1.0 - 2.0 * y
        s = np.sqrt(complex(w * w - 1.0))
        z1, z2 = w + s, w - s
        inside.append(z1 if abs(z1) < abs(z2) else z2)
    inside = np.array(inside)
    if np.abs(inside).max(initial=0.0) >= 1.0:
        raise RuntimeError("spectral factorization failed to split roots")
    inside = inside[np.lexsort((inside.imag, inside.real))]
    q = np.real(np.poly(inside))
    m0 = q.copy()
    for _ in range(N):
        m0 = np.convolve(m0, [1.0, 1.0])
    m0 = m0 / m0.sum()
    h = sqrt(2.0) * m0
    if abs(h[0]) < abs(h[-1]):
        h = h[::-1]
    return h


def wavelet_filter(h: np.ndarray) -> np.ndarray:
    """Quadrature mirror filter g[p] = (-1)^p h[2N-1-p]."""
    g = h[::-1].copy()
    g[1::2] *= -1.0
    return g


def scaling_integer_values(h: np.ndarray) -> np.ndarray:
    """Exact values phi(0), ..., phi(2N-1).

    phi at the integers is the eigenvector of M[i,j] = sqrt(2) h[2i-j] for
    eigenvalue 1, normalized so the values sum to 1 (which makes the
    integral of phi equal to 1 by partition of unity).
    """
    L = len(h) - 1
    M = np.zeros((L - 1, L - 1))
    for i in range(1, L):
        for j in range(1, L):
            idx = 2 * i - j
            if 0 <= idx <= L:
                M[i - 1, j - 1] = sqrt(2.0) * h[idx]
    _, _, vt = np.linalg.svd(M - np.eye(L - 1))
    v = vt[-1]
    v = v / v.sum()
    out = np.zeros(L + 1)
    out[1:L] = v
    return out


def scaling_point_values(h: np.ndarray, depth: int) -> np.ndarray:
    """Exact values of phi at i * 2^-depth, i = 0..(2N-1)*2^depth.

    Each refinement step applies the two-scale relation to the previous
    dyadic grid; values at existing grid points are reproduced exactly, so
    the result is the limit function sampled with no iteration error.
    """
    v = scaling_integer_values(h)
    L = len(h) - 1
    for p in range(depth):
        step = 2**p
        out = np.zeros(L * 2 ** (p + 1) + 1)
        for n, hn in enumerate(h):
            out[n * step : n * step + len(v)] += sqrt(2.0) * hn * v
        v = out
    return v


def halfline_gram(h: np.ndarray) -> np.ndarray:
    """Gram matrix H[a,b] = int_0^inf phi(x+a) phi(x+b) dx, a,b = 1..2N-2.

    The two-scale relation fixes these as the solution of a small linear
    system: H[a,b] = sum_{p,q} h[p] h[q] H'[2a-p, 2b-q] where H' is delta
    for indices both <= 0, zero for mixed or out-of-support indices, and
    unknown in the 1..2N-2 square.
    """
    L = len(h) - 1
    K = L - 1
    n_unk = K * K

    def flat(a, b):
        return (a - 1) * K + (b - 1)

    A = np.zeros((n_unk, n_unk))
    rhs = np.zeros(n_unk)
    for a in range(1, K + 1):
        for b in range(1, K + 1):
            row = flat(a, b)
            for p in range(L + 1):
                c = 2 * a - p
                if c >= L:
                    continue
                for q in range(L + 1):
                    d = 2 * b - q
                    if d >= L:
                        continue
                    w = h[p] * h[q]
                    if c <= 0 and d <= 0:
                        if c == d:
                            rhs[row] += w
                    elif c <= 0 or d <= 0:
                        continue
                    else:
                        A[row, flat(c, d)] += w
    H = np.linalg.solve(np.eye(n_unk) - A, rhs).reshape(K, K)
    return 0.5 * (H + H.T)


def _extended_gram(h: np.ndarray) -> np.ndarray:
    """Gram of truncated translates phi(x+n)|_{x>=0} for n = 0..2N-2.

    n = 0 is the untruncated translate (support [0, 2N-1]), orthonormal to
    every truncated one, hence the bordered identity block.
    """
    K = len(h) - 2
    H = np.zeros((K + 1, K + 1))
    H[0, 0] = 1.0
    H[1:, 1:] = halfline_gram(h)
    return H


@dataclass(frozen=True)
class EdgeSystem:
    """Left-boundary function system for one filter.

    coef[i, n]       edge scaling function i over truncated translates
                     phi(x+n)|_{x>=0}, n = 0..2N-2; function i is supported
                     on [0, N+i]
    refine_edge[i,l] two-scale coefficients onto sqrt(2)*edge_l(2x)
    refine_int[i,m]  two-scale coefficients onto sqrt(2)*phi(2x-m), m >= 1
    wav_edge[r,l]    edge wavelet r over sqrt(2)*edge_l(2x)
    wav_int[r,m]     edge wavelet r over sqrt(2)*phi(2x-m), m >= 1; wavelet
                     r is supported on [0, N+r]

    Column 0 of refine_int / wav_int corresponds to the scale-1 translate
    phi(2x); it is identically zero because that translate is absorbed into
    the scale-1 edge block (its vanishing is asserted at build time).
    """

    h: np.ndarray
    N: int
    coef: np.ndarray
    refine_edge: np.ndarray
    refine_int: np.ndarray
    wav_edge: np.ndarray
    wav_int: np.ndarray


def _mp_polish_filter(h) -> list:
    """Filter coefficients refined to working precision by Gauss-Newton.

    Solves the defining equations (shift orthonormality, sum sqrt(2), N
    vanishing moments) starting from the float64 filter.  The system is
    overdetermined by one dependent equation; the normal equations stay
    nonsingular because the solutions form a finite set of isolated points.
    """
    n2 = len(h)
    N = n2 // 2
    x = [mpf(float(v)) for v in h]
    for _ in range(12):
        r = []
        for k in range(N):
            s = mpf(0)
            for n in range(n2 - 2 * k):
                s += x[n] * x[n + 2 * k]
            r.append(s - (1 if k == 0 else 0))
        r.append(sum(x) - mp.sqrt(2))
        for j in range(N):
            s = mpf(0)
            for n in range(n2):
                s += (-1) ** n * mpf(n) ** j * x[n]
            r.append(s)
        J = matrix(len(r), n2)
        for k in range(N):
            for n in range(n2 - 2 * k):
                J[k, n] += x[n + 2 * k]
                J[k, n + 2 * k] += x[n]
        for n in range(n2):
            J[N, n] = 1
        for j in range(N):
            for n in range(n2):
                J[N + 1 + j, n] = (-1) ** n * mpf(n) ** j
        delta = lu_solve(J.T * J, J.T * matrix(r))
        x = [x[i] - delta[i] for i in range(n2)]
        if max(abs(d) for d in delta) < mpf(10) ** (5 - mp.dps):
            return x
    raise RuntimeError("filter refinement did not converge")


def _mp_extended_gram(h) -> list:
    """Gram of the truncated translates to working precision.

    Same fixed-point system as ``halfline_gram``, built exactly from the
    refined filter; a float64 factorization supplies search directions and
    high-precision residuals drive iterative refinement.  Returned with the
    bordered row/column 0 for the untruncated translate.
    """
    L = len(h) - 1
    K = L - 1
    n_unk = K * K

    def flat(a, b):
        return (a - 1) * K + (b - 1)

    entries: dict = {}
    rhs = [mpf(0)] * n_unk
    for a in range(1, K + 1):
        for b in range(1, K + 1):
            row = flat(a, b)
            for p in range(L + 1):
                c = 2 * a - p
                if c >= L:
                    continue
                for q in range(L + 1):
                    d = 2 * b - q
                    if d >= L:
                        continue
                    w = h[p] * h[q]
                    if c <= 0 and d <= 0:
                        if c == d:
                            rhs[row] += w
                    elif c <= 0 or d <= 0:
                        continue
                    else:
                        key = (row, flat(c, d))
                        entries[key] = entries.get(key, mpf(0)) + w
    M = np.eye(n_unk)
    for (i, jc), w in entries.items():
        M[i, jc] -= float(w)
    x = [mpf(v) for v in np.linalg.solve(M, np.array([float(v) for v in rhs]))]
    for _ in range(8):
        ax = [mpf(0)] * n_unk
        for (i, jc), w in entries.items():
            ax[i] += w * x[jc]
        r = [rhs[i] - x[i] + ax[i] for i in range(n_unk)]
        scale = max(abs(v) for v in r)
        if scale < mpf(10) ** (8 - mp.dps):
            break
        rf = np.array([float(v / scale) for v in r])
        delta = np.linalg.solve(M, rf)
        x = [x[i] + mpf(delta[i]) * scale for i in range(n_unk)]
    H = [[mpf(0)] * (K + 1) for _ in range(K + 1)]
    for a in range(1, K + 1):
        for b in range(1, K + 1):
            H[a][b] = (x[flat(a, b)] + x[flat(b, a)]) / 2
    H[0][0] = mpf(1)
    return H


def _mp_edge_coef(h, Hext) -> list:
    """Edge scaling coefficients from binomial prototypes.

    Prototype k = sum_n C(n,k) phi(x+n)|_{x>=0} spans, together with the
    interior translates, all polynomials of degree < N near the boundary.
    Gram-Schmidt runs from k = N-1 (smallest support) down to 0 so that
    edge function i ends up supported on [0, N+i]; the exact zero pattern
    of the prototypes survives because projections only ever subtract rows
    with fewer leading entries.
    """
    N = len(h) // 2
    K = 2 * N - 2

    def hdot(u, v):
        return sum(
            u[a] * sum(Hext[a][b] * v[b] for b in range(K + 1)) for a in range(K + 1)
        )

    rows = []
    for k in range(N - 1, -1, -1):
        v = [mpf(comb(n, k)) for n in range(K + 1)]
        for c in rows:
            pr = hdot(c, v)
            v = [v[i] - pr * c[i] for i in range(K + 1)]
        nrm = hdot(v, v)
        if nrm <= 0:
            raise RuntimeError("edge prototype lost rank")
        nrm = mp.sqrt(nrm)
        v = [vi / nrm for vi in v]
        if v[k] < 0:
            v = [-vi for vi in v]
        rows.append(v)
    return rows


def _mp_edge_refinement(h, coef, Hext):
    """Two-scale representation of the edge scaling functions.

    Returns (A, B) with edge_i(x) = sqrt(2) [ sum_l A[i,l] edge_l(2x)
    + sum_{m>=1} B[i,m] phi(2x-m) ].  The residual of the projection onto
    the scale-1 edge block must vanish on the truncated translates and on
    phi(2x); both are asserted at extended-precision scale.
    """
    N = len(h) // 2
    L = 2 * N - 1
    K = L - 1
    n_edge = len(coef)
    # Coordinates of edge_i at scale 1 over the orthonormal-by-blocks frame
    # {e_w = sqrt(2) phi(2x+w)| : w=1..K} and {i_m = sqrt(2) phi(2x-m) : m>=0}.
    d_e = [[mpf(0)] * (K + 1) for _ in range(n_edge)]  # w = 0 unused, 1..K
    d_i = [[mpf(0)] * (L + 1) for _ in range(n_edge)]  # m = 0..L
    for i in range(n_edge):
        for n in range(K + 1):
            c = coef[i][n]
            if c == 0:
                continue
            for p in range(L + 1):
                w = 2 * n - p
                if w >= L:
                    continue
                if w >= 1:
                    d_e[i][w] += c * h[p]
                else:
                    d_i[i][-w] += c * h[p]
    A = [[mpf(0)] * n_edge for _ in range(n_edge)]
    for i in range(n_edge):
        for l in range(n_edge):
            s = d_i[i][0] * coef[l][0]
            for a in range(1, K + 1):
                s += d_e[i][a] * sum(Hext[a][b] * coef[l][b] for b in range(1, K + 1))
            A[i][l] = s
    worst = mpf(0)
    for i in range(n_edge):
        for a in range(1, K + 1):
            res = d_e[i][a] - sum(A[i][l] * coef[l][a] for l in range(n_edge))
            worst = max(worst, abs(res))
        res0 = d_i[i][0] - sum(A[i][l] * coef[l][0] for l in range(n_edge))
        worst = max(worst, abs(res0))
    if worst > mpf(10) ** (-25):
        raise RuntimeError("edge refinement residual did not vanish")
    B = [row[:] for row in d_i]
    for row in B:
        row[0] = mpf(0)
    return A, B


def _nullspace(C: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (columns) of the null space of C."""
    if C.size == 0:
        return np.eye(C.shape[1])
    _, s, vt = np.linalg.svd(C)
    rank = int(np.sum(s > tol * max(C.shape) * (s[0] if len(s) else 1.0)))
    return vt[rank:].T


def _edge_wavelets(h: np.ndarray, coef: np.ndarray, A: np.ndarray, B: np.ndarray):
    """Edge wavelets as coordinates over the scale-1 frame.

    Wavelet r lives in span{sqrt(2)edge_l(2x)} + span{sqrt(2)phi(2x-m),
    1 <= m <= 2r+1} (so its support is [0, N+r]), orthogonal to every edge
    scaling function and to the interior scaling/wavelet translates it
    overlaps.  The staircase support cap admits exactly one new direction
    per r; this is asserted.
    """
    N = len(h) // 2
    L = 2 * N - 1
    g = wavelet_filter(h)

    def filt(f, idx):
        return f[idx] if 0 <= idx <= L else 0.0

    chosen = []  # vectors over coords [x_0..x_{N-1}, y_1..y_L]
    for r in range(N):
        t = 2 * r + 1
        ncoord = N + t
        rows = []
        for i in range(N):  # orthogonality to edge scaling functions
            rows.append(np.concatenate([A[i, :], B[i, 1 : t + 1]]))
        for mp in range(1, t // 2 + 1):  # interior scaling translates
            row = np.zeros(ncoord)
            for m in range(1, t + 1):
                row[N + m - 1] = filt(h, m - 2 * mp)
            rows.append(row)
        for kp in range(1, t // 2 + 1):  # interior wavelet translates
            row = np.zeros(ncoord)
            for m in range(1, t + 1):
                row[N + m - 1] = filt(g, m - 2 * kp)
            rows.append(row)
        null = _nullspace(np.array(rows))
        # remove directions already chosen (they embed in the larger space)
        for v in chosen:
            proj = null.T @ v[:ncoord]
            null = null - np.outer(v[:ncoord], proj)
        q, s, vt = np.linalg.svd(null, full_matrices=False)
        fresh = q[:, s > 1e-8]
        if fresh.shape[1] != 1:
            raise RuntimeError(
                f"edge wavelet ladder found {fresh.shape[1]} new directions at r={r}"
            )
        v = fresh[:, 0]
        anchor = np.argmax(np.abs(v) > 0.5 * np.abs(v).max())
        if v[anchor] < 0:
            v = -v
        full = np.zeros(N + L)
        full[:ncoord] = v
        chosen.append(full)
    W = np.array(chosen)
    wav_edge = W[:, :N]
    wav_int = np.zeros((N, L + 1))
    wav_int[:, 1:] = W[:, N:]
    return wav_edge, wav_int


def edge_system(h: np.ndarray) -> EdgeSystem:
    """Build the full left-boundary system for one filter.

    The scaling side runs in extended precision (see _EDGE_DPS); the
    wavelet ladder operates on the resulting O(1) matrices and is fine in
    float64.
    """
    N = len(h) // 2
    with workdps(_EDGE_DPS):
        h_mp = _mp_polish_filter(h)
        Hext = _mp_extended_gram(h_mp)
        coef_mp = _mp_edge_coef(h_mp, Hext)
        A_mp, B_mp = _mp_edge_refinement(h_mp, coef_mp, Hext)
    coef = np.array([[float(v) for v in row] for row in coef_mp])
    A = np.array([[float(v) for v in row] for row in A_mp])
    B = np.array([[float(v) for v in row] for row in B_mp])
    wav_edge, wav_int = _edge_wavelets(h, coef, A, B)
    return EdgeSystem(
        h=np.asarray(h, dtype=float),
        N=N,
        coef=coef,
        refine_edge=A,
        refine_int=B,
        wav_edge=wav_edge,
        wav_int=wav_int,
    )


@dataclass(frozen=True)
class FilterSystem:
    """Everything scale-free needed to assemble the interval basis.

    ``left`` is the edge system of h (governing the boundary at 0) and
    ``right`` the edge system of the reversed filter; reflecting the
    latter through x -> 1-x yields the boundary functions at 1.
    """

    N: int
    h: np.ndarray
    g: np.ndarray
    left: EdgeSystem
    right: EdgeSystem


def filter_system(N: int) -> FilterSystem:
    h = daubechies_filter(N)
    return FilterSystem(
        N=N,
        h=h,
        g=wavelet_filter(h),
        left=edge_system(h),
        right=edge_system(h[::-1]),
    )
