import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noisychain.wavelets import (
    BasisIndex,
    WaveletBasis,
    build_basis,
    dimension,
    enumerate_model,
)
from noisychain.wavelets.basis import refinement_matrix


@pytest.fixture(scope="module")
def basis():
    return build_basis(N=2, J=2, m_max=3, G=12)


def trapezoid_gram(rows_a, rows_b, G):
    w = np.full(2**G + 1, 2.0**-G)
    w[0] *= 0.5
    w[-1] *= 0.5
    return (rows_a * w) @ rows_b.T


def aitken(g0, g1, g2):
    # one Richardson/Aitken step on three successive grid refinements
    d1, d2 = g1 - g0, g2 - g1
    den = d2 - d1
    safe = np.abs(den) > 1e-14
    out = g2.copy()
    out[safe] = g2[safe] - d2[safe] ** 2 / den[safe]
    return out


def test_dimension_frozen_values():
    assert dimension(5, 6) == 13312
    assert dimension(2, 4) == 976
    assert dimension(2, 2) == 16
    assert dimension(2, 3) == 208


@given(J=st.integers(2, 8), extra=st.integers(0, 6))
def test_dimension_closed_form(J, extra):
    m = J + extra
    assert dimension(J, m) == 4 ** (m + 1) - 3 * 4**J


def test_dimension_rejects_m_below_J():
    with pytest.raises(ValueError):
        dimension(3, 2)


@pytest.mark.parametrize("N,J", [(2, 2), (3, 3)])
def test_gram_orthonormality_extrapolated(N, J):
    grams = {}
    for G in (12, 13, 14):
        b = build_basis(N=N, J=J, m_max=J + 1, G=G)
        for j in range(J, J + 2):
            for kind in ("scaling", "wavelet"):
                r = b.rows(j, kind)
                grams.setdefault((j, kind, kind), []).append(trapezoid_gram(r, r, G))
            grams.setdefault((j, "scaling", "wavelet"), []).append(
                trapezoid_gram(b.rows(j, "scaling"), b.rows(j, "wavelet"), G)
            )
    for (j, ka, kb), (g0, g1, g2) in grams.items():
        limit = aitken(g0, g1, g2)
        want = np.eye(limit.shape[0]) if ka == kb else np.zeros_like(limit)
        assert np.abs(limit - want).max() < 1e-5, (j, ka, kb)


def test_refinement_reproduces_coarser_level(basis):
    for kind in ("scaling", "wavelet"):
        R = refinement_matrix(basis, 2, kind)
        coarse = basis.rows(2, kind)
        fine = basis.rows(3, "scaling")
        assert np.abs(R @ fine - coarse).max() < 1e-9


def test_polynomial_reproduction():
    # degree < N polynomials lie in V_J exactly on [0,1]
    b = build_basis(N=2, J=2, m_max=2, G=14)
    G = 14
    rows = b.rows(2, "scaling")
    w = np.full(2**G + 1, 2.0**-G)
    w[0] *= 0.5
    w[-1] *= 0.5
    for poly in (np.ones_like(b.grid), b.grid):
        coef = rows @ (w * poly)
        recon = coef @ rows
        assert np.abs(recon - poly).max() < 5e-3


def test_enumerate_model_structure(basis):
    model2 = enumerate_model(basis, 2)
    assert len(model2) == dimension(2, 2)
    kinds = {(ix.kind, iy.kind) for ix, iy in model2}
    assert kinds == {("scaling", "scaling")}
    # x-shift major in the coarse block
    assert [ix.k for ix, _ in model2[:4]] == [0, 0, 0, 0]
    assert [iy.k for _, iy in model2[:4]] == [0, 1, 2, 3]

    model3 = enumerate_model(basis, 3)
    assert len(model3) == dimension(2, 3)
    tail = model3[16:]
    per_block = 64
    assert {(ix.kind, iy.kind) for ix, iy in tail[:per_block]} == {("scaling", "wavelet")}
    assert {(ix.kind, iy.kind) for ix, iy in tail[per_block : 2 * per_block]} == {
        ("wavelet", "scaling")
    }
    assert {(ix.kind, iy.kind) for ix, iy in tail[2 * per_block :]} == {
        ("wavelet", "wavelet")
    }
    assert all(ix.j == iy.j == 3 for ix, iy in tail)


def test_enumerate_model_rejects_out_of_range(basis):
    with pytest.raises(ValueError):
        enumerate_model(basis, 4)
    with pytest.raises(ValueError):
        enumerate_model(basis, 1)


def test_eval_matches_rows_and_rejects_outside(basis):
    idx = BasisIndex(2, 1, "scaling")
    assert np.allclose(basis.eval(idx, basis.grid), basis.rows(2, "scaling")[1])
    half = basis.eval(idx, 0.5 + 2.0**-13)
    row = basis.rows(2, "scaling")[1]
    mid = 0.5 * (row[2**11] + row[2**11 + 1])
    assert abs(half - mid) < 1e-12
    with pytest.raises(ValueError):
        basis.eval(idx, -0.01)
    with pytest.raises(ValueError):
        basis.eval(idx, 1.01)


def test_supports_are_truthful(basis):
    for j, kind in basis.families():
        rows = basis.rows(j, kind)
        sup = basis.supports(j, kind)
        for k in range(2**j):
            lo, hi = sup[k]
            outside = (basis.grid < lo - 1e-12) | (basis.grid > hi + 1e-12)
            assert np.abs(rows[k][outside]).max(initial=0.0) < 1e-12
            inside = np.abs(rows[k]) > 1e-9
            assert basis.grid[inside].min() >= lo - 1e-12
            assert basis.grid[inside].max() <= hi + 1e-12


def test_fourier_rows_match_direct_transform(basis):
    band = basis.fourier_rows(2, "scaling")
    row = basis.rows(2, "scaling")[2]
    for p in (0, 3, 17):
        u = basis.freq[basis._P + p]
        direct = np.trapezoid(row * np.exp(-1j * u * basis.grid), basis.grid)
        assert abs(band[2, basis._P + p] - direct) < 1e-10


def test_basis_index_validation():
    with pytest.raises(ValueError):
        BasisIndex(2, 4, "scaling")
    with pytest.raises(ValueError):
        BasisIndex(2, 0, "other")


def test_build_basis_validation():
    with pytest.raises(ValueError):
        build_basis(N=1)
    with pytest.raises(ValueError):
        build_basis(N=11)
    with pytest.raises(ValueError):
        build_basis(N=4, J=2)  # 2^J < 2N
    with pytest.raises(ValueError):
        build_basis(N=2, J=3, m_max=2)
    with pytest.raises(ValueError):
        WaveletBasis(2, 2, 3, 6)  # grid too coarse for m_max


@pytest.mark.parametrize("N", (6, 10))
def test_large_N_construction_is_stable(N):
    J = 4 if N <= 8 else 5
    b = build_basis(N=N, J=J, m_max=J, G=J + 8)
    rows = b.rows(J, "scaling")
    assert np.all(np.isfinite(rows))
    gram = trapezoid_gram(rows, rows, J + 8)
    assert np.abs(gram - np.eye(2**J)).max() < 5e-3


def test_families_order(basis):
    assert basis.families() == [
        (2, "scaling"),
        (2, "wavelet"),
        (3, "scaling"),
        (3, "wavelet"),
    ]
    assert basis.index_range(3) == range(8)
    assert basis.dimension(3) == 208
