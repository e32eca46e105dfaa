import numpy as np
import pytest

from noisychain.fourier import WINDOW, band_count, band_freqs, forward_band, invert_band


def bump(G, center=0.5, s2=0.0009):
    x = np.arange(2**G + 1) * 2.0**-G
    return x, np.exp(-((x - center) ** 2) / (2.0 * s2))


def test_band_freqs_layout():
    f = band_freqs(3)
    assert f.shape == (7,)
    assert f[3] == 0.0
    assert np.allclose(f, -f[::-1])
    assert abs(f[4] - 2.0 * np.pi / WINDOW) < 1e-15
    P = band_count(10.0)
    assert band_freqs(P)[-1] <= 10.0 < band_freqs(P + 1)[-1]


def test_forward_band_matches_analytic_gaussian():
    G = 12
    s2 = 0.0009
    x, t = bump(G, s2=s2)
    P = band_count(60.0)
    band = forward_band(t, G, P)[0]
    u = band_freqs(P)
    # the bump is numerically supported inside [0,1]: transform is exact
    want = np.sqrt(2.0 * np.pi * s2) * np.exp(-0.5 * s2 * u**2) * np.exp(-1j * 0.5 * u)
    assert np.abs(band - want).max() < 1e-12


def test_forward_band_is_trapezoid_exact():
    G = 8
    x, t = bump(G)
    t[0], t[-1] = 0.3, 0.8  # nonzero endpoints exercise the halving
    P = 5
    band = forward_band(t, G, P)[0]
    u = band_freqs(P)
    w = np.full(x.size, 2.0**-G)
    w[0] *= 0.5
    w[-1] *= 0.5
    for i, up in enumerate(u):
        direct = np.sum(w * t * np.exp(-1j * up * x))
        assert abs(band[i] - direct) < 1e-13


def test_roundtrip_recovers_samples():
    G = 10
    x, t = bump(G)
    full = forward_band(t, G, None)
    back = invert_band(full, G, None, 0, 2**G)
    assert np.abs(back[0] - t).max() < 1e-10


def test_negative_grid_indices_wrap_to_padding():
    G = 9
    x, t = bump(G)
    full = forward_band(t, G, None)
    ext = invert_band(full, G, None, -(2**G), 2 * 2**G)[0]
    # left pad [-1, 0) and right pad (1, 2] see the periodic window: zero here
    assert np.abs(ext[: 2**G - 8]).max() < 1e-10
    assert np.abs(ext[-(2**G - 8) :]).max() < 1e-10
    assert np.abs(ext[2**G : 2 * 2**G + 1] - t).max() < 1e-10


def test_band_truncation_loses_only_tail_mass():
    G = 11
    x, t = bump(G)
    P = band_count(120.0)
    band = forward_band(t, G, P)
    back = invert_band(band, G, P, 0, 2**G)[0]
    assert np.abs(back - t).max() < 1e-3


def test_forward_band_validation():
    with pytest.raises(ValueError):
        forward_band(np.zeros(100), 8, 3)
    with pytest.raises(ValueError):
        forward_band(np.zeros(2**8 + 1), 8, WINDOW * 2**8)


def test_invert_band_validation():
    with pytest.raises(ValueError):
        invert_band(np.zeros(11, dtype=complex), 8, None, 0, 4)
    # a one-sided band is not conjugate-symmetric: complex output
    band = np.zeros(7, dtype=complex)
    band[5] = 1.0
    with pytest.raises(ArithmeticError):
        invert_band(band, 8, 3, 0, 2**8)


def test_matrix_rows_are_independent():
    G = 9
    x, t = bump(G)
    two = np.vstack([t, 2.0 * t])
    band = forward_band(two, G, 20)
    assert np.abs(band[1] - 2.0 * band[0]).max() < 1e-12
