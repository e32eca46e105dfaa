import math

import mpmath
import numpy as np
import pytest

from noisychain import (
    ConfigError,
    KINDS,
    PAD_HINTS,
    make_chain,
    make_noise,
    observe,
    simulate,
    stationary_density,
    true_transition,
)

ALL = list(KINDS)


def test_presets_carry_the_study_parameters():
    ar1 = make_chain("ar-i")
    assert (ar1.a, ar1.b, ar1.sigma2) == (2.0 / 3.0, 0.0, 5.0 / 9.0)
    assert ar1.domain == ((-2.0, 2.0), (-2.0, 2.0))
    ar2 = make_chain("ar-ii")
    assert (ar2.a, ar2.b, ar2.sigma2) == (0.5, 3.0, 1.0)
    assert ar2.domain == ((4.0, 8.0), (4.0, 8.0))
    rad = make_chain("sqrt-cir")
    assert (rad.a, rad.beta, rad.delta) == (0.5, 3.0, 3)
    assert rad.domain == ((2.0, 10.0), (2.0, 10.0))
    c3 = make_chain("cir-iii")
    assert (c3.a, c3.delta) == (0.75, 4)
    assert abs(c3.beta - math.sqrt(7.0 / 48.0)) < 1e-15
    assert c3.domain == ((0.1, 3.0), (0.1, 3.0))
    c4 = make_chain("cir-iv")
    assert (c4.a, c4.beta, c4.delta) == (1.0 / 3.0, 0.75, 2)
    assert c4.domain == ((0.0, 2.0), (0.0, 2.0))
    arch = make_chain("arch")
    assert arch.domain == ((-5.0, 5.0), (-5.0, 5.0))
    assert arch.burn_in == 500


def test_kind_normalization_and_overrides():
    assert make_chain("AR_I").kind == "ar-i"
    tweaked = make_chain("ar-i", a=0.5, domain=((-1, 1), (-1, 1)))
    assert tweaked.a == 0.5
    assert tweaked.domain == ((-1.0, 1.0), (-1.0, 1.0))


def test_make_chain_validation():
    with pytest.raises(ConfigError):
        make_chain("brownian")
    with pytest.raises(ConfigError):
        make_chain("ar-i", a=1.0)
    with pytest.raises(ConfigError):
        make_chain("ar-i", sigma2=0.0)
    with pytest.raises(ConfigError):
        make_chain("cir-iv", beta=-1.0)
    with pytest.raises(ConfigError):
        make_chain("cir-iv", delta=0)
    with pytest.raises(ConfigError):
        make_chain("ar-i", domain=((2, 2), (2, 2)))


@pytest.mark.parametrize("kind", ALL)
def test_transition_density_normalizes(kind):
    chain = make_chain(kind)
    (a1, b1), _ = chain.domain
    if chain.is_coord:
        y = np.linspace(1e-9, 120.0, 240001)
    else:
        y = np.linspace(-40.0, 40.0, 160001)
    for x in (a1 + 0.17 * (b1 - a1), a1 + 0.71 * (b1 - a1)):
        dens = true_transition(chain, x, y)
        assert np.all(dens >= 0.0)
        assert abs(np.trapezoid(dens, y) - 1.0) < 1e-6, (kind, x)


def test_ar_transition_is_the_innovation_density():
    chain = make_chain("ar-i")
    x, y = 0.4, -0.3
    m = chain.a * x + chain.b
    want = math.exp(-((y - m) ** 2) / (2 * chain.sigma2)) / math.sqrt(
        2 * math.pi * chain.sigma2
    )
    assert abs(true_transition(chain, x, y) - want) < 1e-14


@pytest.mark.parametrize("kind", ["cir-iii", "cir-iv"])
def test_cir_transition_against_bessel_reference(kind):
    chain = make_chain(kind)
    a, b2, d = chain.a, chain.beta**2, chain.delta
    for x, y in ((0.5, 0.8), (1.2, 0.4)):
        nc = a * math.sqrt(x * y) / b2
        with mpmath.workdps(30):
            iv = float(mpmath.besseli(d / 2.0 - 1.0, nc))
        want = (
            (1.0 / (2.0 * b2))
            * math.exp(-(y + a * a * x) / (2.0 * b2))
            * iv
            * (y / (a * a * x)) ** (d / 4.0 - 0.5)
        )
        got = true_transition(chain, x, y)
        assert abs(got - want) < 1e-12 * max(1.0, want), (kind, x, y)


def test_sqrt_cir_transition_against_bessel_reference():
    chain = make_chain("sqrt-cir")
    a, b2, d = chain.a, chain.beta**2, chain.delta
    x, y = 4.0, 5.0
    with mpmath.workdps(30):
        iv = float(mpmath.besseli(d / 2.0 - 1.0, a * x * y / b2))
    want = (
        math.exp(-(y * y + a * a * x * x) / (2.0 * b2))
        * iv
        * (a * x / b2)
        * (y / (a * x)) ** (d / 2.0)
    )
    assert abs(true_transition(chain, x, y) - want) < 1e-12 * want


def test_cir_from_the_origin_is_gamma():
    chain = make_chain("cir-iv")
    s = 2.0 * chain.beta**2
    y = np.linspace(0.0, 3.0, 301)
    got = true_transition(chain, 0.0, y)
    k = chain.delta / 2.0
    want = y ** (k - 1.0) * np.exp(-y / s) / (math.gamma(k) * s**k)
    assert np.abs(got - want).max() < 1e-12


def test_chapman_kolmogorov_two_step():
    # integrating out the middle state gives the two-step kernel, which for
    # these chains stays in the same family with a -> a^2
    z = np.linspace(-60.0, 60.0, 48001)
    ar = make_chain("ar-i")
    two = make_chain("ar-i", a=ar.a**2, sigma2=ar.sigma2 * (1.0 + ar.a**2))
    for x, y in ((0.3, -0.8), (1.5, 0.2)):
        num = np.trapezoid(true_transition(ar, x, z) * true_transition(ar, z, y), z)
        assert abs(num - true_transition(two, x, y)) < 1e-10

    zc = np.linspace(1e-12, 40.0, 120001)
    cir = make_chain("cir-iv")
    two_c = make_chain(
        "cir-iv", a=cir.a**2, beta=cir.beta * math.sqrt(1.0 + cir.a**2)
    )
    for x, y in ((0.5, 1.1), (1.4, 0.2)):
        num = np.trapezoid(
            true_transition(cir, x, zc) * true_transition(cir, zc, y), zc
        )
        assert abs(num - true_transition(two_c, x, y)) < 1e-7


def test_domain_masks():
    cir = make_chain("cir-iv")
    assert true_transition(cir, 0.7, -0.5) == 0.0
    vals = true_transition(cir, 0.7, np.array([-1.0, 0.0, 0.5]))
    assert vals[0] == 0.0 and np.isfinite(vals[1]) and vals[2] > 0.0
    rad = make_chain("sqrt-cir")
    assert true_transition(rad, 3.0, -0.1) == 0.0
    with pytest.raises(ConfigError):
        true_transition(rad, 0.0, 1.0)
    with pytest.raises(ConfigError):
        true_transition(cir, -0.2, 1.0)


def test_simulate_shapes_and_determinism():
    for kind in ALL:
        chain = make_chain(kind)
        path = simulate(chain, 50, 11)
        assert path.shape == (51,)
        assert np.array_equal(path, simulate(chain, 50, 11))
        assert not np.array_equal(path, simulate(chain, 50, 12))
    with pytest.raises(ConfigError):
        simulate(make_chain("ar-i"), 1, 0)


def test_simulated_stationary_moments():
    n = 60000
    x = simulate(make_chain("ar-i"), n, 3)
    assert abs(x.mean()) < 0.05
    assert abs(x.var() - 1.0) < 0.05

    x = simulate(make_chain("ar-ii"), n, 4)
    assert abs(x.mean() - 6.0) < 0.05
    assert abs(x.var() - 4.0 / 3.0) < 0.06

    cir = make_chain("cir-iv")
    v = cir.beta**2 / (1.0 - cir.a**2)
    x = simulate(cir, n, 5)
    assert np.all(x >= 0.0)
    assert abs(x.mean() - cir.delta * v) < 0.05
    assert abs(x.var() - 2.0 * cir.delta * v * v) < 0.1

    rad = make_chain("sqrt-cir")
    x = simulate(rad, n, 6)
    assert np.all(x > 0.0)
    assert abs((x**2).mean() - rad.delta * rad.beta**2 / (1.0 - rad.a**2)) < 0.5

    x = simulate(make_chain("arch"), n, 7)
    assert abs(x.mean() - np.sin(x).mean()) < 0.1  # stationarity of the mean map


def test_one_step_conditional_matches_the_density():
    # empirical transition from a fixed x against the analytic kernel
    chain = make_chain("cir-iii")
    rng = np.random.default_rng(8)
    x0 = 1.3
    v = chain.beta**2
    draws = []
    for _ in range(40000):
        xi = rng.normal(0.0, math.sqrt(v), chain.delta)
        # coordinates conditioned to radius^2 = x0: rotate a fixed split
        xi = xi / np.linalg.norm(xi) * math.sqrt(x0)
        nxt = chain.a * xi + chain.beta * rng.normal(0.0, 1.0, chain.delta)
        draws.append(float(nxt @ nxt))
    draws = np.asarray(draws)
    edges = np.linspace(0.05, 3.5, 24)
    hist, _ = np.histogram(draws, bins=edges, density=True)
    mids = 0.5 * (edges[:-1] + edges[1:])
    dens = true_transition(chain, x0, mids)
    widths = np.diff(edges)
    se = np.sqrt(np.maximum(hist, 1e-3) / (draws.size * widths))
    z = np.abs(hist - dens) / np.maximum(se, 1e-9)
    assert z.max() < 5.0


def test_observe_adds_noise_or_copies():
    x = simulate(make_chain("ar-i"), 30, 1)
    clean = observe(x, make_noise("none"), 5)
    assert np.array_equal(clean, x)
    assert clean is not x
    nz = make_noise("laplace", lam=5.0)
    noisy = observe(x, nz, 5)
    assert noisy.shape == x.shape
    assert np.array_equal(noisy, observe(x, nz, 5))
    assert not np.array_equal(noisy, x)


def test_stationary_density_normalizes():
    for kind in ("ar-i", "ar-ii", "cir-iii", "cir-iv", "sqrt-cir"):
        chain = make_chain(kind)
        x = np.linspace(1e-9, 120.0, 200001) if chain.is_coord else np.linspace(-30, 30, 120001)
        f = stationary_density(chain, x)
        assert abs(np.trapezoid(f, x) - 1.0) < 1e-6, kind
    with pytest.raises(ConfigError):
        stationary_density(make_chain("arch"), 0.0)


def test_pad_hints_cover_all_kinds():
    assert set(PAD_HINTS) == set(KINDS)
    assert all(v > 0 for v in PAD_HINTS.values())
