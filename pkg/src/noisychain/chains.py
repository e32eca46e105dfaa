"""Benchmark Markov chains: simulators and closed-form transition densities.

Six preset chains cover three families:

  ar-i, ar-ii     X' = a X + b + eps,  eps ~ N(0, sigma2)
  sqrt-cir        Euclidean norm of delta AR(a, 0, beta^2) coordinates
  cir-iii, cir-iv squared norm of the same coordinate construction
  arch            X' = sin(X) + (cos(X) + 3) eps,  eps ~ N(0, 1)

AR chains and the coordinate-based families start from their exact
stationary laws (Gaussian, and i.i.d. Gaussian coordinates whose squared
norm is the Gamma invariant law), so no burn-in is needed; the ARCH chain
has no explicit stationary density and is warmed up for 500 steps.

Paths may leave the estimation square: estimation uses every observation
and only the evaluation region is restricted, so simulators never clip.
PAD_HINTS gives per-kind grid padding (in rescaled-square units) generous
enough that deconvolution grids cover essentially all excursions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .bessel import iv_scaled
from .errors import ConfigError
from .noise import NoiseModel, sample as sample_noise

KINDS = ("ar-i", "ar-ii", "sqrt-cir", "cir-iii", "cir-iv", "arch")

_AR_KINDS = ("ar-i", "ar-ii")
_COORD_KINDS = ("sqrt-cir", "cir-iii", "cir-iv")

# Padding of the rescaled evaluation grid, per kind, sized so that the
# stationary law plus noise stays inside the padded grid except for
# events of negligible probability (which the bench counts as failures).
PAD_HINTS = {
    "ar-i": 1.5,
    "ar-ii": 1.5,
    "sqrt-cir": 1.5,
    "cir-iii": 3.0,
    "cir-iv": 8.0,
    "arch": 2.5,
}


@dataclass(frozen=True)
class ChainModel:
    """One benchmark chain: kind, parameters, estimation square, burn-in."""

    kind: str
    domain: tuple
    burn_in: int = 0
    a: float = 0.0
    b: float = 0.0
    sigma2: float = 0.0
    beta: float = 0.0
    delta: int = 0

    @property
    def is_ar(self) -> bool:
        return self.kind in _AR_KINDS

    @property
    def is_coord(self) -> bool:
        return self.kind in _COORD_KINDS


_PRESETS = {
    "ar-i": dict(domain=((-2.0, 2.0), (-2.0, 2.0)), a=2.0 / 3.0, b=0.0, sigma2=5.0 / 9.0),
    "ar-ii": dict(domain=((4.0, 8.0), (4.0, 8.0)), a=0.5, b=3.0, sigma2=1.0),
    "sqrt-cir": dict(domain=((2.0, 10.0), (2.0, 10.0)), a=0.5, beta=3.0, delta=3),
    "cir-iii": dict(
        domain=((0.1, 3.0), (0.1, 3.0)), a=0.75, beta=math.sqrt(7.0 / 48.0), delta=4
    ),
    "cir-iv": dict(domain=((0.0, 2.0), (0.0, 2.0)), a=1.0 / 3.0, beta=0.75, delta=2),
    "arch": dict(domain=((-5.0, 5.0), (-5.0, 5.0)), burn_in=500),
}


def make_chain(kind: str, **overrides) -> ChainModel:
    """Preset chain by kind name, with optional parameter overrides."""
    key = kind.lower().replace("_", "-")
    if key not in _PRESETS:
        raise ConfigError(f"unknown chain kind {kind!r}; choose from {KINDS}")
    model = replace(ChainModel(kind=key, **_PRESETS[key]), **overrides)
    _validate(model)
    return model


def _validate(chain: ChainModel) -> None:
    if chain.is_ar or chain.is_coord:
        if not abs(chain.a) < 1:
            raise ConfigError("autoregression coefficient must satisfy |a| < 1")
    if chain.is_ar and chain.sigma2 <= 0:
        raise ConfigError("AR innovation variance must be positive")
    if chain.is_coord:
        if chain.beta <= 0:
            raise ConfigError("coordinate innovation scale beta must be positive")
        if chain.delta < 1 or chain.delta != int(chain.delta):
            raise ConfigError("coordinate count delta must be a positive integer")
    (a1, b1), (a2, b2) = chain.domain
    if not (b1 > a1 and b2 > a2):
        raise ConfigError("degenerate estimation domain")


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def simulate(chain: ChainModel, n: int, seed) -> np.ndarray:
    """Hidden path X_0..X_n from the stationary chain (deterministic per
    seed; ARCH is warmed up through its burn-in instead of an exact
    stationary draw)."""
    if n < 2:
        raise ConfigError("need n >= 2 transitions")
    rng = _rng(seed)
    if chain.is_ar:
        mean = chain.b / (1.0 - chain.a)
        sd0 = math.sqrt(chain.sigma2 / (1.0 - chain.a**2))
        sd = math.sqrt(chain.sigma2)
        x = np.empty(n + 1)
        x[0] = rng.normal(mean, sd0)
        eps = rng.normal(0.0, sd, size=n)
        for i in range(n):
            x[i + 1] = chain.a * x[i] + chain.b + eps[i]
        return x
    if chain.is_coord:
        d = int(chain.delta)
        sd0 = chain.beta / math.sqrt(1.0 - chain.a**2)
        xi = rng.normal(0.0, sd0, size=d)
        eps = rng.normal(0.0, chain.beta, size=(n, d))
        sq = np.empty(n + 1)
        sq[0] = xi @ xi
        for i in range(n):
            xi = chain.a * xi + eps[i]
            sq[i + 1] = xi @ xi
        return np.sqrt(sq) if chain.kind == "sqrt-cir" else sq
    # arch: no explicit stationary law; start from a standard normal and
    # discard burn_in steps
    total = n + chain.burn_in
    eps = rng.normal(0.0, 1.0, size=total)
    x = np.empty(total + 1)
    x[0] = rng.normal()
    for i in range(total):
        x[i + 1] = math.sin(x[i]) + (math.cos(x[i]) + 3.0) * eps[i]
    return x[chain.burn_in :]


def observe(x_path, noise: NoiseModel, seed) -> np.ndarray:
    """Noisy observations Y_i = X_i + eps_i with i.i.d. errors independent
    of the chain."""
    x = np.asarray(x_path, dtype=float)
    if noise.family == "none":
        return x.copy()
    return x + sample_noise(noise, x.size, seed)


# ---------------------------------------------------------------------------
# Closed-form transition densities


def _norm_pdf(z: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def _cir_from_origin(chain: ChainModel, y: np.ndarray) -> np.ndarray:
    # exact one-step law from x = 0: beta^2 chi2(delta), a Gamma density
    # with shape delta/2 and scale 2 beta^2
    s = 2.0 * chain.beta**2
    shape = chain.delta / 2.0
    out = np.zeros_like(y)
    pos = y > 0
    out[pos] = (
        y[pos] ** (shape - 1.0) * np.exp(-y[pos] / s) / (s**shape * math.gamma(shape))
    )
    if shape == 1.0:
        out[y == 0] = 1.0 / s
    return out


def true_transition(chain: ChainModel, x, y) -> np.ndarray | float:
    """Closed-form transition density pi(x, y), vectorized with numpy
    broadcasting.  CIR kinds reject x < 0 (x = 0 uses the exact Gamma
    limit of the formula); sqrt-cir rejects x <= 0; densities vanish for
    y <= 0 where the support demands it."""
    scalar = np.ndim(x) == 0 and np.ndim(y) == 0
    x, y = np.broadcast_arrays(
        np.atleast_1d(np.asarray(x, dtype=float)), np.atleast_1d(np.asarray(y, dtype=float))
    )
    if chain.is_ar:
        sd = math.sqrt(chain.sigma2)
        out = _norm_pdf((y - chain.a * x - chain.b) / sd) / sd
    elif chain.kind == "arch":
        s = np.cos(x) + 3.0
        out = _norm_pdf((y - np.sin(x)) / s) / s
    elif chain.kind == "sqrt-cir":
        if np.any(x <= 0):
            raise ConfigError("sqrt-cir transition needs x > 0")
        a, b2 = chain.a, chain.beta**2
        nu = chain.delta / 2.0 - 1.0
        out = np.zeros_like(y)
        pos = y > 0
        xp, yp = x[pos], y[pos]
        out[pos] = (
            np.exp(-((yp - a * xp) ** 2) / (2.0 * b2))
            * iv_scaled(nu, a * xp * yp / b2)
            * (a * xp / b2)
            * (yp / (a * xp)) ** (chain.delta / 2.0)
        )
    else:  # cir
        if np.any(x < 0):
            raise ConfigError("cir transition needs x >= 0")
        a, b2 = chain.a, chain.beta**2
        nu = chain.delta / 2.0 - 1.0
        expo = chain.delta / 4.0 - 0.5
        out = np.zeros_like(y)
        origin = x == 0
        if origin.any():
            out[origin] = _cir_from_origin(chain, y[origin])
        pos = (~origin) & (y >= 0)
        xp, yp = x[pos], y[pos]
        rt = np.sqrt(xp * yp)
        out[pos] = (
            np.exp(-((np.sqrt(yp) - a * np.sqrt(xp)) ** 2) / (2.0 * b2))
            * iv_scaled(nu, a * rt / b2)
            * (yp / (a**2 * xp)) ** expo
            / (2.0 * b2)
        )
    return float(out.flat[0]) if scalar else out


def stationary_density(chain: ChainModel, x) -> np.ndarray | float:
    """Invariant density f (explicit for AR and the coordinate kinds)."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if chain.is_ar:
        mean = chain.b / (1.0 - chain.a)
        sd = math.sqrt(chain.sigma2 / (1.0 - chain.a**2))
        out = _norm_pdf((x - mean) / sd) / sd
    elif chain.is_coord:
        rate = (1.0 - chain.a**2) / (2.0 * chain.beta**2)
        shape = chain.delta / 2.0
        if chain.kind == "sqrt-cir":
            # Gamma law of the squared radius, pushed through x -> sqrt(x)
            out = np.zeros_like(x)
            pos = x > 0
            z = x[pos] ** 2
            out[pos] = (
                rate**shape * z ** (shape - 1.0) * np.exp(-rate * z) / math.gamma(shape)
            ) * (2.0 * x[pos])
        else:
            out = np.zeros_like(x)
            pos = x > 0
            out[pos] = (
                rate**shape
                * x[pos] ** (shape - 1.0)
                * np.exp(-rate * x[pos])
                / math.gamma(shape)
            )
    else:
        raise ConfigError("no explicit stationary density for this kind")
    return float(out[0]) if scalar else out
