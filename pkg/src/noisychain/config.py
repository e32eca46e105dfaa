"""YAML configuration loading for the command line tools.

Config files are plain nested mappings.  An estimation config:

    domain: [-2.0, 2.0]
    noise: {family: laplace, lam: 5.0}
    estimator: {N: 2, J: 2, m_min: 2, m_max: 3, f0: 0.05}

A bench config adds the grid axes:

    bench:
      chains: [ar-i, arch]
      noises:
        - {family: laplace, lam: 5.0}
        - {family: gaussian, lam: 0.3}
      n_values: [50, 100, 500]
      replicates: 50
      seed: 20250101
    estimator: {N: 2, J: 2, m_min: 2, m_max: 3}

Unknown keys fail loudly; "plug-in" (or null) as f0 switches the guard
threshold to the plug-in estimate.
"""

from __future__ import annotations

from pathlib import Path

import yaml

from .bench import RunConfig
from .errors import ConfigError
from .estimator import EstimatorConfig
from .noise import NoiseModel, make_noise

_ESTIMATOR_KEYS = {
    "N", "J", "m_min", "m_max", "G", "penalty", "K", "kappa", "f0",
    "gamma_threshold_factor", "gamma_enforce", "q_floor", "pad",
}
_BENCH_KEYS = {
    "chains", "noises", "n_values", "replicates", "grid", "seed", "auto_penalty",
}


def load_yaml(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return doc


def noise_from_dict(d) -> NoiseModel:
    if not isinstance(d, dict) or "family" not in d:
        raise ConfigError("noise section needs at least a 'family' key")
    extra = set(d) - {"family", "lam", "zeta", "mu"}
    if extra:
        raise ConfigError(f"unknown noise keys: {sorted(extra)}")
    return make_noise(
        d["family"], lam=d.get("lam", 1.0), zeta=d.get("zeta"), mu=d.get("mu", 0.0)
    )


def estimator_from_dict(d, domain=None) -> EstimatorConfig:
    d = dict(d or {})
    extra = set(d) - _ESTIMATOR_KEYS - {"domain"}
    if extra:
        raise ConfigError(f"unknown estimator keys: {sorted(extra)}")
    if domain is None:
        domain = d.pop("domain", (0.0, 1.0))
    else:
        d.pop("domain", None)
    f0 = d.get("f0", 0.05)
    if isinstance(f0, str):
        if f0.replace("-", "").replace("_", "") != "plugin":
            raise ConfigError(f"f0 must be a number, null, or 'plug-in'; got {f0!r}")
        f0 = None
    d["f0"] = f0
    if isinstance(domain, (list, tuple)) and len(domain) == 2 and isinstance(
        domain[0], (list, tuple)
    ):
        domain = tuple(tuple(iv) for iv in domain)
    else:
        domain = tuple(domain)
    return EstimatorConfig(domain=domain, **d)


def run_config_from_dict(doc: dict, outdir=None) -> RunConfig:
    bench = doc.get("bench")
    if not isinstance(bench, dict):
        raise ConfigError("bench config needs a 'bench' section")
    extra = set(bench) - _BENCH_KEYS
    if extra:
        raise ConfigError(f"unknown bench keys: {sorted(extra)}")
    for key in ("chains", "noises", "n_values"):
        if key not in bench:
            raise ConfigError(f"bench section needs '{key}'")
    noises = tuple(noise_from_dict(nz) for nz in bench["noises"])
    est = estimator_from_dict(doc.get("estimator"))
    kwargs = dict(
        chains=tuple(bench["chains"]),
        noises=noises,
        n_values=tuple(bench["n_values"]),
        estimator=est,
    )
    for key in ("replicates", "grid", "seed", "auto_penalty"):
        if key in bench:
            kwargs[key] = bench[key]
    if outdir is not None:
        kwargs["outdir"] = str(outdir)
    return RunConfig(**kwargs)


def load_run_config(path, outdir=None) -> RunConfig:
    return run_config_from_dict(load_yaml(path), outdir=outdir)


def load_estimate_config(path):
    """(domain, noise, estimator config) triple for the estimate command."""
    doc = load_yaml(path)
    if "domain" not in doc or "noise" not in doc:
        raise ConfigError("estimate config needs 'domain' and 'noise'")
    extra = set(doc) - {"domain", "noise", "estimator"}
    if extra:
        raise ConfigError(f"unknown top-level keys: {sorted(extra)}")
    noise = noise_from_dict(doc["noise"])
    cfg = estimator_from_dict(doc.get("estimator"), domain=_domain(doc["domain"]))
    return cfg, noise


def _domain(dom):
    if isinstance(dom, (list, tuple)) and len(dom) == 2 and isinstance(
        dom[0], (list, tuple)
    ):
        return tuple(tuple(iv) for iv in dom)
    return tuple(dom)
