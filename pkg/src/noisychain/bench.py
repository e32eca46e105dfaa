"""Experiment harness: (chain x noise x n) grids of replicated runs.

Each cell simulates a hidden path, observes it through noise, runs the
full estimation pipeline, and integrates the squared error against the
closed-form transition density.  Replicate seeds come from a documented
splitting rule -- SeedSequence(master, spawn_key=(cell_index, replicate))
spawned once for the chain and once for the noise -- so any cell or
replicate can be reproduced in isolation and results are independent of
execution order.  Aggregation accumulates in fixed index order.

Per-replicate numeric failures (observations escaping the padded grid,
solver breakdown) are counted and excluded, never silently dropped; the
CLI maps a nonzero failure count to its "partial results" exit code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .chains import PAD_HINTS, ChainModel, make_chain, observe, simulate, true_transition
from .deconv import build_table, default_pad
from .errors import ConfigError, NumericError
from .estimator import (
    EstimatorConfig,
    TransitionEstimate,
    grid_evaluator,
    rescale,
    scale_noise,
    select_and_estimate,
)
from .noise import NoiseModel
from .wavelets import WaveletBasis, build_basis


@dataclass(frozen=True)
class RunConfig:
    """One bench invocation: the grid axes and the shared knobs.

    ``estimator`` carries the wavelet / penalty / guard settings; its
    domain field is ignored because every chain brings its own square.
    With ``auto_penalty`` the penalty formula follows the noise family
    (gaussian_practical for Gaussian noise, laplace_practical otherwise);
    switch it off to force the template's own mode.
    """

    chains: tuple
    noises: tuple
    n_values: tuple
    replicates: int = 50
    estimator: EstimatorConfig = EstimatorConfig()
    auto_penalty: bool = True
    grid: int = 128
    seed: int = 20250101
    outdir: str = "bench_out"

    def __post_init__(self):
        object.__setattr__(self, "chains", tuple(self.chains))
        object.__setattr__(self, "noises", tuple(self.noises))
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        if not self.chains or not self.noises or not self.n_values:
            raise ConfigError("chains, noises and n_values must be nonempty")
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if self.grid < 32:
            raise ConfigError("MISE quadrature grid must be >= 32 per axis")
        if any(n < 2 for n in self.n_values):
            raise ConfigError("every n must be >= 2")


@dataclass(frozen=True)
class RepResult:
    """One replicate's outcome (``failed`` rows keep their slot so the
    record of exclusions survives into the run table)."""

    rep: int
    failed: bool
    mise: float
    m_hat: int
    truncated: bool
    gamma_failed: bool


@dataclass(frozen=True)
class CellResult:
    """Per-replicate outcomes and aggregates for one (chain, noise, n)."""

    chain: str
    noise: str
    n: int
    reps: tuple
    sample_estimate: TransitionEstimate | None  # first success, for surfaces

    @property
    def mise_values(self) -> tuple:
        return tuple(r.mise for r in self.reps if not r.failed)

    @property
    def replicates(self) -> int:
        return len(self.mise_values)

    @property
    def failures(self) -> int:
        return sum(r.failed for r in self.reps)

    @property
    def mise_mean(self) -> float:
        v = self.mise_values
        return float(np.mean(v)) if v else math.nan

    @property
    def mise_se(self) -> float:
        v = self.mise_values
        if len(v) < 2:
            return 0.0 if v else math.nan
        return float(np.std(v, ddof=1) / math.sqrt(len(v)))

    @property
    def mhat_mean(self) -> float:
        ms = [r.m_hat for r in self.reps if not r.failed]
        return float(np.mean(ms)) if ms else math.nan

    @property
    def truncated(self) -> int:
        return sum(r.truncated for r in self.reps if not r.failed)

    @property
    def gamma_failed(self) -> int:
        return sum(r.gamma_failed for r in self.reps if not r.failed)


@dataclass(frozen=True)
class MiseReport:
    config: RunConfig
    cells: tuple

    @property
    def total_failures(self) -> int:
        return sum(c.failures for c in self.cells)


def noise_label(noise: NoiseModel) -> str:
    if noise.family in ("gamma", "symmetric_gamma"):
        return f"{noise.family}({noise.lam:g},{noise.zeta:g})"
    return f"{noise.family}({noise.lam:g})"


def mise_single(est, chain: ChainModel, grid: int = 128, basis: WaveletBasis | None = None):
    """Trapezoidal integral over A of (true - estimated)^2.

    ``est`` is either a TransitionEstimate (then ``basis`` is required) or
    any callable f(xs, ys) -> value matrix, which lets tests inject exact
    surrogates.
    """
    if grid < 32:
        raise ConfigError("MISE quadrature grid must be >= 32 per axis")
    (a1, b1), (a2, b2) = chain.domain
    if isinstance(est, TransitionEstimate):
        if basis is None:
            raise ConfigError("mise_single needs the basis to evaluate an estimate")
        if not (
            math.isclose(est.a, a1, abs_tol=1e-12)
            and math.isclose(est.a + est.width, b1, abs_tol=1e-12)
        ):
            raise ConfigError("estimate and chain must share the estimation square")
        fn = grid_evaluator(est, basis)
    else:
        fn = est
    xs = np.linspace(a1, b1, grid)
    ys = np.linspace(a2, b2, grid)
    diff = true_transition(chain, xs[:, None], ys[None, :]) - fn(xs, ys)
    return float(np.trapezoid(np.trapezoid(diff * diff, ys, axis=1), xs))


def cell_estimator_config(
    template: EstimatorConfig, chain: ChainModel, noise: NoiseModel, auto_penalty: bool
) -> EstimatorConfig:
    penalty = template.penalty
    if auto_penalty and penalty != "theoretical":
        penalty = "gaussian_practical" if noise.family == "gaussian" else "laplace_practical"
    return replace(template, domain=chain.domain, penalty=penalty)


def table_pad(basis: WaveletBasis, chain: ChainModel, scaled_noise: NoiseModel) -> float:
    return PAD_HINTS[chain.kind] + default_pad(basis, scaled_noise)


def replicate_seed(master: int, cell_idx: int, rep: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=master, spawn_key=(cell_idx, rep))


def run_replicate(
    chain: ChainModel,
    noise: NoiseModel,
    n: int,
    cfg: EstimatorConfig,
    table,
    grid: int,
    seed: np.random.SeedSequence,
):
    """One simulate -> observe -> estimate -> MISE pass."""
    s_chain, s_noise = seed.spawn(2)
    x = simulate(chain, n, np.random.default_rng(s_chain))
    y = observe(x, noise, s_noise)
    sample = rescale(y, cfg, noise)
    est = select_and_estimate(sample, table, cfg)
    mise = mise_single(est, chain, grid, basis=table.basis)
    return est, mise


def run_grid(config: RunConfig, progress=None) -> MiseReport:
    """Full grid sweep; deterministic given the master seed.

    Cells are visited chains-major, then noises, then n values, and the
    per-cell tables are shared across n.  ``progress`` is an optional
    callback (cell_index, total, label).
    """
    cells = []
    cell_idx = 0
    total = len(config.chains) * len(config.noises) * len(config.n_values)
    for kind in config.chains:
        chain = make_chain(kind) if isinstance(kind, str) else kind
        for noise in config.noises:
            cfg = cell_estimator_config(config.estimator, chain, noise, config.auto_penalty)
            basis = build_basis(N=cfg.N, J=cfg.J, m_max=cfg.m_max, G=cfg.G)
            scaled = scale_noise(noise, cfg.square[1] - cfg.square[0])
            table = build_table(
                basis, scaled, pad=cfg.pad or table_pad(basis, chain, scaled), q_floor=cfg.q_floor
            )
            for n in config.n_values:
                if progress is not None:
                    progress(cell_idx, total, f"{chain.kind} {noise_label(noise)} n={n}")
                cells.append(
                    _run_cell(chain, noise, n, config, cfg, table, cell_idx)
                )
                cell_idx += 1
    return MiseReport(config=config, cells=tuple(cells))


def _run_cell(
    chain: ChainModel,
    noise: NoiseModel,
    n: int,
    config: RunConfig,
    cfg: EstimatorConfig,
    table,
    cell_idx: int,
) -> CellResult:
    reps = []
    first_est = None
    for rep in range(config.replicates):
        seed = replicate_seed(config.seed, cell_idx, rep)
        try:
            est, mise = run_replicate(chain, noise, n, cfg, table, config.grid, seed)
        except NumericError:
            reps.append(RepResult(rep, True, math.nan, -1, False, False))
            continue
        reps.append(RepResult(rep, False, mise, est.m_hat, est.truncated, est.gamma_failed))
        if first_est is None:
            first_est = est
    return CellResult(
        chain=chain.kind,
        noise=noise_label(noise),
        n=n,
        reps=tuple(reps),
        sample_estimate=first_est,
    )


def emit_outputs(report: MiseReport, outdir=None, force: bool = False, figures: bool = True):
    """Write the delimited tables, surface dumps, manifest, and figures."""
    from .report import write_outputs

    return write_outputs(report, outdir=outdir, force=force, figures=figures)
