"""Command line interface.

Subcommands: simulate (chain paths to text files), cache (build and save
a deconvolution table), estimate (fit one dataset, dump coefficients),
bench (replicated MISE grids with tables and figures).

Exit codes: 0 success, 1 configuration error (bad flags, bad config
file, invalid parameters), 2 numeric failure, 3 success with recorded
per-replicate failures (partial results).
"""

from __future__ import annotations

import json
import sys
from dataclasses import asdict
from pathlib import Path

import click
import numpy as np

from . import __version__
from .bench import run_grid
from .cache import check_table, load_table, save_table
from .chains import KINDS, make_chain, observe, simulate
from .config import (
    load_estimate_config,
    load_run_config,
    noise_from_dict,
)
from .deconv import build_table, default_pad
from .errors import ConfigError, NoisychainError, NumericError
from .estimator import grid_evaluator, rescale, scale_noise, select_and_estimate
from .noise import make_noise
from .report import load_manifest, write_outputs
from .wavelets import build_basis, enumerate_model


@click.group(name="noisychain")
@click.version_option(version=__version__)
def cli():
    """Transition density estimation for noisy Markov chain observations."""


def _fmt(v: float) -> str:
    return repr(float(v))


@cli.command(name="simulate")
@click.argument("kind", type=click.Choice(KINDS))
@click.option("-n", "n", type=int, required=True, help="Number of transitions.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-o", "--out", type=click.Path(dir_okay=False), required=True,
              help="Observation file, one value per line.")
@click.option("--noise", "noise_family", default="none", show_default=True,
              help="Noise family (none, laplace, gamma, symmetric-gamma, gaussian).")
@click.option("--lam", type=float, default=1.0, show_default=True)
@click.option("--zeta", type=float, default=None)
@click.option("--mu", type=float, default=0.0, show_default=True)
@click.option("--hidden-out", type=click.Path(dir_okay=False), default=None,
              help="Also write the hidden path.")
def simulate_cmd(kind, n, seed, out, noise_family, lam, zeta, mu, hidden_out):
    """Simulate a stationary chain and observe it through noise."""
    chain = make_chain(kind)
    noise = make_noise(noise_family, lam=lam, zeta=zeta, mu=mu)
    x = simulate(chain, n, seed)
    y = observe(x, noise, np.random.SeedSequence(entropy=seed, spawn_key=(1,)))
    Path(out).write_text("\n".join(_fmt(v) for v in y) + "\n", encoding="utf-8")
    if hidden_out:
        Path(hidden_out).write_text("\n".join(_fmt(v) for v in x) + "\n", encoding="utf-8")
    meta = {
        "chain": asdict(chain),
        "noise": {"family": noise.family, "lam": noise.lam, "zeta": noise.zeta,
                  "mu": noise.mu},
        "n": n,
        "seed": seed,
    }
    meta_path = Path(str(out) + ".meta.json")
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    click.echo(f"wrote {out} ({y.size} observations) and {meta_path}")


def _build_table_for(cfg, noise, extra_pad: float = 0.0):
    basis = build_basis(N=cfg.N, J=cfg.J, m_max=cfg.m_max, G=cfg.G)
    a, b = cfg.square
    scaled = scale_noise(noise, b - a)
    pad = cfg.pad if cfg.pad is not None else default_pad(basis, scaled) + extra_pad
    return build_table(basis, scaled, pad=pad, q_floor=cfg.q_floor)


@cli.command(name="cache")
@click.option("-c", "--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="Estimation config (domain, noise, estimator).")
@click.option("-o", "--out", type=click.Path(dir_okay=False), required=True)
def cache_cmd(config_path, out):
    """Build a deconvolution table and store it as a binary cache."""
    cfg, noise = load_estimate_config(config_path)
    table = _build_table_for(cfg, noise)
    save_table(table, out)
    rows = sum(v.shape[0] for v in table.v_single.values())
    pairs = sum(v.shape[0] for v in table.v_pair.values())
    click.echo(f"wrote {out}: {rows} single kernels, {pairs} pair kernels, "
               f"grid [{table.grid_lo:g}, {table.grid_hi:g}]")


@cli.command(name="estimate")
@click.argument("data", type=click.Path(exists=True, dir_okay=False))
@click.option("-c", "--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("-o", "--out", type=click.Path(dir_okay=False), required=True,
              help="Coefficient dump (CSV).")
@click.option("--cache", "cache_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Reuse a table built by the cache command.")
@click.option("--grid-out", type=click.Path(dir_okay=False), default=None,
              help="Also dump estimate values on a uniform grid.")
@click.option("--grid", type=int, default=64, show_default=True,
              help="Points per axis for --grid-out.")
def estimate_cmd(data, config_path, out, cache_path, grid_out, grid):
    """Estimate the transition density from one observation file."""
    cfg, noise = load_estimate_config(config_path)
    try:
        obs = np.loadtxt(data, dtype=float)
    except ValueError as exc:
        raise ConfigError(f"cannot parse {data}: {exc}") from None
    if obs.ndim != 1:
        raise ConfigError(f"{data}: expected one observation per line")
    sample = rescale(obs, cfg, noise)
    if cache_path:
        table = load_table(cache_path)
        # G falls back to the same default build_basis would pick
        want_g = cfg.G if cfg.G is not None else cfg.m_max + 8
        check_table(table, {"N": cfg.N, "J": cfg.J, "m_max": cfg.m_max, "G": want_g},
                    scale_noise(noise, sample.width))
    else:
        # pad generously enough to cover this dataset's excursions
        excess = max(0.0, float(-sample.y.min()), float(sample.y.max() - 1.0))
        table = _build_table_for(cfg, noise, extra_pad=excess + 0.25)
    est = select_and_estimate(sample, table, cfg)
    basis = table.basis
    lines = [
        f"m_hat,{est.m_hat}",
        f"l2_norm,{_fmt(est.l2_norm)}",
        f"truncated,{int(est.truncated)}",
        f"gamma_failed,{int(est.gamma_failed)}",
        "j_x,kind_x,k_x,j_y,kind_y,k_y,value",
    ]
    for (xi, yi), c in zip(enumerate_model(basis, est.m_hat), est.coeffs):
        lines.append(f"{xi.j},{xi.kind},{xi.k},{yi.j},{yi.kind},{yi.k},{_fmt(c)}")
    Path(out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    click.echo(f"wrote {out}: m_hat={est.m_hat} l2={est.l2_norm:.4g} "
               f"truncated={est.truncated} gamma_failed={est.gamma_failed}")
    if grid_out:
        if grid < 2:
            raise ConfigError("--grid must be at least 2")
        (a1, b1), (a2, b2) = cfg.domain
        xs = np.linspace(a1, b1, grid)
        ys = np.linspace(a2, b2, grid)
        vals = grid_evaluator(est, basis)(xs, ys)
        glines = ["x,y,value"]
        for i in range(grid):
            for j in range(grid):
                glines.append(f"{_fmt(xs[i])},{_fmt(ys[j])},{_fmt(vals[i, j])}")
        Path(grid_out).write_text("\n".join(glines) + "\n", encoding="utf-8")
        click.echo(f"wrote {grid_out} ({grid * grid} grid values)")


@cli.command(name="bench")
@click.option("-c", "--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Bench config file.")
@click.option("--from-manifest", "manifest_path",
              type=click.Path(exists=True, dir_okay=False), default=None,
              help="Rerun the exact configuration of a previous run.")
@click.option("-o", "--outdir", type=click.Path(file_okay=False), default=None,
              help="Output directory (defaults to the config's).")
@click.option("--force", is_flag=True, help="Overwrite a previous run's outputs.")
@click.option("--no-figures", is_flag=True, help="Skip figure rendering.")
def bench_cmd(config_path, manifest_path, outdir, force, no_figures):
    """Run a replicated (chain x noise x n) benchmark grid."""
    if (config_path is None) == (manifest_path is None):
        raise ConfigError("pass exactly one of --config or --from-manifest")
    if manifest_path:
        config = load_manifest(manifest_path)
    else:
        config = load_run_config(config_path, outdir=outdir)

    def progress(i, total, label):
        click.echo(f"[{i + 1}/{total}] {label}", err=True)

    report = run_grid(config, progress=progress)
    written = write_outputs(report, outdir=outdir, force=force, figures=not no_figures)
    click.echo(f"wrote {len(written)} files to {Path(outdir or config.outdir)}")
    for cell in report.cells:
        click.echo(
            f"  {cell.chain} {cell.noise} n={cell.n}: "
            f"MISE {cell.mise_mean:.4f} (se {cell.mise_se:.4f}, "
            f"reps {cell.replicates}, failures {cell.failures})"
        )
    if report.total_failures > 0:
        click.echo(f"partial: {report.total_failures} replicate failures recorded", err=True)
        return 3
    return 0


def main(argv=None) -> int:
    """Entry point with the documented exit-code mapping."""
    try:
        rv = cli.main(args=argv, standalone_mode=False)
        code = rv if isinstance(rv, int) else 0
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        code = 1
    except NumericError as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        code = 2
    except NoisychainError as exc:
        click.echo(f"error: {exc}", err=True)
        code = 2
    except click.UsageError as exc:
        exc.show()
        code = 1
    except click.ClickException as exc:
        exc.show()
        code = 1
    except click.Abort:
        click.echo("aborted", err=True)
        code = 1
    sys.exit(code)


if __name__ == "__main__":
    main()
