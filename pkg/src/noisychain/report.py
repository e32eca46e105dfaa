"""Report writers: delimited tables, surface dumps, manifest, figures.

Everything written here is deterministic for a fixed RunConfig: floats
are serialized with shortest-roundtrip repr, JSON keys are sorted, and no
timestamps are embedded, so a rerun from the manifest byte-reproduces the
delimited outputs.  Figures are a convenience layer on top (PNG encoders
embed library metadata, so determinism is only promised for the text
outputs).
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .bench import MiseReport, RunConfig
from .chains import make_chain, true_transition
from .errors import ConfigError
from .estimator import EstimatorConfig, grid_evaluator
from .noise import make_noise
from .wavelets import build_basis

MANIFEST_VERSION = 1


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _slug(text: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-")


def manifest_dict(config: RunConfig) -> dict:
    """Config echo sufficient to reproduce the run (output paths excluded
    so reruns into fresh directories compare byte-identical)."""
    noises = []
    for nz in config.noises:
        noises.append({"family": nz.family, "lam": nz.lam, "zeta": nz.zeta, "mu": nz.mu})
    est = asdict(config.estimator)
    return {
        "manifest_version": MANIFEST_VERSION,
        "versions": {"noisychain": __version__, "numpy": np.__version__},
        "chains": [k if isinstance(k, str) else k.kind for k in config.chains],
        "noises": noises,
        "n_values": list(config.n_values),
        "replicates": config.replicates,
        "estimator": est,
        "auto_penalty": config.auto_penalty,
        "grid": config.grid,
        "seed": config.seed,
    }


def load_manifest(path) -> RunConfig:
    """Rebuild the RunConfig recorded in a manifest file."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("manifest_version") != MANIFEST_VERSION:
        raise ConfigError(f"unsupported manifest version {doc.get('manifest_version')!r}")
    noises = tuple(
        make_noise(nz["family"], lam=nz["lam"], zeta=nz.get("zeta"), mu=nz.get("mu", 0.0))
        for nz in doc["noises"]
    )
    est = dict(doc["estimator"])
    est["domain"] = tuple(tuple(iv) for iv in est["domain"])
    return RunConfig(
        chains=tuple(doc["chains"]),
        noises=noises,
        n_values=tuple(doc["n_values"]),
        replicates=doc["replicates"],
        estimator=EstimatorConfig(**est),
        auto_penalty=doc["auto_penalty"],
        grid=doc["grid"],
        seed=doc["seed"],
    )


def _write_csv(path: Path, header: list, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_outputs(report: MiseReport, outdir=None, force: bool = False, figures: bool = True):
    """Write all artifacts into the output directory; see module docs.

    Returns the list of written paths.  Refuses to clobber a directory
    holding a previous run's manifest unless ``force`` is set.
    """
    config = report.config
    out = Path(outdir if outdir is not None else config.outdir)
    out.mkdir(parents=True, exist_ok=True)
    manifest_path = out / "manifest.json"
    if manifest_path.exists() and not force:
        raise ConfigError(f"{manifest_path} exists; pass force to overwrite")
    written = []

    n_values = list(config.n_values)
    groups: dict = {}
    for cell in report.cells:
        groups.setdefault((cell.chain, cell.noise), {})[cell.n] = cell

    rows = []
    for (chain, noise), by_n in groups.items():
        row = [chain] + [
            by_n[n].mise_mean if n in by_n else float("nan") for n in n_values
        ] + [noise]
        rows.append(row)
    table1 = out / "table1.csv"
    _write_csv(table1, ["chain"] + [f"n={n}" for n in n_values] + ["noise"], rows)
    written.append(table1)

    cells_path = out / "cells.csv"
    _write_csv(
        cells_path,
        [
            "chain", "noise", "n", "replicates", "mise_mean", "mise_se",
            "mhat_mean", "truncated", "gamma_failed", "failures",
        ],
        (
            [
                c.chain, c.noise, c.n, c.replicates, c.mise_mean, c.mise_se,
                c.mhat_mean, c.truncated, c.gamma_failed, c.failures,
            ]
            for c in report.cells
        ),
    )
    written.append(cells_path)

    runs_path = out / "runs.csv"
    _write_csv(
        runs_path,
        ["chain", "noise", "n", "rep", "failed", "mise", "m_hat", "truncated", "gamma_failed"],
        (
            [c.chain, c.noise, c.n, r.rep, int(r.failed), r.mise, r.m_hat,
             int(r.truncated), int(r.gamma_failed)]
            for c in report.cells
            for r in c.reps
        ),
    )
    written.append(runs_path)

    surf_dir = out / "surfaces"
    surf_dir.mkdir(exist_ok=True)
    surface_data = {}
    cfg = config.estimator
    basis = build_basis(N=cfg.N, J=cfg.J, m_max=cfg.m_max, G=cfg.G)
    for cell in report.cells:
        chain = make_chain(cell.chain)
        (a1, b1), (a2, b2) = chain.domain
        xs = np.linspace(a1, b1, config.grid)
        ys = np.linspace(a2, b2, config.grid)
        truth = true_transition(chain, xs[:, None], ys[None, :])
        if cell.sample_estimate is not None:
            est_vals = grid_evaluator(cell.sample_estimate, basis)(xs, ys)
        else:
            est_vals = np.full_like(truth, np.nan)
        name = f"surface_{_slug(cell.chain)}_{_slug(cell.noise)}_n{cell.n}"
        path = surf_dir / f"{name}.csv"
        _write_csv(
            path,
            ["x", "y", "true", "estimate"],
            (
                [xs[i], ys[j], truth[i, j], est_vals[i, j]]
                for i in range(config.grid)
                for j in range(config.grid)
            ),
        )
        written.append(path)
        surface_data[(cell.chain, cell.noise, cell.n)] = (xs, ys, truth, est_vals)

    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest_dict(config), fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(manifest_path)

    if figures:
        written.extend(_write_figures(report, out, groups, surface_data))
    return written


def _write_figures(report: MiseReport, out: Path, groups: dict, surface_data: dict):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written = []
    config = report.config
    n_values = list(config.n_values)

    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    for (chain, noise), by_n in groups.items():
        ns = [n for n in n_values if n in by_n]
        means = [by_n[n].mise_mean for n in ns]
        ax.plot(ns, means, marker="o", label=f"{chain} / {noise}")
    ax.set_xlabel("n")
    ax.set_ylabel("mean MISE")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    path = out / "fig_mise_vs_n.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    for (chain, noise), by_n in groups.items():
        n_big = max(n for n in by_n)
        key = (chain, noise, n_big)
        if key not in surface_data:
            continue
        xs, ys, truth, est_vals = surface_data[key]
        slug = f"{_slug(chain)}_{_slug(noise)}_n{n_big}"

        fig, axes = plt.subplots(1, 2, figsize=(9, 4), sharey=True)
        vmax = max(truth.max(), np.nanmax(est_vals) if np.isfinite(est_vals).any() else 0.0)
        for ax, vals, title in ((axes[0], truth, "true"), (axes[1], est_vals, "estimate")):
            pm = ax.pcolormesh(xs, ys, vals.T, shading="auto", vmin=0.0, vmax=vmax)
            ax.set_title(f"{chain} / {noise}: {title}")
            ax.set_xlabel("x")
        axes[0].set_ylabel("y")
        fig.colorbar(pm, ax=axes, fraction=0.046)
        path = out / f"fig_surface_{slug}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

        fig, axes = plt.subplots(1, 3, figsize=(11, 3.4), sharey=True)
        for ax, q in zip(axes, (0.25, 0.5, 0.75)):
            i = int(q * (len(xs) - 1))
            ax.plot(ys, truth[i], "k-", label="true")
            ax.plot(ys, est_vals[i], "r--", label="estimate")
            ax.set_title(f"x = {xs[i]:.3g}")
            ax.set_xlabel("y")
            ax.grid(True, alpha=0.3)
        axes[0].set_ylabel("density")
        axes[0].legend(fontsize=8)
        fig.tight_layout()
        path = out / f"fig_sections_{slug}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
