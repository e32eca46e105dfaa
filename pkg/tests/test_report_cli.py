"""Report writer and command line tests.

The CLI is exercised through main(argv), which maps package exceptions to
the documented exit codes, so every invocation here asserts on SystemExit.
"""

import json

import numpy as np
import pytest

from noisychain.bench import RunConfig, run_grid
from noisychain.cache import load_table
from noisychain.cli import main
from noisychain.errors import ConfigError
from noisychain.estimator import EstimatorConfig
from noisychain.noise import make_noise
from noisychain.report import load_manifest, manifest_dict, write_outputs

SMALL = RunConfig(
    chains=("ar-i",),
    noises=(make_noise("laplace", lam=5.0),),
    n_values=(50,),
    replicates=2,
    estimator=EstimatorConfig(q_floor=0.65, f0=0.216),
    grid=64,
    seed=4242,
)


@pytest.fixture(scope="module")
def small_report():
    return run_grid(SMALL)


def run_cli(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    return exc.value.code


def test_manifest_roundtrip(tmp_path):
    doc = manifest_dict(SMALL)
    assert "outdir" not in doc
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    loaded = load_manifest(path)
    for field in ("chains", "n_values", "replicates", "auto_penalty", "grid", "seed"):
        assert getattr(loaded, field) == getattr(SMALL, field)
    assert loaded.estimator == SMALL.estimator
    nz, orig = loaded.noises[0], SMALL.noises[0]
    assert (nz.family, nz.lam, nz.zeta, nz.mu) == (orig.family, orig.lam, orig.zeta, orig.mu)
    assert loaded.outdir == "bench_out"


def test_manifest_version_gate(tmp_path):
    doc = manifest_dict(SMALL)
    doc["manifest_version"] = 99
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    with pytest.raises(ConfigError, match="manifest version"):
        load_manifest(path)


@pytest.mark.slow
def test_write_outputs_layout_and_determinism(tmp_path, small_report):
    out1 = tmp_path / "run1"
    written = write_outputs(small_report, outdir=out1, figures=True)
    names = {p.name for p in written}
    assert {"table1.csv", "cells.csv", "runs.csv", "manifest.json"} <= names
    assert (out1 / "surfaces" / "surface_ar-i_laplace-5_n50.csv").exists()
    assert (out1 / "fig_mise_vs_n.png").exists()
    assert (out1 / "fig_surface_ar-i_laplace-5_n50.png").exists()
    assert (out1 / "fig_sections_ar-i_laplace-5_n50.png").exists()

    # refuses to clobber, unless forced
    with pytest.raises(ConfigError, match="force"):
        write_outputs(small_report, outdir=out1)
    write_outputs(small_report, outdir=out1, force=True, figures=False)

    # text outputs byte-reproduce in a fresh directory
    out2 = tmp_path / "run2"
    write_outputs(small_report, outdir=out2, figures=False)
    for name in ("table1.csv", "cells.csv", "runs.csv", "manifest.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    runs = (out1 / "runs.csv").read_text().strip().splitlines()
    assert len(runs) == 1 + SMALL.replicates
    cells = (out1 / "cells.csv").read_text().strip().splitlines()
    header = cells[0].split(",")
    row = cells[1].split(",")
    cell = small_report.cells[0]
    assert float(row[header.index("mise_mean")]) == pytest.approx(cell.mise_mean)
    assert int(row[header.index("failures")]) == cell.failures

    surface = (out1 / "surfaces" / "surface_ar-i_laplace-5_n50.csv").read_text()
    lines = surface.strip().splitlines()
    assert lines[0] == "x,y,true,estimate"
    assert len(lines) == 1 + SMALL.grid * SMALL.grid


def test_simulate_cli_writes_reproducible_observations(tmp_path):
    out = tmp_path / "obs.txt"
    hidden = tmp_path / "hidden.txt"
    argv = [
        "simulate", "ar-i", "-n", "50", "--seed", "7", "-o", str(out),
        "--noise", "laplace", "--lam", "5.0", "--hidden-out", str(hidden),
    ]
    assert run_cli(argv) == 0
    values = np.loadtxt(out)
    assert values.shape == (51,)
    assert not np.array_equal(values, np.loadtxt(hidden))

    meta = json.loads((tmp_path / "obs.txt.meta.json").read_text())
    assert meta["chain"]["kind"] == "ar-i"
    assert meta["noise"]["family"] == "laplace" and meta["seed"] == 7

    out2 = tmp_path / "obs2.txt"
    assert run_cli(["simulate", "ar-i", "-n", "50", "--seed", "7", "-o", str(out2),
                    "--noise", "laplace", "--lam", "5.0"]) == 0
    assert out.read_bytes() == out2.read_bytes()


def test_simulate_cli_none_noise_copies_hidden_path(tmp_path):
    out = tmp_path / "obs.txt"
    hidden = tmp_path / "hidden.txt"
    assert run_cli(["simulate", "arch", "-n", "20", "--seed", "3", "-o", str(out),
                    "--hidden-out", str(hidden)]) == 0
    assert np.array_equal(np.loadtxt(out), np.loadtxt(hidden))


def write_estimate_config(path, extra_estimator=""):
    path.write_text(
        "domain: [-2.0, 2.0]\n"
        "noise: {family: laplace, lam: 5.0}\n"
        "estimator: {N: 2, J: 2, m_min: 2, m_max: 3, q_floor: 0.65, f0: 0.216"
        + extra_estimator + "}\n"
    )


@pytest.mark.slow
def test_cache_and_estimate_cli_roundtrip(tmp_path):
    cfg_path = tmp_path / "est.yaml"
    write_estimate_config(cfg_path, extra_estimator=", pad: 1.5")

    data = tmp_path / "obs.txt"
    assert run_cli(["simulate", "ar-i", "-n", "200", "--seed", "11", "-o", str(data),
                    "--noise", "laplace", "--lam", "5.0"]) == 0

    cache_path = tmp_path / "table.nchn"
    assert run_cli(["cache", "-c", str(cfg_path), "-o", str(cache_path)]) == 0
    table = load_table(cache_path)
    assert table.noise.family == "laplace"
    assert table.basis.N == 2 and table.pad >= 1.5

    coeffs1 = tmp_path / "coeffs1.csv"
    assert run_cli(["estimate", str(data), "-c", str(cfg_path), "-o", str(coeffs1),
                    "--cache", str(cache_path)]) == 0
    lines = coeffs1.read_text().strip().splitlines()
    assert lines[0].startswith("m_hat,")
    m_hat = int(lines[0].split(",")[1])
    assert 2 <= m_hat <= 3
    assert lines[4] == "j_x,kind_x,k_x,j_y,kind_y,k_y,value"
    dim = {2: 16, 3: 208}[m_hat]
    assert len(lines) == 5 + dim

    # building the table inline must agree with the cached one bit for bit
    coeffs2 = tmp_path / "coeffs2.csv"
    grid_out = tmp_path / "grid.csv"
    assert run_cli(["estimate", str(data), "-c", str(cfg_path), "-o", str(coeffs2),
                    "--grid-out", str(grid_out), "--grid", "16"]) == 0
    assert coeffs1.read_bytes() == coeffs2.read_bytes()
    glines = grid_out.read_text().strip().splitlines()
    assert glines[0] == "x,y,value" and len(glines) == 1 + 16 * 16


def test_estimate_cli_flags_bad_data(tmp_path):
    cfg_path = tmp_path / "est.yaml"
    write_estimate_config(cfg_path)
    data = tmp_path / "obs.txt"
    data.write_text("1.0\nnot-a-number\n2.0\n")
    assert run_cli(["estimate", str(data), "-c", str(cfg_path),
                    "-o", str(tmp_path / "c.csv")]) == 1


def test_estimate_cli_numeric_failure_exit_code(tmp_path):
    # tight explicit pad + an observation far outside the square
    cfg_path = tmp_path / "est.yaml"
    write_estimate_config(cfg_path, extra_estimator=", pad: 0.05")
    data = tmp_path / "obs.txt"
    data.write_text("\n".join(str(v) for v in [0.1, -0.3, 0.4, 3.5, 0.0, 0.2]) + "\n")
    assert run_cli(["estimate", str(data), "-c", str(cfg_path),
                    "-o", str(tmp_path / "c.csv")]) == 2


def test_bench_cli_validates_flag_combinations(tmp_path):
    assert run_cli(["bench"]) == 1
    cfg = tmp_path / "bench.yaml"
    cfg.write_text("bench: {chains: [ar-i], noises: [{family: none}], n_values: [50]}\n")
    manifest = tmp_path / "manifest.json"
    manifest.write_text("{}")
    assert run_cli(["bench", "-c", str(cfg), "--from-manifest", str(manifest)]) == 1


@pytest.mark.slow
def test_bench_cli_end_to_end_with_manifest_rerun(tmp_path):
    cfg = tmp_path / "bench.yaml"
    cfg.write_text(
        "bench:\n"
        "  chains: [ar-i]\n"
        "  noises:\n"
        "    - {family: laplace, lam: 5.0}\n"
        "  n_values: [50]\n"
        "  replicates: 2\n"
        "  grid: 64\n"
        "  seed: 4242\n"
        "estimator: {q_floor: 0.65, f0: 0.216}\n"
    )
    out1 = tmp_path / "out1"
    assert run_cli(["bench", "-c", str(cfg), "-o", str(out1), "--no-figures"]) == 0
    assert (out1 / "table1.csv").exists()
    assert not (out1 / "fig_mise_vs_n.png").exists()

    # a second run into the same directory must refuse without --force
    assert run_cli(["bench", "-c", str(cfg), "-o", str(out1)]) == 1

    out2 = tmp_path / "out2"
    assert run_cli(["bench", "--from-manifest", str(out1 / "manifest.json"),
                    "-o", str(out2), "--no-figures"]) == 0
    for name in ("table1.csv", "cells.csv", "runs.csv", "manifest.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
