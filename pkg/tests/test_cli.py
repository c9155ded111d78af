import json
import os
import subprocess
import sys

import pytest

from dtbias.cli import main


def run_cli(args, tmp_path, env=None):
    """Invoke the CLI in-process from a scratch directory."""
    cwd = os.getcwd()
    os.chdir(tmp_path)
    try:
        return main(args)
    finally:
        os.chdir(cwd)


def test_sim_grid_byte_identical(tmp_path):
    assert run_cli(["sim-grid", "--m", "1", "--iters", "1000", "--seed", "7", "--out", "a"], tmp_path) == 0
    assert run_cli(["sim-grid", "--m", "1", "--iters", "1000", "--seed", "7", "--out", "b"], tmp_path) == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    payload = json.loads((tmp_path / "a.json").read_text())
    assert payload["manifest"]["master_seed"] == 7
    assert "wall_clock_s" not in payload["manifest"]
    side = json.loads((tmp_path / "a.manifest.json").read_text())
    assert "wall_clock_s" in side


def test_seed_changes_output(tmp_path):
    run_cli(["sim-grid", "--m", "1", "--iters", "1000", "--seed", "7", "--out", "a"], tmp_path)
    run_cli(["sim-grid", "--m", "1", "--iters", "1000", "--seed", "8", "--out", "c"], tmp_path)
    assert (tmp_path / "a.json").read_bytes() != (tmp_path / "c.json").read_bytes()


def test_env_default_seed(tmp_path, monkeypatch):
    monkeypatch.setenv("DEGEN_DT_SEED", "7")
    run_cli(["sim-grid", "--m", "1", "--iters", "1000", "--out", "envd"], tmp_path)
    run_cli(["sim-grid", "--m", "1", "--iters", "1000", "--seed", "7", "--out", "expl"], tmp_path)
    assert (tmp_path / "envd.json").read_bytes() == (tmp_path / "expl.json").read_bytes()


def test_gen_points_csv(tmp_path):
    run_cli(["gen", "--poly", "5", "--out", "pts"], tmp_path)
    lines = (tmp_path / "pts.csv").read_text().strip().splitlines()
    assert lines[0] == "label,x,y"
    assert len(lines) == 6
    assert lines[1].startswith("1,1.0,")


def test_csv_and_svg_outputs(tmp_path):
    run_cli(
        ["sim-poly", "--n", "5", "--iters", "500", "--seed", "3", "--format", "csv", "--svg", "--out", "p"],
        tmp_path,
    )
    assert (tmp_path / "p.json").exists()
    assert (tmp_path / "p.csv").exists()
    svg = (tmp_path / "p.svg").read_text()
    assert svg.lstrip().startswith("<?xml")
    header = (tmp_path / "p.csv").read_text().splitlines()[0]
    assert header == "code,count,frequency,analytic"


def test_report_subcommand_reemits(tmp_path):
    run_cli(["tri-freq", "--n", "5", "--iters", "300", "--seed", "1", "--out", "t"], tmp_path)
    assert run_cli(["report", "t.json", "--svg", "--out", "t2"], tmp_path) == 0
    assert (tmp_path / "t2.csv").exists() and (tmp_path / "t2.svg").exists()


def test_walk_and_census_smoke(tmp_path):
    assert run_cli(["walk", "--model", "uniform", "--walks", "200", "--cap", "10", "--seed", "2", "--out", "w"], tmp_path) == 0
    d = json.loads((tmp_path / "w.json").read_text())
    assert d["type"] == "walk" and d["walks"] == 200
    assert run_cli(["census", "--m", "5", "--iters", "20", "--model", "dt", "--seed", "2", "--out", "c"], tmp_path) == 0
    d = json.loads((tmp_path / "c.json").read_text())
    assert d["type"] == "census" and len(d["cc_values"]) == 20


def test_analytic_grid2_smoke(tmp_path):
    assert run_cli(["analytic-grid2", "--target-se", "0.001", "--out", "g2"], tmp_path) == 0
    d = json.loads((tmp_path / "g2.json").read_text())
    assert len(d["entries"]) == 16
    total = sum(e["probability"] for e in d["entries"])
    assert abs(total - 1.0) < 0.05


def test_corner_n4(tmp_path):
    assert run_cli(["corner", "--n", "4", "--out", "c4"], tmp_path) == 0
    d = json.loads((tmp_path / "c4.json").read_text())
    assert abs(d["value"] - 0.5) < 1e-6


def test_corner_infeasible_exit_code(tmp_path, capsys):
    code = run_cli(["corner", "--n", "10000"], tmp_path)
    assert code == 1
    record = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert record["error"] == "QuadratureInfeasible"


def test_usage_error_exit_code():
    proc = subprocess.run(
        [sys.executable, "-m", "dtbias.cli", "sim-grid", "--nope"],
        capture_output=True,
    )
    assert proc.returncode == 2
