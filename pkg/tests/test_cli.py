"""Command-line contract: exit codes, file outputs, round trips, manifests."""
import json
import subprocess
import sys

import pytest


def run_cli(*argv, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "hypermle", *argv],
        capture_output=True, text=True, cwd=cwd,
    )


def write_config(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def outdir(tmp_path):
    return tmp_path / "out"


@pytest.fixture
def ex1_config(tmp_path, outdir):
    return write_config(tmp_path / "ex1.json", {
        "preset": "alg_ex1",
        "dimension": 1,
        "params": {"theta1": 1.0, "theta2": -0.5, "T": 1.0},
        "grid": {"n_steps": 256},
        "experiment": {"N_list": [5, 10], "replicates": 35, "seed": 11,
                       "out": str(outdir)},
    })


class TestCheck:
    def test_hyperbolic_equation_exits_zero(self, tmp_path, outdir):
        cfg = write_config(tmp_path / "c.json", {
            "preset": "wave_damped",
            "experiment": {"out": str(outdir)},
        })
        res = run_cli("check", "--config", cfg)
        assert res.returncode == 0, res.stderr
        report = json.loads((outdir / "check_report.json").read_text())
        assert report["hyperbolicity"]["hyperbolic"] == "pass"

    def test_non_hyperbolic_equation_exits_two(self, tmp_path, outdir):
        cfg = write_config(tmp_path / "c.json", {
            "preset": "wave_strong_antidissipative",
            "experiment": {"out": str(outdir)},
        })
        res = run_cli("check", "--config", cfg)
        assert res.returncode == 2, res.stdout + res.stderr

    def test_malformed_config_exits_one(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"spectrum": ')
        res = run_cli("check", "--config", str(bad))
        assert res.returncode == 1
        assert "line" in res.stderr  # parse diagnostics carry a position

    def test_unknown_generator_exits_one(self, tmp_path, outdir):
        cfg = write_config(tmp_path / "c.json", {
            "spectrum": {"kappa": {"kind": "cubic_spline"},
                         "tau": {"kind": "constant", "coefficient": 1},
                         "rho": {"kind": "constant", "coefficient": 0},
                         "nu": {"kind": "constant", "coefficient": 1}},
            "params": {"theta1": 1, "theta2": 0, "theta1_box": [0.5, 2],
                       "theta2_box": [-1, 1]},
            "experiment": {"out": str(outdir)},
        })
        res = run_cli("check", "--config", cfg)
        assert res.returncode == 1
        assert "cubic_spline" in res.stderr


class TestPsi:
    def test_csv_columns_and_override(self, ex1_config, outdir):
        res = run_cli("psi", "--config", ex1_config, "--n-list", "5,10,20")
        assert res.returncode == 0, res.stderr
        lines = (outdir / "psi.csv").read_text().strip().splitlines()
        assert lines[0] == "N,psi1_exact,psi2_exact,psi12_exact,psi1_asym,psi2_asym"
        assert len(lines) == 4
        first = lines[1].split(",")
        assert int(first[0]) == 5 and float(first[1]) > 0.0

    def test_single_mode_row(self, ex1_config, outdir):
        res = run_cli("psi", "--config", ex1_config, "--n-list", "1")
        assert res.returncode == 0
        row = (outdir / "psi.csv").read_text().strip().splitlines()[1].split(",")
        from hypermle.equations import preset
        from hypermle.fundamental import psi

        spec, params = preset("alg_ex1", d=1, theta2=-0.5)
        assert float(row[1]) == pytest.approx(psi(spec, params, 1).psi1, rel=1e-12)


class TestSimulateEstimateRoundTrip:
    def test_estimate_matches_in_process(self, ex1_config, outdir):
        res = run_cli("simulate", "--config", ex1_config, "--n-list", "6")
        assert res.returncode == 0, res.stderr
        res = run_cli("estimate", "--config", ex1_config, "--n-list", "6",
                      "--trajectories", str(outdir / "trajectories.csv"))
        assert res.returncode == 0, res.stderr
        doc = json.loads((outdir / "estimate.json").read_text())

        from hypermle.config import load_config
        from hypermle.estimate import estimate_from_trajectories
        from hypermle.fundamental import psi
        from hypermle.simulate import simulate_solution

        cfg = load_config(ex1_config)
        trajs = simulate_solution(cfg["spec"], cfg["params"], 6, cfg["grid"], 11)
        pv = psi(cfg["spec"], cfg["params"], 6)
        ref = estimate_from_trajectories(trajs, cfg["spec"], cfg["params"], pv)
        # u is written at full precision and the scale is a power of two, so the
        # file route reproduces the in-process estimate exactly
        assert doc["theta1_hat"] == ref.theta1_hat
        assert doc["theta2_hat"] == ref.theta2_hat

    def test_manifest_lists_outputs(self, ex1_config, outdir):
        run_cli("simulate", "--config", ex1_config, "--n-list", "3")
        run_cli("psi", "--config", ex1_config, "--n-list", "2,4")
        entries = [json.loads(l) for l in
                   (outdir / "manifest.jsonl").read_text().strip().splitlines()]
        assert len(entries) == 2
        listed = [o for e in entries for o in e["outputs"]]
        assert str(outdir / "trajectories.csv") in listed
        assert str(outdir / "psi.csv") in listed
        assert all(e["seed"] == 11 for e in entries)

    def test_seed_override_echoed(self, ex1_config, outdir):
        run_cli("psi", "--config", ex1_config, "--n-list", "2", "--seed", "999")
        entries = [json.loads(l) for l in
                   (outdir / "manifest.jsonl").read_text().strip().splitlines()]
        assert entries[-1]["seed"] == 999


class TestMc:
    def test_consistency_outputs(self, ex1_config, outdir):
        res = run_cli("mc", "consistency", "--config", ex1_config)
        assert res.returncode == 0, res.stderr
        summary = json.loads((outdir / "consistency_summary.json").read_text())
        assert len(summary["rows"]) == 2
        csv_lines = (outdir / "consistency_replicates.csv").read_text().strip().splitlines()
        assert len(csv_lines) == 1 + 2 * 35

    def test_normality_summary(self, ex1_config, outdir):
        res = run_cli("mc", "normality", "--config", ex1_config)
        assert res.returncode == 0, res.stderr
        summary = json.loads((outdir / "normality_summary.json").read_text())
        assert summary["N"] == 10
        assert 0.0 <= summary["ks1"] <= 1.0
        assert "0.01" in summary["critical"] or 0.01 in summary["critical"]

    def test_tables_render(self, ex1_config, outdir):
        res = run_cli("mc", "tables", "--config", ex1_config)
        assert res.returncode == 0, res.stderr
        assert "alg_ex3" in res.stdout
        rows = (outdir / "growth_tables.csv").read_text().strip().splitlines()
        assert rows[0] == "example,d,gamma1,gamma2,psi1_growth,psi2_growth"
        assert len(rows) == 1 + 6 * 4
