import json
import subprocess
import sys

import numpy as np
import pytest

import reachkit as rk
from reachkit.cli import derive_seed, main


def run_cli(*argv):
    return main(list(argv))


class TestSample:
    def test_circle_sample_writes_rows(self, tmp_path):
        out = tmp_path / "c.csv"
        code = run_cli("sample", "--manifold", "circle", "--radius", "1", "-n", "100",
                       "--seed", "7", "-o", str(out))
        assert code == 0
        rows = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        assert len(rows) == 100

    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["sample", "--manifold", "dumbbell", "--lobe", "1", "--neck", "0.3",
                "-n", "50", "--seed", "3"]
        assert run_cli(*args, "-o", str(a)) == 0
        assert run_cli(*args, "-o", str(b)) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_bumpsphere_apex_excess(self, tmp_path):
        out = tmp_path / "bump.csv"
        code = run_cli("sample", "--manifold", "bumpsphere", "--gamma", "0.2",
                       "--order", "3", "--d", "1", "-n", "2000", "--seed", "1",
                       "-o", str(out))
        assert code == 0
        pts = rk.load_cloud_csv(out).points
        x, last = pts[:, 0], pts[:, 1]
        excess = last - (-1.0 + np.sqrt(np.maximum(1 - x**2, 0.0)))
        # apex displacement is gamma^3 * psi(0) = 0.008
        assert excess.max() <= 0.008 + 1e-12
        assert excess.max() >= 0.0078

    def test_bad_flags_exit_2(self, tmp_path, capsys):
        code = run_cli("sample", "--manifold", "torus", "--minor", "2", "--major", "1",
                       "-n", "10", "-o", str(tmp_path / "t.csv"))
        assert code == 2
        assert "error" in capsys.readouterr().err


class TestDefect:
    def test_two_point_step_profile(self, tmp_path):
        cloud_path = tmp_path / "two.csv"
        rk.save_cloud_csv(cloud_path, rk.PointCloud(np.array([[-1.0, 0.0], [1.0, 0.0]])))
        out = tmp_path / "prof.csv"
        assert run_cli("defect", str(cloud_path), "-o", str(out)) == 0
        prof = rk.profile_from_csv(out)
        assert prof.values[prof.scales < 1.0].max() == 0.0
        assert prof.values[-1] == pytest.approx(1.0, abs=1e-12)

    def test_empty_input_exit_2(self, tmp_path, capsys):
        path = tmp_path / "empty.csv"
        path.write_text("")
        assert run_cli("defect", str(path), "-o", str(tmp_path / "p.csv")) == 2

    def test_malformed_row_names_line(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("0.0,0.0\nnot,numbers!\n")
        assert run_cli("defect", str(path), "-o", str(tmp_path / "p.csv")) == 2
        assert "line 2" in capsys.readouterr().err

    def test_missing_file_exit_2(self, tmp_path):
        assert run_cli("defect", str(tmp_path / "nope.csv"), "-o", str(tmp_path / "p.csv")) == 2


class TestReach:
    def test_circle_reach_json(self, tmp_path, capsys):
        cloud_path = tmp_path / "c.csv"
        run_cli("sample", "--manifold", "circle", "-n", "400", "--seed", "5",
                "-o", str(cloud_path))
        out = tmp_path / "est.json"
        code = run_cli("reach", str(cloud_path), "--rmax", "10", "--k", "3",
                       "--d", "1", "-o", str(out))
        assert code == 0
        printed = float(capsys.readouterr().out.strip())
        data = json.loads(out.read_text())
        assert set(data) == {"r_hat", "r_local", "r_wfs", "epsilon_used", "delta_used",
                             "branch", "n_points", "dim", "order"}
        assert data["r_hat"] == pytest.approx(1.0, abs=0.15)
        assert printed == pytest.approx(data["r_hat"], rel=1e-10)
        # CLI result equals the library result on the same inputs exactly
        est = rk.reach(rk.load_cloud_csv(cloud_path), rk.ModelParams(d=1, k=3, r_max=10.0))
        assert data["r_hat"] == est.r_hat

    def test_epsilon_override_drives_delta(self, tmp_path, capsys):
        cloud_path = tmp_path / "c.csv"
        run_cli("sample", "--manifold", "circle", "-n", "200", "--seed", "2",
                "-o", str(cloud_path))
        out = tmp_path / "est.json"
        code = run_cli("reach", str(cloud_path), "--rmax", "10", "--k", "3", "--d", "1",
                       "--epsilon", "0.05", "-o", str(out))
        assert code == 0
        data = json.loads(out.read_text())
        assert data["epsilon_used"] == 0.05
        # delta snaps to the first grid scale >= 0.05^(1/3) = 0.36840...
        assert data["delta_used"] == pytest.approx(0.3684031498640387, abs=0.01)

    def test_missing_cap_exit_2(self, tmp_path, capsys):
        cloud_path = tmp_path / "c.csv"
        run_cli("sample", "--manifold", "circle", "-n", "50", "--seed", "2",
                "-o", str(cloud_path))
        assert run_cli("reach", str(cloud_path)) == 2
        assert "rmax" in capsys.readouterr().err.lower()

    def test_fmin_derives_cap(self, tmp_path, capsys):
        cloud_path = tmp_path / "c.csv"
        run_cli("sample", "--manifold", "circle", "-n", "100", "--seed", "2",
                "-o", str(cloud_path))
        code = run_cli("reach", str(cloud_path), "--fmin", str(1 / (2 * np.pi)), "--d", "1")
        assert code == 0

    def test_degenerate_cluster_capped(self, tmp_path, capsys):
        cloud_path = tmp_path / "tight.csv"
        rng = np.random.default_rng(0)
        rk.save_cloud_csv(cloud_path, rk.PointCloud(rng.uniform(0, 1e-9, (40, 2))))
        out = tmp_path / "est.json"
        assert run_cli("reach", str(cloud_path), "--rmax", "10", "--k", "3", "--d", "1",
                       "-o", str(out)) == 0
        data = json.loads(out.read_text())
        assert data["branch"] == "capped"
        assert data["r_hat"] == 10.0


class TestRates:
    def test_small_report(self, tmp_path, capsys):
        out = tmp_path / "report.csv"
        code = run_cli("rates", "--manifold", "circle", "--n-grid", "16,32,64",
                       "--trials", "2", "--seed", "9", "--rmax", "10", "--k", "3",
                       "--d", "1", "--max-scale", "1.2", "-o", str(out))
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("n,trial,seed,")
        assert len(lines) == 1 + 6  # header + trials * |n-grid|
        summary = json.loads((tmp_path / "report.summary.json").read_text())
        assert "loglog_slope" in summary and "median_abs_error" in summary
        assert summary["ground_truth_r"] == 1.0

    def test_reproducible_report(self, tmp_path):
        args = ["rates", "--manifold", "circle", "--n-grid", "16,32,64", "--trials", "1",
                "--seed", "4", "--rmax", "10", "--k", "3", "--d", "1",
                "--max-scale", "1.2"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_cli(*args, "-o", str(a)) == 0
        assert run_cli(*args, "-o", str(b)) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_short_n_grid_exit_2(self, tmp_path, capsys):
        code = run_cli("rates", "--manifold", "circle", "--n-grid", "16,32",
                       "--trials", "1", "--rmax", "10", "-o", str(tmp_path / "r.csv"))
        assert code == 2

    def test_failed_rows_recorded_not_fatal(self, tmp_path):
        # max-scale far below the curvature read scale forces per-run errors
        out = tmp_path / "report.csv"
        code = run_cli("rates", "--manifold", "circle", "--n-grid", "16,32,64",
                       "--trials", "1", "--seed", "1", "--rmax", "10", "--k", "3",
                       "--d", "1", "--max-scale", "0.01", "-o", str(out))
        assert code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 1 + 3
        assert any("scale grid ends" in line for line in lines[1:])

    def test_seed_mixing_distinct(self):
        seeds = {derive_seed(7, n, t) for n in (16, 32, 64) for t in range(10)}
        assert len(seeds) == 30


class TestEntryPoint:
    def test_module_invocation(self, tmp_path):
        out = tmp_path / "c.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "reachkit", "sample", "--manifold", "circle",
             "-n", "10", "--seed", "1", "-o", str(out)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert out.exists()

    def test_usage_error_exit_2(self):
        proc = subprocess.run(
            [sys.executable, "-m", "reachkit", "sample", "--manifold", "nonsense",
             "-n", "5", "-o", "x.csv"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 2
