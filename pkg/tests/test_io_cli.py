import os
import subprocess
import sys

import numpy as np
import pytest
import yaml

import safemaps as sm
from safemaps import cli
from safemaps import io as out_io


@pytest.fixture()
def tiny_cfg(tmp_path):
    cfg = {
        "map": {"name": "tent", "params": {"mu": 3.0}},
        "region": {"lower": [0.0], "upper": [1.0], "points": [101]},
        "disturbance": {"xi0": 0.05},
        "solver": {"workers": 1},
        "orbit": {"steps": 50, "seed": 3},
        "ensemble": {"runs": 20, "max_steps": 200, "seed0": 1},
        "output": {"dir": str(tmp_path / "out")},
    }
    path = tmp_path / "cfg.yaml"
    path.write_text(yaml.safe_dump(cfg))
    return cfg, str(path), str(tmp_path / "out")


class TestFormatting:
    def test_17_digit_round_trip(self):
        rng = np.random.default_rng(0)
        for x in rng.uniform(-10, 10, size=200):
            assert float(out_io.fmt(x)) == x
        for x in (0.1, 1e-300, 2.0 ** -52, np.pi):
            assert float(out_io.fmt(x)) == x


class TestWriters:
    def test_safety_csv_round_trip(self, tmp_path, tent_sf):
        path = out_io.write_safety_csv(str(tmp_path / "s.csv"), tent_sf)
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        assert data.shape == (1001, 3)
        assert np.array_equal(data[:, 2], tent_sf.values)
        assert np.array_equal(data[:, 1], tent_sf.region.axes[0])

    def test_safety_pgm_header_and_mapping(self, tmp_path, tent_sf):
        path = out_io.write_safety_pgm(str(tmp_path / "s.pgm"), tent_sf)
        blob = open(path, "rb").read()
        assert blob.startswith(b"P5\n1001 1\n255\n")
        pix = np.frombuffer(blob.split(b"255\n", 1)[1], dtype=np.uint8)
        assert pix.shape == (1001,)
        logs = np.log10(tent_sf.values + 1e-12)
        want = np.rint(255 * (logs - logs.min()) / (logs.max() - logs.min()))
        assert np.array_equal(pix, want.astype(np.uint8))

    def test_safeset_outputs(self, tmp_path, tent_sf):
        ss = sm.extract_safe_set(tent_sf, tent_sf.min_value)
        csv = out_io.write_safeset_csv(str(tmp_path / "ss.csv"), ss)
        with open(csv) as fh:
            assert sum(1 for _ in fh) == ss.member_count + 1
        pgm = out_io.write_safeset_pgm(str(tmp_path / "ss.pgm"), ss)
        blob = open(pgm, "rb").read()
        pix = np.frombuffer(blob.split(b"255\n", 1)[1], dtype=np.uint8)
        assert (pix == 0).sum() == ss.member_count  # members are black

    def test_2d_pgm_orientation(self, tmp_path):
        region = sm.GridRegion([-1, -1], [1, 1], [3, 4])
        mask = np.zeros((3, 4), dtype=bool)
        mask[0, 3] = True  # lowest x, highest y -> top-left pixel
        ss = sm.SafeSet(region, 1.0, mask.ravel())
        path = out_io.write_safeset_pgm(str(tmp_path / "m.pgm"), ss)
        blob = open(path, "rb").read()
        assert blob.startswith(b"P5\n3 4\n")
        pix = np.frombuffer(blob.split(b"255\n", 1)[1],
                            dtype=np.uint8).reshape(4, 3)
        assert pix[0, 0] == 0 and pix.sum() == 255 * 11

    def test_orbit_csv(self, tmp_path):
        region = sm.GridRegion([0.0], [1.0], [101])
        model = sm.build_sample_set(0.05, 1, "euclidean", region.spacing)
        orbit = sm.run_uncontrolled(sm.tent_map(3.0), region, model, [0.3],
                                    100, seed=1)
        path = out_io.write_orbit_csv(str(tmp_path / "o.csv"), orbit)
        lines = open(path).read().splitlines()
        assert lines[0] == "step,x,xi_x,u_x,u_norm"
        assert len(lines) == orbit.n_steps + 2


class TestConfig:
    def test_defaults_by_map(self):
        cfg = sm.config_from_dict({"map": {"name": "henon"}})
        assert cfg.points == [500, 500]
        assert cfg.map_params == {"a": 6.0, "b": 0.4}

    def test_bad_fields_name_their_location(self):
        with pytest.raises(sm.ConfigError, match="map.name"):
            sm.config_from_dict({"map": {"name": "nope"}})
        with pytest.raises(sm.ConfigError, match="disturbance.xi0"):
            sm.config_from_dict({"disturbance": {"xi0": -1}})
        with pytest.raises(sm.ConfigError, match="region.points"):
            sm.config_from_dict({"region": {"points": [1]},
                                 "map": {"name": "tent"}})
        with pytest.raises(sm.ConfigError, match="map.params"):
            sm.config_from_dict({"map": {"name": "tent", "params": {"a": 1}}})
        with pytest.raises(sm.ConfigError, match="unknown section"):
            sm.config_from_dict({"mapp": {}})

    def test_load_file(self, tiny_cfg):
        _, path, _ = tiny_cfg
        cfg = sm.load_config(path)
        assert cfg.map_name == "tent"
        assert cfg.orbit_steps == 50

    def test_missing_file(self):
        with pytest.raises(sm.ConfigError, match="not found"):
            sm.load_config("/nonexistent/cfg.yaml")


class TestExperiment:
    def test_full_pipeline_report(self, tiny_cfg):
        raw, _, out_dir = tiny_cfg
        report = sm.run_experiment(sm.config_from_dict(raw))
        assert report["converged"]
        assert report["min_U"] < 0.05
        assert report["components"] >= 1
        assert report["orbit_max_control"] <= report["u0"] + 1e-9
        assert report["escape_fraction"] >= 0.9
        for name in ("safety.csv", "safety.pgm", "safeset.csv", "safeset.pgm",
                     "orbit.csv", "ensemble.csv", "samples.csv"):
            assert os.path.exists(os.path.join(out_dir, name))

    def test_report_matches_summarized_outputs(self, tiny_cfg):
        raw, _, out_dir = tiny_cfg
        report = sm.run_experiment(sm.config_from_dict(raw))
        summary = sm.summarize_outputs(out_dir)
        assert summary["min_U"] == report["min_U"]
        assert summary["member_count"] == report["member_count"]
        assert summary["orbit_max_control"] == report["orbit_max_control"]
        assert summary["escape_fraction"] == report["escape_fraction"]

    def test_sculpt_check_agrees(self, tiny_cfg):
        raw, _, _ = tiny_cfg
        raw["safe_set"] = {"sculpt_check": True}
        report = sm.run_experiment(sm.config_from_dict(raw))
        assert report["sculpt_agrees"] is True

    def test_u0_below_minimum(self, tiny_cfg):
        raw, _, _ = tiny_cfg
        raw["safe_set"] = {"u0": 1e-6}
        with pytest.raises(sm.NoSafeSetError):
            sm.run_experiment(sm.config_from_dict(raw))

    def test_sweep_summary(self, tiny_cfg):
        raw, _, out_dir = tiny_cfg
        raw["sweep"] = {"xi0_values": [0.08, 0.05]}
        raw["orbit"] = {"steps": 0}
        raw["ensemble"] = {"runs": 0}
        result = sm.run_sweep(sm.config_from_dict(raw))
        assert [r["status"] for r in result["rows"]] == ["ok", "ok"]
        # u0 weakly decreasing as the disturbance shrinks
        u0s = [r["u0"] for r in result["rows"]]
        assert u0s[0] >= u0s[1]
        assert os.path.exists(result["summary_csv"])


class TestCli:
    def test_safety_command(self, tiny_cfg, capsys):
        _, path, out_dir = tiny_cfg
        code = cli.main(["safety", "--config", path])
        assert code == 0
        assert "min_U" in capsys.readouterr().out
        assert os.path.exists(os.path.join(out_dir, "safety.csv"))

    def test_console_entry_point(self, tiny_cfg):
        _, path, _ = tiny_cfg
        proc = subprocess.run(
            [sys.executable, "-m", "safemaps.cli", "safety", "--config", path,
             "--no-pgm"],
            capture_output=True, text=True,
            env={**os.environ, "NUMBA_NUM_THREADS": "4"})
        assert proc.returncode == 0, proc.stderr

    def test_config_error_exit_code(self, capsys):
        assert cli.main(["safety", "--map", "nope"]) == 1
        assert cli.main(["safety", "--config", "/nope.yaml"]) == 1

    def test_u0_below_min_exit_code(self, tiny_cfg):
        _, path, _ = tiny_cfg
        assert cli.main(["safeset", "--config", path, "--u0", "1e-9"]) == 3

    def test_nonconvergence_exit_code(self, tiny_cfg):
        _, path, _ = tiny_cfg
        assert cli.main(["safety", "--config", path, "--max-sweeps", "1"]) == 2

    def test_orbit_uncontrolled(self, tiny_cfg, capsys):
        _, path, out_dir = tiny_cfg
        code = cli.main(["orbit", "--config", path, "--uncontrolled",
                         "--steps", "40", "--start", "0.3"])
        assert code == 0
        assert "escaped_at" in capsys.readouterr().out

    def test_sweep_and_report(self, tiny_cfg, capsys):
        _, path, out_dir = tiny_cfg
        assert cli.main(["sweep", "--config", path, "--sweep-xi0", "0.05",
                         "--steps", "0", "--runs", "0"]) == 0
        capsys.readouterr()
        assert cli.main(["report", "--dir", out_dir]) == 0
        assert "sweep_rows" in capsys.readouterr().out

    def test_flag_overrides_file(self, tiny_cfg):
        _, path, _ = tiny_cfg
        args = _parse(["safety", "--config", path, "--xi0", "0.02",
                       "--param", "mu=2.5"])
        cfg = cli._build_config(args)
        assert cfg.xi0 == 0.02
        assert cfg.map_params["mu"] == 2.5


def _parse(argv):
    import argparse
    parser = argparse.ArgumentParser()
    sub = parser.add_subparsers(dest="command")
    p = sub.add_parser("safety")
    cli._add_common(p)
    return parser.parse_args(argv)


class TestDeterminism:
    def test_byte_identical_runs_across_worker_counts(self, tmp_path):
        raw = {
            "map": {"name": "henon"},
            "region": {"points": [64, 64]},
            "disturbance": {"xi0": 0.2},
            "orbit": {"steps": 30, "seed": 5},
            "output": {"pgm": True},
        }
        blobs = []
        for run, workers in (("a", 1), ("b", 4), ("c", 1)):
            raw["solver"] = {"workers": workers}
            raw["output"]["dir"] = str(tmp_path / run)
            sm.run_experiment(sm.config_from_dict(raw))
            files = sorted(os.listdir(tmp_path / run))
            blobs.append({f: open(tmp_path / run / f, "rb").read()
                          for f in files})
        assert blobs[0] == blobs[1] == blobs[2]
