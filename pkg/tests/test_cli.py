import json
import os

import pytest
import yaml

import dzoa
from dzoa.cli import main


def write_tiny_config(path, out_dir, **overrides):
    from test_harness import tiny_config

    cfg = tiny_config(out_dir, **overrides)
    path.write_text(dzoa.config_to_yaml(cfg))
    return cfg


class TestConfigCommand:
    def test_prints_default_config_yaml(self, capsys):
        assert main(["config"]) == 0
        out = capsys.readouterr().out
        assert dzoa.config_from_dict(yaml.safe_load(out)) == dzoa.default_config()


class TestSynthCommand:
    def test_writes_loadable_dataset(self, tmp_path, capsys):
        out = tmp_path / "data.csv"
        rc = main(["synth", "--agents", "3", "--samples", "4", "--features", "2",
                   "--seed", "7", "--out", str(out)])
        assert rc == 0
        assert "12 rows" in capsys.readouterr().out
        dataset = dzoa.dataset_from_csv(str(out))
        assert dataset.num_agents == 3
        assert dataset.p == 2
        x, _ = dataset.stacked()
        assert (abs(x) ** 2).sum(axis=1).max() < 1.0  # normalized rows

    def test_raw_skips_normalization_and_truth_prints(self, tmp_path, capsys):
        out = tmp_path / "raw.csv"
        rc = main(["synth", "--agents", "2", "--samples", "3", "--features", "4",
                   "--seed", "1", "--raw", "--print-truth", "--out", str(out)])
        assert rc == 0
        lines = capsys.readouterr().out.splitlines()
        omega = json.loads(lines[1].removeprefix("omega "))
        assert len(omega) == 4
        x, _ = dzoa.dataset_from_csv(str(out)).stacked()
        assert (x**2).sum(axis=1).max() > 1.0  # raw gaussian rows are long


class TestRunCommand:
    def test_runs_grid_from_config_file(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.yaml"
        write_tiny_config(cfg_path, tmp_path / "out")
        rc = main(["run", "--config", str(cfg_path), "--seed", "0"])
        assert rc == 0
        assert "wrote 1 trace file(s)" in capsys.readouterr().out
        assert os.path.exists(tmp_path / "out" / "runs.csv")
        assert os.path.exists(tmp_path / "out" / "dzoa_eps0.5_delta0.001_seed0.csv")

    def test_out_dir_override_and_matrix_export(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.yaml"
        write_tiny_config(cfg_path, tmp_path / "ignored")
        moved = tmp_path / "moved"
        rc = main(["run", "--config", str(cfg_path), "--seed", "1",
                   "--out-dir", str(moved), "--export-matrices"])
        assert rc == 0
        capsys.readouterr()
        for name in ("a1", "a2", "m_plus", "m_minus", "l_plus", "l_minus", "h", "q"):
            assert os.path.exists(moved / f"{name}.csv")
        assert not os.path.exists(tmp_path / "ignored")

    def test_trace_inner_flag(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.yaml"
        write_tiny_config(cfg_path, tmp_path / "out")
        rc = main(["run", "--config", str(cfg_path), "--seed", "0", "--trace-inner"])
        assert rc == 0
        capsys.readouterr()
        inner = tmp_path / "out" / "dzoa_eps0.5_delta0.001_seed0_inner.csv"
        assert open(inner).readline().strip() == "# dzoa-inner v1"


class TestSweepCommand:
    def test_writes_sweep_table(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.yaml"
        write_tiny_config(cfg_path, tmp_path / "out", seeds=(0,))
        rc = main(["sweep", "--config", str(cfg_path)])
        assert rc == 0
        assert "sweep.csv" in capsys.readouterr().out
        lines = open(tmp_path / "out" / "sweep.csv").read().splitlines()
        assert lines[0] == "# dzoa-sweep v1"
        assert len(lines) == 4  # header + columns + dzoa row + baseline row


class TestPrivacyCommand:
    def test_json_report_structure(self, capsys):
        rc = main(["privacy", "--epsilon", "0.5", "--delta", "0.001", "--json"])
        assert rc == 0
        report = json.loads(capsys.readouterr().out)
        assert {"agents", "worst_agent", "worst_epsilon", "epsilon_total"} <= set(report)
        assert len(report["agents"]) == 5
        by_eps = {a["agent"]: a["epsilon_intrinsic"] for a in report["agents"]}
        assert report["worst_epsilon"] == max(by_eps.values())
        assert by_eps[report["worst_agent"]] == report["worst_epsilon"]

    def test_text_report_tabulates_every_agent(self, capsys):
        rc = main(["privacy", "--epsilon", "0.5", "--delta", "0.001"])
        assert rc == 0
        lines = capsys.readouterr().out.splitlines()
        rows = [ln for ln in lines if ln.split() and ln.split()[0].isdigit()]
        assert [int(r.split()[0]) for r in rows] == [1, 2, 3, 4, 5]
        assert lines[-1].startswith("network worst case: agent ")
        assert "composed budget" in "\n".join(lines)


class TestBoundCommand:
    def test_json_payload(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.yaml"
        write_tiny_config(cfg_path, tmp_path / "out")
        rc = main(["bound", "--config", str(cfg_path), "--json"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["num_outer"] == 2
        assert payload["outer_bound"] > payload["q0_term"] / payload["num_outer"]
        assert payload["inner_bound"] > 0

    def test_text_mode_prints_both_bounds(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.yaml"
        write_tiny_config(cfg_path, tmp_path / "out")
        rc = main(["bound", "--config", str(cfg_path)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "outer suboptimality bound" in out
        assert "inner expected-suboptimality bound" in out


class TestErrorReporting:
    def test_bad_config_file_maps_to_json_error_line(self, tmp_path, capsys):
        bad = tmp_path / "bad.yaml"
        bad.write_text("problem:\n  sigma: 1.0\n")
        rc = main(["run", "--config", str(bad)])
        assert rc == 1
        err = capsys.readouterr().err.strip()
        assert err.startswith("error ")
        payload = json.loads(err.removeprefix("error "))
        assert payload["type"] == "ConfigError"
        assert "sigma" in payload["message"]

    def test_infeasible_privacy_target_reported(self, capsys):
        rc = main(["privacy", "--epsilon", "1.5", "--delta", "0.001"])
        assert rc == 1
        payload = json.loads(capsys.readouterr().err.strip().removeprefix("error "))
        assert payload["type"] in {"Infeasible", "PrivacyError"}

    def test_unreadable_dataset_path(self, tmp_path, capsys):
        rc = main(["synth", "--agents", "0", "--samples", "4", "--features", "2",
                   "--out", str(tmp_path / "x.csv")])
        assert rc == 1
        payload = json.loads(capsys.readouterr().err.strip().removeprefix("error "))
        assert payload["type"] == "DimensionMismatch"
