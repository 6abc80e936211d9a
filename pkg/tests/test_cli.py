import json

import numpy as np
import pytest

from neuralssm.cli import main
from neuralssm.config import RunConfig, load_config, parse_config
from neuralssm.errors import ConfigError


def tiny_config(tmp_path, **extra):
    doc = {
        "seed": 0,
        "out_dir": str(tmp_path / "out"),
        "run_id": "t",
        "scale": "desk",
        "train": {
            "variants": ["gray"],
            "constrained": [True],
            "horizons": [4],
            "lr_grid": [0.01],
            "restarts": 1,
            "epochs": 2,
        },
    }
    for key, value in extra.items():
        doc[key] = value
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return path


class TestConfig:
    def test_unknown_top_level_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown keys"):
            parse_config({"sede": 1})

    def test_unknown_nested_key_rejected(self):
        with pytest.raises(ConfigError, match="train"):
            parse_config({"train": {"horizonz": [8]}})

    def test_scale_presets_determine_epochs(self):
        cfg = parse_config({"scale": "paper"})
        epochs, restarts, grid = cfg.resolved()
        assert (epochs, restarts) == (15000, 30)
        cfg = parse_config({"scale": "desk", "train": {"epochs": 7}})
        assert cfg.resolved()[0] == 7

    def test_specs_product_excludes_constrained_srnn(self):
        cfg = parse_config({"train": {"variants": ["gray", "srnn"], "constrained": [False, True]}})
        specs = cfg.specs()
        keys = {(s.variant, s.constrained) for s in specs}
        assert ("srnn", True) not in keys
        assert ("srnn", False) in keys
        assert ("gray", True) in keys

    def test_csv_source_requires_path(self):
        with pytest.raises(ConfigError, match="path"):
            parse_config({"dataset": {"source": "csv"}})

    def test_bounds_parsing(self):
        cfg = parse_config({"bounds": {"x_lower": 5.0, "x_upper": 30.0, "lambda": 2.0, "mu": 0.5}})
        assert np.array_equal(cfg.bounds.x_lower, np.full(4, 5.0))
        assert cfg.bounds.lam == 2.0
        assert cfg.bounds.mu == 0.5

    def test_load_config_bad_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{nope")
        with pytest.raises(ConfigError, match="JSON"):
            load_config(path)


class TestSimulate:
    def test_writes_partitions_and_manifest(self, tmp_path, capsys):
        cfg_path = tiny_config(tmp_path)
        assert main(["simulate", "--config", str(cfg_path)]) == 0
        data = tmp_path / "out" / "t" / "data"
        for name in ("train", "val", "test"):
            lines = (data / f"{name}.csv").read_text().splitlines()
            assert len(lines) == 1 + 2016
        manifest = json.loads((data / "manifest.json").read_text())
        eigs = [pair[0] for pair in manifest["eigenvalues"]]
        assert eigs == pytest.approx([1.0, 0.99, 0.98, 0.25], abs=1e-9)
        assert manifest["observed_index"] == 4

    def test_same_seed_byte_identical(self, tmp_path):
        out1 = tmp_path / "o1"
        out2 = tmp_path / "o2"
        assert main(["simulate", "--seed", "5", "--out", str(out1)]) == 0
        assert main(["simulate", "--seed", "5", "--out", str(out2)]) == 0
        p1 = out1 / "run-desk-seed5" / "data" / "train.csv"
        p2 = out2 / "run-desk-seed5" / "data" / "train.csv"
        assert p1.read_bytes() == p2.read_bytes()


class TestTrainReport:
    def test_pipeline(self, tmp_path, capsys):
        cfg_path = tiny_config(tmp_path)
        assert main(["train", "--config", str(cfg_path)]) == 0
        out = tmp_path / "out" / "t"
        ckpts = list((out / "checkpoints").glob("*.json"))
        assert len(ckpts) == 1
        results = (out / "tables" / "results.csv").read_text().splitlines()
        assert len(results) == 2
        captured = capsys.readouterr()
        assert "best cgray N=4" in captured.out

        stamp = ckpts[0].read_bytes()
        assert main(["train", "--config", str(cfg_path)]) == 0
        assert ckpts[0].read_bytes() == stamp  # resume skipped the cell

        assert main(["report", "--config", str(cfg_path)]) == 0
        assert (out / "tables" / "eigenvalues.csv").exists()
        assert (out / "figures" / "openloop_cgray_test.svg").exists()
        assert (out / "traces" / "cgray_test.csv").exists()
        eigen = (out / "tables" / "eigenvalues.csv").read_text().splitlines()
        assert eigen[1].startswith("True,")

    def test_train_cli_overrides(self, tmp_path):
        out = tmp_path / "out2"
        code = main(
            ["train", "--out", str(out), "--variants", "white", "--N", "4",
             "--lr", "0.01", "--restarts", "1", "--epochs", "1", "--constrained", "no"]
        )
        assert code == 0
        ckpts = list((out / "run-desk-seed0" / "checkpoints").glob("*.json"))
        assert len(ckpts) == 1
        assert ckpts[0].name.startswith("white-u-N4")

    def test_report_without_checkpoints_exits_2(self, tmp_path, capsys):
        cfg_path = tiny_config(tmp_path)
        assert main(["report", "--config", str(cfg_path)]) == 2
        err = capsys.readouterr().err
        assert "checkpoints" in err

    def test_report_lists_missing_cells(self, tmp_path, capsys):
        cfg_path = tiny_config(tmp_path)
        assert main(["train", "--config", str(cfg_path)]) == 0
        cfg2 = tiny_config(tmp_path, seed=0)
        doc = json.loads(cfg2.read_text())
        doc["train"]["restarts"] = 2  # expect a second, absent restart
        cfg2.write_text(json.dumps(doc))
        assert main(["report", "--config", str(cfg2)]) == 2
        assert "missing checkpoints" in capsys.readouterr().err


class TestCheckAndUsage:
    def test_check_passes(self, tmp_path):
        assert main(["check", "--seed", "1"]) == 0

    def test_help_lists_flags(self, capsys):
        with pytest.raises(SystemExit) as exc_info:
            main(["train", "--help"])
        assert exc_info.value.code == 0
        text = capsys.readouterr().out
        for flag in ("--config", "--seed", "--jobs", "--scale", "--out", "--variants", "--N", "--lr", "--restarts"):
            assert flag in text

    def test_unknown_flag_exits_1(self):
        with pytest.raises(SystemExit) as exc_info:
            main(["train", "--frobnicate"])
        assert exc_info.value.code == 1

    def test_unknown_config_key_exits_1(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"sede": 3}')
        assert main(["check", "--config", str(path)]) == 1

    def test_missing_signals_csv_exits_2(self, tmp_path, capsys):
        doc = {"dataset": {"source": "csv", "path": str(tmp_path / "absent.csv")}}
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(doc))
        assert main(["simulate", "--config", str(path)]) == 2

    def test_csv_signal_source_end_to_end(self, tmp_path):
        from neuralssm.numerics import SeededRng
        from neuralssm.plant import WEEK_STEPS, generate_signals, write_signals_csv

        sig_path = tmp_path / "weather.csv"
        write_signals_csv(sig_path, generate_signals(4 * WEEK_STEPS, SeededRng(44)))
        doc = {
            "run_id": "csvrun",
            "out_dir": str(tmp_path / "out"),
            "dataset": {"source": "csv", "path": str(sig_path)},
        }
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(doc))
        assert main(["simulate", "--config", str(cfg)]) == 0
        train_csv = tmp_path / "out" / "csvrun" / "data" / "train.csv"
        assert len(train_csv.read_text().splitlines()) == 1 + WEEK_STEPS


class TestReportContract:
    def test_thirty_row_best_table_and_true_eigen_row(self, tmp_path):
        # 6 (variant, constrained) pairs x 5 horizons, init-only models
        doc = {
            "seed": 1,
            "out_dir": str(tmp_path / "out"),
            "run_id": "grid",
            "train": {
                "variants": ["black", "gray", "white"],
                "constrained": [False, True],
                "horizons": [8, 16, 32, 64, 128],
                "lr_grid": [0.01],
                "restarts": 1,
                "epochs": 0,
            },
        }
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(doc))
        assert main(["train", "--config", str(cfg)]) == 0
        assert main(["report", "--config", str(cfg)]) == 0
        out = tmp_path / "out" / "grid"
        best = (out / "tables" / "best_by_variant_N.csv").read_text().splitlines()
        assert len(best) == 1 + 30
        eigen = (out / "tables" / "eigenvalues.csv").read_text().splitlines()
        assert eigen[1].startswith("True,")
        assert len(eigen) == 1 + 1 + 6  # header, truth, six champions
