"""Tests for the command-line interface."""

import hashlib
import json

import numpy as np
import pytest
import yaml
from click.testing import CliRunner

from riscade.checkpoint import load_checkpoint
from riscade.cli import main
from riscade.estimator import EstimatorParams
from riscade.rng import substream
from riscade.training import SWEEP_CSV_HEADER

TINY_CONFIG = {
    "scenario": {"m": 1, "n_v": 2, "n_h": 2, "l_g": 2},
    "frame": {"blocks": 3, "time_rate": 1.0, "antenna_rate": 0.5},
    "snr_db": None,
    "count": 60,
    "train": {"epochs": 2, "batch_size": 10},
    "seed": 3,
}


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def tiny_config_path(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(TINY_CONFIG))
    return path


def _generate(runner, config_path, tmp_path, name="data"):
    out = tmp_path / name
    result = runner.invoke(main, ["generate", "--config", str(config_path),
                                  "--out", str(out)])
    assert result.exit_code == 0, result.output
    return tmp_path / f"{name}.npz"


class TestGenerate:
    def test_writes_dataset_and_reports_size(self, runner, tiny_config_path, tmp_path):
        out = tmp_path / "data"
        result = runner.invoke(main, ["generate", "--config", str(tiny_config_path),
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert "wrote 60 samples" in result.output
        assert (tmp_path / "data.npz").exists()
        manifest = json.loads((tmp_path / "data.npz.manifest.json").read_text())
        assert manifest["count"] == 60

    def test_same_seed_gives_identical_manifest_hash(self, runner, tiny_config_path, tmp_path):
        _generate(runner, tiny_config_path, tmp_path, "a")
        _generate(runner, tiny_config_path, tmp_path, "b")
        digest = lambda n: hashlib.sha256(
            (tmp_path / f"{n}.npz.manifest.json").read_bytes()).hexdigest()
        assert digest("a") == digest("b")

    def test_invalid_schedule_is_config_error(self, runner, tmp_path):
        bad = dict(TINY_CONFIG, frame={"blocks": 3, "time_rate": 1.0,
                                       "antenna_rate": 0.5, "pilot_len": 1})
        path = tmp_path / "bad.yaml"
        path.write_text(yaml.safe_dump(bad))
        result = runner.invoke(main, ["generate", "--config", str(path),
                                      "--out", str(tmp_path / "x")])
        assert result.exit_code == 2
        assert "config error" in result.output

    def test_config_snapshot_written(self, runner, tiny_config_path, tmp_path):
        npz = _generate(runner, tiny_config_path, tmp_path)
        snapshot = json.loads((tmp_path / "data.npz.config.json").read_text())
        assert snapshot["count"] == 60
        assert snapshot["seed"] == 3


class TestTrain:
    def test_writes_checkpoint_and_record(self, runner, tiny_config_path, tmp_path):
        npz = _generate(runner, tiny_config_path, tmp_path)
        out = tmp_path / "run"
        result = runner.invoke(main, ["train", "--config", str(tiny_config_path),
                                      "--dataset", str(npz), "--out", str(out)])
        assert result.exit_code == 0, result.output
        record = json.loads((out / "run_record.json").read_text())
        assert len(record["loss_t"]) == 2
        assert len(record["val_nmse"]) == 2
        assert (out / "checkpoint.json").exists()
        assert (out / "config.json").exists()

    def test_zero_lr_checkpoint_equals_init(self, runner, tmp_path):
        cfg = dict(TINY_CONFIG,
                   train={"epochs": 1, "batch_size": 10, "lr0": 0.0, "lr_floor": 0.0})
        path = tmp_path / "cfg.yaml"
        path.write_text(yaml.safe_dump(cfg))
        npz = _generate(runner, path, tmp_path)
        out = tmp_path / "run"
        result = runner.invoke(main, ["train", "--config", str(path),
                                      "--dataset", str(npz), "--out", str(out)])
        assert result.exit_code == 0, result.output
        restored = load_checkpoint(out / "checkpoint.json")
        fresh = EstimatorParams.init(1, 4, 2, substream(3, "init"))
        for a, b in zip(restored.parameters(), fresh.parameters()):
            assert np.array_equal(a.data, b.data)

    def test_missing_dataset_is_usage_error(self, runner, tiny_config_path, tmp_path):
        result = runner.invoke(main, ["train", "--config", str(tiny_config_path),
                                      "--dataset", str(tmp_path / "nope.npz"),
                                      "--out", str(tmp_path / "run")])
        assert result.exit_code == 2

    def test_divergence_exit_code(self, runner, tmp_path):
        cfg = dict(TINY_CONFIG,
                   train={"epochs": 3, "batch_size": 10, "lr0": 1e200,
                          "lr_floor": 1e200})
        path = tmp_path / "cfg.yaml"
        path.write_text(yaml.safe_dump(cfg))
        npz = _generate(runner, path, tmp_path)
        out = tmp_path / "run"
        with np.errstate(all="ignore"):
            result = runner.invoke(main, ["train", "--config", str(path),
                                          "--dataset", str(npz), "--out", str(out)])
        assert result.exit_code == 4
        record = json.loads((out / "run_record.json").read_text())
        assert record["diverged"] is True


class TestEval:
    def test_reports_test_nmse(self, runner, tiny_config_path, tmp_path):
        npz = _generate(runner, tiny_config_path, tmp_path)
        out = tmp_path / "run"
        runner.invoke(main, ["train", "--config", str(tiny_config_path),
                             "--dataset", str(npz), "--out", str(out)])
        result = runner.invoke(main, ["eval", "--config", str(tiny_config_path),
                                      "--checkpoint", str(out / "checkpoint.json"),
                                      "--dataset", str(npz)])
        assert result.exit_code == 0, result.output
        assert "test NMSE" in result.output

    def test_eval_matches_train_report(self, runner, tiny_config_path, tmp_path):
        npz = _generate(runner, tiny_config_path, tmp_path)
        out = tmp_path / "run"
        runner.invoke(main, ["train", "--config", str(tiny_config_path),
                             "--dataset", str(npz), "--out", str(out)])
        record = json.loads((out / "run_record.json").read_text())
        result = runner.invoke(main, ["eval", "--config", str(tiny_config_path),
                                      "--checkpoint", str(out / "checkpoint.json"),
                                      "--dataset", str(npz)])
        reported = float(result.output.split("test NMSE ")[1].split(" ")[0])
        assert reported == record["final_test_nmse"]


class TestSweep:
    def test_single_value_rows_equal_epochs(self, runner, tiny_config_path, tmp_path):
        out = tmp_path / "report.csv"
        result = runner.invoke(main, ["sweep", "--config", str(tiny_config_path),
                                      "--axis", "r_a", "--values", "0.5",
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        lines = out.read_text().strip().split("\n")
        assert lines[0] == SWEEP_CSV_HEADER
        assert len(lines) - 1 == TINY_CONFIG["train"]["epochs"]

    def test_csv_round_trips(self, runner, tiny_config_path, tmp_path):
        out = tmp_path / "report.csv"
        runner.invoke(main, ["sweep", "--config", str(tiny_config_path),
                             "--axis", "r_a", "--values", "0.5", "--out", str(out)])
        for line in out.read_text().strip().split("\n")[1:]:
            fields = line.split(",")
            assert repr(float(fields[1])) == fields[1]
            assert repr(float(fields[3])) == fields[3]

    def test_snr_sweep_trains_per_value(self, runner, tiny_config_path, tmp_path):
        out = tmp_path / "report.csv"
        result = runner.invoke(main, ["sweep", "--config", str(tiny_config_path),
                                      "--axis", "snr", "--values", "0,10,20",
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert result.output.count("final test NMSE") == 3
        lines = out.read_text().strip().split("\n")
        assert len(lines) - 1 == 3 * TINY_CONFIG["train"]["epochs"]
        sidecar = json.loads((tmp_path / "report.csv.config.json").read_text())
        assert sidecar["sweep_axis"] == "snr"
        assert sidecar["sweep_values"] == [0.0, 10.0, 20.0]

    def test_unknown_axis_rejected(self, runner, tiny_config_path, tmp_path):
        result = runner.invoke(main, ["sweep", "--config", str(tiny_config_path),
                                      "--axis", "bogus", "--values", "1",
                                      "--out", str(tmp_path / "r.csv")])
        assert result.exit_code == 2


class TestExitCodes:
    def test_unwritable_output_is_io_error(self, runner, tiny_config_path):
        result = runner.invoke(main, ["generate", "--config", str(tiny_config_path),
                                      "--out", "/dev/null/nope/data"])
        assert result.exit_code == 3
        assert "i/o error" in result.output


class TestReplayability:
    def test_rerun_from_snapshot_is_identical(self, runner, tiny_config_path, tmp_path):
        npz = _generate(runner, tiny_config_path, tmp_path)
        out1, out2 = tmp_path / "run1", tmp_path / "run2"
        runner.invoke(main, ["train", "--config", str(tiny_config_path),
                             "--dataset", str(npz), "--out", str(out1)])
        # replay purely from the persisted snapshot
        snapshot = out1 / "config.json"
        runner.invoke(main, ["train", "--config", str(snapshot),
                             "--dataset", str(npz), "--out", str(out2)])
        assert (out1 / "run_record.json").read_bytes() == \
            (out2 / "run_record.json").read_bytes()
