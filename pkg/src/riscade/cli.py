"""Command-line entry point: generate / train / eval / sweep.

Every command resolves its configuration as profile < config file < flags
and writes the resolved snapshot next to its outputs, so any artifact can
be reproduced from the files it ships with.

Exit codes: 0 success, 2 configuration error, 3 I/O error,
4 numerical divergence.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np
import yaml

from .checkpoint import load_checkpoint, save_checkpoint
from .config import ExperimentConfig, load_config_file, resolve_config
from .data import generate_dataset, load_dataset, normalize, save_dataset
from .errors import ContractError, DivergenceError, ScheduleError, ShapeError
from .training import (TrainingDiverged, evaluate_nmse, split_indices, sweep,
                       train)

EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DIVERGED = 4

_CONFIG_ERRORS = (ScheduleError, ShapeError, ContractError, ValueError,
                  KeyError, TypeError, yaml.YAMLError)


def _resolve(config_path, profile, seed) -> ExperimentConfig:
    file_values = load_config_file(config_path) if config_path else None
    return resolve_config(profile=profile, file_values=file_values, seed=seed)


def _write_snapshot(cfg: ExperimentConfig, path: Path, extra: dict | None = None) -> None:
    doc = cfg.to_dict()
    if extra:
        doc.update(extra)
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _run(ctx_name: str, body) -> None:
    try:
        body()
    except TrainingDiverged as exc:
        click.echo(f"{ctx_name}: diverged: {exc}", err=True)
        sys.exit(EXIT_DIVERGED)
    except DivergenceError as exc:
        click.echo(f"{ctx_name}: diverged: {exc}", err=True)
        sys.exit(EXIT_DIVERGED)
    except OSError as exc:
        click.echo(f"{ctx_name}: i/o error: {exc}", err=True)
        sys.exit(EXIT_IO)
    except _CONFIG_ERRORS as exc:
        click.echo(f"{ctx_name}: config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)


def _common_options(fn):
    fn = click.option("--config", "config_path", type=click.Path(), default=None,
                      help="YAML/JSON config file overriding the profile.")(fn)
    fn = click.option("--profile", type=click.Choice(["desk", "paper"]),
                      default="desk", show_default=True)(fn)
    fn = click.option("--seed", type=int, default=None,
                      help="Override the config seed.")(fn)
    return fn


@click.group()
def main():
    """Time-varying cascaded-channel estimation experiments."""


@main.command()
@_common_options
@click.option("--out", "out_path", type=click.Path(), required=True,
              help="Dataset path (an .npz suffix is appended if missing).")
def generate(config_path, profile, seed, out_path):
    """Draw a dataset and write it with its manifest."""

    def body():
        cfg = _resolve(config_path, profile, seed)
        dataset = generate_dataset(cfg.scenario, cfg.schedule(), cfg.count,
                                   cfg.snr_db, cfg.train.seed)
        npz_path, manifest = save_dataset(dataset, out_path)
        _write_snapshot(cfg, Path(str(npz_path) + ".config.json"))
        size = npz_path.stat().st_size
        click.echo(f"wrote {len(dataset)} samples ({size} bytes) to {npz_path}")
        click.echo(f"manifest: {manifest}")

    _run("generate", body)


@main.command(name="train")
@_common_options
@click.option("--dataset", "dataset_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True,
              help="Directory for checkpoint, run record, and config snapshot.")
def train_cmd(config_path, profile, seed, dataset_path, out_dir):
    """Train on an existing dataset; write checkpoint + run record."""

    def body():
        cfg = _resolve(config_path, profile, seed)
        dataset = load_dataset(dataset_path)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        try:
            params, record = train(cfg.train, dataset)
        except TrainingDiverged as exc:
            (out / "run_record.json").write_text(exc.record.to_json())
            raise
        save_checkpoint(params, out / "checkpoint.json")
        (out / "run_record.json").write_text(record.to_json())
        _write_snapshot(cfg, out / "config.json")
        click.echo(f"final test NMSE {record.final_test_nmse:.6f} "
                   f"(best epoch {record.best_epoch + 1}, "
                   f"{record.wall_time_s:.1f} s)")

    _run("train", body)


@main.command(name="eval")
@_common_options
@click.option("--checkpoint", "ckpt_path", type=click.Path(exists=True), required=True)
@click.option("--dataset", "dataset_path", type=click.Path(exists=True), required=True)
def eval_cmd(config_path, profile, seed, ckpt_path, dataset_path):
    """Evaluate a checkpoint's NMSE on the config's test split."""

    def body():
        cfg = _resolve(config_path, profile, seed)
        dataset = load_dataset(dataset_path)
        params = load_checkpoint(ckpt_path)
        # reproduce the training-time normalization from the config seed
        splits = split_indices(len(dataset), cfg.train)
        train_split = np.sort(np.concatenate([splits.train, splits.val]))
        normalized, _scale = normalize(dataset, train_split)
        nmse = evaluate_nmse(params, normalized, splits.test)
        click.echo(f"test NMSE {nmse!r} over {splits.test.size} samples")

    _run("eval", body)


@main.command(name="sweep")
@_common_options
@click.option("--axis", type=click.Choice(["r_a", "r_t", "snr", "epoch"]), required=True)
@click.option("--values", required=True,
              help="Comma-separated axis values, e.g. 0.5,0.25")
@click.option("--out", "out_path", type=click.Path(), required=True,
              help="CSV report path.")
def sweep_cmd(config_path, profile, seed, axis, values, out_path):
    """Train once per axis value and write the per-epoch CSV report."""

    def body():
        cfg = _resolve(config_path, profile, seed)
        value_list = [float(v) for v in values.split(",") if v.strip()]
        csv_text, runs = sweep(axis, value_list, cfg, cfg.train)
        out = Path(out_path)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(csv_text)
        _write_snapshot(cfg, Path(str(out) + ".config.json"),
                        extra={"sweep_axis": axis, "sweep_values": value_list})
        for run in runs:
            click.echo(f"{axis}={run.value!r}: final test NMSE "
                       f"{run.record.final_test_nmse!r}")
        click.echo(f"report: {out}")

    _run("sweep", body)


if __name__ == "__main__":
    main()
