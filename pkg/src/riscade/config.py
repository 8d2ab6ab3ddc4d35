"""Experiment configuration: profiles, config files, and flag overrides.

A config file is a YAML key-tree with four blocks (scenario, frame, data,
train) plus a top-level seed.  CLI flags override file values, which
override the chosen profile.  The fully resolved snapshot is embedded in
every output artifact, so any run is replayable from its artifacts alone.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, replace
from pathlib import Path

import yaml

from .channel import ScenarioParams
from .errors import ScheduleError
from .pilot import FrameSchedule, build_schedule
from .training import TrainConfig


@dataclass(frozen=True)
class FrameConfig:
    """Knobs from which a concrete FrameSchedule is built."""

    blocks: int = 10            # L
    time_rate: float = 1.0      # r_t
    antenna_rate: float = 0.5   # r_a
    pilot_len: int | None = None  # N_p; None -> selected-element count
    power: float = 1.0          # P


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioParams
    frame: FrameConfig
    snr_db: float | None
    count: int
    train: TrainConfig

    def schedule(self) -> FrameSchedule:
        f = self.frame
        return build_schedule(f.blocks, f.time_rate, self.scenario.n,
                              f.antenna_rate, f.pilot_len, f.power)

    def with_axis(self, axis: str, value, train_config: TrainConfig
                  ) -> tuple["ExperimentConfig", TrainConfig]:
        """The (experiment, train) pair for one sweep point."""
        if axis == "r_a":
            return replace(self, frame=replace(self.frame, antenna_rate=float(value))), train_config
        if axis == "r_t":
            return replace(self, frame=replace(self.frame, time_rate=float(value))), train_config
        if axis == "snr":
            return replace(self, snr_db=float(value)), train_config
        if axis == "epoch":
            return self, replace(train_config, epochs=int(value))
        raise ValueError(f"unknown sweep axis {axis!r}")

    def to_dict(self) -> dict:
        return {
            "scenario": dataclasses.asdict(self.scenario),
            "frame": dataclasses.asdict(self.frame),
            "snr_db": self.snr_db,
            "count": self.count,
            "train": self.train.to_dict(),
            "seed": self.train.seed,
        }

    def snapshot_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def desk_profile(seed: int = 0) -> ExperimentConfig:
    """Minutes-on-a-laptop default: small surface, short frames."""
    return ExperimentConfig(
        scenario=ScenarioParams(m=2, n_v=4, n_h=4),
        frame=FrameConfig(blocks=10, time_rate=1.0, antenna_rate=0.5),
        snr_db=None,
        count=1000,
        train=TrainConfig(epochs=150, batch_size=50, seed=seed),
    )


def paper_profile(seed: int = 0) -> ExperimentConfig:
    """Full-scale protocol: 64 elements, 20000 samples, 1000 epochs."""
    return ExperimentConfig(
        scenario=ScenarioParams(m=2, n_v=8, n_h=8),
        frame=FrameConfig(blocks=10, time_rate=0.3, antenna_rate=0.5),
        snr_db=20.0,
        count=20000,
        train=TrainConfig(epochs=1000, batch_size=200, seed=seed),
    )


PROFILES = {"desk": desk_profile, "paper": paper_profile}


def load_config_file(path) -> dict:
    text = Path(path).read_text()
    try:
        # JSON first: config snapshots are JSON, and YAML 1.1 would read
        # exponent literals like 5e-08 as strings
        doc = json.loads(text)
    except json.JSONDecodeError:
        doc = yaml.safe_load(text)
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ScheduleError("config file must be a mapping")
    return doc


def resolve_config(profile: str = "desk", file_values: dict | None = None,
                   seed: int | None = None) -> ExperimentConfig:
    """Profile defaults, overridden by file values, overridden by flags."""
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}")
    cfg = PROFILES[profile]()
    values = dict(file_values or {})

    if "scenario" in values:
        cfg = replace(cfg, scenario=replace(cfg.scenario, **values["scenario"]))
    if "frame" in values:
        cfg = replace(cfg, frame=replace(cfg.frame, **values["frame"]))
    if "snr_db" in values:
        snr = values["snr_db"]
        cfg = replace(cfg, snr_db=None if snr is None else float(snr))
    if "count" in values:
        cfg = replace(cfg, count=int(values["count"]))
    if "train" in values:
        cfg = replace(cfg, train=replace(cfg.train, **values["train"]))
    if "seed" in values:
        cfg = replace(cfg, train=replace(cfg.train, seed=int(values["seed"])))
    if seed is not None:
        cfg = replace(cfg, train=replace(cfg.train, seed=int(seed)))
    return cfg


def config_from_snapshot(doc: dict) -> ExperimentConfig:
    """Rebuild a config from a previously written snapshot dict."""
    return ExperimentConfig(
        scenario=ScenarioParams(**doc["scenario"]),
        frame=FrameConfig(**doc["frame"]),
        snr_db=doc["snr_db"],
        count=int(doc["count"]),
        train=TrainConfig(**doc["train"]),
    )
