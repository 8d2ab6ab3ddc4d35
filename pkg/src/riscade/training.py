"""Training loop, NMSE evaluation, and experiment sweeps."""

from __future__ import annotations

import dataclasses
import io
import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import autodiff
from .data import Dataset, generate_dataset, normalize
from .errors import DivergenceError
from .estimator import EstimatorParams, loss, predict_full
from .nn import Adam
from .rng import substream

SWEEP_CSV_HEADER = "axis,value,epoch,loss_t,loss_a,nmse"
SWEEP_AXES = ("r_a", "r_t", "snr", "epoch")


@dataclass(frozen=True)
class TrainConfig:
    """Optimization schedule.  Defaults match the full-scale protocol; the
    desk profile overrides epochs/batch/count for laptop runs."""

    epochs: int = 1000
    batch_size: int = 200
    lr0: float = 0.005
    lr_decay: float = 0.5
    lr_decay_every: int = 50
    lr_floor: float = 5e-5
    gamma: float = 1.0
    test_fraction: float = 0.2
    val_fraction: float = 0.1   # carved out of the training split
    seed: int = 0
    hidden_dim: int | None = None
    rk_step: float = 1.0
    ode_steps: int = 1

    def lr_at(self, epoch: int) -> float:
        """Stepped decay; `epoch` is 0-based."""
        return max(self.lr0 * self.lr_decay ** (epoch // self.lr_decay_every),
                   self.lr_floor)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class RunRecord:
    """Everything needed to replay and audit one training run.

    Wall time is kept in memory and reported, but excluded from the
    serialized record so identical config+seed runs serialize
    bit-identically.
    """

    config: dict
    seed: int
    n_train: int
    loss_t: list[float] = field(default_factory=list)
    loss_a: list[float] = field(default_factory=list)
    val_nmse: list[float] = field(default_factory=list)
    lr: list[float] = field(default_factory=list)
    best_epoch: int = -1
    final_test_nmse: float = float("nan")
    wall_time_s: float = 0.0
    diverged: bool = False

    def to_json(self) -> str:
        doc = {
            "config": self.config,
            "seed": self.seed,
            "n_train": self.n_train,
            "loss_t": self.loss_t,
            "loss_a": self.loss_a,
            "val_nmse": self.val_nmse,
            "lr": self.lr,
            "best_epoch": self.best_epoch,
            "final_test_nmse": self.final_test_nmse,
            "diverged": self.diverged,
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        doc = json.loads(text)
        return cls(wall_time_s=0.0, **doc)


class TrainingDiverged(DivergenceError):
    """Raised when the loss leaves the finite range; carries the partial record."""

    def __init__(self, message: str, record: RunRecord):
        super().__init__(message)
        record.diverged = True
        self.record = record


@dataclass(frozen=True)
class Splits:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray


def split_indices(count: int, config: TrainConfig) -> Splits:
    """Disjoint test / validation / training index sets, seeded."""
    perm = substream(config.seed, "split").permutation(count)
    n_test = int(np.floor(config.test_fraction * count + 0.5))
    train_all = perm[n_test:]
    n_val = int(np.floor(config.val_fraction * len(train_all) + 0.5))
    return Splits(train=np.sort(train_all[n_val:]),
                  val=np.sort(train_all[:n_val]),
                  test=np.sort(perm[:n_test]))


def nmse(c_hat: np.ndarray, c_true: np.ndarray) -> float:
    """Mean over samples of sum_n ||c(n) - c_hat(n)||^2 / sum_n ||c(n)||^2.

    Arrays are (S, L, D) stacked real/imag values; the per-sample ratio is
    1 for the all-zero estimator and invariant to a common rescaling.
    """
    c_hat = np.asarray(c_hat, dtype=np.float64)
    c_true = np.asarray(c_true, dtype=np.float64)
    err = np.sum((c_true - c_hat) ** 2, axis=(1, 2))
    ref = np.sum(c_true ** 2, axis=(1, 2))
    return float(np.mean(err / ref))


def evaluate_nmse(params: EstimatorParams, dataset: Dataset, indices,
                  chunk: int = 200) -> float:
    """NMSE of the full-channel estimate on a split, de-normalized."""
    idx = np.asarray(indices)
    if idx.size == 0:
        raise ValueError("cannot evaluate on an empty split")
    total = 0.0
    for start in range(0, idx.size, chunk):
        part = idx[start:start + chunk]
        c_full = dataset.c_full[part] * dataset.scale
        c_hat = predict_full(params, dataset.x[part]) * dataset.scale
        total += nmse(c_hat, c_full) * part.size
    return total / idx.size


def train(config: TrainConfig, dataset: Dataset
          ) -> tuple[EstimatorParams, RunRecord]:
    """Minibatch Adam on the joint loss with the stepped learning-rate
    schedule; returns the best-validation checkpoint and the run record."""
    t0 = time.perf_counter()
    splits = split_indices(len(dataset), config)
    if config.batch_size > splits.train.size:
        raise ValueError("batch size exceeds the training-split size")
    train_split = np.sort(np.concatenate([splits.train, splits.val]))
    ds, _scale = normalize(dataset, indices=train_split)

    params = EstimatorParams.init(
        m=ds.scenario.m, n=ds.scenario.n, n_s=ds.schedule.num_selected,
        rng=substream(config.seed, "init"),
        hidden_dim=config.hidden_dim, rk_step=config.rk_step,
        ode_steps=config.ode_steps,
    )
    optimizer = Adam(params.parameters(), lr=config.lr_at(0))
    record = RunRecord(config=config.to_dict(), seed=config.seed,
                       n_train=int(splits.train.size))

    best_val = np.inf
    best_snapshot = params.value_snapshot()
    for epoch in range(config.epochs):
        optimizer.lr = config.lr_at(epoch)
        order = substream(config.seed, f"shuffle/{epoch}").permutation(splits.train)
        n_batches = order.size // config.batch_size
        epoch_t = 0.0
        epoch_a = 0.0
        for b in range(n_batches):
            idx = order[b * config.batch_size:(b + 1) * config.batch_size]
            loss_t, loss_a, loss_s = loss(params, ds.batch(idx), gamma=config.gamma)
            if not np.isfinite(loss_s.data):
                record.wall_time_s = time.perf_counter() - t0
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch}, batch {b}", record)
            optimizer.zero_grad()
            autodiff.backward(loss_s)
            optimizer.step()
            epoch_t += loss_t.item()
            epoch_a += loss_a.item()
        val = evaluate_nmse(params, ds, splits.val)
        record.loss_t.append(epoch_t / n_batches)
        record.loss_a.append(epoch_a / n_batches)
        record.val_nmse.append(val)
        record.lr.append(optimizer.lr)
        if val < best_val:
            best_val = val
            best_snapshot = params.value_snapshot()
            record.best_epoch = epoch

    params.load_values(best_snapshot)
    record.final_test_nmse = evaluate_nmse(params, ds, splits.test)
    record.wall_time_s = time.perf_counter() - t0
    return params, record


@dataclass(frozen=True)
class SweepRun:
    value: float
    record: RunRecord
    params: EstimatorParams


def run_experiment(exp, train_config: TrainConfig
                   ) -> tuple[EstimatorParams, RunRecord, Dataset]:
    """Generate the dataset an experiment config describes, then train."""
    dataset = generate_dataset(exp.scenario, exp.schedule(), exp.count,
                               exp.snr_db, train_config.seed)
    params, record = train(train_config, dataset)
    return params, record, dataset


def sweep(axis: str, values, exp, train_config: TrainConfig
          ) -> tuple[str, list[SweepRun]]:
    """One trained run per axis value under a shared seed; returns the CSV
    report text and the per-value runs.

    The csv carries one row per (value, epoch): the per-epoch training
    losses and the validation NMSE trace.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")
    if not values:
        raise ValueError("sweep needs at least one value")
    runs: list[SweepRun] = []
    for value in values:
        exp_v, cfg_v = exp.with_axis(axis, value, train_config)
        params_v, record, _ = run_experiment(exp_v, cfg_v)
        runs.append(SweepRun(value=float(value), record=record, params=params_v))
    return render_sweep_csv(axis, runs), runs


def render_sweep_csv(axis: str, runs: list[SweepRun]) -> str:
    out = io.StringIO()
    out.write(SWEEP_CSV_HEADER + "\n")
    for run in runs:
        rec = run.record
        for epoch, (lt, la, nm) in enumerate(zip(rec.loss_t, rec.loss_a, rec.val_nmse),
                                             start=1):
            out.write(f"{axis},{run.value!r},{epoch},{lt!r},{la!r},{nm!r}\n")
    return out.getvalue()
