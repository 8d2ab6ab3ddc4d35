"""Dataset generation, normalization, and on-disk format.

One sample is one frame: a fresh ray draw, the cascaded sequence {C(n)},
and the derived training triple ({x(n)}, {c_sub(n)}, {c(n)}).  Files pair
a .npz binary container (arrays with shape headers) with a JSON manifest
carrying the scenario, schedule, seed, and normalization scale.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .channel import (RayParams, ScenarioParams, draw_channel_sample,
                      vectorize_cascade)
from .errors import ContractError, ShapeError
from .pilot import FrameSchedule, build_network_input, ls_estimate, observe, to_real_stack
from .rng import substream

DATASET_VERSION = 1


def _stack_blocks(C_seq: np.ndarray, columns: np.ndarray | None = None) -> np.ndarray:
    """Real/imag-stacked column-major vectorizations, shape (L, 2*M*K)."""
    rows = []
    for C in C_seq:
        block = C if columns is None else C[:, columns]
        rows.append(to_real_stack(vectorize_cascade(block)))
    return np.stack(rows)


@dataclass(eq=False)
class Dataset:
    """In-memory dataset.

    `x` is stored divided by `scale`; the label views `c_sub` / `c_full`
    are derived from the raw cascades and the same scale, so NMSE on raw
    values is recovered by multiplying by `scale`.
    """

    scenario: ScenarioParams
    schedule: FrameSchedule
    snr_db: float | None
    seed: int
    rays: list[RayParams]
    C_seq: np.ndarray          # (S, L, M, N) complex, raw (never scaled)
    x: np.ndarray              # (S, L, 2*M*N_s) float, divided by scale
    scale: float = 1.0

    def __post_init__(self):
        if self.C_seq.shape[0] != self.x.shape[0]:
            raise ShapeError("sample counts of C_seq and x differ")
        if self.C_seq.shape[1] != self.schedule.num_blocks:
            raise ShapeError("C_seq block count does not match the schedule")

    def __len__(self) -> int:
        return self.C_seq.shape[0]

    @cached_property
    def c_sub(self) -> np.ndarray:
        cols = self.schedule.element_index
        out = np.stack([_stack_blocks(seq, cols) for seq in self.C_seq])
        return out / self.scale

    @cached_property
    def c_full(self) -> np.ndarray:
        out = np.stack([_stack_blocks(seq) for seq in self.C_seq])
        return out / self.scale

    def batch(self, indices) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        idx = np.asarray(indices)
        return self.x[idx], self.c_sub[idx], self.c_full[idx]


def generate_dataset(scenario: ScenarioParams, schedule: FrameSchedule,
                     count: int, snr_db: float | None, seed: int) -> Dataset:
    """Draw `count` frames and their pilot-derived network inputs.

    Ray draws and pilot noise use separate per-sample streams, so the same
    seed reproduces identical channels across different schedules.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rays_list: list[RayParams] = []
    C_all = np.empty((count, schedule.num_blocks, scenario.m, scenario.n),
                     dtype=np.complex128)
    x_all = np.empty((count, schedule.num_blocks, 2 * scenario.m * schedule.num_selected))
    for i in range(count):
        sample = draw_channel_sample(scenario, schedule.num_blocks,
                                     substream(seed, f"dataset/{i}"))
        noise_rng = substream(seed, f"noise/{i}")
        estimates = {
            b: ls_estimate(observe(sample.C_seq[b - 1], b, schedule, snr_db, noise_rng))
            for b in schedule.pilot_blocks
        }
        rays_list.append(sample.rays)
        C_all[i] = sample.C_seq
        x_all[i] = build_network_input(estimates, schedule)
    return Dataset(scenario=scenario, schedule=schedule, snr_db=snr_db,
                   seed=seed, rays=rays_list, C_seq=C_all, x=x_all)


def normalize(dataset: Dataset, indices=None) -> tuple[Dataset, float]:
    """Rescale by one global scalar: the max absolute stacked real/imag
    value over the given (training) subset, inputs and labels included."""
    idx = np.arange(len(dataset)) if indices is None else np.asarray(indices)
    if idx.size == 0:
        raise ValueError("cannot normalize over an empty subset")
    C_sub = dataset.C_seq[idx]
    scale = max(
        float(np.max(np.abs(dataset.x[idx] * dataset.scale))) if dataset.x.size else 0.0,
        float(np.max(np.abs(C_sub.real))),
        float(np.max(np.abs(C_sub.imag))),
    )
    if scale <= 0.0 or not np.isfinite(scale):
        raise ContractError("degenerate normalization scale (all-zero data?)")
    normalized = Dataset(
        scenario=dataset.scenario, schedule=dataset.schedule,
        snr_db=dataset.snr_db, seed=dataset.seed, rays=dataset.rays,
        C_seq=dataset.C_seq, x=dataset.x * dataset.scale / scale, scale=scale,
    )
    return normalized, scale


def _rays_to_arrays(rays: list[RayParams]) -> dict[str, np.ndarray]:
    return {
        "ray_alpha": np.array([r.alpha for r in rays]),
        "ray_psi": np.array([r.psi for r in rays]),
        "ray_phi_h": np.array([r.phi_h for r in rays]),
        "ray_varphi_h": np.array([r.varphi_h for r in rays]),
        "ray_beta": np.stack([r.beta for r in rays]),
        "ray_tau": np.stack([r.tau for r in rays]),
        "ray_theta": np.stack([r.theta for r in rays]),
        "ray_phi_g": np.stack([r.phi_g for r in rays]),
        "ray_varphi_g": np.stack([r.varphi_g for r in rays]),
    }


def _rays_from_arrays(arrays, count: int) -> list[RayParams]:
    return [
        RayParams(
            alpha=complex(arrays["ray_alpha"][i]),
            psi=float(arrays["ray_psi"][i]),
            phi_h=float(arrays["ray_phi_h"][i]),
            varphi_h=float(arrays["ray_varphi_h"][i]),
            beta=arrays["ray_beta"][i],
            tau=arrays["ray_tau"][i],
            theta=arrays["ray_theta"][i],
            phi_g=arrays["ray_phi_g"][i],
            varphi_g=arrays["ray_varphi_g"][i],
        )
        for i in range(count)
    ]


def manifest_path(path) -> Path:
    return Path(str(path) + ".manifest.json")


def save_dataset(dataset: Dataset, path) -> tuple[Path, Path]:
    """Write `<path>` (npz arrays) and `<path>.manifest.json`."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez(path, C_seq=dataset.C_seq, x=dataset.x,
             **_rays_to_arrays(dataset.rays))
    npz_path = path if str(path).endswith(".npz") else Path(str(path) + ".npz")
    manifest = {
        "version": DATASET_VERSION,
        "count": len(dataset),
        "seed": dataset.seed,
        "snr_db": dataset.snr_db,
        "scale": dataset.scale,
        "scenario": dataclasses.asdict(dataset.scenario),
        "schedule": dataset.schedule.to_dict(),
    }
    mpath = manifest_path(npz_path)
    mpath.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return npz_path, mpath


def load_dataset(path) -> Dataset:
    path = Path(path)
    manifest = json.loads(manifest_path(path).read_text())
    if manifest.get("version") != DATASET_VERSION:
        raise ContractError(f"unsupported dataset version {manifest.get('version')!r}")
    with np.load(path) as arrays:
        count = int(manifest["count"])
        dataset = Dataset(
            scenario=ScenarioParams(**manifest["scenario"]),
            schedule=FrameSchedule.from_dict(manifest["schedule"]),
            snr_db=manifest["snr_db"],
            seed=int(manifest["seed"]),
            rays=_rays_from_arrays(arrays, count),
            C_seq=arrays["C_seq"],
            x=arrays["x"],
            scale=float(manifest["scale"]),
        )
    return dataset
