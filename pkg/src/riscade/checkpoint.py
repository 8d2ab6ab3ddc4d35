"""Parameter checkpoints: a self-describing JSON container mapping
parameter-group name -> tensor name -> shape + flat values."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ContractError, ShapeError
from .estimator import EstimatorParams
from .rng import substream

CHECKPOINT_VERSION = 1


def save_checkpoint(params: EstimatorParams, path) -> None:
    groups = {}
    for gname, group in params.named_parameters().items():
        groups[gname] = {
            name: {"shape": list(t.data.shape), "values": t.data.ravel().tolist()}
            for name, t in group.items()
        }
    doc = {"version": CHECKPOINT_VERSION, "meta": params.meta(), "groups": groups}
    Path(path).write_text(json.dumps(doc, sort_keys=True, separators=(",", ":")))


def load_checkpoint(path) -> EstimatorParams:
    doc = json.loads(Path(path).read_text())
    if doc.get("version") != CHECKPOINT_VERSION:
        raise ContractError(f"unsupported checkpoint version {doc.get('version')!r}")
    meta = doc["meta"]
    params = EstimatorParams.init(
        m=int(meta["m"]), n=int(meta["n"]), n_s=int(meta["n_s"]),
        rng=substream(0, "checkpoint-placeholder"),
        hidden_dim=int(meta["hidden_dim"]),
        rk_step=float(meta["rk_step"]),
        ode_steps=int(meta["ode_steps"]),
    )
    snapshot = {}
    for gname, group in doc["groups"].items():
        for name, entry in group.items():
            arr = np.asarray(entry["values"], dtype=np.float64)
            shape = tuple(entry["shape"])
            if arr.size != int(np.prod(shape)):
                raise ShapeError(f"corrupt checkpoint entry {gname}/{name}")
            snapshot[f"{gname}/{name}"] = arr.reshape(shape)
    params.load_values(snapshot)
    return params
