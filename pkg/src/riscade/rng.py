"""Deterministic named RNG sub-streams.

All randomness in the package flows from one top-level seed.  Each concern
(dataset draws, noise, parameter init, per-epoch shuffles) gets its own
named stream so that changing one does not perturb the others.
"""

from __future__ import annotations

import numpy as np


def substream(seed: int, name: str) -> np.random.Generator:
    """Generator for the sub-stream `name` under the top-level `seed`.

    The stream key is derived from the name's bytes, so the mapping is
    stable across platforms and interpreter runs.
    """
    key = [int(seed)] + list(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(key))
