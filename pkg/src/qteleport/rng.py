"""Counter-based random streams keyed on (seed, trial index).

Each trial gets its own Philox stream, so trials can run in any order or in
parallel and still replay bit-for-bit.
"""
from __future__ import annotations

import numpy as np


def trial_rng(seed: int, trial: int = 0) -> np.random.Generator:
    """Independent generator for trial ``trial`` of a run seeded with ``seed``."""
    if seed < 0 or trial < 0:
        raise ValueError("seed and trial index must be non-negative")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(trial),))
    return np.random.Generator(np.random.Philox(ss))


def as_rng(rng) -> np.random.Generator:
    """Accept a Generator, an int seed, or None (seed 0)."""
    if isinstance(rng, np.random.Generator):
        return rng
    return trial_rng(0 if rng is None else int(rng), 0)
