"""Seeded, splittable counter-based random streams."""
from __future__ import annotations

import numpy as np

SeedLike = int | np.random.SeedSequence | np.random.Generator | None


def make_rng(seed: SeedLike) -> np.random.Generator:
    """Philox-backed generator; passing a Generator returns it unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        raise ValueError("an explicit seed is required")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
    return np.random.Generator(np.random.Philox(ss))


def spawn_seeds(seed: int, n: int) -> list[np.random.SeedSequence]:
    """Independent child streams for parallel workers."""
    return np.random.SeedSequence(int(seed)).spawn(n)
