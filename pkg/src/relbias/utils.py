"""Seeding helpers.

All randomness in the package flows through ``numpy.random.Generator``
objects derived from ``SeedSequence`` so that every dataset, weight
initialisation and shuffle order is exactly reproducible from integer
seeds, independent of platform.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int, *salt: int) -> np.random.Generator:
    """Deterministic generator for ``seed``, optionally salted.

    Different salts yield statistically independent streams for the same
    base seed (used to decouple e.g. weight init from shuffle order).
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, salt)]))


def spawn_seeds(seed: int, k: int) -> list[int]:
    """Derive ``k`` independent integer sub-seeds from ``seed``."""
    children = np.random.SeedSequence(int(seed)).spawn(k)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]
