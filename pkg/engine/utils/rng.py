"""
Seeded random number generation.

Every random draw in the engine comes from numpy's PCG64 bit generator,
seeded with a 64-bit integer. Seed ensembles derive independent child
seeds through SeedSequence.spawn, so no two workers share a stream and
the derivation itself is reproducible.
"""

from typing import List

import numpy as np

GENERATOR_NAME = "PCG64"
SEED_MASK = (1 << 64) - 1


def make_rng(seed: int) -> np.random.Generator:
    """A fresh PCG64 generator for a 64-bit seed."""
    return np.random.Generator(np.random.PCG64(int(seed) & SEED_MASK))


def derive_seeds(base_seed: int, count: int) -> List[int]:
    """
    Child seeds for an ensemble of `count` independent runs.

    Args:
        base_seed: Scene or command-line seed
        count: Number of runs

    Returns:
        List of 64-bit seeds, stable for a given (base_seed, count)
    """
    children = np.random.SeedSequence(int(base_seed) & SEED_MASK).spawn(count)
    return [int(child.generate_state(1, np.uint64)[0]) for child in children]
