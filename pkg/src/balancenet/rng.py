"""Counter-based random streams.

Every random draw in a run is a pure function of (seed, purpose, block
index, position in block). Blocks are generated from independent Philox
streams keyed by that tuple, so results never depend on thread count,
chunking of the integration loop, or generation order across runs.
"""

from __future__ import annotations

import numpy as np

# purpose ids; keep stable, they are part of the reproducibility contract
NOISE_STREAM = 0
INIT_STREAM = 1
SWEEP_STREAM = 2


def _generator(seed: int, purpose: int, block: int) -> np.random.Generator:
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a u64, got {seed}")
    key = np.array([np.uint64(seed), np.uint64((purpose << 48) + block)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def normal_block(seed: int, purpose: int, block: int, shape: tuple[int, ...]) -> np.ndarray:
    """Standard-normal draws for one block of the stream (seed, purpose, block)."""
    return _generator(seed, purpose, block).standard_normal(shape)


def uniform_block(seed: int, purpose: int, block: int, shape: tuple[int, ...]) -> np.ndarray:
    return _generator(seed, purpose, block).random(shape)
