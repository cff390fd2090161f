"""Seeded random streams.

Every stream is a ``numpy`` Philox-4x64 counter-based generator whose
128-bit key packs ``(seed, shard)``: ``key = seed + 2**64 * shard``.
Normal variates come from ``Generator.standard_normal`` (ziggurat) and gamma
variates from ``Generator.standard_gamma``; both are deterministic functions
of the bit stream, so a given numpy release reproduces draws bit-for-bit on
every platform.
"""

from __future__ import annotations

import os

import numpy as np

SEED_ENV = "CBIMATRIX_SEED"
DEFAULT_SEED = 42
_MASK64 = (1 << 64) - 1


def default_seed() -> int:
    value = os.environ.get(SEED_ENV)
    return int(value) if value not in (None, "") else DEFAULT_SEED


def make_rng(seed: int, shard: int = 0) -> np.random.Generator:
    """Generator for sub-stream ``shard`` of ``seed``."""
    if shard < 0:
        raise ValueError("shard index must be non-negative")
    key = (int(seed) & _MASK64) | (int(shard) << 64)
    return np.random.Generator(np.random.Philox(key=key))


def shard_sizes(n: int, shards: int) -> list[int]:
    """Split ``n`` draws over ``shards`` sub-streams, earlier shards first."""
    if shards < 1:
        raise ValueError("need at least one shard")
    base, extra = divmod(int(n), shards)
    return [base + (1 if k < extra else 0) for k in range(shards)]
