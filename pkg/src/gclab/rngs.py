"""Counter-based random streams with deterministic per-replicate derivation.

Every stream is a Philox generator keyed by a seed key: an integer, or a
tuple mixing integers with short string namespaces (strings are folded to
integers by a stable hash). Tuple keys give each replicate its own stream,
so results are identical whether replicates run serially, in thread pools,
or in vectorized blocks.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _fold(part) -> int:
    if isinstance(part, str):
        return int.from_bytes(hashlib.sha256(part.encode()).digest()[:8], "little")
    return int(part)


def stream(key) -> np.random.Generator:
    """Return the generator for a seed key. Same key, same stream, always."""
    if isinstance(key, tuple):
        key = tuple(_fold(p) for p in key)
    else:
        key = _fold(key)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def replicate_key(master_seed: int, *indices: int) -> tuple:
    """Seed key for one replicate of an experiment keyed by master_seed."""
    return (int(master_seed), *(int(i) for i in indices))
