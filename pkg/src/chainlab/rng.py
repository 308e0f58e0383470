"""Counter-based random streams.

Every source of randomness in the package is a Philox generator derived
from ``(master seed, key path)``.  Units of work (a trajectory chunk, a
replica block, an environment) each own a stream keyed by their index, so
results are identical whether the units run serially or on a thread pool,
and independent of scheduling order.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _key_word(part) -> int:
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError(f"stream key parts must be nonnegative, got {part}")
        return int(part)
    if isinstance(part, str):
        digest = hashlib.blake2s(part.encode("utf-8"), digest_size=4).digest()
        return int.from_bytes(digest, "little")
    raise TypeError(f"stream key parts must be int or str, got {type(part).__name__}")


def stream(seed: int, *key) -> np.random.Generator:
    """Return the generator for stream ``key`` under ``seed``.

    The same (seed, key) always yields the same generator state; distinct
    keys yield statistically independent streams.
    """
    seq = np.random.SeedSequence(int(seed), spawn_key=tuple(_key_word(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))
