"""Counter-based random streams, splittable by (seed, trial) without shared state.

Every Monte Carlo trial draws from its own Philox stream keyed by the
experiment seed plus a derivation path (experiment tag, trial index, ...).
Estimates therefore do not depend on trial execution order or on how trials
are partitioned across workers, and reruns with the same seed are
bit-for-bit reproducible.
"""

from __future__ import annotations

import hashlib

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def _splitmix64(x: np.uint64) -> np.uint64:
    # Standard splitmix64 finalizer; used only to spread key material.
    with np.errstate(over="ignore"):
        x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return x ^ (x >> np.uint64(31))


def _to_word(part: int | str) -> np.uint64:
    if isinstance(part, str):
        # hash() is salted per process; use a stable digest instead
        digest = hashlib.blake2b(part.encode(), digest_size=8).digest()
        return np.uint64(int.from_bytes(digest, "little"))
    return np.uint64(part & 0xFFFFFFFFFFFFFFFF)


def derive_key(seed: int, *path: int | str) -> tuple[int, int]:
    """Mix ``seed`` and a derivation path into a 128-bit Philox key."""
    lo = _splitmix64(_to_word(seed))
    hi = _splitmix64(lo ^ _GOLDEN)
    with np.errstate(over="ignore"):
        for part in path:
            lo = _splitmix64(lo ^ _to_word(part))
            hi = _splitmix64(hi + (lo ^ _GOLDEN))
    return int(lo), int(hi)


def stream(seed: int, *path: int | str) -> np.random.Generator:
    """Independent generator for one trial; identical for identical arguments."""
    key = derive_key(seed, *path)
    return np.random.Generator(np.random.Philox(key=key))
