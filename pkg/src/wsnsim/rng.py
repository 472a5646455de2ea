"""Seeded random streams.

Every simulation is driven by one 64-bit seed. Independent generators are
derived per purpose with ``numpy.random.SeedSequence(seed, spawn_key=(i,))``
feeding a PCG64 bit generator. PCG64 output and SeedSequence hashing are
fixed by numpy's stream-compatibility policy, so a seed reproduces the same
draws on every platform. Protocols compared on one topology therefore see
the same placement while drawing their own decisions from separate streams.
"""
from __future__ import annotations

import numpy as np

PURPOSES = ("placement", "leach", "leach_c", "kmeans", "aro")


def stream(seed: int, purpose: str) -> np.random.Generator:
    try:
        key = PURPOSES.index(purpose)
    except ValueError:
        raise ValueError(f"unknown random stream {purpose!r}; expected one of {PURPOSES}") from None
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(key,))
    return np.random.Generator(np.random.PCG64(ss))
