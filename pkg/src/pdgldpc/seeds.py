"""Named, reproducible random sub-streams derived from one master seed."""

from __future__ import annotations

import zlib

import numpy as np


def _key(k) -> int:
    if isinstance(k, str):
        return zlib.crc32(k.encode())
    return int(k)


def substream(seed: int, *keys) -> np.random.SeedSequence:
    """Seed sequence for the stream named by ``keys`` (ints or strings)."""
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_key(k) for k in keys))


def derive_seed(seed: int, *keys) -> int:
    return int(substream(seed, *keys).generate_state(1, dtype=np.uint64)[0])


def generator(seed: int, *keys) -> np.random.Generator:
    return np.random.default_rng(substream(seed, *keys))
