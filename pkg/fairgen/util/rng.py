"""Hierarchical RNG streams.

Every random draw in the toolkit comes from a stream keyed by
``(seed, stage, index...)`` so results do not depend on worker count or on
the order stages run in.
"""

from __future__ import annotations

import zlib
from contextlib import contextmanager

import numpy as np
import torch


def _key(part: int | str) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    if part < 0:
        raise ValueError(f"stream keys must be non-negative, got {part}")
    return int(part)


def derive_rng(seed: int, *keys: int | str) -> np.random.Generator:
    """Return an independent generator for the stream ``(seed, *keys)``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_key(k) for k in keys))
    return np.random.default_rng(ss)


def derive_seed(seed: int, *keys: int | str) -> int:
    """Return a 63-bit integer seed for the stream ``(seed, *keys)`` (for torch)."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_key(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0]) >> 1


@contextmanager
def torch_seeded(seed: int):
    """Run a block under ``torch.manual_seed(seed)`` without disturbing the global stream."""
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        yield
