"""Counter-based random streams keyed by (seed, stream, block).

Paths are grouped in fixed-width blocks of ``BLOCK_SIZE``. Each block owns a
Philox generator derived from ``SeedSequence(seed, spawn_key=(stream, block))``
and always draws a full-width ``(BLOCK_SIZE, n)`` normal array per step, so
the noise of path ``k`` depends only on ``(seed, stream, k, step)``. It does
not depend on the ensemble size, the worker count or the scheduling order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from enum import IntEnum
from typing import Callable, Sequence, TypeVar

import numpy as np

BLOCK_SIZE = 1024
MAX_SEED = 2**64 - 1

T = TypeVar("T")


class Stream(IntEnum):
    SPHERE = 1
    OU = 2
    MARTINGALE = 3
    PLATEAU = 4
    GAUSSIAN = 5
    CALIBRATION = 6


def check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def block_generator(seed: int, stream: int, block: int, *extra: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=check_seed(seed), spawn_key=(int(stream), int(block), *map(int, extra)))
    return np.random.Generator(np.random.Philox(ss))


def path_generator(seed: int, index: int = 0) -> np.random.Generator:
    """Generator for a stand-alone single path (not tied to ensemble blocks)."""
    return block_generator(seed, 0, index)


def block_slices(count: int, width: int = BLOCK_SIZE) -> list[tuple[int, int, int]]:
    """(block index, start, stop) triples covering ``range(count)``."""
    return [(b, lo, min(lo + width, count)) for b, lo in enumerate(range(0, count, width))]


def resolve_threads(threads) -> int:
    if threads in (None, "auto"):
        return max(1, os.cpu_count() or 1)
    threads = int(threads)
    if threads < 1:
        raise ValueError("threads must be >= 1")
    return threads


def ordered_map(fn: Callable[..., T], items: Sequence, threads=1) -> list[T]:
    """``[fn(x) for x in items]``, possibly concurrent, always in input order."""
    workers = min(resolve_threads(threads), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
