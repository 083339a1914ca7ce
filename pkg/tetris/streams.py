# ============================================================================
# tetris/streams.py - Per-Sample Random Streams and Parallel Sampling
# ============================================================================
"""
Sample i of a run draws all of its randomness from its own generator,
seeded by ``(master_seed, stream, i)``. Results therefore depend only on the
master seed and the sample index, never on how samples were scheduled.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, TypeVar

import numpy as np

from config import Config

logger = logging.getLogger(__name__)

T = TypeVar("T")

# stream ids keep different estimators from sharing generators under one seed
STREAM_EXPECTATION = 0
STREAM_LOSCHMIDT = 1
STREAM_T_GADGET = 2
STREAM_DUMP = 3


def sample_rng(master_seed: int, stream: int, index: int) -> np.random.Generator:
    if master_seed < 0:
        raise ValueError(f"master seed must be non-negative, got {master_seed}")
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(stream, index)))


def grid_seed(master_seed: int, point: int) -> int:
    """Master seed for grid point ``point``, so grid points are independent runs."""
    state = np.random.SeedSequence(master_seed, spawn_key=(point,)).generate_state(1, np.uint64)
    return int(state[0])


def map_samples(fn: Callable[[int], T], n_samples: int, threads: int = None) -> List[T]:
    """
    Evaluate ``fn(i)`` for i in range(n_samples) and return the results in
    index order. Work is split into contiguous chunks across ``threads``
    workers.
    """
    threads = Config.THREADS if threads is None else threads
    if threads < 1:
        raise ValueError(f"threads must be positive, got {threads}")
    if threads == 1 or n_samples < 2:
        return [fn(i) for i in range(n_samples)]

    chunks = [c for c in np.array_split(np.arange(n_samples), min(n_samples, 4 * threads)) if len(c)]
    logger.debug(f"Sampling {n_samples} items in {len(chunks)} chunks on {threads} threads")

    def run_chunk(chunk: np.ndarray) -> List[T]:
        return [fn(int(i)) for i in chunk]

    results: List[T] = []
    with ThreadPoolExecutor(max_workers=threads) as pool:
        # pool.map yields in submission order
        for values in pool.map(run_chunk, chunks):
            results.extend(values)
    return results
