"""Chunked, order-preserving ensemble execution.

Samples are drawn up front from a single seeded generator and split
into fixed-size chunks; partial results are merged in chunk order, so
outputs are bit-identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

CHUNK_SIZE = 1024


def chunk_ranges(n: int, size: int = CHUNK_SIZE):
    return [(lo, min(lo + size, n)) for lo in range(0, n, size)]


def map_ordered(fn, tasks, workers: int = 1):
    """Apply fn to tasks, returning results in task order."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))
