"""Bounded process-pool mapping with order-preserving, deterministic results.

Results are collected in submission order and all reductions downstream use
integer sums, so worker count never changes any output byte. workers <= 1
runs inline (no pool), which is also the path tests exercise by default.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def resolve_workers(requested: int) -> int:
    if requested and requested > 0:
        return requested
    return max(1, os.cpu_count() or 1)


def map_ordered(fn: Callable[[T], R], items: Sequence[T], workers: int = 0,
                chunksize: int = 1) -> list[R]:
    """map() preserving input order, optionally across processes."""
    n = resolve_workers(workers)
    if n <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))


def chunked(seq: Sequence[T], n_chunks: int) -> list[Sequence[T]]:
    """Split into at most n_chunks contiguous, deterministic chunks."""
    n_chunks = max(1, min(n_chunks, len(seq)))
    size = (len(seq) + n_chunks - 1) // n_chunks
    return [seq[i:i + size] for i in range(0, len(seq), size)]
