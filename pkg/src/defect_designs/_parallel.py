"""Optional process-based parallelism for independent numeric sweeps.

Every parallelized loop in this package is a pure map followed by an
order-independent reduction, so results are identical for any worker
count; ``parallel_map`` preserves input order.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_THREADS = "DEFECT_DESIGNS_THREADS"


def resolve_workers(requested: int | None = None) -> int:
    """Worker count: explicit argument, else the env override, else all cores."""
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get(ENV_THREADS)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def parallel_map(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> list[R]:
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))
