"""Order-preserving map over a process pool."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor


def parallel_map(fn, items, jobs: int = 1) -> list:
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map() yields in submission order, so merges stay deterministic
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))
