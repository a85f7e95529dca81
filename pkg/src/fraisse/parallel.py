"""Deterministic worker-pool map.

Results are always collected in input order, so callers that reduce them
deterministically get schedule-independent output regardless of thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor


def pmap(fn, items, threads=1):
    """Map fn over items, in order, optionally on a thread pool."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
