"""Order-preserving sharded map used by the enumeration kernels."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor


def chunk_ranges(total: int, chunk: int) -> list[range]:
    chunk = max(1, int(chunk))
    return [range(lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]


def shard_map(fn, items, workers: int = 1) -> list:
    """``[fn(item) for item in items]``, optionally on a thread pool.

    Results come back in input order, so merging them is independent of the
    worker count.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))
