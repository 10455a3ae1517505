"""Shared plumbing: the optional THREADS limit and order-preserving maps."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count() -> int:
    """THREADS env var when set, else available parallelism."""
    raw = os.environ.get("THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def ordered_map(fn, items):
    """Map preserving input order; work items must share no mutable state."""
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
