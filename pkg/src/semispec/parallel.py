"""Thread-pool mapping capped by the ``SEMISPEC_THREADS`` environment variable."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

__all__ = ["max_workers", "thread_map"]

T = TypeVar("T")
R = TypeVar("R")


def max_workers() -> int:
    """Worker count: ``SEMISPEC_THREADS`` if set to a positive integer, else the CPU count."""
    raw = os.environ.get("SEMISPEC_THREADS", "").strip()
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ValueError(f"SEMISPEC_THREADS must be a positive integer, got {raw!r}") from None
        if value < 1:
            raise ValueError(f"SEMISPEC_THREADS must be a positive integer, got {raw!r}")
        return value
    return os.cpu_count() or 1


def thread_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """``[fn(x) for x in items]``, evaluated on a thread pool when more than one worker is allowed."""
    items = list(items)
    workers = min(max_workers(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
