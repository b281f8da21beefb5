"""Order-preserving parallel map, capped by HYPERCRIT_THREADS."""

from __future__ import annotations

import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence, TypeVar

from hypercrit.errors import InvalidInputError

T = TypeVar("T")
U = TypeVar("U")


def worker_count() -> int:
    raw = os.environ.get("HYPERCRIT_THREADS")
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise InvalidInputError(f"HYPERCRIT_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise InvalidInputError("HYPERCRIT_THREADS must be at least 1")
    return n


def ordered_map(fn: Callable[[T], U], items: Sequence[T]) -> list[U]:
    """map(fn, items) in input order; uses worker processes when allowed and useful."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    ctx = multiprocessing.get_context("fork") if hasattr(os, "fork") else None
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
        return list(pool.map(fn, items))
