"""Worker-pool helpers shared by the solver, the engine and the experiments."""

from __future__ import annotations

import os
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

import numpy as np
from django.conf import settings

T = TypeVar("T")
R = TypeVar("R")


def worker_count(requested: int | None = None) -> int:
    """Number of threads to use; 0 or None means the ``TRIMBARY_THREADS`` setting.

    A setting of 0 (the default) lets the pool size follow the CPU count.
    """
    if requested is None or requested <= 0:
        requested = 0
        if settings.configured:
            requested = getattr(settings, "TRIMBARY_THREADS", 0)
    if requested is None or requested <= 0:
        return os.cpu_count() or 1
    return requested


def ordered_map(
    func: Callable[[T], R], items: Sequence[T], max_workers: int | None = None
) -> list[R]:
    """``[func(x) for x in items]`` spread over a thread pool, in input order."""
    workers = min(worker_count(max_workers), max(len(items), 1))
    if workers == 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))


def derived_rng(seed: int, *stream: int) -> np.random.Generator:
    """Generator for the given sub-stream of ``seed``, independent of scheduling."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=stream))
