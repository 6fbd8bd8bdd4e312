from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable


def default_workers() -> int:
    return os.cpu_count() or 1


def ordered_map(func: Callable, jobs: Iterable, workers: int = 1) -> list:
    """``[func(j) for j in jobs]``, optionally on a process pool.

    Results keep job order, so reductions over them do not depend on
    ``workers``.
    """
    jobs = list(jobs)
    if workers <= 1 or len(jobs) < 2:
        return [func(j) for j in jobs]
    chunk = max(1, len(jobs) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, jobs, chunksize=chunk))
