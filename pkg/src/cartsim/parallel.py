"""Deterministic work scheduling for independent cell evaluations.

Results are assembled by item index, never by completion order, so a
parallel run is bitwise-identical to a serial one.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor


def run_indexed(fn, items, workers: int = 1) -> list:
    """Apply ``fn`` to each item, preserving input order in the result.

    ``workers`` <= 1 runs serially in-process; otherwise a process pool
    maps the items (``fn`` and items must be picklable).
    """
    items = list(items)
    if workers is None or workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))
