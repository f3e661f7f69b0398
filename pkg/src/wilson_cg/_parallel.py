import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

ENV_THREADS = "WILSON_CG_THREADS"


def resolve_threads(threads=None):
    """Explicit value, else $WILSON_CG_THREADS, else the CPU count."""
    if threads is None:
        env = os.environ.get(ENV_THREADS)
        threads = int(env) if env else (os.cpu_count() or 1)
    threads = int(threads)
    if threads < 1:
        raise ValueError(f"thread count must be >= 1, got {threads}")
    return threads


def chunks(n, parts):
    """Split range(n) into at most ``parts`` contiguous index arrays."""
    parts = max(1, min(parts, n))
    return np.array_split(np.arange(n), parts)


def map_chunks(fn, pieces, threads):
    if threads == 1 or len(pieces) == 1:
        return [fn(p) for p in pieces]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, pieces))
