"""Keyed random streams.

Every random decision in the simulator draws from a generator derived from
an explicit integer key (seed plus context ids), never from shared stateful
streams. This makes results independent of execution order, so per-client
and per-cluster work can run in any schedule (or in parallel) without
changing outputs.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF


def derive_rng(*key: int) -> np.random.Generator:
    """Return a fresh generator seeded by the given integer key tuple."""
    if not key:
        raise ValueError("derive_rng requires at least one key component")
    return np.random.default_rng([int(k) & _MASK64 for k in key])


def thread_cap() -> int:
    """Parallelism limit from FEDSIM_THREADS (default 1 = serial)."""
    raw = os.environ.get("FEDSIM_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def map_ordered(fn, items):
    """Map fn over items, preserving order; threaded when FEDSIM_THREADS > 1.

    Safe for pure functions only. Results are assembled in input order, so
    the outcome never depends on thread scheduling.
    """
    items = list(items)
    cap = thread_cap()
    if cap <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(cap, len(items))) as pool:
        return list(pool.map(fn, items))
