"""Counter-based random streams.

All randomness in the package flows through Philox generators keyed by
``(seed, stream_id)``.  Philox is counter-based, so two streams with
different keys are statistically independent and a run is a deterministic
function of the seed and the stream layout, regardless of how work is
sharded.
"""

from __future__ import annotations

import os

import numpy as np

#: Environment variable overriding the Monte Carlo shard count.
THREADS_ENV = "STARSHAPE_THREADS"


def stream(seed: int, stream_id: int = 0) -> np.random.Generator:
    """Return the generator for stream ``stream_id`` of the given seed."""
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    key = np.array([seed, stream_id], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def shard_count(default: int = 1) -> int:
    """Shard count for Monte Carlo work, honoring STARSHAPE_THREADS."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return default
    n = int(raw)
    if n < 1:
        raise ValueError(f"{THREADS_ENV} must be >= 1, got {n}")
    return n
