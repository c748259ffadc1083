"""Replication plumbing: per-stream block draws and order-fixed parallel chunks."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

BLOCK = 256


class BlockFeeder:
    """Hands out log-LR increments in fixed-size blocks, one stream per path.

    Each stream is advanced by exactly ``BLOCK`` base variates per block it
    takes part in, so a path's increments do not depend on which other paths
    are simulated alongside it.
    """

    def __init__(self, pair, streams, regimes_at, block: int = BLOCK):
        self.pair = pair
        self.streams = streams
        self.regimes_at = regimes_at  # maps an array of 1-based times to regimes
        self.block = block

    def take(self, active: np.ndarray, t0: int) -> np.ndarray:
        base = np.empty((active.size, self.block))
        for row, i in enumerate(active):
            base[row] = self.pair.base_variates(self.streams[i], self.block)
        regimes = self.regimes_at(np.arange(t0, t0 + self.block))
        return self.pair.increments(base, regimes[None, :])


def constant_regime(regime):
    value = int(regime)
    return lambda ts: np.full(ts.shape, value, dtype=np.int8)


def changing_regime(n: int, before, after):
    b, a = int(before), int(after)
    return lambda ts: np.where(ts < n, b, a).astype(np.int8)


def chunked(fn, count: int, threads: int = 1):
    """Run ``fn(start, stop)`` over contiguous index chunks; results in index order."""
    threads = max(1, int(threads or 1))
    if count == 0:
        return []
    n_chunks = min(threads, count)
    edges = np.linspace(0, count, n_chunks + 1).astype(int)
    spans = list(zip(edges[:-1], edges[1:]))
    if n_chunks == 1:
        return [fn(*spans[0])]
    with ThreadPoolExecutor(max_workers=n_chunks) as pool:
        return list(pool.map(lambda s: fn(*s), spans))
