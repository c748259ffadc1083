"""Bounded non-restarting CUSUM charts and the classic reflected charts.

The bounded recursion is ``r -> min(max(r + llr, 0), h)``.  The lower chart
starts at 0 and the upper chart at ``h``; every chart started in ``[0, h]`` and
fed the same increments stays between them.  Clamps assign the boundary
constants exactly, so coupling (``rL == rU``) is detected by plain equality.

The classic charts have no upper boundary.  ``sU`` is stored as a non-negative
magnitude, i.e. it is the reflected sum of ``-llr``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._engine import BlockFeeder, chunked, constant_regime
from .distributions import MAX_BOUNDARY, Regime, grid_floor, make_stream
from .errors import ConfigError, ContractError
from .signals import Signal, SignalPolicy, signal_array

__all__ = [
    "DualChartState",
    "ClassicChartState",
    "ChartKind",
    "Censored",
    "Trace",
    "bounded_step",
    "dual_step",
    "classic_step",
    "bounded_path",
    "dual_paths",
    "run_dual",
    "first_hitting",
    "hitting_times",
]


@dataclass(frozen=True)
class DualChartState:
    rL: float
    rU: float
    h: float
    t: int = 0

    def __post_init__(self):
        if not self.h > 0:
            raise ContractError(f"h must be positive, got {self.h}")
        if not 0.0 <= self.rL <= self.rU <= self.h:
            raise ContractError(f"need 0 <= rL <= rU <= h, got rL={self.rL}, rU={self.rU}, h={self.h}")

    @classmethod
    def initial(cls, h: float) -> "DualChartState":
        return cls(0.0, float(h), float(h), 0)

    @property
    def coupled(self) -> bool:
        return self.rL == self.rU


@dataclass(frozen=True)
class ClassicChartState:
    sL: float = 0.0
    sU: float = 0.0
    t: int = 0

    def __post_init__(self):
        if self.sL < 0 or self.sU < 0:
            raise ContractError("classic chart values must be non-negative")


class ChartKind(Enum):
    BOUNDED_L = "boundedL"
    BOUNDED_U = "boundedU"
    CLASSIC_L = "classicL"
    CLASSIC_U = "classicU"

    @property
    def bounded(self) -> bool:
        return self in (ChartKind.BOUNDED_L, ChartKind.BOUNDED_U)


@dataclass(frozen=True)
class Censored:
    """Stopping time not reached by ``t_max``."""

    t_max: int


def bounded_step(x_state: float, log_lr_value: float, h: float) -> float:
    if not 0.0 <= x_state <= h:
        raise ContractError(f"chart value {x_state} outside [0, {h}]")
    return min(max(x_state + log_lr_value, 0.0), h)


def dual_step(state: DualChartState, log_lr_value: float) -> DualChartState:
    h = state.h
    return DualChartState(
        bounded_step(state.rL, log_lr_value, h),
        bounded_step(state.rU, log_lr_value, h),
        h,
        state.t + 1,
    )


def classic_step(state: ClassicChartState, log_lr_value: float) -> ClassicChartState:
    return ClassicChartState(
        max(state.sL + log_lr_value, 0.0),
        max(state.sU - log_lr_value, 0.0),
        state.t + 1,
    )


def bounded_path(llr, h: float, r0=0.0) -> np.ndarray:
    """Chart values at t = 1..T for increments along the last axis of ``llr``."""
    llr = np.asarray(llr, dtype=float)
    out = np.empty_like(llr)
    r = np.broadcast_to(np.asarray(r0, dtype=float), llr.shape[:-1]).copy()
    for j in range(llr.shape[-1]):
        r = np.minimum(np.maximum(r + llr[..., j], 0.0), h)
        out[..., j] = r
    return out


def dual_paths(llr, h: float):
    """Lower and upper bounded charts (started at 0 and h) for the same increments."""
    return bounded_path(llr, h, 0.0), bounded_path(llr, h, h)


@dataclass
class Trace:
    """Per-step record of one dual-chart run."""

    t: np.ndarray
    x: np.ndarray
    llr: np.ndarray
    rL: np.ndarray
    rU: np.ndarray
    signal: np.ndarray
    coupled: np.ndarray
    policy: SignalPolicy

    def __len__(self):
        return len(self.t)

    @property
    def coupling_time(self):
        hits = np.flatnonzero(self.coupled)
        return int(self.t[hits[0]]) if hits.size else None

    def to_csv(self, fh=None) -> str:
        """Write ``t,x,rL,rU,signal,coupled``; returns the text if ``fh`` is None."""
        buf = io.StringIO() if fh is None else fh
        buf.write("t,x,rL,rU,signal,coupled\n")
        for t, x, lo, up, s, c in zip(self.t, self.x, self.rL, self.rU, self.signal, self.coupled):
            buf.write(f"{int(t)},{float(x)!r},{float(lo)!r},{float(up)!r},{Signal(int(s)).label},{int(c)}\n")
        return buf.getvalue() if fh is None else ""


def run_dual(pair, schedule, policy: SignalPolicy, rng: np.random.Generator) -> Trace:
    """Simulate both bounded charts and the signal process over ``schedule``."""
    if not isinstance(policy, SignalPolicy):
        raise ConfigError("run_dual needs a validated SignalPolicy")
    states = schedule.states()
    base = pair.base_variates(rng, schedule.horizon)
    x = pair.observations(base, states)
    llr = pair.increments(base, states)
    rL, rU = dual_paths(llr, policy.h)
    coupled = np.logical_or.accumulate(rL == rU) if len(rL) else np.zeros(0, dtype=bool)
    return Trace(
        t=np.arange(1, schedule.horizon + 1),
        x=x,
        llr=llr,
        rL=rL,
        rU=rU,
        signal=signal_array(rL, rU, policy),
        coupled=coupled,
        policy=policy,
    )


def _check_hitting_args(kind: ChartKind, k: float, h, t_max: int):
    if not k > 0:
        raise ConfigError(f"threshold k must be positive, got {k}")
    if t_max < 1:
        raise ConfigError("t_max must be at least 1")
    if kind.bounded:
        if h is None or not h >= k:
            raise ConfigError(f"bounded chart needs h >= k (h={h}, k={k})")
        if h >= MAX_BOUNDARY:
            raise ConfigError(f"upper boundary h must be below {MAX_BOUNDARY:g}")


def _hitting_chunk(kind, pair, feeder, k, h, t_max, n):
    times = np.full(n, t_max, dtype=np.int64)
    censored = np.ones(n, dtype=bool)
    active = np.arange(n)
    start = h if kind is ChartKind.BOUNDED_U else 0.0
    r = np.full(n, start, dtype=float)
    level = h - grid_floor(k) if kind is ChartKind.BOUNDED_U else grid_floor(k)
    t0 = 1
    while active.size and t0 <= t_max:
        inc = feeder.take(active, t0)
        done = np.zeros(active.size, dtype=bool)
        for j in range(min(feeder.block, t_max - t0 + 1)):
            step = inc[:, j]
            if kind is ChartKind.BOUNDED_L or kind is ChartKind.BOUNDED_U:
                r = np.minimum(np.maximum(r + step, 0.0), h)
            elif kind is ChartKind.CLASSIC_L:
                r = np.maximum(r + step, 0.0)
            else:
                r = np.maximum(r - step, 0.0)
            hit = (r <= level) if kind is ChartKind.BOUNDED_U else (r >= level)
            new = hit & ~done
            if new.any():
                times[active[new]] = t0 + j
                censored[active[new]] = False
                done |= new
        active, r = active[~done], r[~done]
        t0 += feeder.block
    return times, censored


def hitting_times(kind, pair, regime, k: float, h, streams, t_max: int, threads: int = 1):
    """First crossing times for many streams.

    Returns ``(times, censored)``; censored entries hold ``t_max``.
    """
    kind = ChartKind(kind)
    _check_hitting_args(kind, k, h, t_max)
    regimes_at = constant_regime(Regime.parse(regime))

    def work(a, b):
        feeder = BlockFeeder(pair, streams[a:b], regimes_at)
        return _hitting_chunk(kind, pair, feeder, float(k), None if h is None else float(h), t_max, b - a)

    parts = chunked(work, len(streams), threads)
    if not parts:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=bool)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def first_hitting(kind, pair, regime, k: float, h, rng, t_max: int):
    """First ``t >= 1`` at which the chart crosses its threshold, or :class:`Censored`.

    ``boundedL``: rL >= k from 0.  ``boundedU``: rU <= h - k from h.
    ``classicL``: sL >= k.  ``classicU``: sU >= k.  ``rng`` may be a
    generator or an integer seed (stream 0 of that seed).
    """
    if not isinstance(rng, np.random.Generator):
        rng = make_stream(int(rng), 0)
    times, censored = hitting_times(kind, pair, regime, k, h, [rng], t_max)
    return Censored(t_max) if censored[0] else int(times[0])
