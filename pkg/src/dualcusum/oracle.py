"""Exact answers for tiny discrete models by enumerating every sample path.

Nothing here goes through the chart or simulation modules: paths, chart values
and signals are recomputed directly so the results can serve as an independent
reference for the Monte Carlo code.  The only shared convention is the
increment grid (``quantize_increment`` / ``grid_floor``).

Discrete models have atoms, so a chart can sit exactly on a threshold with
positive probability; ties are resolved by the weak inequalities (``>=`` for
the out-of-control signal, ``<=`` for the in-control signal).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import grid_floor, quantize_increment
from .errors import ConfigError
from .schedule import RegimeSchedule
from .signals import SignalPolicy

__all__ = [
    "EnumerationTask",
    "ExactResult",
    "InclusionReport",
    "enumerate_paths",
    "enumerate_exact",
    "verify_event_inclusion",
    "MAX_PATHS",
]

MAX_PATHS = 5_000_000
MAX_SUPPORT = 3
MAX_HORIZON = 14

# signal codes, matching signals.Signal
_NONE, _ZERO, _ONE = -1, 0, 1


@dataclass(frozen=True)
class EnumerationTask:
    pair: object
    policy: SignalPolicy
    schedule: RegimeSchedule

    def __post_init__(self):
        if self.pair.kind != "discrete":
            raise ConfigError("enumeration needs a discrete model")
        if len(self.pair.support) > MAX_SUPPORT:
            raise ConfigError(f"enumeration supports at most {MAX_SUPPORT} support points")
        if self.schedule.horizon > MAX_HORIZON:
            raise ConfigError(f"enumeration horizon is capped at {MAX_HORIZON}")
        if self.path_count > MAX_PATHS:
            raise ConfigError(f"{self.path_count} paths exceed the enumeration budget of {MAX_PATHS}")

    @property
    def horizon(self) -> int:
        return self.schedule.horizon

    @property
    def path_count(self) -> int:
        return len(self.pair.support) ** self.schedule.horizon


@dataclass
class Paths:
    """All paths of a task: support indices, probabilities, charts and signals."""

    digits: np.ndarray  # (N, H) int8
    prob: np.ndarray  # (N,)
    rL: np.ndarray  # (N, H)
    rU: np.ndarray
    signal: np.ndarray  # (N, H) int8


def enumerate_paths(task: EnumerationTask) -> Paths:
    pair, pol, H = task.pair, task.policy, task.horizon
    s = len(pair.support)
    p = [np.asarray(pair.p0, dtype=float), np.asarray(pair.p1, dtype=float)]
    llr = np.array([math.log(b / a) if a > 0 else 0.0 for a, b in zip(pair.p0, pair.p1)])
    llr = quantize_increment(llr)
    n = s ** H
    idx = np.arange(n, dtype=np.int64)
    digits = np.empty((n, H), dtype=np.int8)
    prob = np.ones(n)
    rL = np.empty((n, H))
    rU = np.empty((n, H))
    lo, up = np.zeros(n), np.full(n, pol.h)
    one_level = grid_floor(pol.kL)
    zero_level = pol.h - grid_floor(pol.kU)
    states = task.schedule.states()
    for t in range(H):
        d = (idx // s ** (H - 1 - t)) % s
        digits[:, t] = d
        prob *= p[int(states[t])][d]
        x = llr[d]
        lo = np.clip(lo + x, 0.0, pol.h)
        up = np.clip(up + x, 0.0, pol.h)
        rL[:, t], rU[:, t] = lo, up
    one = rL >= one_level
    zero = rU <= zero_level
    signal = np.where(one & ~zero, _ONE, np.where(zero & ~one, _ZERO, _NONE)).astype(np.int8)
    return Paths(digits, prob, rL, rU, signal)


def _first_at_or_after(signal: np.ndarray, start: int, value: int) -> np.ndarray:
    """First 1-based t >= start with signal == value; H + 1 if none."""
    H = signal.shape[1]
    if start > H:
        return np.full(signal.shape[0], H + 1)
    hit = signal[:, start - 1:] == value
    found = hit.any(axis=1)
    return np.where(found, start + hit.argmax(axis=1), H + 1)


@dataclass
class ExactResult:
    """Exact quantities for one task.

    ``signal_dist[t-1]`` holds P(Z_t = 0), P(Z_t = 1), P(no signal).
    ``stopped[(n, j)]`` is E[min(tau_n^j, H)] with tau = inf if no signal by H.
    ``coupled_by[t-1]`` is P(T <= t).
    """

    horizon: int
    signal_dist: np.ndarray
    false_rate: np.ndarray
    correct_rate: np.ndarray
    none_rate: np.ndarray
    coupled_by: np.ndarray
    stopped: dict = field(default_factory=dict)
    total_prob: float = 1.0


def enumerate_exact(task: EnumerationTask, stopping=None) -> ExactResult:
    """Probability-weighted sums over every path of ``task``.

    ``stopping`` lists ``(n, j)`` pairs; by default every ``n`` in 1..H and
    both signal values.
    """
    H = task.horizon
    paths = enumerate_paths(task)
    w = paths.prob
    sig = paths.signal
    dist = np.empty((H, 3))
    for col, code in enumerate((_ZERO, _ONE, _NONE)):
        dist[:, col] = w @ (sig == code)
    truth = task.schedule.states()
    emitted = sig != _NONE
    correct = emitted & (sig == truth[None, :])
    false = emitted & (sig != truth[None, :])
    coupled = np.logical_or.accumulate(paths.rL == paths.rU, axis=1)
    if stopping is None:
        stopping = [(n, j) for n in range(1, H + 1) for j in (0, 1)]
    stopped = {}
    for n, j in stopping:
        tau = _first_at_or_after(sig, n, j)
        stopped[(n, j)] = float(w @ np.minimum(tau, H))
    return ExactResult(
        horizon=H,
        signal_dist=dist,
        false_rate=w @ false,
        correct_rate=w @ correct,
        none_rate=w @ ~emitted,
        coupled_by=w @ coupled,
        stopped=stopped,
        total_prob=float(math.fsum(w)),
    )


@dataclass
class InclusionReport:
    n: int
    paths: int
    checked: dict  # j -> number of (path, m) events with [tau_1 - n + 1]^+ = m >= 1
    counterexamples: dict  # j -> list of support-value tuples

    @property
    def holds(self) -> bool:
        return not any(self.counterexamples.values())


def verify_event_inclusion(task: EnumerationTask, n: int, max_examples: int = 5) -> InclusionReport:
    """Check that a first signal at ``m + n - 1 >= n`` is also the first signal from ``n`` on.

    Checked for both signal values on every enumerated path, for every ``m``
    realised within the horizon.
    """
    H = task.horizon
    if not 1 <= n <= H:
        raise ConfigError(f"n must be in 1..{H}")
    paths = enumerate_paths(task)
    support = np.asarray(task.pair.support)
    checked, bad = {}, {}
    for j in (0, 1):
        tau1 = _first_at_or_after(paths.signal, 1, j)
        taun = _first_at_or_after(paths.signal, n, j)
        lhs = np.maximum(tau1 - n + 1, 0)
        event = (lhs >= 1) & (tau1 <= H)
        violation = event & (taun - n + 1 != lhs)
        checked[j] = int(event.sum())
        rows = np.flatnonzero(violation)[:max_examples]
        bad[j] = [tuple(support[paths.digits[r]]) for r in rows]
    return InclusionReport(n, paths.signal.shape[0], checked, bad)
