"""Average run lengths and threshold search.

``arl_markov`` discretises the chart on ``[0, k)`` into equal cells and solves
for the expected absorption time of the resulting finite Markov chain.
``arl_mc`` estimates the same quantity by simulation.  Both work on the
unbounded chart: for ``h >= k`` the bounded chart crosses ``k`` at exactly the
same time, so run lengths do not depend on ``h``.

The lower side uses increments ``log lr``; the upper side uses ``-log lr``,
i.e. the upper chart's distance below ``h``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .charts import hitting_times
from .distributions import Regime, make_streams
from .errors import CalibrationError, CensoringError, ConfigError

__all__ = [
    "ArlQuery",
    "ArlEstimate",
    "arl_markov",
    "arl_mc",
    "evaluate",
    "calibrate_threshold",
    "MAX_STATES",
]

MAX_STATES = 1000
MAX_THRESHOLD = 100.0


def _side(side: str) -> str:
    side = str(side).lower()
    if side not in ("lower", "upper"):
        raise ConfigError(f"side must be 'lower' or 'upper', got {side!r}")
    return side


@dataclass(frozen=True)
class ArlEstimate:
    mean: float
    std_error: float  # nan when reps == 1
    censored_count: int
    reps: int
    times: np.ndarray = None

    @property
    def std_error_defined(self) -> bool:
        return self.reps > 1


def transition_matrix(pair, side: str, regime, k: float, states: int) -> np.ndarray:
    """Transient part ``Q`` of the discretised chart on ``[0, k)``.

    Cell ``i`` covers ``[i w, (i+1) w)`` with representative midpoint; all
    mass that would fall below 0 is lumped into cell 0.
    """
    negate = _side(side) == "upper"
    regime = Regime.parse(regime)
    w = k / states
    upper_edges = w * np.arange(1, states + 1)
    mids = w * (np.arange(states) + 0.5)
    cdf = pair.increment_cdf(regime, upper_edges[None, :] - mids[:, None], negate=negate)
    return np.diff(cdf, axis=1, prepend=0.0)


def arl_markov(pair, side: str, regime, k: float, states: int = 100) -> float:
    """Markov-chain approximation of the run length from 0 to ``k``."""
    if not k > 0:
        raise ConfigError(f"threshold k must be positive, got {k}")
    if not 2 <= states <= MAX_STATES:
        raise ConfigError(f"states must be in [2, {MAX_STATES}], got {states}")
    Q = transition_matrix(pair, side, regime, float(k), int(states))
    try:
        arl = np.linalg.solve(np.eye(states) - Q, np.ones(states))
    except np.linalg.LinAlgError as exc:
        raise CalibrationError(f"singular run-length system at k={k}: {exc}") from None
    value = float(arl[0])
    if not math.isfinite(value) or value < 1.0 - 1e-9:
        raise CalibrationError(f"run-length system is numerically singular at k={k} (got {value})")
    return value


def arl_mc(
    pair,
    side: str,
    regime,
    k: float,
    reps: int = 10_000,
    t_max: int = 1_000_000,
    master_seed: int = 0,
    threads: int = 1,
    max_censored_fraction: float = 0.0,
) -> ArlEstimate:
    """Monte Carlo run length with one independent stream per replication.

    Censored paths count as ``t_max``.  More than ``max_censored_fraction``
    of them raises :class:`CensoringError`.
    """
    if reps < 1:
        raise ConfigError("reps must be at least 1")
    kind = "classicU" if _side(side) == "upper" else "classicL"
    times, censored = hitting_times(kind, pair, regime, k, None, make_streams(master_seed, reps), t_max, threads)
    n_cens = int(censored.sum())
    if n_cens > max_censored_fraction * reps:
        raise CensoringError(
            f"{n_cens} of {reps} paths did not cross k={k} within t_max={t_max}", n_cens, reps
        )
    mean = float(times.mean())
    se = float(times.std(ddof=1) / math.sqrt(reps)) if reps > 1 else float("nan")
    return ArlEstimate(mean, se, n_cens, reps, times)


@dataclass(frozen=True)
class ArlQuery:
    pair: object
    side: str
    regime: Regime
    k: float
    method: str = "markov"
    states: int = 100
    reps: int = 10_000
    t_max: int = 1_000_000
    master_seed: int = 0

    def __post_init__(self):
        _side(self.side)
        object.__setattr__(self, "regime", Regime.parse(self.regime))
        if self.method not in ("markov", "monte-carlo"):
            raise ConfigError(f"method must be 'markov' or 'monte-carlo', got {self.method!r}")


def evaluate(query: ArlQuery, threads: int = 1):
    if query.method == "markov":
        return arl_markov(query.pair, query.side, query.regime, query.k, query.states)
    return arl_mc(query.pair, query.side, query.regime, query.k, query.reps, query.t_max, query.master_seed, threads)


def calibrate_threshold(
    pair,
    side: str,
    regime,
    target_arl: float,
    method: str = "markov",
    states: int = 100,
    reps: int = 10_000,
    t_max: int = 1_000_000,
    master_seed: int = 0,
    threads: int = 1,
    rel_tol: float = 0.01,
    k_tol: float = 1e-3,
) -> float:
    """Smallest bracketed threshold whose run length reaches ``target_arl``.

    Stops once ``target <= ARL(k) <= (1 + rel_tol) * target`` or the bracket is
    narrower than ``k_tol``.  The Monte Carlo variant reuses the same streams for
    every ``k``, which keeps the estimated ARL monotone in ``k``.
    """
    if not target_arl > 1:
        raise ConfigError(f"target ARL must exceed 1 (every chart needs at least one step), got {target_arl}")
    if method == "markov":
        def arl(k):
            return arl_markov(pair, side, regime, k, states)
    elif method == "monte-carlo":
        def arl(k):
            return arl_mc(pair, side, regime, k, reps, t_max, master_seed, threads).mean
    else:
        raise ConfigError(f"method must be 'markov' or 'monte-carlo', got {method!r}")

    lo, hi = 0.0, 1.0
    value = arl(hi)
    while value < target_arl:
        if hi >= MAX_THRESHOLD:
            raise CalibrationError(f"target ARL {target_arl} not reached for k <= {MAX_THRESHOLD:g}")
        lo, hi = hi, min(2.0 * hi, MAX_THRESHOLD)
        value = arl(hi)
    while value > (1.0 + rel_tol) * target_arl and hi - lo > k_tol:
        mid = 0.5 * (lo + hi)
        v = arl(mid)
        if v >= target_arl:
            hi, value = mid, v
        else:
            lo = mid
    if lo == 0.0 and value > (1.0 + rel_tol) * target_arl:
        # ARL(k) stays above 1 / P(log lr > 0) as k -> 0
        raise CalibrationError(
            f"target ARL {target_arl} is below the smallest attainable value (ARL({hi:g}) = {value:.4g})"
        )
    return hi
