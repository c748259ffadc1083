"""Replicated experiments with the dual charts.

Every replication ``i`` draws its observations from ``make_stream(seed, i)``.
Per-time counts are integers summed over replications, so the reported rates do
not depend on how replications are split across threads.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from ._engine import BlockFeeder, changing_regime, chunked, constant_regime
from .charts import dual_paths
from .distributions import MAX_BOUNDARY, Regime, make_streams
from .errors import CensoringError, ConfigError, ContractError
from .schedule import RegimeSchedule
from .signals import Outcome, SignalPolicy, score_signals, signal_array

__all__ = [
    "SimulationSummary",
    "RunLengthEstimate",
    "CouplingStats",
    "simulate_experiment",
    "simulate_signals",
    "empirical_run_length_criteria",
    "coupling_stats",
]


def _policies(policy) -> list:
    items = list(policy) if isinstance(policy, (list, tuple)) else [policy]
    if not items:
        raise ConfigError("at least one policy is required")
    for p in items:
        if not isinstance(p, SignalPolicy):
            raise ConfigError(f"expected SignalPolicy, got {type(p).__name__}")
    return items


@dataclass(frozen=True)
class SimulationSummary:
    """Pointwise-in-time signal rates, one row per policy (usually per ``h``)."""

    policies: tuple
    horizon: int
    reps: int
    master_seed: int
    false_count: np.ndarray
    correct_count: np.ndarray
    none_count: np.ndarray
    coupled_count: np.ndarray = field(default=None)

    @property
    def hs(self) -> list:
        return [p.h for p in self.policies]

    @property
    def false_rate(self) -> np.ndarray:
        return self.false_count / self.reps

    @property
    def correct_rate(self) -> np.ndarray:
        return self.correct_count / self.reps

    @property
    def none_rate(self) -> np.ndarray:
        return self.none_count / self.reps

    def totals(self) -> dict:
        """``{h: (false mass, correct mass)}`` summed over time."""
        return {
            p.h: (float(self.false_rate[i].sum()), float(self.correct_rate[i].sum()))
            for i, p in enumerate(self.policies)
        }

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO() if fh is None else fh
        buf.write("t,h,false_rate,correct_rate,none_rate\n")
        fr, cr, nr = self.false_rate, self.correct_rate, self.none_rate
        for i, p in enumerate(self.policies):
            for j in range(self.horizon):
                buf.write(f"{j + 1},{float(p.h)!r},{float(fr[i, j])!r},{float(cr[i, j])!r},{float(nr[i, j])!r}\n")
        return buf.getvalue() if fh is None else ""


def _chunk_increments(pair, states, streams, a, b):
    base = np.empty((b - a, states.size))
    for row, i in enumerate(range(a, b)):
        base[row] = pair.base_variates(streams[i], states.size)
    return pair.increments(base, states[None, :])


def simulate_signals(pair, policy: SignalPolicy, schedule: RegimeSchedule, reps: int, master_seed: int):
    """Per-replication signal matrix (reps x horizon); replication i matches ``run_dual`` on stream i."""
    states = schedule.states()
    llr = _chunk_increments(pair, states, make_streams(master_seed, reps), 0, reps)
    rL, rU = dual_paths(llr, policy.h)
    return signal_array(rL, rU, policy)


def simulate_experiment(pair, policy, schedule: RegimeSchedule, reps: int, master_seed: int = 0, threads: int = 1):
    """Average false / correct / no-signal indicators at each t over ``reps`` paths.

    ``policy`` may be a list (an ``h`` sweep); all of its entries see the same
    observations on every replication.
    """
    policies = _policies(policy)
    if reps < 1:
        raise ConfigError("reps must be at least 1")
    states = schedule.states()
    n_h, horizon = len(policies), schedule.horizon
    streams = make_streams(master_seed, reps)

    def work(a, b):
        counts = np.zeros((4, n_h, horizon), dtype=np.int64)
        if horizon == 0:
            return counts
        llr = _chunk_increments(pair, states, streams, a, b)
        for i, pol in enumerate(policies):
            rL, rU = dual_paths(llr, pol.h)
            outcome = score_signals(signal_array(rL, rU, pol), states)
            counts[0, i] = (outcome == Outcome.FALSE).sum(axis=0)
            counts[1, i] = (outcome == Outcome.CORRECT).sum(axis=0)
            counts[2, i] = (outcome == Outcome.NONE).sum(axis=0)
            counts[3, i] = (rL == rU).sum(axis=0)
        return counts

    total = sum(chunked(work, reps, threads))
    return SimulationSummary(tuple(policies), horizon, reps, master_seed, total[0], total[1], total[2], total[3])


def _mean_se(x: np.ndarray):
    mean = float(x.mean()) if x.size else float("nan")
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else float("nan")
    return mean, se


@dataclass(frozen=True)
class RunLengthEstimate:
    """Scenario-conditional delay estimates after a change at ``n``.

    ``reset_delay`` is ``tau_n - n + 1`` (signals before ``n`` are ignored);
    ``first_delay`` is ``max(tau_1 - n + 1, 0)``.  These are estimates for the
    configured pre-change regime, not worst cases over all pre-change behaviour.
    """

    n: int
    target: int
    pre_regime: Regime
    post_regime: Regime
    reset_delay: np.ndarray
    first_delay: np.ndarray
    censored: np.ndarray

    @property
    def reps(self) -> int:
        return self.reset_delay.size

    @property
    def reset_mean(self):
        return _mean_se(self.reset_delay)

    @property
    def first_mean(self):
        return _mean_se(self.first_delay)

    @property
    def order_holds(self) -> int:
        """Paths with first_delay <= reset_delay."""
        return int((self.first_delay <= self.reset_delay).sum())


def empirical_run_length_criteria(
    pair,
    policy: SignalPolicy,
    n: int,
    pre_regime,
    target: int = 1,
    reps: int = 10_000,
    master_seed: int = 0,
    t_max: int = 100_000,
    threads: int = 1,
    post_regime=None,
    max_censored_fraction: float = 0.0,
) -> RunLengthEstimate:
    """Delays of the signal ``target`` (0 or 1) when the regime switches at ``n``.

    Observations follow ``pre_regime`` on ``t < n`` and ``post_regime``
    (default: the distribution matching ``target``) from ``n`` on.
    """
    if n < 1:
        raise ConfigError("change point n must be >= 1")
    if target not in (0, 1):
        raise ConfigError("target signal must be 0 or 1")
    pre = Regime.parse(pre_regime)
    post = Regime(target) if post_regime is None else Regime.parse(post_regime)
    if t_max < n:
        raise ConfigError("t_max must be at least n")
    streams = make_streams(master_seed, reps)
    regimes_at = changing_regime(n, pre, post)
    h = policy.h

    def work(a, b):
        m = b - a
        feeder = BlockFeeder(pair, streams[a:b], regimes_at)
        tau1 = np.zeros(m, dtype=np.int64)
        taun = np.full(m, t_max, dtype=np.int64)
        cens = np.ones(m, dtype=bool)
        active = np.arange(m)
        rL, rU = np.zeros(m), np.full(m, h)
        t0 = 1
        while active.size and t0 <= t_max:
            inc = feeder.take(active, t0)
            done = np.zeros(active.size, dtype=bool)
            for j in range(min(feeder.block, t_max - t0 + 1)):
                t = t0 + j
                rL = np.minimum(np.maximum(rL + inc[:, j], 0.0), h)
                rU = np.minimum(np.maximum(rU + inc[:, j], 0.0), h)
                fire = signal_array(rL, rU, policy) == target
                first = fire & (tau1[active] == 0)
                tau1[active[first]] = t
                if t >= n:
                    new = fire & ~done
                    taun[active[new]] = t
                    cens[active[new]] = False
                    done |= new
            active, rL, rU = active[~done], rL[~done], rU[~done]
            t0 += feeder.block
        return tau1, taun, cens

    parts = chunked(work, reps, threads)
    tau1 = np.concatenate([p[0] for p in parts])
    taun = np.concatenate([p[1] for p in parts])
    cens = np.concatenate([p[2] for p in parts])
    if cens.sum() > max_censored_fraction * reps:
        raise CensoringError(f"{int(cens.sum())} of {reps} paths gave no signal by t_max={t_max}", int(cens.sum()), reps)
    tau1 = np.where(tau1 == 0, taun, tau1)
    return RunLengthEstimate(
        n, target, pre, post,
        reset_delay=taun - n + 1,
        first_delay=np.maximum(tau1 - n + 1, 0),
        censored=cens,
    )


@dataclass(frozen=True)
class CouplingStats:
    """Coupling time ``T`` and boundary times ``nu_up`` (rL = h), ``nu_down`` (rU = 0).

    Censored entries hold ``t_max`` and are flagged in the ``*_censored`` masks.
    """

    h: float
    regime: Regime
    t_max: int
    T: np.ndarray
    nu_up: np.ndarray
    nu_down: np.ndarray
    T_censored: np.ndarray
    up_censored: np.ndarray
    down_censored: np.ndarray

    @property
    def reps(self) -> int:
        return self.T.size

    def means(self) -> dict:
        """Empirical means; censored samples enter as ``t_max`` (a lower bound)."""
        return {"T": float(self.T.mean()), "nu_up": float(self.nu_up.mean()), "nu_down": float(self.nu_down.mean())}

    @property
    def censor_count(self) -> dict:
        return {
            "T": int(self.T_censored.sum()),
            "nu_up": int(self.up_censored.sum()),
            "nu_down": int(self.down_censored.sum()),
        }

    def fraction_down_before_up(self) -> float:
        """Share of paths on which the upper chart reaches 0 before the lower chart reaches h."""
        down = np.where(self.down_censored, np.inf, self.nu_down)
        up = np.where(self.up_censored, np.inf, self.nu_up)
        return float(np.mean(down < up))

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO() if fh is None else fh
        buf.write("rep,T,nu_up,nu_down,censored\n")
        for i in range(self.reps):
            flags = [name for name, mask in (("T", self.T_censored), ("nu_up", self.up_censored),
                                             ("nu_down", self.down_censored)) if mask[i]]
            buf.write(f"{i},{int(self.T[i])},{int(self.nu_up[i])},{int(self.nu_down[i])},{'|'.join(flags)}\n")
        return buf.getvalue() if fh is None else ""


def coupling_stats(
    pair,
    h: float,
    regime,
    reps: int = 10_000,
    master_seed: int = 0,
    t_max: int = 10_000,
    threads: int = 1,
    max_censored_fraction: float = 0.0,
) -> CouplingStats:
    """Sample ``T``, ``nu_up`` and ``nu_down`` under a pure regime.

    Only censoring of ``T`` counts against ``max_censored_fraction``; the
    boundary time on the unlikely side is expected to be censored often.
    """
    if not 0 < h < MAX_BOUNDARY:
        raise ConfigError(f"h must be in (0, {MAX_BOUNDARY:g})")
    regime = Regime.parse(regime)
    streams = make_streams(master_seed, reps)
    regimes_at = constant_regime(regime)
    h = float(h)

    def work(a, b):
        m = b - a
        feeder = BlockFeeder(pair, streams[a:b], regimes_at)
        out = {name: np.full(m, t_max, dtype=np.int64) for name in ("T", "up", "down")}
        cens = {name: np.ones(m, dtype=bool) for name in ("T", "up", "down")}
        active = np.arange(m)
        rL, rU = np.zeros(m), np.full(m, h)
        t0 = 1
        while active.size and t0 <= t_max:
            inc = feeder.take(active, t0)
            for j in range(min(feeder.block, t_max - t0 + 1)):
                rL = np.minimum(np.maximum(rL + inc[:, j], 0.0), h)
                rU = np.minimum(np.maximum(rU + inc[:, j], 0.0), h)
                for name, hit in (("T", rL == rU), ("up", rL == h), ("down", rU == 0.0)):
                    new = hit & cens[name][active]
                    if new.any():
                        out[name][active[new]] = t0 + j
                        cens[name][active[new]] = False
            keep = cens["up"][active] | cens["down"][active]
            active, rL, rU = active[keep], rL[keep], rU[keep]
            t0 += feeder.block
        return out, cens

    parts = chunked(work, reps, threads)
    cat = lambda d, k: np.concatenate([p[d][k] for p in parts])  # noqa: E731
    stats = CouplingStats(
        h, regime, t_max,
        T=cat(0, "T"), nu_up=cat(0, "up"), nu_down=cat(0, "down"),
        T_censored=cat(1, "T"), up_censored=cat(1, "up"), down_censored=cat(1, "down"),
    )
    ok = stats.T_censored | (stats.T == np.minimum(
        np.where(stats.up_censored, np.iinfo(np.int64).max, stats.nu_up),
        np.where(stats.down_censored, np.iinfo(np.int64).max, stats.nu_down),
    ))
    if not ok.all():
        raise ContractError(f"coupling identity T = min(nu_up, nu_down) failed on {int((~ok).sum())} paths")
    n_cens = int(stats.T_censored.sum())
    if n_cens > max_censored_fraction * reps:
        raise CensoringError(f"{n_cens} of {reps} paths did not couple by t_max={t_max}", n_cens, reps)
    return stats
