"""Pathwise property checks used by ``verify`` and the test-suite.

Each check returns counts of violations; zero means the property held on
every simulated path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .charts import bounded_path, dual_paths, hitting_times
from .distributions import Regime, make_stream, make_streams
from .oracle import EnumerationTask, enumerate_exact, verify_event_inclusion
from .schedule import RegimeSchedule
from .signals import Outcome, SignalPolicy, score_signals
from .simulation import coupling_stats, empirical_run_length_criteria, simulate_signals

__all__ = [
    "CheckResult",
    "hitting_equivalence",
    "chart_invariants",
    "inclusion_grid",
    "exact_vs_monte_carlo",
    "run_verification",
]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def hitting_equivalence(pair, kL: float, kU: float, h: float, seeds: int = 1000,
                        master_seed: int = 0, t_max: int = 1_000_000, threads: int = 1) -> dict:
    """Mismatches between bounded and classic first crossings on shared streams."""
    out = {}
    for regime in (Regime.F0, Regime.F1):
        for side, bounded, classic, k in (("lower", "boundedL", "classicL", kL), ("upper", "boundedU", "classicU", kU)):
            a, ca = hitting_times(bounded, pair, regime, k, h, make_streams(master_seed, seeds), t_max, threads)
            b, cb = hitting_times(classic, pair, regime, k, None, make_streams(master_seed, seeds), t_max, threads)
            out[(side, regime.name)] = int(((a != b) | (ca != cb)).sum())
    return out


def _mixed_increments(pair, seeds: int, horizon: int, master_seed: int) -> np.ndarray:
    # alternate regimes every 50 steps so both boundaries get exercised
    states = ((np.arange(horizon) // 50) % 2).astype(np.int8)
    base = np.stack([pair.base_variates(make_stream(master_seed, i), horizon) for i in range(seeds)])
    return pair.increments(base, states[None, :])


def chart_invariants(pair, h: float, seeds: int = 1000, n_starts: int = 10,
                     horizon: int = 400, master_seed: int = 0) -> dict:
    """Violation counts for the sandwich, coupling-location, gap and absorption properties."""
    llr = _mixed_increments(pair, seeds, horizon, master_seed)
    rL, rU = dual_paths(llr, h)
    starts = np.linspace(0.0, h, n_starts)
    sandwich = 0
    for r0 in starts:
        r = bounded_path(llr, h, r0)
        sandwich += int(((r < rL) | (r > rU)).sum())
    eq = rL == rU
    first = np.where(eq.any(axis=1), eq.argmax(axis=1), -1)
    coupled_rows = np.flatnonzero(first >= 0)
    at = rL[coupled_rows, first[coupled_rows]]
    location = int(((at != 0.0) & (at != h)).sum())
    gap = rU - rL
    gap_up = int((np.diff(gap, axis=1) > 0).sum()) + int((gap[:, 0] > h).sum())
    after = np.arange(horizon)[None, :] >= first[:, None]
    absorption = int((after & (first[:, None] >= 0) & ~eq).sum())
    order = int((rL > rU).sum())
    return {
        "sandwich": sandwich,
        "coupling_location": location,
        "gap_increase": gap_up,
        "absorption": absorption,
        "order": order,
        "coupled_paths": int(coupled_rows.size),
    }


def default_discrete_pair():
    from .distributions import discrete
    return discrete([-1.0, 1.0], [0.7, 0.3], [0.3, 0.7])


def inclusion_grid(pair=None, horizon: int = 12, ns=(1, 2, 3, 5), policies=None, schedules=None) -> dict:
    """Counterexample counts to the first-signal / reset-signal event inclusion."""
    pair = pair or default_discrete_pair()
    policies = policies or [SignalPolicy(1.5, 1.5, h) for h in (2.0, 3.0, 3.5)]
    schedules = schedules or [
        RegimeSchedule.constant(horizon, Regime.F0),
        RegimeSchedule.constant(horizon, Regime.F1),
        RegimeSchedule.change_at(horizon, 4, Regime.F0, Regime.F1),
    ]
    bad, events = 0, 0
    for pol in policies:
        for sch in schedules:
            task = EnumerationTask(pair, pol, sch)
            for n in ns:
                rep = verify_event_inclusion(task, n)
                bad += sum(len(v) for v in rep.counterexamples.values())
                events += sum(rep.checked.values())
    return {"counterexamples": bad, "events": events}


def _z(diff, se):
    se = np.asarray(se, dtype=float)
    diff = np.abs(np.asarray(diff, dtype=float))
    # with zero variance the estimate must be exact
    return np.where(se > 0, diff / np.where(se > 0, se, 1.0), np.where(diff > 1e-12, np.inf, 0.0))


def curve_critical_z(points: int, level_z: float = 3.0) -> float:
    """Per-point z bound giving a whole curve the two-sided level of ``level_z``."""
    alpha = 2.0 * ndtr(-level_z)
    return float(-ndtri(alpha / (2.0 * points)))


def exact_vs_monte_carlo(pair=None, policy=None, horizon: int = 12, n: int = 5,
                         reps: int = 100_000, master_seed: int = 2026) -> tuple:
    """z-scores of simulated against exact statistics on change-at-``n`` tasks.

    Returns ``(scalars, curves)``.  ``scalars`` holds single expectations
    (total false and correct mass, E[min(tau_n, H)], E[min(T, H + 1)]).
    ``curves`` holds the largest pointwise z of each rate curve together with
    the Bonferroni bound for that curve.
    """
    pair = pair or default_discrete_pair()
    policy = policy or SignalPolicy(1.5, 1.5, 3.0)
    scalars, curves = {}, {}
    for j in (0, 1):
        sch = RegimeSchedule.change_at(horizon, n, Regime(1 - j), Regime(j))
        exact = enumerate_exact(EnumerationTask(pair, policy, sch), stopping=[(n, j)])

        outcome = score_signals(simulate_signals(pair, policy, sch, reps, master_seed + j), sch)
        for name, code in (("false", Outcome.FALSE), ("correct", Outcome.CORRECT), ("none", Outcome.NONE)):
            per_path = (outcome == code)
            p = getattr(exact, f"{name}_rate")
            q = per_path.mean(axis=0)
            curves[f"{name}_rate_j{j}"] = (float(_z(q - p, np.sqrt(p * (1 - p) / reps)).max()),
                                          curve_critical_z(horizon))
            if name != "none":
                tot = per_path.sum(axis=1)
                scalars[f"{name}_mass_j{j}"] = float(_z(tot.mean() - p.sum(), tot.std(ddof=1) / np.sqrt(reps)))

        est = empirical_run_length_criteria(
            pair, policy, n, Regime(1 - j), target=j, reps=reps, master_seed=master_seed + 2 + j,
            t_max=horizon, max_censored_fraction=1.0,
        )
        mean, se = est.reset_mean
        scalars[f"stopped_j{j}"] = float(_z(mean + n - 1 - exact.stopped[(n, j)], se))

        pure = RegimeSchedule.constant(horizon, Regime(j))
        exact_c = enumerate_exact(EnumerationTask(pair, policy, pure), stopping=[])
        cs = coupling_stats(pair, policy.h, Regime(j), reps, master_seed + 4 + j, t_max=horizon,
                            max_censored_fraction=1.0)
        T = np.where(cs.T_censored, horizon + 1, cs.T)
        exact_T = 1.0 + float(np.sum(1.0 - exact_c.coupled_by))
        scalars[f"coupling_time_j{j}"] = float(_z(T.mean() - exact_T, T.std(ddof=1) / np.sqrt(reps)))
        emp = np.array([np.mean(T <= t) for t in range(1, horizon + 1)])
        p = exact_c.coupled_by
        curves[f"coupled_by_j{j}"] = (float(_z(emp - p, np.sqrt(p * (1 - p) / reps)).max()),
                                      curve_critical_z(horizon))
    return scalars, curves


def run_verification(threads: int = 1, quick: bool = False) -> list:
    from .distributions import gaussian

    g = gaussian()
    seeds = 200 if quick else 1000
    reps = 20_000 if quick else 100_000
    results = []

    eq = hitting_equivalence(g, 5.0, 5.0, 10.0, seeds=seeds, threads=threads)
    eq.update({(s, r + " h=k"): v for (s, r), v in hitting_equivalence(g, 5.0, 5.0, 5.0, seeds=seeds, master_seed=1).items()})
    results.append(CheckResult("hitting-time equivalence (bounded vs classic)", sum(eq.values()) == 0,
                               f"{sum(eq.values())} mismatches over {len(eq)} x {seeds} paths"))

    for h in (6.0, 10.0):
        inv = chart_invariants(g, h, seeds=seeds)
        viol = {k: v for k, v in inv.items() if k != "coupled_paths"}
        results.append(CheckResult(f"chart invariants h={h:g}", sum(viol.values()) == 0,
                                   ", ".join(f"{k}={v}" for k, v in viol.items()) + f" ({inv['coupled_paths']} coupled paths)"))

    inc = inclusion_grid()
    results.append(CheckResult("event inclusion (exhaustive, j=0,1)", inc["counterexamples"] == 0,
                               f"{inc['counterexamples']} counterexamples in {inc['events']} events"))

    task = EnumerationTask(default_discrete_pair(), SignalPolicy(1.5, 1.5, 3.0), RegimeSchedule.change_at(12, 5, 0, 1))
    ex = enumerate_exact(task)
    part = np.abs(ex.false_rate + ex.correct_rate + ex.none_rate - 1).max()
    results.append(CheckResult("exact rates partition", part <= 1e-12 and abs(ex.total_prob - 1) <= 1e-12,
                               f"max |false+correct+none-1| = {part:.2e}"))

    scalars, curves = exact_vs_monte_carlo(reps=reps)
    results.append(CheckResult("exact vs Monte Carlo expectations (3 standard errors)", max(scalars.values()) <= 3.0,
                               ", ".join(f"{k}={v:.2f}" for k, v in scalars.items())))
    results.append(CheckResult("exact vs Monte Carlo rate curves (Bonferroni, 3-SE family level)",
                               all(z <= crit for z, crit in curves.values()),
                               ", ".join(f"{k}={z:.2f}" for k, (z, _) in curves.items())
                               + f" (bound {next(iter(curves.values()))[1]:.2f})"))
    return results
