import numpy as np
import pytest
from scipy.stats import norm

from dualcusum import (
    CensoringError,
    ConfigError,
    Outcome,
    Regime,
    RegimeSchedule,
    classify,
    coupling_stats,
    empirical_run_length_criteria,
    make_stream,
    make_streams,
    two_burst_schedule,
    run_dual,
    simulate_experiment,
)
from dualcusum.signals import score_signals
from dualcusum.simulation import simulate_signals


def test_schedule_validation():
    with pytest.raises(ConfigError):
        RegimeSchedule(10, ((3, 12, 1),))
    with pytest.raises(ConfigError):
        RegimeSchedule(10, ((3, 6, 1), (5, 8, 1)))
    with pytest.raises(ConfigError):
        RegimeSchedule(-1)
    with pytest.raises(ConfigError):
        RegimeSchedule.change_at(10, 0, 0, 1)


def test_schedule_config_roundtrip():
    s = two_burst_schedule()
    assert RegimeSchedule.from_config(s.to_config()) == s
    assert s.state_at(16) is Regime.F1 and s.state_at(15) is Regime.F0


def test_rates_partition(gauss):
    pols = [classify(5, 5, h) for h in (6, 8, 10, 12)]
    out = simulate_experiment(gauss, pols, two_burst_schedule(), 500, master_seed=1)
    np.testing.assert_array_equal(out.false_count + out.correct_count + out.none_count, 500)


def test_single_replication_gives_indicators(gauss):
    out = simulate_experiment(gauss, classify(5, 5, 8), two_burst_schedule(), 1, master_seed=3)
    for rate in (out.false_rate, out.correct_rate, out.none_rate):
        assert set(np.unique(rate)) <= {0.0, 1.0}
    tr = run_dual(gauss, two_burst_schedule(), classify(5, 5, 8), make_stream(3, 0))
    scored = score_signals(tr.signal, two_burst_schedule())
    np.testing.assert_array_equal(out.false_count[0], scored == Outcome.FALSE)


def test_empty_horizon(gauss):
    out = simulate_experiment(gauss, classify(5, 5, 10), RegimeSchedule(0), 10)
    assert out.false_rate.shape == (1, 0)
    assert out.to_csv() == "t,h,false_rate,correct_rate,none_rate\n"


def test_invalid_policy(gauss):
    with pytest.raises(ConfigError):
        simulate_experiment(gauss, [(5, 5, 10)], two_burst_schedule(), 10)
    with pytest.raises(ConfigError):
        simulate_experiment(gauss, classify(5, 5, 10), two_burst_schedule(), 0)


def _stationary_tail(h, k, mean, cells=1000):
    """P(R >= k) under the stationary law of the bounded chart, nearest-cell discretisation."""
    w = h / cells
    x = w * np.arange(cells + 1)
    hi = x[None, :] + w / 2 - x[:, None]
    lo = x[None, :] - w / 2 - x[:, None]
    P = norm.cdf(hi, mean, 1.0) - norm.cdf(lo, mean, 1.0)
    P[:, 0] = norm.cdf(hi[:, 0], mean, 1.0)
    P[:, -1] = norm.sf(lo[:, -1], mean, 1.0)
    A = np.vstack([P.T - np.eye(cells + 1), np.ones(cells + 1)])
    b = np.zeros(cells + 2)
    b[-1] = 1.0
    pi = np.linalg.lstsq(A, b, rcond=None)[0]
    at_k = np.isclose(x, k)
    return float(pi[x >= k].sum() - 0.5 * pi[at_k].sum())


@pytest.mark.slow
def test_in_control_false_rate_matches_stationary_law(gauss):
    # all-F0, single threshold: once the charts have coupled a false signal is
    # R >= 5, so the long-run false rate is the stationary tail probability
    exact = _stationary_tail(10.0, 5.0, -0.5)
    out = simulate_experiment(gauss, classify(5, 5, 10), RegimeSchedule(1000), 2000, master_seed=5)
    assert out.false_rate[0, 0] == 0.0
    late = out.false_rate[0, 200:].mean()
    assert late == pytest.approx(exact, rel=0.1)


def test_early_false_rate_starts_at_zero(gauss):
    out = simulate_experiment(gauss, classify(5, 5, 10), RegimeSchedule(20), 2000, master_seed=5)
    assert out.false_rate[0, 0] == 0.0
    assert np.all(np.diff(out.false_rate[0, :8]) >= 0)


def test_common_random_numbers_share_observations(gauss):
    # each entry of an h sweep sees the same paths as a run with that h alone
    sweep = simulate_experiment(gauss, [classify(5, 5, 6), classify(5, 5, 10)], two_burst_schedule(), 200, 9)
    one = simulate_experiment(gauss, classify(5, 5, 10), two_burst_schedule(), 200, 9)
    np.testing.assert_array_equal(sweep.false_count[1], one.false_count[0])
    np.testing.assert_array_equal(sweep.correct_count[1], one.correct_count[0])


def test_simulate_signals_matches_run_dual(gauss):
    pol = classify(5, 5, 8)
    sig = simulate_signals(gauss, pol, two_burst_schedule(), 5, 21)
    for i, stream in enumerate(make_streams(21, 5)):
        np.testing.assert_array_equal(sig[i], run_dual(gauss, two_burst_schedule(), pol, stream).signal)


@pytest.mark.parametrize("threads", [2, 3])
def test_thread_count_does_not_change_output(gauss, threads):
    pols = [classify(5, 5, h) for h in (6, 8, 10)]
    a = simulate_experiment(gauss, pols, two_burst_schedule(), 301, master_seed=8, threads=1)
    b = simulate_experiment(gauss, pols, two_burst_schedule(), 301, master_seed=8, threads=threads)
    assert a.to_csv() == b.to_csv()


def test_totals(gauss):
    out = simulate_experiment(gauss, [classify(5, 5, 6), classify(5, 5, 10)], two_burst_schedule(), 100, 1)
    tot = out.totals()
    assert set(tot) == {6.0, 10.0}
    assert tot[6.0][0] == pytest.approx(out.false_rate[0].sum())


def test_run_length_criteria_n1_identity(gauss):
    est = empirical_run_length_criteria(gauss, classify(5, 5, 10), 1, "F0", reps=500, master_seed=2)
    np.testing.assert_array_equal(est.reset_delay, est.first_delay)


@pytest.mark.parametrize("pre", ["F0", "F1"])
@pytest.mark.parametrize("target", [0, 1])
def test_run_length_pointwise_order(gauss, pre, target):
    est = empirical_run_length_criteria(gauss, classify(5, 5, 8), 20, pre, target=target, reps=1000, master_seed=4)
    assert est.order_holds == est.reps


def test_pre_change_regime_ordering(gauss):
    pol = classify(5, 5, 10)
    from_f0 = empirical_run_length_criteria(gauss, pol, 30, "F0", reps=3000, master_seed=6)
    from_f1 = empirical_run_length_criteria(gauss, pol, 30, "F1", reps=3000, master_seed=6)
    (m0, s0), (m1, s1) = from_f0.reset_mean, from_f1.reset_mean
    assert m0 >= m1
    assert m0 - m1 > 3 * np.hypot(s0, s1)


def test_run_length_censoring(gauss):
    with pytest.raises(CensoringError):
        empirical_run_length_criteria(gauss, classify(5, 5, 10), 5, "F0", reps=50, t_max=6)
    with pytest.raises(ConfigError):
        empirical_run_length_criteria(gauss, classify(5, 5, 10), 0, "F0", reps=50)


@pytest.mark.parametrize("regime", ["F1", "F0"])
def test_coupling_ordering(gauss, regime):
    cs = coupling_stats(gauss, 10.0, regime, reps=2000, master_seed=1, t_max=5000)
    m = cs.means()
    likely, unlikely = ("nu_up", "nu_down") if regime == "F1" else ("nu_down", "nu_up")
    assert m["T"] <= m[likely] < m[unlikely]
    assert cs.fraction_down_before_up() < 0.01 if regime == "F1" else 1 - cs.fraction_down_before_up() < 0.01
    np.testing.assert_array_equal(cs.T, np.minimum(cs.nu_up, cs.nu_down))


def test_small_boundary_couples_fast(gauss):
    cs = coupling_stats(gauss, 0.5, "F1", reps=2000, master_seed=1, t_max=1000)
    assert cs.censor_count["T"] == 0
    assert cs.means()["T"] < 3.0


def test_coupling_csv(gauss):
    cs = coupling_stats(gauss, 2.0, "F0", reps=3, master_seed=0, t_max=1000)
    lines = cs.to_csv().splitlines()
    assert lines[0] == "rep,T,nu_up,nu_down,censored" and len(lines) == 4


def test_coupling_censoring(gauss):
    with pytest.raises(CensoringError):
        coupling_stats(gauss, 10.0, "F1", reps=100, t_max=3)
    with pytest.raises(ConfigError):
        coupling_stats(gauss, 0.0, "F1", reps=10)
