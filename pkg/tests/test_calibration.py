import math

import numpy as np
import pytest
from scipy.stats import norm

from dualcusum import (
    ArlQuery,
    CalibrationError,
    CensoringError,
    ConfigError,
    arl_markov,
    arl_mc,
    calibrate_threshold,
)
from dualcusum.calibration import evaluate, transition_matrix


def test_arl_reproduces_published_value(gauss):
    assert 900 <= arl_markov(gauss, "lower", "F0", 5.0, 100) <= 960


def test_upper_f1_mirrors_lower_f0(gauss):
    a = arl_markov(gauss, "lower", "F0", 5.0, 100)
    b = arl_markov(gauss, "upper", "F1", 5.0, 100)
    assert b == pytest.approx(a, rel=1e-12)


def _tiny_k_bracket(mean, k):
    # from any state in [0, k) one step crosses with probability between
    # P(llr >= k) and P(llr > 0), so the run length is geometric-bracketed
    return 1.0 / norm.sf(0.0, mean, 1.0), 1.0 / norm.sf(k, mean, 1.0)


@pytest.mark.parametrize("regime, mean", [("F0", -0.5), ("F1", 0.5)])
def test_tiny_threshold_bracket(gauss, regime, mean):
    lo, hi = _tiny_k_bracket(mean, 0.01)
    mc = arl_mc(gauss, "lower", regime, 0.01, reps=20_000, master_seed=4)
    assert lo - 3 * mc.std_error <= mc.mean <= hi + 3 * mc.std_error
    mk = arl_markov(gauss, "lower", regime, 0.01, 100)
    assert lo * 0.99 <= mk <= hi * 1.01


def test_tiny_threshold_in_control_run_length_in_one_two_under_f1(gauss):
    assert 1.0 <= arl_markov(gauss, "lower", "F1", 0.01, 100) <= 2.0
    assert 1.0 <= arl_markov(gauss, "upper", "F0", 0.01, 100) <= 2.0


def test_discretisation_converges(gauss):
    vals = [arl_markov(gauss, "lower", "F0", 5.0, m) for m in (100, 200, 400, 800)]
    assert abs(vals[-1] - vals[-2]) / vals[-1] <= 0.01
    assert abs(vals[-2] - vals[-3]) >= abs(vals[-1] - vals[-2])


def test_arl_monotone_in_k(gauss):
    ks = np.linspace(0.5, 6.0, 23)
    vals = [arl_markov(gauss, "lower", "F0", k, 200) for k in ks]
    assert np.all(np.diff(vals) > 0)


def test_transition_rows_are_substochastic(gauss):
    Q = transition_matrix(gauss, "lower", "F0", 5.0, 50)
    assert np.all(Q >= 0)
    assert np.all(Q.sum(axis=1) < 1.0)


@pytest.mark.slow
def test_markov_matches_monte_carlo(gauss):
    mk = arl_markov(gauss, "lower", "F0", 3.0, 400)
    mc = arl_mc(gauss, "lower", "F0", 3.0, reps=10_000, master_seed=17)
    assert abs(mk - mc.mean) <= 3 * mc.std_error


def test_discrete_geometric_run_length(coin):
    # k equal to one step of log lr: the chart crosses on the first up-step
    k = math.log(0.7 / 0.3)
    est = arl_mc(coin, "lower", "F1", k, reps=20_000, master_seed=5)
    assert abs(est.mean - 1 / 0.7) <= 3 * est.std_error
    assert arl_markov(coin, "lower", "F1", k, 200) == pytest.approx(1 / 0.7, rel=1e-2)


def test_single_replication(gauss):
    est = arl_mc(gauss, "lower", "F1", 5.0, reps=1, master_seed=2)
    assert est.mean == float(est.times[0])
    assert math.isnan(est.std_error) and not est.std_error_defined


def test_censoring(gauss):
    with pytest.raises(CensoringError) as info:
        arl_mc(gauss, "lower", "F0", 5.0, reps=50, t_max=10)
    assert info.value.total == 50 and info.value.censored > 0
    est = arl_mc(gauss, "lower", "F0", 5.0, reps=50, t_max=10, max_censored_fraction=1.0)
    assert est.censored_count > 0 and est.mean <= 10


def test_calibration_recovers_published_threshold(gauss):
    k = calibrate_threshold(gauss, "lower", "F0", 930.0, states=100)
    assert abs(k - 5.0) <= 0.1
    assert 930 <= arl_markov(gauss, "lower", "F0", k, 100) <= 930 * 1.01


def test_calibration_small_target(gauss):
    k = calibrate_threshold(gauss, "lower", "F1", 2.0)
    assert 2.0 <= arl_markov(gauss, "lower", "F1", k, 100) <= 2.1


def test_calibration_target_below_attainable(gauss):
    # lower chart in control needs at least 1 / P(llr > 0) ~ 3.24 steps
    with pytest.raises(CalibrationError):
        calibrate_threshold(gauss, "lower", "F0", 2.0)


def test_calibration_monte_carlo(gauss):
    k = calibrate_threshold(gauss, "lower", "F0", 50.0, method="monte-carlo", reps=2000, master_seed=1)
    est = arl_mc(gauss, "lower", "F0", k, reps=2000, master_seed=1)
    assert 50.0 <= est.mean <= 50.5


@pytest.mark.parametrize("target", [1.0, 0.5, -3.0])
def test_calibration_rejects_target(gauss, target):
    with pytest.raises(ConfigError):
        calibrate_threshold(gauss, "lower", "F0", target)


def test_calibration_unreachable(gauss):
    # out of control the run length grows only linearly (about 2k here)
    assert arl_markov(gauss, "lower", "F1", 100.0, 1000) < 250
    with pytest.raises(CalibrationError):
        calibrate_threshold(gauss, "lower", "F1", 1e4)


@pytest.mark.parametrize("states", [1, 0, 1001])
def test_state_count_bounds(gauss, states):
    with pytest.raises(ConfigError):
        arl_markov(gauss, "lower", "F0", 5.0, states)


def test_query_validation(gauss):
    with pytest.raises(ConfigError):
        ArlQuery(gauss, "middle", "F0", 5.0)
    with pytest.raises(ConfigError):
        ArlQuery(gauss, "lower", "F0", 5.0, method="exact")
    q = ArlQuery(gauss, "lower", "f0", 5.0)
    assert evaluate(q) == arl_markov(gauss, "lower", "F0", 5.0)
