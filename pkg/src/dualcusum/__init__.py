"""Non-restarting, upper-bounded dual CUSUM charts.

Two bounded charts share one recursion ``r -> min(max(r + log lr(x), 0), h)``:
the lower chart starts at 0 and the upper chart at ``h``.  The lower chart
signals out of control at ``kL``; the upper chart signals in control at
``h - kU``.  Around that core the package provides run-length calibration,
replicated experiments, coupling-time statistics and an exact enumeration
oracle for small discrete models.
"""

from .calibration import ArlEstimate, ArlQuery, arl_markov, arl_mc, calibrate_threshold
from .charts import (
    Censored,
    ClassicChartState,
    DualChartState,
    Trace,
    bounded_step,
    classic_step,
    dual_step,
    first_hitting,
    hitting_times,
    run_dual,
)
from .distributions import DistributionPair, Regime, discrete, gaussian, make_stream, make_streams
from .errors import CalibrationError, CensoringError, ConfigError, ContractError, DualCusumError
from .oracle import EnumerationTask, enumerate_exact, verify_event_inclusion
from .schedule import RegimeSchedule, two_burst_schedule
from .signals import Outcome, Scenario, Signal, SignalPolicy, classify, score_signals, signal_of_state
from .simulation import (
    CouplingStats,
    RunLengthEstimate,
    SimulationSummary,
    coupling_stats,
    empirical_run_length_criteria,
    simulate_experiment,
)

__version__ = "0.1.0"
