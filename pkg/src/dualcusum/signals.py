"""Three-valued signal process driven by the lower and upper bounded charts.

At each time the policy emits 1 (out of control) when ``rL >= kL``, 0 (in
control) when ``rU <= h - kU`` and no signal otherwise.  Thresholds are
compared at their floor on the increment grid (see ``distributions.LLR_GRID``).  When both conditions
hold at once (only possible if ``h >= kL + kU``) the output is no signal.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np

from .distributions import MAX_BOUNDARY, grid_floor
from .errors import ConfigError, ContractError

__all__ = [
    "Scenario",
    "Signal",
    "Outcome",
    "SignalPolicy",
    "classify",
    "signal_of_state",
    "signal_array",
    "score_signals",
]

SINGLE_THRESHOLD_TOL = 1e-12


class Scenario(Enum):
    GAP = "gap"
    SINGLE_THRESHOLD = "single-threshold"
    OVERLAY = "overlay"


class Signal(IntEnum):
    NONE = -1
    IN_CONTROL = 0
    OUT_OF_CONTROL = 1

    @property
    def label(self) -> str:
        return "-" if self is Signal.NONE else str(int(self))


class Outcome(IntEnum):
    NONE = 0
    CORRECT = 1
    FALSE = 2


@dataclass(frozen=True)
class SignalPolicy:
    kL: float
    kU: float
    h: float

    def __post_init__(self):
        for name in ("kL", "kU", "h"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float, np.floating)) and np.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be a finite positive number, got {v!r}")
        if self.h < max(self.kL, self.kU):
            raise ConfigError(
                f"upper boundary h={self.h} violates h >= max(kU, kL) = {max(self.kL, self.kU)}"
            )
        if self.h >= MAX_BOUNDARY:
            raise ConfigError(f"upper boundary h must be below {MAX_BOUNDARY:g}")

    @property
    def scenario(self) -> Scenario:
        total = self.kL + self.kU
        if abs(self.h - total) <= SINGLE_THRESHOLD_TOL:
            return Scenario.SINGLE_THRESHOLD
        return Scenario.GAP if self.h < total else Scenario.OVERLAY

    @property
    def lower_level(self) -> float:
        """The lower chart signals out of control at or above this value."""
        return grid_floor(self.kL)

    @property
    def upper_level(self) -> float:
        """The upper chart signals in control at or below this value."""
        return self.h - grid_floor(self.kU)

    def with_h(self, h: float) -> "SignalPolicy":
        return SignalPolicy(self.kL, self.kU, h)


def classify(kL: float, kU: float, h: float) -> SignalPolicy:
    """Validate thresholds and attach the gap / single-threshold / overlay class."""
    return SignalPolicy(float(kL), float(kU), float(h))


def signal_of_state(state, policy: SignalPolicy) -> Signal:
    if state.h != policy.h:
        raise ContractError(f"chart boundary h={state.h} does not match policy h={policy.h}")
    one = state.rL >= policy.lower_level
    zero = state.rU <= policy.upper_level
    if one and not zero:
        return Signal.OUT_OF_CONTROL
    if zero and not one:
        return Signal.IN_CONTROL
    return Signal.NONE


def signal_array(rL, rU, policy: SignalPolicy) -> np.ndarray:
    """Vectorised :func:`signal_of_state`; int8 codes -1 / 0 / 1."""
    one = np.asarray(rL) >= policy.lower_level
    zero = np.asarray(rU) <= policy.upper_level
    out = np.full(one.shape, Signal.NONE, dtype=np.int8)
    out[one & ~zero] = Signal.OUT_OF_CONTROL
    out[zero & ~one] = Signal.IN_CONTROL
    return out


def score_signals(signals, states) -> np.ndarray:
    """Label each emitted signal against the true regime.

    ``states`` is the schedule's state array (or a :class:`RegimeSchedule`);
    it broadcasts along the last axis of ``signals``.
    """
    if hasattr(states, "states"):
        states = states.states()
    signals = np.asarray(signals)
    states = np.asarray(states)
    if signals.shape[-1:] != states.shape[-1:]:
        raise ContractError(f"signal length {signals.shape[-1:]} != schedule length {states.shape[-1:]}")
    out = np.full(signals.shape, Outcome.NONE, dtype=np.int8)
    emitted = signals != Signal.NONE
    match = signals == states
    out[emitted & match] = Outcome.CORRECT
    out[emitted & ~match] = Outcome.FALSE
    return out
