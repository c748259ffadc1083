"""Ground-truth regime schedules (which distribution generates X_t)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import Regime
from .errors import ConfigError

__all__ = ["RegimeSchedule", "two_burst_schedule"]


@dataclass(frozen=True)
class RegimeSchedule:
    """True state on ``t = 1..horizon``; F0 outside the listed periods.

    ``periods`` holds ``(start, end, state)`` triples with inclusive ends.
    """

    horizon: int
    periods: tuple = ()

    def __post_init__(self):
        if int(self.horizon) != self.horizon or self.horizon < 0:
            raise ConfigError(f"schedule.horizon must be a non-negative integer, got {self.horizon!r}")
        cleaned = []
        for p in self.periods:
            try:
                start, end, state = p
            except (TypeError, ValueError):
                raise ConfigError(f"schedule period {p!r} is not a (start, end, state) triple") from None
            start, end, state = int(start), int(end), Regime.parse(state)
            if not 1 <= start <= end <= self.horizon:
                raise ConfigError(f"schedule period ({start}, {end}) must satisfy 1 <= start <= end <= horizon={self.horizon}")
            cleaned.append((start, end, state))
        cleaned.sort()
        for (s0, e0, _), (s1, _, _) in zip(cleaned, cleaned[1:]):
            if s1 <= e0:
                raise ConfigError(f"schedule periods overlap at t={s1}")
        object.__setattr__(self, "horizon", int(self.horizon))
        object.__setattr__(self, "periods", tuple(cleaned))

    @classmethod
    def constant(cls, horizon: int, regime=Regime.F0) -> "RegimeSchedule":
        regime = Regime.parse(regime)
        if regime == Regime.F0 or horizon == 0:
            return cls(horizon)
        return cls(horizon, ((1, horizon, regime),))

    @classmethod
    def change_at(cls, horizon: int, n: int, before, after) -> "RegimeSchedule":
        """``before`` on ``t < n`` and ``after`` on ``t >= n``."""
        periods = []
        if n > 1:
            periods.append((1, min(n - 1, horizon), Regime.parse(before)))
        if n <= horizon:
            periods.append((n, horizon, Regime.parse(after)))
        return cls(horizon, tuple(p for p in periods if p[0] <= p[1]))

    def states(self) -> np.ndarray:
        """int8 array, entry ``t-1`` is the regime at time ``t``."""
        out = np.zeros(self.horizon, dtype=np.int8)
        for start, end, state in self.periods:
            out[start - 1:end] = int(state)
        return out

    def state_at(self, t: int) -> Regime:
        if not 1 <= t <= self.horizon:
            raise IndexError(f"t={t} outside 1..{self.horizon}")
        for start, end, state in self.periods:
            if start <= t <= end:
                return state
        return Regime.F0

    def to_config(self) -> dict:
        return {
            "horizon": self.horizon,
            "periods": [{"start": s, "end": e, "state": st.name} for s, e, st in self.periods],
        }

    @classmethod
    def from_config(cls, block: dict) -> "RegimeSchedule":
        if not isinstance(block, dict) or "horizon" not in block:
            raise ConfigError("schedule: expected an object with a 'horizon' field")
        periods = []
        for i, p in enumerate(block.get("periods", [])):
            if isinstance(p, dict):
                try:
                    periods.append((p["start"], p["end"], p.get("state", "F1")))
                except KeyError as exc:
                    raise ConfigError(f"schedule.periods[{i}]: missing field {exc.args[0]!r}") from None
            else:
                periods.append(tuple(p) if len(p) == 3 else (*p, "F1"))
        return cls(block["horizon"], tuple(periods))


def two_burst_schedule(horizon: int = 75) -> RegimeSchedule:
    """Out of control on 16..35 and 51..60, in control elsewhere."""
    return RegimeSchedule(horizon, ((16, 35, Regime.F1), (51, 60, Regime.F1)))
