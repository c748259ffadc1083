"""Exception types shared across the package."""


class DualCusumError(Exception):
    """Base class for all package errors."""


class ConfigError(DualCusumError, ValueError):
    """Invalid model, threshold, schedule or run configuration."""


class ContractError(DualCusumError, ValueError):
    """A precondition of a low-level operation was violated."""


class CalibrationError(DualCusumError, ArithmeticError):
    """Numerical failure while computing or searching average run lengths."""


class CensoringError(DualCusumError, RuntimeError):
    """Too many simulated paths did not reach their stopping time before t_max."""

    def __init__(self, message, censored=0, total=0):
        super().__init__(message)
        self.censored = censored
        self.total = total
