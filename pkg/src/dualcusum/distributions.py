"""The pair of known distributions (F0 in control, F1 out of control).

A :class:`DistributionPair` evaluates the log-likelihood ratio
``log(dF1/dF0)(x)`` that drives every chart, draws observations under either
regime from a seeded stream, and gives the CDF of the log-likelihood-ratio
increment that the Markov-chain run-length approximation needs.

Sampling goes through regime-independent *base variates* (standard normals for
the gaussian model, uniforms for the discrete one).  The same base variate
mapped under F0 and under F1 gives a smaller log-likelihood ratio under F0,
which is what makes common-random-number comparisons between regimes pathwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from scipy.special import ndtr

from .errors import ConfigError, ContractError

__all__ = [
    "Regime",
    "DistributionPair",
    "gaussian",
    "discrete",
    "normal_cdf",
    "make_stream",
    "make_streams",
    "LLR_GRID",
    "quantize_increment",
    "grid_floor",
]

# Chart increments are rounded to multiples of LLR_GRID.  With h < MAX_BOUNDARY
# every chart value is then a multiple of ulp(h), so chart additions are exact
# and the gap between the lower and upper chart can only shrink at a clamp.
LLR_GRID = 2.0 ** -36
MAX_BOUNDARY = 2.0 ** 16


def quantize_increment(v):
    return np.round(np.asarray(v, dtype=float) / LLR_GRID) * LLR_GRID


def grid_floor(k: float) -> float:
    """Largest grid point <= k; charts compare against thresholds at this level."""
    return float(np.floor(k / LLR_GRID) * LLR_GRID)


class Regime(IntEnum):
    F0 = 0  # in control
    F1 = 1  # out of control

    @classmethod
    def parse(cls, value) -> "Regime":
        if isinstance(value, Regime):
            return value
        if isinstance(value, (int, np.integer)) and int(value) in (0, 1):
            return cls(int(value))
        if isinstance(value, str):
            key = value.strip().upper()
            if key in ("F0", "0", "IN-CONTROL", "IN_CONTROL"):
                return cls.F0
            if key in ("F1", "1", "OUT-OF-CONTROL", "OUT_OF_CONTROL"):
                return cls.F1
        raise ConfigError(f"unknown regime {value!r}; expected F0 or F1")


def normal_cdf(z):
    """Standard normal CDF (Cephes ``ndtr``, absolute error far below 1e-12)."""
    return ndtr(z)


def make_stream(master_seed: int, index: int) -> np.random.Generator:
    """Independent generator for replication ``index``.

    The stream is a pure function of ``(master_seed, index)``, so replications
    can be computed in any order or split across workers.
    """
    if master_seed < 0 or index < 0:
        raise ConfigError("seeds and stream indices must be non-negative")
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.PCG64(seq))


def make_streams(master_seed: int, count: int, start: int = 0) -> list:
    return [make_stream(master_seed, start + i) for i in range(count)]


@dataclass(frozen=True)
class DistributionPair:
    """Known in-control / out-of-control model.

    Use :func:`gaussian` or :func:`discrete` to build one; both validate the
    parameters.
    """

    kind: str
    mu0: float = 0.0
    mu1: float = 0.0
    sigma: float = 1.0
    support: tuple = ()
    p0: tuple = ()
    p1: tuple = ()

    def __post_init__(self):
        if self.kind == "gaussian":
            if not (self.sigma > 0 and math.isfinite(self.sigma)):
                raise ConfigError("gaussian model needs sigma > 0")
            if not (math.isfinite(self.mu0) and math.isfinite(self.mu1)):
                raise ConfigError("gaussian means must be finite")
            if self.mu0 == self.mu1:
                raise ConfigError("gaussian model needs mu0 != mu1")
        elif self.kind == "discrete":
            self._check_discrete()
        else:
            raise ConfigError(f"unknown model type {self.kind!r}")

    def _check_discrete(self):
        s, p0, p1 = self.support, self.p0, self.p1
        if not (len(s) == len(p0) == len(p1)) or len(s) == 0:
            raise ConfigError("support, p0 and p1 must be non-empty and of equal length")
        if len(set(s)) != len(s):
            raise ConfigError("support values must be distinct")
        for name, p in (("p0", p0), ("p1", p1)):
            if any(v < 0 for v in p):
                raise ConfigError(f"{name} has negative entries")
            if abs(math.fsum(p) - 1.0) > 1e-12:
                raise ConfigError(f"{name} must sum to 1 (got {math.fsum(p)!r})")
        for a, b in zip(p0, p1):
            if (a > 0) != (b > 0):
                raise ConfigError("p0 and p1 must be mutually absolutely continuous")
        llr = [math.log(b / a) for a, b in zip(p0, p1) if a > 0]
        if len(set(llr)) == 1:
            raise ConfigError("F0 and F1 coincide; log-likelihood ratio is constant")

    # -- log-likelihood ratio -------------------------------------------------

    @property
    def _gauss_coef(self):
        # log lr(x) = slope * x + offset
        var = self.sigma * self.sigma
        return (self.mu1 - self.mu0) / var, (self.mu0 ** 2 - self.mu1 ** 2) / (2.0 * var)

    @property
    def _discrete_llr(self) -> np.ndarray:
        p0 = np.asarray(self.p0, dtype=float)
        p1 = np.asarray(self.p1, dtype=float)
        out = np.full(p0.shape, np.nan)
        pos = p0 > 0
        out[pos] = np.log(p1[pos] / p0[pos])
        return out

    def log_lr(self, x):
        """``log(dF1/dF0)(x)``; scalars in, scalars out."""
        if self.kind == "gaussian":
            slope, offset = self._gauss_coef
            val = slope * np.asarray(x, dtype=float) + offset
            return val if np.ndim(x) else float(val)
        support = np.asarray(self.support, dtype=float)
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        idx = np.array([np.flatnonzero(support == v)[0] if np.any(support == v) else -1 for v in xs])
        if np.any(idx < 0):
            raise ContractError(f"value(s) {xs[idx < 0]} outside the discrete support")
        out = self._discrete_llr[idx]
        if np.any(np.isnan(out)):
            raise ContractError("log-likelihood ratio undefined at a zero-probability support point")
        return out if np.ndim(x) else float(out[0])

    # -- sampling ---------------------------------------------------------------

    def base_variates(self, rng: np.random.Generator, size) -> np.ndarray:
        """Regime-free draws that :meth:`observations` maps to data."""
        if self.kind == "gaussian":
            return rng.standard_normal(size)
        return rng.random(size)

    def _inverse_cdf_tables(self):
        llr = self._discrete_llr
        keep = np.flatnonzero(~np.isnan(llr))
        order = keep[np.argsort(llr[keep], kind="stable")]
        values = np.asarray(self.support, dtype=float)[order]
        cum = [np.cumsum(np.asarray(p, dtype=float)[order]) for p in (self.p0, self.p1)]
        return values, llr[order], cum

    def observations(self, base: np.ndarray, regimes) -> np.ndarray:
        """Map base variates to observations; ``regimes`` broadcasts against ``base``."""
        regimes = np.asarray(regimes)
        if self.kind == "gaussian":
            mu = np.where(regimes == Regime.F1, self.mu1, self.mu0)
            return mu + self.sigma * base
        values, _, cum = self._inverse_cdf_tables()
        last = len(values) - 1
        i0 = np.minimum(np.searchsorted(cum[0], base, side="right"), last)
        i1 = np.minimum(np.searchsorted(cum[1], base, side="right"), last)
        return values[np.where(regimes == Regime.F1, i1, i0)]

    def increments(self, base: np.ndarray, regimes) -> np.ndarray:
        """Chart increments (log-LR on the ``LLR_GRID``) for base variates under ``regimes``."""
        regimes = np.asarray(regimes)
        if self.kind == "gaussian":
            return quantize_increment(self.log_lr(self.observations(base, regimes)))
        _, llr, cum = self._inverse_cdf_tables()
        llr = quantize_increment(llr)
        last = len(llr) - 1
        i0 = np.minimum(np.searchsorted(cum[0], base, side="right"), last)
        i1 = np.minimum(np.searchsorted(cum[1], base, side="right"), last)
        return llr[np.where(regimes == Regime.F1, i1, i0)]

    def sample(self, regime, rng: np.random.Generator, size=None):
        regime = Regime.parse(regime)
        n = 1 if size is None else size
        x = self.observations(self.base_variates(rng, n), regime)
        return float(x[0]) if size is None else x

    # -- increment law ------------------------------------------------------

    def increment_cdf(self, regime, y, negate: bool = False):
        """``P(log lr(X) <= y)`` under ``regime`` (``P(-log lr(X) <= y)`` if ``negate``)."""
        regime = Regime.parse(regime)
        y = np.asarray(y, dtype=float)
        if self.kind == "gaussian":
            slope, offset = self._gauss_coef
            mu = self.mu1 if regime == Regime.F1 else self.mu0
            mean = slope * mu + offset
            scale = abs(slope) * self.sigma
            out = normal_cdf((y + mean) / scale) if negate else normal_cdf((y - mean) / scale)
        else:
            llr = self._discrete_llr
            p = np.asarray(self.p1 if regime == Regime.F1 else self.p0, dtype=float)
            keep = ~np.isnan(llr)
            vals, mass = (-llr[keep] if negate else llr[keep]), p[keep]
            out = (mass[None, :] * (vals[None, :] <= y.reshape(-1, 1))).sum(axis=1).reshape(y.shape)
        return float(out) if out.ndim == 0 else out

    def increment_mean(self, regime) -> float:
        """Expected log-likelihood ratio under ``regime`` (+KL under F1, -KL under F0)."""
        regime = Regime.parse(regime)
        if self.kind == "gaussian":
            slope, offset = self._gauss_coef
            return slope * (self.mu1 if regime == Regime.F1 else self.mu0) + offset
        llr = self._discrete_llr
        p = np.asarray(self.p1 if regime == Regime.F1 else self.p0, dtype=float)
        keep = ~np.isnan(llr)
        return float(np.dot(p[keep], llr[keep]))

    # -- config -------------------------------------------------------------

    def to_config(self) -> dict:
        if self.kind == "gaussian":
            return {"type": "gaussian", "mu0": self.mu0, "mu1": self.mu1, "sigma": self.sigma}
        return {"type": "discrete", "support": list(self.support), "p0": list(self.p0), "p1": list(self.p1)}

    @classmethod
    def from_config(cls, block: dict) -> "DistributionPair":
        if not isinstance(block, dict):
            raise ConfigError("model: expected an object")
        kind = block.get("type")
        try:
            if kind == "gaussian":
                return gaussian(float(block["mu0"]), float(block["mu1"]), float(block.get("sigma", 1.0)))
            if kind == "discrete":
                return discrete(block["support"], block["p0"], block["p1"])
        except KeyError as exc:
            raise ConfigError(f"model: missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"model: {exc}") from None
        raise ConfigError(f"model.type: unknown model type {kind!r}")


def gaussian(mu0: float = -0.5, mu1: float = 0.5, sigma: float = 1.0) -> DistributionPair:
    """Equal-variance normal mean shift; defaults to N(-1/2, 1) vs N(1/2, 1)."""
    return DistributionPair("gaussian", mu0=float(mu0), mu1=float(mu1), sigma=float(sigma))


def discrete(support, p0, p1) -> DistributionPair:
    return DistributionPair(
        "discrete",
        support=tuple(float(v) for v in support),
        p0=tuple(float(v) for v in p0),
        p1=tuple(float(v) for v in p1),
    )
