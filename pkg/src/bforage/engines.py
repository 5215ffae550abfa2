"""Seeded random-variate engines behind one uniform sampling interface.

Four interchangeable kinds: ``gaussian``, ``weibull``, ``gamma`` and
``chaotic`` (a logistic map whose growth rate drifts upward). Every engine
owns an isolated seeded uniform stream, so the emitted variate sequence is
a pure function of its :class:`EngineConfig` -- bit-identical across
processes and replays.

Sampling methods, fixed per kind:

* gaussian -- Marsaglia polar transform of the uniform stream (the spare
  deviate is cached, so draws alternate between computing a pair and
  emitting the cached half).
* weibull  -- inverse-CDF transform ``scale * (-ln(1-u))**(1/shape)``.
* gamma    -- integer shape only; sum of ``alpha`` exponential variates,
  each by inverse CDF, divided by the rate.
* chaotic  -- ``psi <- rate * psi * (1 - psi)`` followed by
  ``rate <- rate + dr``. Whenever the updated state would leave the map's
  stable region (``psi`` outside (0,1) or ``rate`` above 4) the state is
  re-seeded from the uniform stream and the rate wraps back to ``r0``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum

from .errors import ConfigError, DomainError

__all__ = [
    "EngineKind",
    "EngineConfig",
    "StochasticEngine",
    "make_engine",
    "gaussian_cdf",
    "weibull_cdf",
    "weibull_inverse_cdf",
    "gamma_cdf",
]

_SQRT2 = math.sqrt(2.0)


class EngineKind(str, Enum):
    """The four supported random-source regimes."""

    GAUSSIAN = "gaussian"
    WEIBULL = "weibull"
    GAMMA = "gamma"
    CHAOTIC = "chaotic"

    @classmethod
    def from_string(cls, name: str) -> "EngineKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ConfigError(f"unknown engine kind {name!r} (expected one of: {valid})") from None


@dataclass(frozen=True)
class EngineConfig:
    """Full description of an engine; equal configs give equal streams.

    Only the parameters of the configured ``kind`` matter; the rest are
    inert. ``warmup`` applies to the chaotic kind only and counts map
    iterates discarded at construction time so emitted values do not echo
    ``psi0``.
    """

    kind: EngineKind
    seed: int
    mu: float = 0.0          # gaussian mean
    sigma: float = 1.0       # gaussian standard deviation
    lam: float = 1.0         # weibull scale
    k: float = 1.0           # weibull shape
    alpha: int = 2           # gamma shape, integral
    beta: float = 1.0        # gamma rate
    psi0: float = 0.3        # chaotic initial state, strictly inside (0,1)
    r0: float = 3.9          # chaotic initial growth rate, in [0,5]
    dr: float = 0.01         # chaotic per-step rate increment
    warmup: int = 10         # chaotic iterates discarded at construction

    def __post_init__(self):
        if not isinstance(self.kind, EngineKind):
            object.__setattr__(self, "kind", EngineKind.from_string(str(self.kind)))
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not self.sigma > 0:
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        if not self.lam > 0:
            raise ConfigError(f"lambda must be positive, got {self.lam}")
        if not self.k > 0:
            raise ConfigError(f"k must be positive, got {self.k}")
        if not (isinstance(self.alpha, int) and self.alpha >= 1):
            raise ConfigError(f"alpha must be an integer >= 1, got {self.alpha!r}")
        if not self.beta > 0:
            raise ConfigError(f"beta must be positive, got {self.beta}")
        if not 0.0 < self.psi0 < 1.0:
            raise ConfigError(f"psi0 must lie strictly inside (0, 1), got {self.psi0}")
        if not 0.0 <= self.r0 <= 5.0:
            raise ConfigError(f"r0 must lie in [0, 5], got {self.r0}")
        if not (isinstance(self.warmup, int) and self.warmup >= 0):
            raise ConfigError(f"warmup must be a non-negative integer, got {self.warmup!r}")


class StochasticEngine:
    """Stateful, single-threaded variate source for one :class:`EngineConfig`.

    One logical step per emitted variate: each call to :meth:`sample_raw`,
    :meth:`sample_unit` or :meth:`sample_signed` advances the state exactly
    once and increments :attr:`draws`. Instances must not be shared between
    threads; parallel work takes independent engines with distinct seeds.
    """

    def __init__(self, config: EngineConfig):
        self.config = config
        self.draws = 0
        self._uniform = random.Random(config.seed)
        self._spare: float | None = None  # cached second polar deviate
        if config.kind is EngineKind.CHAOTIC:
            self._psi = config.psi0
            self._rate = config.r0
            for _ in range(config.warmup):
                self._chaotic_step()

    # -- raw sampling -------------------------------------------------

    def sample_raw(self) -> float:
        """Draw one variate from the configured distribution."""
        kind = self.config.kind
        if kind is EngineKind.GAUSSIAN:
            value = self._gaussian_raw()
        elif kind is EngineKind.WEIBULL:
            value = weibull_inverse_cdf(self._uniform.random(), self.config.lam, self.config.k)
        elif kind is EngineKind.GAMMA:
            value = self._gamma_raw()
        else:
            value = self._chaotic_step()
        self.draws += 1
        return value

    def sample_unit(self) -> float:
        """Draw one variate mapped into [0, 1].

        Gaussian, Weibull and Gamma values pass through their own CDF
        (probability integral transform); the chaotic state is already a
        unit value and is returned as is.
        """
        raw = self.sample_raw()
        kind = self.config.kind
        if kind is EngineKind.GAUSSIAN:
            return gaussian_cdf(raw, self.config.mu, self.config.sigma)
        if kind is EngineKind.WEIBULL:
            return weibull_cdf(raw, self.config.lam, self.config.k)
        if kind is EngineKind.GAMMA:
            return gamma_cdf(raw, self.config.alpha, self.config.beta)
        return raw

    def sample_signed(self) -> float:
        """Draw one variate mapped into [-1, 1]."""
        return 2.0 * self.sample_unit() - 1.0

    def cdf(self, x: float) -> float:
        """Cumulative probability of ``x`` under the configured distribution."""
        kind = self.config.kind
        if kind is EngineKind.GAUSSIAN:
            return gaussian_cdf(x, self.config.mu, self.config.sigma)
        if kind is EngineKind.WEIBULL:
            return weibull_cdf(x, self.config.lam, self.config.k)
        if kind is EngineKind.GAMMA:
            return gamma_cdf(x, self.config.alpha, self.config.beta)
        raise DomainError("the chaotic engine has no distribution function")

    # -- per-kind internals --------------------------------------------

    def _gaussian_raw(self) -> float:
        if self._spare is not None:
            z, self._spare = self._spare, None
        else:
            while True:
                u = 2.0 * self._uniform.random() - 1.0
                v = 2.0 * self._uniform.random() - 1.0
                s = u * u + v * v
                if 0.0 < s < 1.0:
                    break
            factor = math.sqrt(-2.0 * math.log(s) / s)
            z = u * factor
            self._spare = v * factor
        return self.config.mu + self.config.sigma * z

    def _gamma_raw(self) -> float:
        total = 0.0
        for _ in range(self.config.alpha):
            total += -math.log1p(-self._uniform.random())
        return total / self.config.beta

    def _chaotic_step(self) -> float:
        psi = self._rate * self._psi * (1.0 - self._psi)
        rate = self._rate + self.config.dr
        if not 0.0 < psi < 1.0 or rate > 4.0:
            # re-seed inside the open interval and wrap the rate back
            psi = self._uniform.random()
            while psi == 0.0:
                psi = self._uniform.random()
            rate = self.config.r0
        self._psi = psi
        self._rate = rate
        return psi


def make_engine(config: EngineConfig) -> StochasticEngine:
    """Build an engine; raises :class:`ConfigError` on invalid parameters."""
    return StochasticEngine(config)


# -- distribution functions ------------------------------------------------


def gaussian_cdf(x: float, mu: float = 0.0, sigma: float = 1.0) -> float:
    """Normal cumulative distribution function."""
    return 0.5 * (1.0 + math.erf((x - mu) / (sigma * _SQRT2)))


def weibull_cdf(x: float, lam: float = 1.0, k: float = 1.0) -> float:
    """Weibull cumulative distribution function ``1 - exp(-(x/lam)**k)``."""
    if x < 0.0:
        raise DomainError(f"weibull support is x >= 0, got {x}")
    return 1.0 - math.exp(-((x / lam) ** k))


def weibull_inverse_cdf(u: float, lam: float = 1.0, k: float = 1.0) -> float:
    """Weibull quantile function; ``u`` must lie in [0, 1)."""
    if not 0.0 <= u < 1.0:
        raise DomainError(f"quantile argument must lie in [0, 1), got {u}")
    return lam * (-math.log1p(-u)) ** (1.0 / k)


def gamma_cdf(x: float, alpha: int, beta: float) -> float:
    """Gamma cumulative distribution for integer shape ``alpha``.

    Uses the closed-form finite sum available when the shape is integral:
    ``1 - sum_{i<alpha} (beta*x)^i / i! * exp(-beta*x)``.
    """
    if not (isinstance(alpha, int) and alpha >= 1):
        raise DomainError(f"alpha must be an integer >= 1, got {alpha!r}")
    if x < 0.0:
        raise DomainError(f"gamma support is x >= 0, got {x}")
    bx = beta * x
    term = 1.0
    total = 1.0
    for i in range(1, alpha):
        term *= bx / i
        total += term
    return 1.0 - total * math.exp(-bx)
