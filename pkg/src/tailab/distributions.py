"""Nonnegative shock distributions with inverse-CDF sampling.

Every family maps uniforms through its quantile function, which makes
common-random-number coupling exact: scaling a family up pointwise
(quantile dominance) yields pathwise-dominating draws under shared
uniforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Constant:
    value: float

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("constant shock must be nonnegative")

    def quantile(self, u):
        return np.full_like(np.asarray(u, dtype=np.float64), self.value)

    def cdf(self, x):
        return np.where(np.asarray(x, dtype=np.float64) >= self.value, 1.0, 0.0)

    @property
    def supremum(self) -> float:
        return self.value

    @property
    def mean(self) -> float:
        return self.value


@dataclass(frozen=True)
class Uniform:
    low: float
    high: float

    def __post_init__(self):
        if not 0 <= self.low < self.high:
            raise ValueError("require 0 <= low < high")

    def quantile(self, u):
        return self.low + (self.high - self.low) * np.asarray(u, dtype=np.float64)

    def cdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        return np.clip((x - self.low) / (self.high - self.low), 0.0, 1.0)

    @property
    def supremum(self) -> float:
        return self.high

    @property
    def mean(self) -> float:
        return 0.5 * (self.low + self.high)


@dataclass(frozen=True)
class Exponential:
    rate: float

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("rate must be positive")

    def quantile(self, u):
        # -log1p(-u) is exact at u=0 and finite for u in [0, 1).
        return -np.log1p(-np.asarray(u, dtype=np.float64)) / self.rate

    def cdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        return np.where(x >= 0, -np.expm1(-self.rate * x), 0.0)

    @property
    def supremum(self) -> float:
        return np.inf

    @property
    def mean(self) -> float:
        return 1.0 / self.rate


@dataclass(frozen=True)
class Pareto:
    alpha: float
    xmin: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0 or self.xmin <= 0:
            raise ValueError("alpha and xmin must be positive")

    def quantile(self, u):
        u = np.asarray(u, dtype=np.float64)
        return self.xmin * (1.0 - u) ** (-1.0 / self.alpha)

    def cdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        return np.where(x >= self.xmin, 1.0 - (self.xmin / x) ** self.alpha, 0.0)

    @property
    def supremum(self) -> float:
        return np.inf

    @property
    def mean(self) -> float:
        if self.alpha <= 1:
            return np.inf
        return self.alpha * self.xmin / (self.alpha - 1.0)


Distribution = Constant | Uniform | Exponential | Pareto


def sample(dist: Distribution, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n values by pushing uniforms through the quantile function."""
    return dist.quantile(rng.random(n))


def ks_distance(values: np.ndarray, dist: Distribution) -> float:
    """Kolmogorov-Smirnov distance between a sample and a distribution.

    sup_x |F_hat(x) - F(x)| computed exactly from the order statistics.
    """
    x = np.sort(np.asarray(values, dtype=np.float64))
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    cdf = dist.cdf(x)
    upper = np.arange(1, n + 1) / n - cdf
    lower = cdf - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))
