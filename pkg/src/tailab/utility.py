"""Marginal-utility families and risk-aversion diagnostics.

Only marginals are needed anywhere in the package: the Euler machinery
works with u', its inverse, and the local relative risk aversion
gamma(x) = -x*u''(x)/u'(x).  Four families are supported:

* crra(gamma):       u'(x) = x^(-gamma),        gamma(x) = gamma
* hara(a, b):        u'(x) = (a*x+b)^(-1/a),    gamma(x) = x/(a*x+b)
* cara(b):           u'(x) = exp(-x/b),         gamma(x) = x/b
* log_shifted(b):    u'(x) = 1/(x+b),           gamma(x) = x/(x+b)

cara has unbounded relative risk aversion; it is included so the tests can
exhibit what breaks without the boundedness assumption.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

#: Default geometric probe grid for "large x" diagnostics.
DEFAULT_PROBES = np.geomspace(1e2, 1e8, 61)


def crra_marginal(gamma: float):
    """Vectorized u'(x) = x^(-gamma) with fast paths for small integer gamma.

    The fast paths use plain multiplications so the compiled backend can
    reproduce the exact same rounding.
    """
    if gamma == 1.0:
        return lambda x: 1.0 / x
    if gamma == 2.0:
        return lambda x: 1.0 / (x * x)
    if gamma == 3.0:
        return lambda x: 1.0 / (x * x * x)
    return lambda x: np.asarray(x) ** (-gamma)


@dataclass(frozen=True)
class UtilitySpec:
    """One marginal-utility family with evaluable maps.

    Use the classmethod constructors; `family` is one of
    {"crra", "hara", "cara", "log_shifted"}.
    """

    family: str
    gamma: float = 0.0
    a: float = 0.0
    b: float = 0.0

    @classmethod
    def crra(cls, gamma: float) -> "UtilitySpec":
        if gamma <= 0:
            raise ValueError("crra requires gamma > 0")
        return cls(family="crra", gamma=float(gamma))

    @classmethod
    def hara(cls, a: float, b: float) -> "UtilitySpec":
        if a == 0:
            raise ValueError("hara with a = 0 is cara; use UtilitySpec.cara")
        return cls(family="hara", a=float(a), b=float(b))

    @classmethod
    def cara(cls, b: float) -> "UtilitySpec":
        if b <= 0:
            raise ValueError("cara requires b > 0")
        return cls(family="cara", b=float(b))

    @classmethod
    def log_shifted(cls, b: float) -> "UtilitySpec":
        if b < 0:
            raise ValueError("log_shifted requires b >= 0")
        return cls(family="log_shifted", b=float(b))

    # -- domain ------------------------------------------------------------

    def check_domain(self, x) -> None:
        x = np.asarray(x, dtype=np.float64)
        if np.any(x <= 0):
            raise DomainError("x must be positive")
        if self.family == "hara" and np.any(self.a * x + self.b <= 0):
            raise DomainError("hara requires a*x + b > 0")

    # -- evaluable maps ------------------------------------------------------

    def marginal(self, x):
        """u'(x); positive and strictly decreasing on the domain."""
        self.check_domain(x)
        x = np.asarray(x, dtype=np.float64)
        if self.family == "crra":
            return crra_marginal(self.gamma)(x)
        if self.family == "hara":
            return (self.a * x + self.b) ** (-1.0 / self.a)
        if self.family == "cara":
            return np.exp(-x / self.b)
        return 1.0 / (x + self.b)

    def inverse_marginal(self, m):
        """(u')^{-1}(m) for m in the range of u'."""
        m = np.asarray(m, dtype=np.float64)
        if np.any(m <= 0):
            raise DomainError("marginal utility values must be positive")
        if self.family == "crra":
            return m ** (-1.0 / self.gamma)
        if self.family == "hara":
            x = (m ** (-self.a) - self.b) / self.a
        elif self.family == "cara":
            x = -self.b * np.log(m)
        else:
            x = 1.0 / m - self.b
        if np.any(np.asarray(x) <= 0):
            raise DomainError("inverse marginal maps outside the domain")
        return x

    def rra(self, x):
        """Local relative risk aversion gamma(x) = -x*u''(x)/u'(x)."""
        self.check_domain(x)
        x = np.asarray(x, dtype=np.float64)
        if self.family == "crra":
            return np.full_like(x, self.gamma)
        if self.family == "hara":
            return x / (self.a * x + self.b)
        if self.family == "cara":
            return x / self.b
        return x / (x + self.b)

    def rra_limit(self) -> float:
        """Closed-form limsup of gamma(x) as x grows, when it exists."""
        if self.family == "crra":
            return self.gamma
        if self.family == "hara":
            if self.a <= 0:
                raise DomainError("hara limit requires a > 0 (unbounded domain)")
            return 1.0 / self.a
        if self.family == "cara":
            return np.inf
        return 1.0


@dataclass(frozen=True)
class RraProfile:
    """Asymptotic relative-risk-aversion diagnostic."""

    gamma_bar: float
    brra: bool
    probe_points: np.ndarray = field(repr=False)
    gamma_values: np.ndarray = field(repr=False)


def _validate_probes(probe_grid) -> np.ndarray:
    probes = np.asarray(probe_grid, dtype=np.float64)
    if probes.size < 7 or np.any(np.diff(probes) <= 0):
        raise ValueError("probe grid must be increasing with at least 7 points")
    if probes[-1] / probes[0] < 1e6:
        raise ValueError("probe grid must span at least 6 orders of magnitude")
    return probes


def asymptotic_rra(u: UtilitySpec, probe_grid=None, ceiling: float = 100.0) -> RraProfile:
    """Estimate limsup gamma(x) on the top decade of a geometric probe grid.

    Closed forms are used when the family permits; the probes are still
    evaluated and reported.  `brra` is true when the estimate stays below
    `ceiling`.
    """
    probes = _validate_probes(DEFAULT_PROBES if probe_grid is None else probe_grid)
    gamma_values = np.asarray(u.rra(probes), dtype=np.float64)
    try:
        gamma_bar = float(u.rra_limit())
    except DomainError:
        top = probes >= probes[-1] / 10.0
        gamma_bar = float(gamma_values[top].max())
    brra = bool(np.isfinite(gamma_bar) and gamma_bar <= ceiling)
    return RraProfile(gamma_bar=gamma_bar, brra=brra,
                      probe_points=probes, gamma_values=gamma_values)


@dataclass(frozen=True)
class ConsumptionRatioCheck:
    """Result of the uniform consumption-scaling check."""

    holds: bool
    ratio_min: float
    margin: float
    kappa: float


def consumption_ratio_check(u: UtilitySpec, kappa: float, probe_grid=None,
                            margin_floor: float = 1e-4) -> ConsumptionRatioCheck:
    """Check that (u')^{-1}(kappa*u'(x))/x stays uniformly above one.

    Evaluates the ratio on the top decade of the probe grid; `holds` is true
    when the minimum exceeds 1 + margin_floor.  Bounded relative risk
    aversion guarantees this; cara makes the ratio collapse to one.
    """
    if not 0 < kappa < 1:
        raise ValueError("kappa must lie in (0, 1)")
    probes = _validate_probes(DEFAULT_PROBES if probe_grid is None else probe_grid)
    top = probes[probes >= probes[-1] / 10.0]
    ratio = np.asarray(u.inverse_marginal(kappa * u.marginal(top))) / top
    ratio_min = float(ratio.min())
    return ConsumptionRatioCheck(holds=bool(ratio_min > 1.0 + margin_floor),
                                 ratio_min=ratio_min,
                                 margin=ratio_min - 1.0,
                                 kappa=kappa)
