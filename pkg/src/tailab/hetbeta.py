"""Stationary equilibrium with heterogeneous discount factors.

Agent types are born and die with probability p_j per period, receive a
constant endowment y_j, price survival through a competitive annuity
market (effective rate R/(1-p_j)), and run crra consumption rules.  Each
type's wealth then grows geometrically at G_j = (beta_j * R)^(1/gamma_j)
until death resets it to the annuitized endowment value w_j0.

Market clearing pins down R.  With heterogeneous betas some type grows
(G_j > 1) and its survivor ladder produces an exactly geometric upper
tail: Pr(w >= G_j^n * w_j0) = (1-p_j)^n, i.e. a Pareto tail with exponent
-gamma_j * log(1-p_j) / log(beta_j * R).  With a common beta the unique
equilibrium is R = 1/beta and every type's wealth is constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DomainError, NotGrowing, SolverError
from .rng import CHUNK, STREAM_BIRTH_DEATH, chunk_ranges, substream
from .tails import TailSample

#: Simulated wealth is capped here (an agent would need to survive for
#: thousands of periods to reach it); occurrences are counted.
WEALTH_CAP = 1e300

#: Types count as growing only when beta_j * R exceeds one by this margin;
#: knife-edge types have exploding exponents and never attain the minimum.
GROWTH_EPS = 1e-12


@dataclass(frozen=True)
class AgentType:
    share: float        # population fraction
    death_prob: float
    endowment: float
    beta: float
    gamma: float

    def __post_init__(self):
        if not 0 < self.share < 1:
            raise ValueError("share must lie in (0, 1)")
        if not 0 < self.death_prob < 1:
            raise ValueError("death_prob must lie in (0, 1)")
        if self.endowment <= 0:
            raise ValueError("endowment must be positive")
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")


@dataclass(frozen=True)
class Economy:
    types: tuple[AgentType, ...]

    def __post_init__(self):
        if len(self.types) < 1:
            raise ValueError("need at least one agent type")
        if abs(sum(t.share for t in self.types) - 1.0) > 1e-12:
            raise ValueError("population shares must sum to one within 1e-12")

    def arrays(self):
        t = self.types
        return (np.array([x.share for x in t]), np.array([x.death_prob for x in t]),
                np.array([x.endowment for x in t]), np.array([x.beta for x in t]),
                np.array([x.gamma for x in t]))

    @property
    def r_bar(self) -> float:
        """Upper end of the admissible rate range, min_j 1/(beta_j*(1-p_j)^gamma_j)."""
        _, p, _, beta, gamma = self.arrays()
        return float((1.0 / (beta * (1.0 - p) ** gamma)).min())


def excess_demand(economy: Economy, R: float) -> float:
    """Aggregate desired asset holdings at gross rate R (zero in equilibrium).

    f(R) = sum_j R*pi_j*y_j*((beta_j R)^(1/gamma_j) - 1)
           / [ (R/(1-p_j) - 1) * (1 - (1-p_j)*(beta_j R)^(1/gamma_j)) ]

    Well-defined (positive denominators) for R in [1, r_bar).
    """
    r_bar = economy.r_bar
    if not 1.0 <= R < r_bar:
        raise DomainError(f"R must lie in [1, {r_bar}), got {R}")
    pi, p, y, beta, gamma = economy.arrays()
    G = (beta * R) ** (1.0 / gamma)
    num = R * pi * y * (G - 1.0)
    den = (R / (1.0 - p) - 1.0) * (1.0 - (1.0 - p) * G)
    return float((num / den).sum())


@dataclass(frozen=True)
class EquilibriumResult:
    R: float
    r_bar: float
    G: np.ndarray                 # per-type wealth growth factors
    w0: np.ndarray                # per-type rebirth wealth
    W: np.ndarray                 # per-type average wealth
    alpha: float | None           # Pareto exponent (None when degenerate)
    degenerate: bool
    clearing_residual: float
    economy: Economy = field(repr=False)


def _fill_result(economy: Economy, R: float, degenerate: bool) -> EquilibriumResult:
    pi, p, y, beta, gamma = economy.arrays()
    G = np.ones_like(beta) if degenerate else (beta * R) ** (1.0 / gamma)
    r_tilde = R / (1.0 - p)
    w0 = r_tilde / (r_tilde - 1.0) * y
    W = p * w0 / (1.0 - (1.0 - p) * G)
    alpha = None
    if not degenerate:
        growing = beta * R > 1.0 + GROWTH_EPS
        if np.any(growing):
            alphas = -gamma[growing] * np.log(1.0 - p[growing]) / np.log(beta[growing] * R)
            alpha = float(alphas.min())
    residual = float((pi * (W - w0)).sum())
    return EquilibriumResult(R=float(R), r_bar=economy.r_bar, G=G, w0=w0, W=W,
                             alpha=alpha, degenerate=degenerate,
                             clearing_residual=residual, economy=economy)


def solve_equilibrium(economy: Economy, tol: float = 1e-10) -> EquilibriumResult:
    """Find the stationary equilibrium rate.

    Homogeneous betas give R = 1/beta exactly (degenerate wealth).
    Otherwise bisect the excess demand on [1, r_bar): it is negative at 1
    and explodes to +inf at r_bar, so a sign change is guaranteed; the
    bracket edges are pulled in adaptively until it shows.  The returned
    root is refined to float resolution and must satisfy |f(R)| <= tol.
    """
    betas = [t.beta for t in economy.types]
    if all(b == betas[0] for b in betas):
        return _fill_result(economy, 1.0 / betas[0], degenerate=True)

    r_bar = economy.r_bar
    lo = 1.0 + 1e-8
    f_lo = excess_demand(economy, lo)
    if f_lo >= 0:
        raise SolverError(f"excess demand not negative at R=1 ({f_lo}); "
                          "this contradicts beta_j < 1")
    eps = 1e-8
    hi = r_bar * (1.0 - eps)
    f_hi = excess_demand(economy, hi)
    while f_hi <= 0:
        eps *= 0.1
        if eps < 1e-15:
            raise SolverError("could not bracket the clearing rate below r_bar")
        hi = r_bar * (1.0 - eps)
        f_hi = excess_demand(economy, hi)

    # Sign-based bisection to float resolution: the iteration path depends
    # only on signs, so common rescalings of the economy leave R unchanged.
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if excess_demand(economy, mid) < 0:
            lo = mid
        else:
            hi = mid
    R = 0.5 * (lo + hi)
    residual = excess_demand(economy, R)
    if abs(residual) > tol:
        raise SolverError(f"clearing residual {residual} exceeds tolerance {tol}")
    return _fill_result(economy, R, degenerate=False)


def analytic_tail(result: EquilibriumResult, j: int, n: int) -> tuple[float, float]:
    """Exact survivor-tail point for type j: (G_j^n * w_j0, (1-p_j)^n)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    G = float(result.G[j])
    if G <= 1.0:
        raise NotGrowing(f"type {j} has growth factor {G} <= 1")
    p = result.economy.types[j].death_prob
    return G ** n * float(result.w0[j]), (1.0 - p) ** n


@dataclass(frozen=True)
class BirthDeathSample:
    """Simulated cross-section with agent-type bookkeeping.

    Agents are assigned to types deterministically in blocks (largest
    remainder apportionment of N by the population shares), so
    `slice_of(j)` recovers each type's subsample from the pooled values.
    """

    wealth: TailSample
    type_counts: np.ndarray
    ages: np.ndarray = field(repr=False)
    capped: int = 0

    def slice_of(self, j: int) -> slice:
        start = int(self.type_counts[:j].sum())
        return slice(start, start + int(self.type_counts[j]))


def _apportion(shares: np.ndarray, N: int) -> np.ndarray:
    base = np.floor(shares * N).astype(np.int64)
    rem = shares * N - base
    short = N - int(base.sum())
    order = np.argsort(-rem)
    base[order[:short]] += 1
    return base


def simulate_birth_death(economy: Economy, result: EquilibriumResult,
                         N: int, T: int, seed: int) -> BirthDeathSample:
    """Simulate the birth-death wealth process and return wealth at T.

    Each agent's wealth is w_j0 * G_j^age, so the kernel tracks integer
    ages: initial ages are drawn geometric(p_j) (the stationary age
    distribution, avoiding burn-in), then T periods of death/rebirth run.
    Wealth above WEALTH_CAP is capped and counted.
    """
    if N < 1 or T < 0:
        raise ValueError("need N >= 1 and T >= 0")
    pi, p, _, _, _ = economy.arrays()
    counts = _apportion(pi, N)
    type_idx = np.repeat(np.arange(pi.size), counts)

    ages = np.empty(N, dtype=np.int64)
    log1mp = np.log1p(-p)
    for ci, start, stop in chunk_ranges(N, CHUNK):
        m = stop - start
        rng = substream(seed, STREAM_BIRTH_DEATH, ci)
        t_idx = type_idx[start:stop]
        # Stationary age draw: floor(log(1-u)/log(1-p)).
        u_age = rng.random(m)
        age = np.floor(np.log1p(-u_age) / log1mp[t_idx]).astype(np.int64)
        u = rng.random((T, m))
        _kernels.birth_death_ages(age, u, p[t_idx])
        ages[start:stop] = age

    G_agent = result.G[type_idx]
    w0_agent = result.w0[type_idx]
    with np.errstate(over="ignore"):
        wealth = w0_agent * G_agent ** ages.astype(np.float64)
    over = ~(wealth <= WEALTH_CAP)  # catches inf
    capped = int(np.count_nonzero(over))
    if capped:
        wealth = np.where(over, WEALTH_CAP, wealth)
    return BirthDeathSample(
        wealth=TailSample(wealth, label=f"birth-death wealth T={T}"),
        type_counts=counts,
        ages=ages,
        capped=capped,
    )
