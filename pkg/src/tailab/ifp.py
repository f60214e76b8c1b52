"""Income fluctuation problem: policy iteration on the Euler equation.

An agent with discount factor beta and gross risk-free rate R (beta*R < 1)
chooses consumption c in (0, a] given assets a and a Markov income state z,
with next assets a' = R*(a - c) + y(z').  The policy update maps a
candidate consumption policy to the one solving

    u'(t) = max{ beta*R * E[u'(c(R*(a-t) + y', z')) | z], u'(a) }

at every grid node.  In the marginal-utility sup-metric this update is a
contraction with modulus beta*R, so iterating it from any candidate policy
converges to the unique optimum; the solver tracks the observed modulus.

With zero income and crra utility the fixed point is exactly linear,
c(a) = (1 - beta^(1/gamma) * R^(1/gamma - 1)) * a, which provides a
closed-form oracle for the tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .distributions import Distribution, Exponential, Pareto
from .errors import AssumptionViolated, SolverError
from .interp import policy_interp
from .markov import stationary_distribution, validate_transition
from .utility import UtilitySpec, asymptotic_rra, crra_marginal

#: Cap used when composing marginal utility inside expectations (keeps
#: 0-probability transitions from producing inf*0).
MU_CAP = 1e308

#: Bisection resolution for the nodewise Euler solve, in marginal-utility
#: units: absolute, and relative to u' at the bracket top.  Both must hold
#: (or the bracket must collapse to float resolution) before a node stops.
GTOL_ABS = 1e-13
GTOL_REL = 1e-11


@dataclass(frozen=True)
class MarkovIncome:
    """Finite-state Markov income y(z) with row-stochastic transition."""

    states: tuple[str, ...]
    transition: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        P = validate_transition(self.transition)
        y = np.asarray(self.values, dtype=np.float64)
        if y.shape != (P.shape[0],):
            raise ValueError("need one income value per state")
        if np.any(y < 0):
            raise ValueError("income values must be nonnegative")
        states = tuple(str(s) for s in self.states)
        if len(states) != P.shape[0]:
            raise ValueError("need one label per state")
        object.__setattr__(self, "transition", P)
        object.__setattr__(self, "values", y)
        object.__setattr__(self, "states", states)

    @classmethod
    def iid(cls, probs, values, states=None) -> "MarkovIncome":
        """Income drawn fresh each period (all transition rows identical)."""
        p = np.asarray(probs, dtype=np.float64)
        P = np.tile(p, (p.size, 1))
        if states is None:
            states = tuple(f"s{i}" for i in range(p.size))
        return cls(states=tuple(states), transition=P, values=np.asarray(values, float))

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def stationary(self) -> np.ndarray:
        return stationary_distribution(self.transition)

    @property
    def mean_income(self) -> float:
        return float(self.stationary @ self.values)

    @property
    def max_expected_next(self) -> float:
        """sup over states of E[y' | z]; finite by construction."""
        return float((self.transition @ self.values).max())


@dataclass(frozen=True)
class AssetGrid:
    """Strictly increasing positive asset nodes."""

    nodes: np.ndarray
    spacing: str = "explicit"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=np.float64)
        if nodes.ndim != 1 or nodes.size < 50:
            raise ValueError("grid needs at least 50 nodes")
        if nodes[0] <= 0 or np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be positive and strictly increasing")
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def geometric(cls, a_min: float, a_max: float, n: int) -> "AssetGrid":
        return cls(nodes=np.geomspace(a_min, a_max, n), spacing="geometric")

    @classmethod
    def linear(cls, a_min: float, a_max: float, n: int) -> "AssetGrid":
        return cls(nodes=np.linspace(a_min, a_max, n), spacing="linear")

    @property
    def n(self) -> int:
        return int(self.nodes.size)

    @property
    def a_max(self) -> float:
        return float(self.nodes[-1])


def default_grid(income: MarkovIncome, n: int = 200, a_min: float = 1e-3,
                 multiple: float = 300.0) -> AssetGrid:
    """Geometric grid reaching `multiple` times mean income."""
    mean = income.mean_income
    if mean <= 0:
        raise ValueError("mean income is zero; supply an explicit grid")
    return AssetGrid.geometric(a_min, multiple * mean, n)


@dataclass(frozen=True)
class IFProblem:
    """One income-fluctuation-problem instance."""

    beta: float
    R: float
    utility: UtilitySpec
    income: MarkovIncome
    grid: AssetGrid

    def __post_init__(self):
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if self.R <= 0:
            raise ValueError("R must be positive")
        if self.beta * self.R >= 1:
            raise AssumptionViolated(f"impatience requires beta*R < 1, got {self.beta * self.R}")
        if self.utility.family == "hara" and (self.utility.a <= 0 or self.utility.b < 0):
            raise ValueError("hara solving requires a > 0 and b >= 0")


class Policy:
    """Consumption policy on (grid x states), linear between nodes.

    Below the first node it follows the chord through the origin; above the
    last node it extends with the top-segment slope; values are clipped to
    (0, a].
    """

    def __init__(self, grid: AssetGrid, values: np.ndarray):
        values = np.ascontiguousarray(values, dtype=np.float64)
        if values.shape[0] != grid.n or values.ndim != 2:
            raise ValueError("values must have shape (n_nodes, n_states)")
        a = grid.nodes[:, None]
        if np.any(values <= 0) or np.any(values > a):
            raise ValueError("policy must satisfy 0 < c <= a at every node")
        if np.any(np.diff(values, axis=0) < 0):
            raise ValueError("policy must be nondecreasing in assets")
        self.grid = grid
        self.values = values
        self.values.setflags(write=False)

    @property
    def n_states(self) -> int:
        return int(self.values.shape[1])

    def __call__(self, a, z: int) -> np.ndarray:
        """Consumption at asset level(s) a in income state index z."""
        return policy_interp(self.grid.nodes, self.values[:, z], a)

    def top_slope(self) -> float:
        g = self.grid.nodes
        return float(((self.values[-1] - self.values[-2]) / (g[-1] - g[-2])).min())


def initial_policy(problem: IFProblem) -> Policy:
    """The consume-everything policy c(a, z) = a."""
    n, nz = problem.grid.n, problem.income.n_states
    return Policy(problem.grid, np.tile(problem.grid.nodes[:, None], (1, nz)))


def _solver_marginal(u: UtilitySpec):
    """Marginal utility as a raw vectorized callable (no domain checks)."""
    if u.family == "crra":
        return crra_marginal(u.gamma)
    if u.family == "hara":
        a, b = u.a, u.b
        return lambda x: (a * x + b) ** (-1.0 / a)
    if u.family == "cara":
        b = u.b
        return lambda x: np.exp(-x / b)
    b = u.b
    return lambda x: 1.0 / (x + b)


def coleman_step(policy: Policy, problem: IFProblem,
                 gtol_abs: float = GTOL_ABS, gtol_rel: float = GTOL_REL) -> Policy:
    """One policy update: solve the Euler equation at every node."""
    u = problem.utility
    beta_r = problem.beta * problem.R
    args = (beta_r, problem.R, problem.grid.nodes, policy.values,
            problem.income.transition, problem.income.values, gtol_abs, gtol_rel)
    if u.family == "crra":
        out = _kernels.coleman_crra(u.gamma, *args)
    else:
        out = _kernels.coleman_generic(_solver_marginal(u), *args)
    if not np.all(np.isfinite(out)) or np.any(out <= 0):
        raise SolverError("Euler solve produced invalid consumption "
                          "(utility family may lack u'(0) = inf)")
    # Iron out sub-resolution monotonicity violations from the root solves.
    out = np.maximum.accumulate(out, axis=0)
    return Policy(problem.grid, out)


@dataclass
class SolveReport:
    iterations: int
    final_metric: float
    observed_modulus: float
    converged: bool
    metric_history: np.ndarray = field(repr=False)

    def last_ratios(self, window: int = 10) -> np.ndarray:
        """Successive metric ratios over the final `window` iterations."""
        h = self.metric_history
        if h.size < 2:
            return np.empty(0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = h[1:] / h[:-1]
        return ratios[-window:]


def policy_metric(c: Policy, d: Policy, u: UtilitySpec) -> float:
    """Sup distance between policies after composing with marginal utility."""
    mu = _solver_marginal(u)
    return float(np.max(np.abs(mu(c.values) - mu(d.values))))


def default_tolerance(problem: IFProblem) -> float:
    """Metric tolerance: 1e-9 * u'(a_max), floored at 500 times the
    nodewise bisection resolution (below the floor the metric is noise).

    The floor also keeps the relative Euler residual of the returned
    policy under ~1e-8: the self-residual is about beta*R times the final
    metric, and u' at the widest consumption on the grid is the scale it
    gets compared against.
    """
    mu_top = float(_solver_marginal(problem.utility)(problem.grid.a_max))
    return max(1e-9 * mu_top, 500 * GTOL_ABS)


def solve(problem: IFProblem, tol: float | None = None, max_iter: int = 5000,
          policy0: Policy | None = None) -> tuple[Policy, SolveReport]:
    """Iterate the policy update to its fixed point.

    Stops when the marginal-utility metric between successive iterates
    falls below `tol`; returns converged=False (never raises) when
    `max_iter` is exhausted.
    """
    if tol is None:
        tol = default_tolerance(problem)
    c = initial_policy(problem) if policy0 is None else policy0
    history: list[float] = []
    converged = False
    for _ in range(max_iter):
        c_new = coleman_step(c, problem)
        d = policy_metric(c, c_new, problem.utility)
        history.append(d)
        c = c_new
        if d <= tol:
            converged = True
            break
    hist = np.asarray(history)
    if hist.size >= 2:
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = hist[1:] / hist[:-1]
    else:
        ratios = np.empty(0)
    observed = float(ratios[-10:].max()) if ratios.size else np.nan
    report = SolveReport(iterations=len(history), final_metric=float(hist[-1]),
                         observed_modulus=observed, converged=converged,
                         metric_history=hist)
    return c, report


def zero_income_mpc(beta: float, R: float, gamma: float) -> float:
    """Marginal propensity to consume of the zero-income crra policy."""
    return 1.0 - beta ** (1.0 / gamma) * R ** (1.0 / gamma - 1.0)


@dataclass(frozen=True)
class PihMargin:
    """Linear consumption floor c(a, z) >= m*a above the asset level a_hat."""

    m: float
    a_hat: float | None
    holds: bool
    node_index: int | None
    extension_ok: bool


def pih_margin_check(policy: Policy, problem: IFProblem,
                     gamma_bar: float | None = None,
                     m: float | None = None) -> PihMargin:
    """Find the smallest grid node above which consumption dominates m*a.

    The default margin m is the midpoint of
    (1 - 1/R, 1 - beta^(1/gamma_bar) * R^(1/gamma_bar - 1)), the interval
    for which such an asset level must exist when beta*R < 1 and relative
    risk aversion is asymptotically bounded (requires R >= 1).
    """
    R = problem.R
    if m is None:
        if R < 1:
            raise AssumptionViolated("R < 1: wealth contracts at rate R; no margin needed")
        if gamma_bar is None:
            gamma_bar = asymptotic_rra(problem.utility).gamma_bar
        if not np.isfinite(gamma_bar):
            raise AssumptionViolated("unbounded relative risk aversion")
        lo = 1.0 - 1.0 / R
        hi = zero_income_mpc(problem.beta, R, gamma_bar)
        if not hi > lo:
            raise AssumptionViolated("empty margin interval")
        m = 0.5 * (lo + hi)
    nodes = problem.grid.nodes
    ok = np.all(policy.values >= m * nodes[:, None], axis=1)
    bad = np.nonzero(~ok)[0]
    idx = 0 if bad.size == 0 else int(bad[-1]) + 1
    exists = idx < nodes.size
    a_hat = float(nodes[idx]) if exists else None
    extension_ok = policy.top_slope() >= m
    holds = bool(exists and a_hat < problem.grid.a_max)
    return PihMargin(m=float(m), a_hat=a_hat, holds=holds,
                     node_index=idx if exists else None,
                     extension_ok=bool(extension_ok))


def policy_lower_bound_check(policy: Policy, problem: IFProblem,
                             rel_tol: float = 1e-8) -> bool:
    """Check c(a, z) >= (zero-income crra policy) at every node."""
    u = problem.utility
    if u.family != "crra":
        raise ValueError("closed-form lower bound requires crra utility")
    c0 = zero_income_mpc(problem.beta, problem.R, u.gamma) * problem.grid.nodes
    return bool(np.all(policy.values >= (c0 * (1.0 - rel_tol))[:, None]))


def euler_residuals(policy: Policy, problem: IFProblem):
    """Relative Euler-equation residuals and the binding-constraint mask."""
    u = problem.utility
    mu_raw = _solver_marginal(u)

    def mu(x):
        with np.errstate(divide="ignore", over="ignore"):
            return np.minimum(mu_raw(x), MU_CAP)

    grid = problem.grid.nodes
    y = problem.income.values
    P = problem.income.transition
    n, nz = policy.values.shape
    acc = np.zeros((n, nz))
    for zp in range(nz):
        xnext = problem.R * (grid[:, None] - policy.values) + y[zp]
        acc += mu(policy_interp(grid, policy.values[:, zp], xnext)) * P[:, zp][None, :]
    cont = problem.beta * problem.R * acc
    mu_a = mu(grid)[:, None]
    rhs = np.maximum(cont, mu_a)
    mu_c = mu(policy.values)
    binding = cont <= mu_a
    resid = np.abs(mu_c - rhs) / mu_c
    return resid, binding


# ---------------------------------------------------------------------------
# Finite-state stand-ins for continuous income distributions
# ---------------------------------------------------------------------------

def _proxy_cells(dist: Distribution, n_states: int, truncation: float,
                 body_survival: float):
    if n_states < 3:
        raise ValueError("need at least 3 states")
    if not 0 < truncation < body_survival < 1:
        raise ValueError("require 0 < truncation < body_survival < 1")
    edges = np.concatenate([[1.0], np.geomspace(body_survival, truncation, n_states)])
    probs = (edges[:-1] - edges[1:]) / (1.0 - truncation)
    mid_quantiles = 1.0 - 0.5 * (edges[:-1] + edges[1:])
    values = np.asarray(dist.quantile(mid_quantiles), dtype=np.float64)
    return probs, values


def proxy_income(dist: Distribution, n_states: int = 15, truncation: float = 1e-5,
                 body_survival: float = 0.3) -> MarkovIncome:
    """Discretize a continuous distribution into an i.i.d. income chain.

    Cells are one body cell plus survival-log-spaced tail cells down to the
    truncation quantile; each state sits at its cell's quantile midpoint
    with matched probability.  The log spacing hands the upper-tail
    estimators a clean polynomial/exponential range to work with.
    """
    probs, values = _proxy_cells(dist, n_states, truncation, body_survival)
    return MarkovIncome.iid(probs, values)


def exponential_proxy_income(rate: float, n_states: int = 15,
                             truncation: float = 1e-5) -> MarkovIncome:
    return proxy_income(Exponential(rate), n_states, truncation)


def pareto_proxy_income(alpha: float, xmin: float = 1.0, n_states: int = 15,
                        truncation: float = 1e-5) -> MarkovIncome:
    return proxy_income(Pareto(alpha, xmin), n_states, truncation)
