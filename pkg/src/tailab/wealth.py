"""Wealth panels under a solved consumption policy.

Under impatience (beta*R < 1) consumption eventually exceeds interest
income, so above some asset level the wealth recursion is dominated by an
AR(1) with coefficient rho < 1 plus the income shock.  Wealth therefore
inherits the tail of income: bounded income keeps wealth bounded, an
exponential income rate lambda survives as at least (1-rho)*lambda, and a
polynomial income rate alpha is never worsened.  This module simulates the
exact budget recursion and packages those three checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import AssumptionViolated
from .ifp import IFProblem, Policy
from .markov import row_cdfs
from .rng import CHUNK_WEALTH, STREAM_WEALTH, chunk_ranges, substream
from .tails import (TailConfig, TailReport, TailSample, classify_tail,
                    exponential_decay_rate, polynomial_decay_rate)
from .utility import asymptotic_rra


@dataclass(frozen=True)
class RhoBound:
    """Contraction coefficient for the dominating AR(1) wealth bound."""

    rho: float
    regime: str  # "sub_unit_r" | "impatient_r"

    def __post_init__(self):
        if not 0 < self.rho < 1:
            raise ValueError("rho must lie in (0, 1)")


def derive_rho(problem: IFProblem, gamma_bar: float | None = None) -> RhoBound:
    """Choose rho: R itself when R < 1, else the midpoint of
    ((beta*R)^(1/gamma_bar), 1)."""
    if gamma_bar is None:
        gamma_bar = asymptotic_rra(problem.utility).gamma_bar
    if not np.isfinite(gamma_bar):
        raise AssumptionViolated("unbounded relative risk aversion")
    if problem.R < 1:
        return RhoBound(rho=problem.R, regime="sub_unit_r")
    lo = (problem.beta * problem.R) ** (1.0 / gamma_bar)
    return RhoBound(rho=0.5 * (lo + 1.0), regime="impatient_r")


@dataclass(frozen=True)
class WealthPanel:
    """Cross-section of terminal wealth and contemporaneous income."""

    terminal_wealth: TailSample
    terminal_income: TailSample
    seed: int
    T: int
    N: int
    a0: float
    clamped: int                      # steps clamped at the bottom grid node
    ar1_violations: int | None        # None when the guard was not requested
    rho_used: float | None
    a_hat_used: float | None
    mean_path: np.ndarray = field(repr=False)  # cross-sectional mean wealth per period


def simulate_panel(policy: Policy, problem: IFProblem, N: int, T: int, seed: int,
                   a0: float | None = None,
                   ar1_guard: tuple[float, float] | None = None,
                   slack: float = 1e-8) -> WealthPanel:
    """Run N agents through a' = R*(a - c(a, z)) + y(z') for T periods.

    Initial states are drawn from the stationary distribution of the income
    chain; initial wealth defaults to mean income.  `ar1_guard=(rho, a_hat)`
    counts violations of a' <= rho*a + y' among steps starting at a >= a_hat.
    """
    if T < 0 or N < 1:
        raise ValueError("need N >= 1 and T >= 0")
    if a0 is None:
        a0 = problem.income.mean_income
    if a0 <= 0:
        raise ValueError("a0 must be positive")
    rho, a_hat = ar1_guard if ar1_guard is not None else (-1.0, 0.0)

    income = problem.income
    cdf = row_cdfs(income.transition)
    init_cdf = np.cumsum(income.stationary)
    init_cdf[-1] = 1.0
    grid = problem.grid.nodes

    wealth = np.empty(N)
    inc = np.empty(N)
    counters_total = np.zeros(2, dtype=np.int64)
    mean_path = np.zeros(T + 1)
    for ci, start, stop in chunk_ranges(N, CHUNK_WEALTH):
        m = stop - start
        rng = substream(seed, STREAM_WEALTH, ci)
        z = np.searchsorted(init_cdf, rng.random(m), side="right").astype(np.int64)
        u_next = rng.random((T, m))
        a = np.full(m, float(a0))
        counters = np.zeros(2, dtype=np.int64)
        asum = np.zeros(T + 1)
        _kernels.wealth_panel(a, z, u_next, grid, policy.values, cdf,
                              income.values, problem.R, grid[0],
                              rho, a_hat, slack, asum, counters)
        wealth[start:stop] = a
        inc[start:stop] = income.values[z]
        counters_total += counters
        mean_path += asum
    mean_path /= N
    return WealthPanel(
        terminal_wealth=TailSample(wealth, label=f"wealth T={T}"),
        terminal_income=TailSample(inc, label=f"income T={T}"),
        seed=int(seed), T=int(T), N=int(N), a0=float(a0),
        clamped=int(counters_total[0]),
        ar1_violations=int(counters_total[1]) if ar1_guard is not None else None,
        rho_used=rho if ar1_guard is not None else None,
        a_hat_used=a_hat if ar1_guard is not None else None,
        mean_path=mean_path,
    )


def simulate_panel_traced(policy: Policy, problem: IFProblem, N: int, T: int,
                          seed: int, a0: float | None = None):
    """As `simulate_panel` but records full paths (for small N).

    Returns (panel, traces) where traces holds a (T+1, N), c (T, N),
    y (T, N) and z (T+1, N).  Draws match the untraced simulation.
    """
    if a0 is None:
        a0 = problem.income.mean_income
    income = problem.income
    cdf = row_cdfs(income.transition)
    init_cdf = np.cumsum(income.stationary)
    init_cdf[-1] = 1.0
    grid = problem.grid.nodes
    nz = income.n_states

    a_path = np.empty((T + 1, N))
    c_path = np.empty((T, N))
    y_path = np.empty((T, N))
    z_path = np.empty((T + 1, N), dtype=np.int64)
    for ci, start, stop in chunk_ranges(N, CHUNK_WEALTH):
        m = stop - start
        rng = substream(seed, STREAM_WEALTH, ci)
        z = np.searchsorted(init_cdf, rng.random(m), side="right").astype(np.int64)
        u_next = rng.random((T, m))
        a = np.full(m, float(a0))
        a_path[0, start:stop] = a
        z_path[0, start:stop] = z
        c = np.empty(m)
        znew = np.empty(m, dtype=np.int64)
        for t in range(T):
            u = u_next[t]
            for s in range(nz):
                mask = z == s
                if mask.any():
                    c[mask] = policy(a[mask], s)
                    znew[mask] = np.searchsorted(cdf[s], u[mask], side="right")
            ynew = income.values[znew]
            anext = problem.R * (a - c) + ynew
            anext = np.where(anext < grid[0], grid[0], anext)
            c_path[t, start:stop] = c
            y_path[t, start:stop] = ynew
            a = anext
            z = znew.copy()
            a_path[t + 1, start:stop] = a
            z_path[t + 1, start:stop] = z
    panel = simulate_panel(policy, problem, N, T, seed, a0=a0)
    traces = {"a": a_path, "c": c_path, "y": y_path, "z": z_path}
    return panel, traces


@dataclass(frozen=True)
class InheritanceCheck:
    name: str
    passed: bool
    detail: dict


@dataclass(frozen=True)
class InheritanceReport:
    """Wealth-inherits-income-tail verdict for one simulated panel."""

    income_report: TailReport
    wealth_report: TailReport
    checks: tuple[InheritanceCheck, ...]
    warnings: tuple[str, ...]
    passed: bool


def tail_inheritance_report(panel: WealthPanel, rho: float | None = None,
                            light_tolerance: float = 0.05,
                            heavy_tolerance: float = 0.1,
                            config: TailConfig | None = None) -> InheritanceReport:
    """Classify income and wealth tails and check the inheritance bounds.

    income Compact => wealth must be Compact or Light;
    income Light   => wealth Compact or Light, with rate at least
                      (1-rho)*lambda_income - tolerance (needs rho);
    income Heavy   => wealth Hill estimate at least alpha_income - tolerance.
    Indeterminate classifications surface as warnings, not failures.
    """
    cfg = config or TailConfig()
    inc_rep = classify_tail(panel.terminal_income, cfg)
    w_rep = classify_tail(panel.terminal_wealth, cfg)
    checks: list[InheritanceCheck] = []
    warnings: list[str] = []

    if inc_rep.classification == "Indeterminate":
        warnings.append("income tail indeterminate; inheritance bounds skipped")
    elif inc_rep.classification in ("Compact", "Light"):
        ok = w_rep.classification in ("Compact", "Light")
        if w_rep.classification == "Indeterminate":
            warnings.append("wealth tail indeterminate")
        checks.append(InheritanceCheck(
            "light_stays_light", ok,
            {"income_class": inc_rep.classification,
             "wealth_class": w_rep.classification}))
        if inc_rep.classification == "Light" and rho is not None:
            lam_inc = exponential_decay_rate(panel.terminal_income, cfg.slope_fraction)
            lam_w = exponential_decay_rate(panel.terminal_wealth, cfg.slope_fraction)
            bound = (1.0 - rho) * lam_inc.value - light_tolerance
            checks.append(InheritanceCheck(
                "light_rate_bound", bool(lam_w.value >= bound),
                {"lambda_income": lam_inc.value, "lambda_wealth": lam_w.value,
                 "rho": rho, "bound": bound}))
    else:  # Heavy income
        k_inc = max(20, panel.terminal_income.n // 100)
        k_w = max(20, panel.terminal_wealth.n // 100)
        alpha_inc = polynomial_decay_rate(panel.terminal_income, k_inc)
        alpha_w = polynomial_decay_rate(panel.terminal_wealth, k_w)
        bound = alpha_inc.value - heavy_tolerance
        checks.append(InheritanceCheck(
            "heavy_exponent_bound", bool(alpha_w.value >= bound),
            {"alpha_income": alpha_inc.value, "alpha_wealth": alpha_w.value,
             "bound": bound}))
        if w_rep.classification == "Indeterminate":
            warnings.append("wealth tail indeterminate")

    passed = all(c.passed for c in checks)
    return InheritanceReport(income_report=inc_rep, wealth_report=w_rep,
                             checks=tuple(checks), warnings=tuple(warnings),
                             passed=passed)
