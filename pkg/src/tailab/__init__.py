"""tailab: tail behavior of stochastic recursions and wealth distributions.

Subsystems
----------
tails        estimate/classify tail thickness of empirical samples
contraction  simulate damped stochastic recursions and verify tail bounds
utility      marginal-utility families and risk-aversion diagnostics
ifp          income fluctuation problem solved by policy iteration
wealth       wealth panels under a solved policy; tail inheritance checks
hetbeta      heterogeneous-discount-factor equilibrium with exact tails
cli          batch front-end (`tailab <command> ...`)
"""

from ._kernels import BACKEND
from .contraction import (ContractionMap, MarkovModulated, PathPanel,
                          ShockFamily, compact_support_bound,
                          simulate_recursion, simulate_recursion_traced,
                          verify_heavy_tail_case, verify_light_tail_case)
from .distributions import Constant, Exponential, Pareto, Uniform, ks_distance
from .hetbeta import (AgentType, BirthDeathSample, Economy, EquilibriumResult,
                      analytic_tail, excess_demand, simulate_birth_death,
                      solve_equilibrium)
from .ifp import (AssetGrid, IFProblem, MarkovIncome, Policy, SolveReport,
                  coleman_step, default_grid, euler_residuals,
                  exponential_proxy_income, initial_policy,
                  pareto_proxy_income, pih_margin_check,
                  policy_lower_bound_check, policy_metric, solve,
                  zero_income_mpc)
from .tails import (MgfCurve, RateEstimate, TailConfig, TailReport,
                    TailSample, classify_tail, empirical_mgf,
                    exponential_decay_rate, markov_bound_check,
                    polynomial_decay_rate)
from .utility import (RraProfile, UtilitySpec, asymptotic_rra,
                      consumption_ratio_check)
from .wealth import (InheritanceReport, RhoBound, WealthPanel, derive_rho,
                     simulate_panel, simulate_panel_traced,
                     tail_inheritance_report)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
