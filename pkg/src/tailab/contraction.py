"""Simulation lab for stochastic recursions x <- phi(x) + y.

Maps phi with asymptotic slope rho < 1 damp their input geometrically, so
the simulated process inherits the tail of the shocks: compactly supported
shocks give bounded paths, an exponential shock rate lambda survives as a
rate of at least (1-rho)*lambda, and a polynomial shock rate alpha is
preserved or improved.  Perfectly correlated shocks attain those bounds
exactly, which the verification helpers exploit.

The recursion is simulated as an equality (the extremal case of the
inequality-coupled version).  Paths are chunked; every chunk draws its
uniforms from a named substream, so results are reproducible and the two
compute backends agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .distributions import Constant, Distribution, Exponential, Pareto, Uniform
from .errors import NotAContraction
from .interp import tabulated_map
from .markov import row_cdfs, stationary_distribution, validate_transition
from .rng import CHUNK, STREAM_CONTRACTION, chunk_ranges, substream
from .tails import RateEstimate, TailSample, exponential_decay_rate, polynomial_decay_rate


@dataclass(frozen=True)
class ContractionMap:
    """Nonnegative map with asymptotic slope rho = limsup phi(x)/x < 1.

    kinds: "linear" (rho*x), "linear_cap" (max(rho*x, cap)), "custom"
    (tabulated on knots starting at 0, extended linearly above the last
    knot).  All kinds are bounded on bounded sets by construction.
    """

    kind: str
    rho: float
    cap: float = 0.0
    xs: np.ndarray | None = field(default=None, repr=False)
    ys: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if not 0.0 <= self.rho < 1.0:
            raise NotAContraction(f"asymptotic slope must be in [0, 1), got {self.rho}")

    @classmethod
    def linear(cls, rho: float) -> "ContractionMap":
        return cls(kind="linear", rho=float(rho))

    @classmethod
    def linear_cap(cls, rho: float, cap: float) -> "ContractionMap":
        if cap < 0:
            raise ValueError("cap must be nonnegative")
        return cls(kind="linear_cap", rho=float(rho), cap=float(cap))

    @classmethod
    def custom(cls, xs, ys) -> "ContractionMap":
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        if xs.ndim != 1 or xs.size < 2 or np.any(np.diff(xs) <= 0):
            raise ValueError("knots must be strictly increasing with >= 2 points")
        if xs[0] != 0.0:
            raise ValueError("tabulated maps must start at x = 0")
        if ys.shape != xs.shape or np.any(ys < 0):
            raise ValueError("values must be nonnegative and match the knots")
        slope_hi = float((ys[-1] - ys[-2]) / (xs[-1] - xs[-2]))
        if slope_hi < 0:
            slope_hi = 0.0  # extension is floored at zero anyway
        return cls(kind="custom", rho=slope_hi, xs=xs, ys=ys)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "linear":
            return self.rho * x
        if self.kind == "linear_cap":
            return np.maximum(self.rho * x, self.cap)
        return tabulated_map(self.xs, self.ys, self.rho, x)


@dataclass(frozen=True)
class MarkovModulated:
    """Markov-switching shocks: a chain selects the per-state distribution."""

    transition: np.ndarray
    dists: tuple[Distribution, ...]
    init: np.ndarray | None = None

    def __post_init__(self):
        P = validate_transition(self.transition)
        object.__setattr__(self, "transition", P)
        if len(self.dists) != P.shape[0]:
            raise ValueError("need one distribution per state")
        init = stationary_distribution(P) if self.init is None else np.asarray(self.init, float)
        if init.shape != (P.shape[0],) or abs(init.sum() - 1.0) > 1e-9:
            raise ValueError("init must be a probability vector over states")
        object.__setattr__(self, "init", init)


@dataclass(frozen=True)
class ShockFamily:
    """A shock source plus its temporal correlation structure.

    correlation "iid" draws fresh shocks each period; "perfect" draws one
    value per path and repeats it every period.
    """

    dist: Distribution | MarkovModulated
    correlation: str = "iid"

    def __post_init__(self):
        if self.correlation not in ("iid", "perfect"):
            raise ValueError("correlation must be 'iid' or 'perfect'")

    @property
    def supremum(self) -> float:
        if isinstance(self.dist, MarkovModulated):
            return max(d.supremum for d in self.dist.dists)
        return self.dist.supremum


def draw_shocks(family: ShockFamily, T: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """Shock values for one chunk: (T, m), or (1, m) for perfect correlation.

    The draw order per chunk is fixed (it defines the substream layout):
    markov chains draw the initial-state uniforms first, then per-period
    transition uniforms, then per-period value uniforms.
    """
    d = family.dist
    if isinstance(d, MarkovModulated):
        nz = d.transition.shape[0]
        cdf = row_cdfs(d.transition)
        init_cdf = np.cumsum(d.init)
        init_cdf[-1] = 1.0
        z = np.searchsorted(init_cdf, rng.random(m), side="right")
        if family.correlation == "perfect":
            u_val = rng.random(m)
            vals = np.empty((1, m))
            for s in range(nz):
                mask = z == s
                if mask.any():
                    vals[0, mask] = d.dists[s].quantile(u_val[mask])
            return vals
        u_trans = rng.random((T, m))
        u_val = rng.random((T, m))
        vals = np.empty((T, m))
        for t in range(T):
            for s in range(nz):
                mask = z == s
                if mask.any():
                    z[mask] = np.searchsorted(cdf[s], u_trans[t, mask], side="right")
            for s in range(nz):
                mask = z == s
                if mask.any():
                    vals[t, mask] = d.dists[s].quantile(u_val[t, mask])
        return vals
    if family.correlation == "perfect":
        return d.quantile(rng.random((1, m)))
    return d.quantile(rng.random((T, m)))


@dataclass(frozen=True)
class PathPanel:
    """Cross-section of a simulated recursion at the final period."""

    terminal_values: TailSample
    running_max: float
    rho_used: float
    x0: float
    T: int
    N: int
    seed: int


def _run_chunk(map_: ContractionMap, x: np.ndarray, runmax: np.ndarray,
               shocks: np.ndarray, T: int) -> None:
    k = _kernels
    if map_.kind == "linear":
        k.recursion_linear(x, runmax, shocks, map_.rho, T)
    elif map_.kind == "linear_cap":
        k.recursion_linear_cap(x, runmax, shocks, map_.rho, map_.cap, T)
    else:
        k.recursion_custom(x, runmax, shocks, map_.xs, map_.ys, map_.rho, T)


def simulate_recursion(map_: ContractionMap, shocks: ShockFamily, x0: float,
                       T: int, N: int, seed: int) -> PathPanel:
    """Simulate x_t = phi(x_{t-1}) + y_t over N independent paths."""
    if T < 1 or N < 1:
        raise ValueError("T and N must be at least 1")
    if x0 < 0:
        raise ValueError("x0 must be nonnegative")
    terminal = np.empty(N)
    global_max = x0
    for ci, start, stop in chunk_ranges(N, CHUNK):
        m = stop - start
        rng = substream(seed, STREAM_CONTRACTION, ci)
        vals = draw_shocks(shocks, T, m, rng)
        x = np.full(m, float(x0))
        runmax = x.copy()
        _run_chunk(map_, x, runmax, vals, T)
        terminal[start:stop] = x
        global_max = max(global_max, float(runmax.max()))
    return PathPanel(
        terminal_values=TailSample(terminal, label=f"recursion terminal T={T}"),
        running_max=global_max,
        rho_used=map_.rho,
        x0=float(x0),
        T=int(T),
        N=int(N),
        seed=int(seed),
    )


def simulate_recursion_traced(map_: ContractionMap, shocks: ShockFamily, x0: float,
                              T: int, N: int, seed: int):
    """As `simulate_recursion` but also returns full paths (T+1, N) and
    shock draws (T, N).  Intended for small N; draws match the untraced run."""
    panel_paths = np.empty((T + 1, N))
    shock_paths = np.empty((T, N))
    for ci, start, stop in chunk_ranges(N, CHUNK):
        m = stop - start
        rng = substream(seed, STREAM_CONTRACTION, ci)
        vals = draw_shocks(shocks, T, m, rng)
        x = np.full(m, float(x0))
        panel_paths[0, start:stop] = x
        for t in range(T):
            y = vals[0] if vals.shape[0] == 1 else vals[t]
            x = map_(x) + y
            panel_paths[t + 1, start:stop] = x
            shock_paths[t, start:stop] = y
    terminal = panel_paths[T].copy()
    panel = PathPanel(
        terminal_values=TailSample(terminal, label=f"recursion terminal T={T}"),
        running_max=float(panel_paths.max()),
        rho_used=map_.rho,
        x0=float(x0),
        T=int(T),
        N=int(N),
        seed=int(seed),
    )
    return panel, panel_paths, shock_paths


def compact_support_bound(map_: ContractionMap, y_max: float, x0: float) -> float:
    """Hard path bound y_max/(1-rho) + x0 for linear maps and bounded shocks."""
    if map_.kind != "linear":
        raise ValueError("bound applies to linear maps")
    if map_.rho >= 1.0:
        raise NotAContraction("slope must be below one")
    if y_max < 0 or x0 < 0:
        raise ValueError("y_max and x0 must be nonnegative")
    return y_max / (1.0 - map_.rho) + x0


@dataclass(frozen=True)
class TailCaseCheck:
    """Outcome of one tail-inheritance verification."""

    case: str
    estimate: RateEstimate
    bound: float
    tolerance: float
    passed: bool


def verify_light_tail_case(panel: PathPanel, shock_lambda: float,
                           tolerance: float = 0.05,
                           upper_fraction: float = 0.1) -> TailCaseCheck:
    """Check the simulated rate against (1-rho)*lambda minus tolerance."""
    est = exponential_decay_rate(panel.terminal_values, upper_fraction)
    bound = (1.0 - panel.rho_used) * shock_lambda
    return TailCaseCheck("light", est, bound, tolerance,
                         bool(est.value >= bound - tolerance))


def verify_heavy_tail_case(panel: PathPanel, shock_alpha: float,
                           tolerance: float = 0.1,
                           k: int | None = None) -> TailCaseCheck:
    """Check the simulated Hill estimate against alpha minus tolerance."""
    n = panel.terminal_values.n
    k = max(20, n // 100) if k is None else k
    est = polynomial_decay_rate(panel.terminal_values, k)
    return TailCaseCheck("heavy", est, shock_alpha, tolerance,
                         bool(est.value >= shock_alpha - tolerance))
