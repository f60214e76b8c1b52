"""Pure-numpy kernels: the reference backend.

The compiled backend (`_core.pyx`) mirrors every expression here with the
same operation order, so the two produce bit-identical output for the
simulation kernels and matching output (up to libm `pow`) for the policy
update.  All random draws are made by the caller; kernels are pure
array-in/array-out transforms.
"""

from __future__ import annotations

import numpy as np

from ..interp import policy_interp, tabulated_map
from ..utility import crra_marginal

#: Marginal utility is capped so that zero-probability transitions never
#: produce inf*0 = nan inside expectations.
MU_CAP = 1e308

#: Hard cap on bisection depth (the bracket-collapse guard fires first).
MAX_BISECT = 240


# ---------------------------------------------------------------------------
# Stochastic recursion panels: x <- phi(x) + y
# ---------------------------------------------------------------------------

def recursion_linear(x, runmax, shocks, rho, n_steps):
    """phi(x) = rho*x.  `shocks` is (n_steps, m) or (1, m) reused each step."""
    reuse = shocks.shape[0] == 1
    for t in range(n_steps):
        y = shocks[0] if reuse else shocks[t]
        x[:] = rho * x + y
        np.maximum(runmax, x, out=runmax)


def recursion_linear_cap(x, runmax, shocks, rho, cap, n_steps):
    """phi(x) = max(rho*x, cap)."""
    reuse = shocks.shape[0] == 1
    for t in range(n_steps):
        y = shocks[0] if reuse else shocks[t]
        x[:] = np.maximum(rho * x, cap) + y
        np.maximum(runmax, x, out=runmax)


def recursion_custom(x, runmax, shocks, xs, ys, slope_hi, n_steps):
    """phi tabulated on knots xs (xs[0] == 0) with linear extension."""
    reuse = shocks.shape[0] == 1
    for t in range(n_steps):
        y = shocks[0] if reuse else shocks[t]
        x[:] = tabulated_map(xs, ys, slope_hi, x) + y
        np.maximum(runmax, x, out=runmax)


# ---------------------------------------------------------------------------
# Wealth panel under a solved consumption policy
# ---------------------------------------------------------------------------

def wealth_panel(a, z, u_next, grid, cvals, trans_cdf, y, R, a_floor,
                 rho, a_hat, slack, asum, counters):
    """Advance N agents T steps through a' = R*(a - c(a,z)) + y(z').

    a, z           : (m,) float64 / int64 state, updated in place
    u_next         : (T, m) uniforms driving the income chain
    asum           : (T+1,) accumulates cross-sectional wealth sums
    counters       : (2,) int64 [clamps below a_floor, AR(1) violations]
    rho < 0 disables the violation check.
    """
    T, m = u_next.shape
    nz = trans_cdf.shape[0]
    check = rho >= 0.0
    c = np.empty(m)
    znew = np.empty(m, dtype=np.int64)
    for t in range(T):
        asum[t] += a.sum()
        u = u_next[t]
        for s in range(nz):
            mask = z == s
            if mask.any():
                c[mask] = policy_interp(grid, cvals[:, s], a[mask])
                znew[mask] = np.searchsorted(trans_cdf[s], u[mask], side="right")
        ynew = y[znew]
        anext = R * (a - c) + ynew
        if check:
            viol = (a >= a_hat) & (anext > rho * a + ynew + slack)
            counters[1] += int(np.count_nonzero(viol))
        clamp = anext < a_floor
        counters[0] += int(np.count_nonzero(clamp))
        a[:] = np.where(clamp, a_floor, anext)
        z[:] = znew
    asum[T] += a.sum()


# ---------------------------------------------------------------------------
# Birth-death age recursion (wealth is a deterministic function of age)
# ---------------------------------------------------------------------------

def birth_death_ages(age, u, p):
    """age resets to 0 on death (u < p), else increments.  In place."""
    T = u.shape[0]
    for t in range(T):
        age[:] = np.where(u[t] < p, 0, age + 1)


# ---------------------------------------------------------------------------
# Policy update: solve the Euler equation at every grid node
# ---------------------------------------------------------------------------

def coleman_generic(u_marginal, beta_r, R, grid, cvals, trans, y,
                    gtol_abs, gtol_rel):
    """One policy-update step with an arbitrary marginal utility.

    For each node (a_i, z) finds t in (0, a_i] with
        u'(t) = max{ beta*R * E[u'(c(R*(a_i - t) + y', z')) | z], u'(a_i) }
    by bisection on the strictly decreasing difference.  Stops a node when
    the bracket's marginal-utility width is below both gtol_abs and
    gtol_rel * u'(hi), or the bracket collapses to float resolution.
    """
    n = grid.size
    nz = trans.shape[0]
    a_col = grid[:, None]

    def mu(c):
        with np.errstate(divide="ignore", over="ignore"):
            return np.minimum(u_marginal(c), MU_CAP)

    def expected_marginal(t):
        acc = np.zeros((n, nz))
        for zp in range(nz):
            xnext = R * (a_col - t) + y[zp]
            acc += mu(policy_interp(grid, cvals[:, zp], xnext)) * trans[:, zp][None, :]
        return beta_r * acc

    a_mat = np.broadcast_to(a_col, (n, nz)).copy()
    mu_a = np.broadcast_to(mu(grid)[:, None], (n, nz))

    # Borrowing constraint binds where even consuming everything keeps
    # current marginal utility above the discounted continuation.
    constrained = expected_marginal(a_mat) <= mu_a

    lo = np.zeros((n, nz))
    hi = a_mat.copy()
    active = ~constrained
    for _ in range(MAX_BISECT):
        if not active.any():
            break
        mid = 0.5 * (lo + hi)
        collapsed = (mid == lo) | (mid == hi)
        g_pos = mu(mid) >= expected_marginal(mid)
        lo = np.where(active & g_pos, mid, lo)
        hi = np.where(active & ~g_pos, mid, hi)
        width = mu(lo) - mu(hi)
        stop = (width <= gtol_abs) & (width <= gtol_rel * mu(hi))
        active &= ~(stop | collapsed)
    return np.where(constrained, a_mat, 0.5 * (lo + hi))


def coleman_crra(gamma, beta_r, R, grid, cvals, trans, y, gtol_abs, gtol_rel):
    return coleman_generic(crra_marginal(gamma), beta_r, R, grid, cvals,
                           trans, y, gtol_abs, gtol_rel)
