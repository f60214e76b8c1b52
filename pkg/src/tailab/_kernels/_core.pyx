# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: hot loops behind the same contract as `_ref`.

Every arithmetic expression mirrors the numpy reference with the same
operation order, so results are bit-identical for the simulation kernels
(no transcendental calls) and match up to libm `pow` for the policy
update.  The build deliberately avoids -march/-ffast-math so the compiler
cannot contract multiply-add sequences.
"""

import numpy as np

from libc.math cimport pow

cdef double MU_CAP = 1e308
cdef int MAX_BISECT = 240


# ---------------------------------------------------------------------------
# Shared inline helpers (must match interp.py / _ref.py exactly)
# ---------------------------------------------------------------------------

cdef inline Py_ssize_t _bsearch_right(const double[::1] xs, double x, Py_ssize_t n) nogil:
    """Count of elements <= x; equals np.searchsorted(xs, x, side='right')."""
    cdef Py_ssize_t lo = 0, hi = n, mid
    while lo < hi:
        mid = (lo + hi) // 2
        if xs[mid] <= x:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline double _policy_at(const double[::1] grid, const double[:, ::1] cv,
                              Py_ssize_t col, double x, Py_ssize_t n) nogil:
    cdef Py_ssize_t j
    cdef double slope, c
    if x < grid[0]:
        c = (cv[0, col] / grid[0]) * x
    else:
        j = _bsearch_right(grid, x, n) - 1
        if j > n - 2:
            j = n - 2
        if j < 0:
            j = 0
        slope = (cv[j + 1, col] - cv[j, col]) / (grid[j + 1] - grid[j])
        c = cv[j, col] + (x - grid[j]) * slope
    if c > x:
        c = x
    return c


cdef inline double _tab_at(const double[::1] xs, const double[::1] ys,
                           double slope_hi, double x, Py_ssize_t nk) nogil:
    cdef Py_ssize_t j
    cdef double slope, yv
    if x > xs[nk - 1]:
        yv = ys[nk - 1] + (x - xs[nk - 1]) * slope_hi
    else:
        j = _bsearch_right(xs, x, nk) - 1
        if j > nk - 2:
            j = nk - 2
        if j < 0:
            j = 0
        slope = (ys[j + 1] - ys[j]) / (xs[j + 1] - xs[j])
        yv = ys[j] + (x - xs[j]) * slope
    if yv < 0.0:
        yv = 0.0
    return yv


# ---------------------------------------------------------------------------
# Stochastic recursion panels
# ---------------------------------------------------------------------------

def recursion_linear(double[::1] x, double[::1] runmax, const double[:, ::1] shocks,
                     double rho, Py_ssize_t n_steps):
    cdef Py_ssize_t reuse = 1 if shocks.shape[0] == 1 else 0
    cdef Py_ssize_t m = x.shape[0]
    cdef Py_ssize_t t, i, row
    cdef double v
    with nogil:
        for t in range(n_steps):
            row = 0 if reuse else t
            for i in range(m):
                v = rho * x[i] + shocks[row, i]
                x[i] = v
                if v > runmax[i]:
                    runmax[i] = v


def recursion_linear_cap(double[::1] x, double[::1] runmax, const double[:, ::1] shocks,
                         double rho, double cap, Py_ssize_t n_steps):
    cdef Py_ssize_t reuse = 1 if shocks.shape[0] == 1 else 0
    cdef Py_ssize_t m = x.shape[0]
    cdef Py_ssize_t t, i, row
    cdef double v
    with nogil:
        for t in range(n_steps):
            row = 0 if reuse else t
            for i in range(m):
                v = rho * x[i]
                if v < cap:
                    v = cap
                v = v + shocks[row, i]
                x[i] = v
                if v > runmax[i]:
                    runmax[i] = v


def recursion_custom(double[::1] x, double[::1] runmax, const double[:, ::1] shocks,
                     const double[::1] xs, const double[::1] ys, double slope_hi,
                     Py_ssize_t n_steps):
    cdef Py_ssize_t reuse = 1 if shocks.shape[0] == 1 else 0
    cdef Py_ssize_t m = x.shape[0]
    cdef Py_ssize_t nk = xs.shape[0]
    cdef Py_ssize_t t, i, row
    cdef double v
    with nogil:
        for t in range(n_steps):
            row = 0 if reuse else t
            for i in range(m):
                v = _tab_at(xs, ys, slope_hi, x[i], nk) + shocks[row, i]
                x[i] = v
                if v > runmax[i]:
                    runmax[i] = v


# ---------------------------------------------------------------------------
# Wealth panel
# ---------------------------------------------------------------------------

def wealth_panel(double[::1] a, long long[::1] z, const double[:, ::1] u_next,
                 const double[::1] grid, const double[:, ::1] cvals, const double[:, ::1] trans_cdf,
                 const double[::1] y, double R, double a_floor, double rho,
                 double a_hat, double slack, double[::1] asum,
                 long long[::1] counters):
    cdef Py_ssize_t T = u_next.shape[0]
    cdef Py_ssize_t m = a.shape[0]
    cdef Py_ssize_t n = grid.shape[0]
    cdef Py_ssize_t nz = trans_cdf.shape[0]
    cdef bint check = rho >= 0.0
    cdef Py_ssize_t t, i, znew
    cdef double c, anext, yv, ssum
    cdef long long clamps = 0, viols = 0
    with nogil:
        for t in range(T):
            ssum = 0.0
            for i in range(m):
                ssum += a[i]
            asum[t] += ssum
            for i in range(m):
                c = _policy_at(grid, cvals, <Py_ssize_t> z[i], a[i], n)
                znew = _bsearch_right(trans_cdf[<Py_ssize_t> z[i]], u_next[t, i], nz)
                yv = y[znew]
                anext = R * (a[i] - c) + yv
                if check and a[i] >= a_hat and anext > rho * a[i] + yv + slack:
                    viols += 1
                if anext < a_floor:
                    clamps += 1
                    anext = a_floor
                a[i] = anext
                z[i] = znew
        ssum = 0.0
        for i in range(m):
            ssum += a[i]
        asum[T] += ssum
    counters[0] += clamps
    counters[1] += viols


# ---------------------------------------------------------------------------
# Birth-death ages
# ---------------------------------------------------------------------------

def birth_death_ages(long long[::1] age, const double[:, ::1] u, const double[::1] p):
    cdef Py_ssize_t T = u.shape[0]
    cdef Py_ssize_t m = age.shape[0]
    cdef Py_ssize_t t, i
    with nogil:
        for t in range(T):
            for i in range(m):
                if u[t, i] < p[i]:
                    age[i] = 0
                else:
                    age[i] = age[i] + 1


# ---------------------------------------------------------------------------
# Policy update (crra)
# ---------------------------------------------------------------------------

cdef inline double _mu(double c, double gamma, int fast) nogil:
    cdef double v
    if c <= 0.0:
        return MU_CAP
    if fast == 1:
        v = 1.0 / c
    elif fast == 2:
        v = 1.0 / (c * c)
    elif fast == 3:
        v = 1.0 / (c * c * c)
    else:
        v = pow(c, -gamma)
    if v > MU_CAP:
        v = MU_CAP
    return v


cdef inline double _expected_marginal(double t, double a, Py_ssize_t zi,
                                      const double[::1] grid, const double[:, ::1] cv,
                                      const double[:, ::1] trans, const double[::1] y,
                                      double beta_r, double R, double gamma,
                                      int fast, Py_ssize_t n, Py_ssize_t nz) nogil:
    cdef Py_ssize_t zp
    cdef double acc = 0.0, xnext, c
    for zp in range(nz):
        xnext = R * (a - t) + y[zp]
        c = _policy_at(grid, cv, zp, xnext, n)
        acc = acc + _mu(c, gamma, fast) * trans[zi, zp]
    return beta_r * acc


def coleman_crra(double gamma, double beta_r, double R, const double[::1] grid,
                 const double[:, ::1] cvals, const double[:, ::1] trans, const double[::1] y,
                 double gtol_abs, double gtol_rel):
    cdef Py_ssize_t n = grid.shape[0]
    cdef Py_ssize_t nz = trans.shape[0]
    cdef int fast = 0
    if gamma == 1.0:
        fast = 1
    elif gamma == 2.0:
        fast = 2
    elif gamma == 3.0:
        fast = 3
    out_arr = np.empty((n, nz))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, zi, it
    cdef double a, mua, lo, hi, mid, width, mu_hi, ev
    cdef bint collapsed, stop
    with nogil:
        for zi in range(nz):
            for i in range(n):
                a = grid[i]
                mua = _mu(a, gamma, fast)
                ev = _expected_marginal(a, a, zi, grid, cvals, trans, y,
                                        beta_r, R, gamma, fast, n, nz)
                if ev <= mua:
                    out[i, zi] = a
                    continue
                lo = 0.0
                hi = a
                for it in range(MAX_BISECT):
                    mid = 0.5 * (lo + hi)
                    collapsed = (mid == lo) or (mid == hi)
                    ev = _expected_marginal(mid, a, zi, grid, cvals, trans, y,
                                            beta_r, R, gamma, fast, n, nz)
                    if _mu(mid, gamma, fast) >= ev:
                        lo = mid
                    else:
                        hi = mid
                    mu_hi = _mu(hi, gamma, fast)
                    width = _mu(lo, gamma, fast) - mu_hi
                    stop = (width <= gtol_abs) and (width <= gtol_rel * mu_hi)
                    if stop or collapsed:
                        break
                out[i, zi] = 0.5 * (lo + hi)
    return out_arr
