"""Piecewise-linear interpolation conventions shared by all backends.

Two variants are used throughout:

* ``policy_interp``: consumption policies tabulated on an asset grid.
  Below the first node the policy follows the chord through the origin
  (keeps 0 < c <= x); above the last node it extends linearly with the
  top-segment slope; finally c is clipped to at most x.

* ``tabulated_map``: a nonnegative map tabulated from x=0 upward, linear
  between knots, extended above the last knot with the final slope and
  floored at zero.

The compiled kernels replicate these exact expressions (same operation
order), so both backends produce bit-identical results.
"""

from __future__ import annotations

import numpy as np


def segment_index(xs: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Index j with xs[j] <= x < xs[j+1], clipped to [0, len(xs)-2]."""
    idx = np.searchsorted(xs, x, side="right") - 1
    return np.clip(idx, 0, xs.size - 2)


def policy_interp(grid: np.ndarray, vals: np.ndarray, x) -> np.ndarray:
    """Evaluate one policy column at asset levels x (vectorized)."""
    x = np.asarray(x, dtype=np.float64)
    j = segment_index(grid, x)
    slope = (vals[j + 1] - vals[j]) / (grid[j + 1] - grid[j])
    c = vals[j] + (x - grid[j]) * slope
    # Chord through the origin below the grid.
    below = x < grid[0]
    if np.any(below):
        c = np.where(below, (vals[0] / grid[0]) * x, c)
    return np.minimum(c, x)


def tabulated_map(xs: np.ndarray, ys: np.ndarray, slope_hi: float, x) -> np.ndarray:
    """Evaluate a tabulated map with linear extension above the last knot."""
    x = np.asarray(x, dtype=np.float64)
    j = segment_index(xs, x)
    slope = (ys[j + 1] - ys[j]) / (xs[j + 1] - xs[j])
    y = ys[j] + (x - xs[j]) * slope
    above = x > xs[-1]
    if np.any(above):
        y = np.where(above, ys[-1] + (x - xs[-1]) * slope_hi, y)
    return np.maximum(y, 0.0)
