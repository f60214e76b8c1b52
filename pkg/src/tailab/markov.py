"""Small helpers for finite-state Markov chains."""

from __future__ import annotations

import numpy as np


def validate_transition(transition) -> np.ndarray:
    """Return the matrix as float64 after checking row-stochasticity."""
    P = np.asarray(transition, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] == 0:
        raise ValueError("transition matrix must be square and nonempty")
    if np.any(P < 0):
        raise ValueError("transition probabilities must be nonnegative")
    if np.any(np.abs(P.sum(axis=1) - 1.0) > 1e-12):
        raise ValueError("transition rows must sum to one within 1e-12")
    return P


def row_cdfs(P: np.ndarray) -> np.ndarray:
    """Cumulative rows with the last column pinned to exactly one."""
    cdf = np.cumsum(P, axis=1)
    cdf[:, -1] = 1.0
    return cdf


def stationary_distribution(P: np.ndarray) -> np.ndarray:
    """Stationary row vector pi with pi @ P = pi (least-squares solve)."""
    n = P.shape[0]
    A = np.vstack([P.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()
