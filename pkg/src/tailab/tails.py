"""Tail-thickness estimation and classification for empirical samples.

A sample has a light upper tail when its empirical moment generating
function stays finite for some positive argument, in which case the
survival function decays exponentially; it is heavy when only polynomial
decay holds.  Two finite-sample estimators make the distinction testable:

* exponential rate: negated least-squares slope of the log empirical
  survival function over the top order statistics;
* polynomial rate: Hill's estimator on the top-k order statistics.

A decision rule combines the two with a boundedness screen; every
threshold used is recorded in the report.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (BoundNotApplicable, DegenerateTail, InsufficientTailData,
                     InvalidSample)

#: Running means above this are flagged divergent.
MGF_OVERFLOW = 1e300


@dataclass(frozen=True)
class TailSample:
    """Nonnegative draws with provenance metadata.

    `pooled` marks samples merged across time periods (used to approximate
    statements that hold uniformly over time).
    """

    values: np.ndarray
    label: str = ""
    pooled: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise InvalidSample("sample must be a nonempty 1-d array")
        if np.any(~np.isfinite(values)) or np.any(values < 0):
            raise InvalidSample("sample values must be finite and nonnegative")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class MgfCurve:
    """Empirical moment generating function on a grid of arguments."""

    s_points: np.ndarray
    m_values: np.ndarray
    diverged: np.ndarray  # bool per point


@dataclass(frozen=True)
class RateEstimate:
    value: float
    stderr: float
    k: int  # upper order statistics used


@dataclass(frozen=True)
class TailConfig:
    """Thresholds for `classify_tail`; all recorded in the report."""

    compact_rel_width: float = 0.05   # top-1% relative width below this => compact
    alpha_light: float = 5.0          # Hill estimate above this reads as light
    lambda_heavy_max: float = 0.5     # slope estimate above this contradicts heavy
    hill_fraction: float = 0.01       # k as a fraction of the sample
    slope_fraction: float = 0.1       # fitting window for the exponential rate
    min_k: int = 20


@dataclass(frozen=True)
class TailReport:
    classification: str               # Compact | Light | Heavy | Indeterminate
    lambda_hat: float | None
    alpha_hat: float | None
    k_upper: int
    diagnostics: dict = field(default_factory=dict)


def empirical_mgf(sample: TailSample, s_points) -> MgfCurve:
    """Mean of exp(s*x) over the sample at each s; flags overflow as divergent."""
    s = np.asarray(s_points, dtype=np.float64)
    if s.ndim != 1 or s.size == 0 or np.any(np.diff(s) < 0) or np.any(s < 0):
        raise InvalidSample("s_points must be nonnegative and sorted ascending")
    x = sample.values
    m = np.empty(s.size)
    diverged = np.zeros(s.size, dtype=bool)
    with np.errstate(over="ignore"):
        for i, si in enumerate(s):
            terms = np.exp(si * x)
            mean = float(terms.mean())
            if not np.isfinite(mean) or mean > MGF_OVERFLOW:
                diverged[i] = True
                mean = np.inf
            m[i] = mean
    return MgfCurve(s_points=s, m_values=m, diverged=diverged)


def _survival_points(values: np.ndarray):
    """Ascending order statistics with log empirical survival (top point dropped)."""
    x = np.sort(values)
    n = x.size
    i = np.arange(1, n)  # drop i = n where survival is zero
    return x[: n - 1], np.log((n - i) / n), x


def exponential_decay_rate(sample: TailSample, upper_fraction: float = 0.1) -> RateEstimate:
    """Exponential rate of survival decay from the top order statistics.

    Fits log P(X > x) ~ a - lambda*x by least squares over the top
    `upper_fraction` of the sample (the maximum, with zero empirical
    survival, is excluded).
    """
    if not 0 < upper_fraction < 1:
        raise ValueError("upper_fraction must lie in (0, 1)")
    n = sample.n
    if n < 100:
        raise InsufficientTailData(f"need at least 100 values, got {n}")
    xs, logsurv, _ = _survival_points(sample.values)
    m = int(round(upper_fraction * n))
    xw = xs[-m:] if m <= xs.size else xs
    yw = logsurv[-m:] if m <= xs.size else logsurv
    if xw.size < 20:
        raise InsufficientTailData(f"only {xw.size} points in the fitting window")
    xbar = xw.mean()
    dx = xw - xbar
    sxx = float(dx @ dx)
    if sxx <= 0:
        raise InsufficientTailData("no spread in the fitting window")
    slope = float(dx @ (yw - yw.mean())) / sxx
    resid = (yw - yw.mean()) - slope * dx
    dof = max(xw.size - 2, 1)
    stderr = float(np.sqrt((resid @ resid) / dof / sxx))
    return RateEstimate(value=-slope, stderr=stderr, k=int(xw.size))


def polynomial_decay_rate(sample: TailSample, k: int) -> RateEstimate:
    """Hill estimate of the polynomial decay rate from the top-k order statistics."""
    n = sample.n
    if k < 20:
        raise InsufficientTailData("k must be at least 20")
    if k >= n:
        raise InvalidSample("k must be smaller than the sample size")
    x = np.sort(sample.values)
    top = x[n - k:]
    pivot = x[n - k - 1]
    if pivot <= 0 or np.any(top <= 0):
        raise InvalidSample("top-k window must be strictly positive")
    denom = float(np.log(top / pivot).sum())
    if denom <= 0:
        raise DegenerateTail("ties in the upper order statistics")
    alpha = k / denom
    return RateEstimate(value=alpha, stderr=alpha / np.sqrt(k), k=k)


def classify_tail(sample: TailSample, config: TailConfig | None = None) -> TailReport:
    """Classify the upper tail as Compact, Light, Heavy, or Indeterminate.

    Compact: the top 1% of values spans a small relative width.
    Heavy:   finite Hill estimate with a near-zero exponential rate.
    Light:   positive exponential rate with a large Hill estimate.
    Conflicting diagnostics fall through to Indeterminate.
    """
    cfg = config or TailConfig()
    x = sample.values
    vmax = float(x.max())
    q99 = float(np.quantile(x, 0.99))
    rel_width = 0.0 if vmax <= 0 else (vmax - q99) / vmax
    thresholds = {
        "compact_rel_width": cfg.compact_rel_width,
        "alpha_light": cfg.alpha_light,
        "lambda_heavy_max": cfg.lambda_heavy_max,
    }

    lam = alpha = None
    try:
        lam = exponential_decay_rate(sample, cfg.slope_fraction)
    except (InsufficientTailData, InvalidSample):
        pass
    k = max(cfg.min_k, int(cfg.hill_fraction * sample.n))
    try:
        alpha = polynomial_decay_rate(sample, k)
    except (InsufficientTailData, InvalidSample, DegenerateTail):
        alpha = None

    diagnostics = {
        "rel_width_top1pct": rel_width,
        "lambda_raw": None if lam is None else lam.value,
        "lambda_stderr": None if lam is None else lam.stderr,
        "alpha_raw": None if alpha is None else alpha.value,
        "alpha_stderr": None if alpha is None else alpha.stderr,
        "thresholds": thresholds,
    }

    if rel_width < cfg.compact_rel_width:
        lam_ok = lam is not None and lam.value > 0
        return TailReport(
            classification="Compact",
            lambda_hat=lam.value if lam_ok else None,
            alpha_hat=None,
            k_upper=int(np.count_nonzero(x >= q99)),
            diagnostics=diagnostics,
        )
    # A small Hill estimate is the decisive heavy signature (exponential-type
    # tails keep it above alpha_light at any scale); a steep survival slope
    # contradicts it and falls through to Indeterminate.
    if alpha is not None and alpha.value <= cfg.alpha_light:
        if lam is None or lam.value <= cfg.lambda_heavy_max:
            return TailReport("Heavy", None, alpha.value, alpha.k, diagnostics)
        return TailReport("Indeterminate", None, None, 0, diagnostics)
    lam_ok = lam is not None and lam.value > 0
    return TailReport(
        classification="Light",
        lambda_hat=lam.value if lam_ok else None,
        alpha_hat=None,
        k_upper=lam.k if lam_ok else 0,
        diagnostics=diagnostics,
    )


def markov_bound_check(sample: TailSample, s: float, x_points) -> list[dict]:
    """Exponential survival bound implied by the empirical MGF.

    For every x reports the empirical survival P(X > x), the bound
    M(s)*exp(-s*x), and whether the bound holds.  This is an exact identity
    of the empirical measure, so `holds` can only fail by rounding.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    curve = empirical_mgf(sample, np.array([s]))
    if bool(curve.diverged[0]):
        raise BoundNotApplicable(f"empirical MGF diverges at s={s}")
    m_s = float(curve.m_values[0])
    x = sample.values
    out = []
    for xi in np.asarray(x_points, dtype=np.float64):
        survival = float(np.count_nonzero(x > xi)) / x.size
        bound = m_s * np.exp(-s * xi)
        out.append({
            "x": float(xi),
            "survival": survival,
            "bound": float(bound),
            "holds": bool(survival <= bound * (1.0 + 1e-12) + 1e-300),
        })
    return out
