"""Order statistics, proportion intervals and distribution distances.

The median convention everywhere is the lower median: for n samples
the value at sorted index (n-1)//2.  This keeps medians equal to an
actual sample point, which matters when raw CSVs are re-aggregated and
compared bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "Z95",
    "lower_median",
    "lower_quartiles",
    "wilson_interval",
    "ks_statistic",
    "half_normal_cdf",
    "standard_normal_cdf",
    "slope_through_origin",
    "SummaryStats",
    "summarize",
]

Z95 = 1.959963984540054


def lower_median(values) -> float:
    """Lower median: element at index (n-1)//2 of the sorted sample."""
    v = np.sort(np.asarray(values, dtype=np.float64))
    if v.size == 0:
        raise ValueError("median of empty sample")
    return float(v[(v.size - 1) // 2])


def lower_quartiles(values) -> tuple[float, float]:
    """(Q1, Q3) by the same lower order-statistic convention."""
    v = np.sort(np.asarray(values, dtype=np.float64))
    if v.size == 0:
        raise ValueError("quartiles of empty sample")
    q1 = float(v[(v.size - 1) // 4])
    q3 = float(v[(3 * (v.size - 1)) // 4])
    return q1, q3


def wilson_interval(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    Preferred over the Wald interval because it behaves sanely at
    p_hat = 0 and p_hat = 1, which both occur routinely in recovery
    phase-transition experiments.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    n = float(trials)
    p = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2.0 * n)) / denom
    half = (z / denom) * math.sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n))
    # the score interval always contains p_hat; pin the degenerate
    # endpoints exactly rather than up to rounding
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == trials else min(1.0, center + half)
    return lo, hi


def ks_statistic(samples, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """One-sample Kolmogorov-Smirnov statistic against a given CDF.

    D = sup_t |F_hat(t) - F(t)|, evaluated exactly via the two
    one-sided gaps at each order statistic.
    """
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    if n == 0:
        raise ValueError("KS statistic of empty sample")
    f = np.asarray(cdf(x), dtype=np.float64)
    i = np.arange(1, n + 1, dtype=np.float64)
    d_plus = np.max(i / n - f)
    d_minus = np.max(f - (i - 1.0) / n)
    return float(max(d_plus, d_minus))


def standard_normal_cdf(t):
    t = np.asarray(t, dtype=np.float64)
    from scipy.special import ndtr

    return ndtr(t)


def half_normal_cdf(t):
    """CDF of |Z| for standard normal Z: erf(t / sqrt(2)) on t >= 0."""
    t = np.asarray(t, dtype=np.float64)
    from scipy.special import erf

    out = erf(np.maximum(t, 0.0) / math.sqrt(2.0))
    return np.where(t < 0.0, 0.0, out)


def slope_through_origin(x, y, mask=None) -> float:
    """Least-squares slope of y ~ c*x with no intercept.

    Used to summarize small-ball probability curves: the fitted c is
    an empirical stand-in for the linear-term constant of the tail
    bound, so the fit is restricted by the caller to the small-x
    region where the linear term dominates.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if mask is not None:
        x = x[mask]
        y = y[mask]
    denom = float(np.dot(x, x))
    if denom == 0.0:
        raise ValueError("slope fit needs at least one nonzero abscissa")
    return float(np.dot(x, y) / denom)


@dataclass
class SummaryStats:
    count: int
    median: float
    q1: float
    q3: float
    min: float
    max: float
    mean: float
    ks: Optional[float] = None

    def as_dict(self) -> dict:
        d = {
            "count": self.count,
            "median": self.median,
            "q1": self.q1,
            "q3": self.q3,
            "min": self.min,
            "max": self.max,
            "mean": self.mean,
        }
        if self.ks is not None:
            d["ks"] = self.ks
        return d


def summarize(values, reference_cdf: Optional[Callable] = None) -> SummaryStats:
    """Five-number summary plus mean, with an optional KS distance to a
    reference law."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("summary of empty sample")
    q1, q3 = lower_quartiles(v)
    ks = ks_statistic(v, reference_cdf) if reference_cdf is not None else None
    return SummaryStats(
        count=int(v.size),
        median=lower_median(v),
        q1=q1,
        q3=q3,
        min=float(np.min(v)),
        max=float(np.max(v)),
        mean=float(np.mean(v)),
        ks=ks,
    )
