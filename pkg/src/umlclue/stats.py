"""Correlation and summary statistics.

Pearson and Spearman coefficients come with a two-sided p-value from the
t-statistic t = r * sqrt((n-2)/(1-r^2)) against Student's t with n-2
degrees of freedom; the approximation is adequate for the sample sizes in
use (n >= 10) and is approximate below that.  Spearman is Pearson over
fractional ranks with ties receiving their average rank.  All spreads use
the sample (n-1) standard deviation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import stdtr
from scipy.stats import rankdata


class DegenerateInputError(ValueError):
    """Input was constant or too short for the statistic."""


@dataclass
class CorrelationResult:
    coefficient: float
    p_value: float
    n: int


def _checked_vectors(x, y) -> tuple[np.ndarray, np.ndarray]:
    ax = np.asarray(x, dtype=np.float64)
    ay = np.asarray(y, dtype=np.float64)
    if ax.ndim != 1 or ay.ndim != 1 or ax.shape != ay.shape:
        raise DegenerateInputError("inputs must be equal-length vectors")
    if ax.size < 3:
        raise DegenerateInputError("need at least 3 observations")
    if np.ptp(ax) == 0 or np.ptp(ay) == 0:
        raise DegenerateInputError("correlation undefined for a constant vector")
    return ax, ay


def _t_p_value(r: float, n: int) -> float:
    if abs(r) >= 1.0:
        return 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return 2.0 * float(stdtr(n - 2, -abs(t)))


def pearson(x, y) -> CorrelationResult:
    ax, ay = _checked_vectors(x, y)
    n = ax.size
    dx = ax - ax.mean()
    dy = ay - ay.mean()
    r = float(np.dot(dx, dy) / math.sqrt(np.dot(dx, dx) * np.dot(dy, dy)))
    r = max(-1.0, min(1.0, r))
    return CorrelationResult(r, _t_p_value(r, n), n)


def spearman(x, y) -> CorrelationResult:
    ax, ay = _checked_vectors(x, y)
    return pearson(rankdata(ax), rankdata(ay))


def zscore(values) -> np.ndarray:
    array = np.asarray(values, dtype=np.float64)
    if array.size < 2:
        raise DegenerateInputError("need at least 2 values")
    std = array.std(ddof=1)
    if std == 0:
        raise DegenerateInputError("z-score undefined for constant values")
    return (array - array.mean()) / std


def mean_stderr(values) -> tuple[float, float]:
    array = np.asarray(values, dtype=np.float64)
    if array.size < 2:
        raise DegenerateInputError("need at least 2 values")
    return float(array.mean()), float(array.std(ddof=1) / math.sqrt(array.size))
