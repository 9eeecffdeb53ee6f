"""Series container and elementary sample statistics.

Variance uses the ``1/n`` divisor and the lag-``k`` autocovariance the
``1/(n-k)`` divisor, so ``|autocorrelation|`` can exceed one on short series.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DegenerateSeriesError, DomainError

ArrayLike = Union["TimeSeries", np.ndarray, list, tuple]


@dataclass(frozen=True)
class TimeSeries:
    """Finite, ordered sequence of real observations.

    Non-finite values are rejected here, once, rather than in every
    statistic.
    """

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float).reshape(-1)
        if not np.all(np.isfinite(arr)):
            raise DomainError("series contains NaN or infinite values")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    def __len__(self) -> int:
        return self.n

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def as_array(x: ArrayLike) -> np.ndarray:
    """Validated 1-D float array view of ``x``."""
    if isinstance(x, TimeSeries):
        return x.values
    return TimeSeries(x).values


@dataclass(frozen=True)
class LagStatistics:
    lag: int
    mean: float
    variance: float
    autocovariance: float
    autocorrelation: float


def sample_mean(x: ArrayLike) -> float:
    a = as_array(x)
    if a.size == 0:
        raise DomainError("mean of an empty series")
    return float(np.mean(a))


def sample_variance(x: ArrayLike) -> float:
    """Sample variance with the ``1/n`` divisor."""
    a = as_array(x)
    if a.size < 2:
        raise DomainError("variance needs at least two observations")
    d = a - a.mean()
    return float(np.dot(d, d) / a.size)


def _check_lag(n: int, k: int) -> None:
    if not (1 <= k <= n - 2):
        raise DomainError(f"lag {k} outside 1..{n - 2} for a series of length {n}")


def autocovariance(x: ArrayLike, k: int) -> float:
    """Lag-``k`` sample autocovariance ``sum (X_i - mean)(X_{i+k} - mean) / (n-k)``."""
    a = as_array(x)
    n = a.size
    _check_lag(n, k)
    d = a - a.mean()
    return float(np.dot(d[: n - k], d[k:]) / (n - k))


def autocorrelation(x: ArrayLike, k: int) -> float:
    a = as_array(x)
    _check_lag(a.size, k)
    var = sample_variance(a)
    if var == 0.0:
        raise DegenerateSeriesError("autocorrelation of a constant series")
    return autocovariance(a, k) / var


def lag_statistics(x: ArrayLike, k: int) -> LagStatistics:
    a = as_array(x)
    return LagStatistics(
        lag=k,
        mean=sample_mean(a),
        variance=sample_variance(a),
        autocovariance=autocovariance(a, k),
        autocorrelation=autocorrelation(a, k),
    )
