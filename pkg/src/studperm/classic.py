"""Ljung-Box and Box-Pierce portmanteau tests with chi-square p-values."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import DegenerateSeriesError, DomainError
from .series import ArrayLike, as_array, autocorrelation, sample_variance

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


def _gamma_series(a: float, x: float) -> float:
    # P(a, x) = x^a e^-x / Gamma(a+1) * sum_n x^n / ((a+1)...(a+n))
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_continued_fraction(a: float, x: float) -> float:
    # Q(a, x) by modified Lentz evaluation of the Legendre continued fraction
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def regularized_gamma_q(a: float, x: float) -> float:
    """Upper regularized incomplete gamma ``Q(a, x) = 1 - P(a, x)``."""
    if a <= 0:
        raise DomainError("shape must be positive")
    if x < 0:
        raise DomainError("argument must be nonnegative")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x)
    return _gamma_continued_fraction(a, x)


def chi_square_upper_tail(q: float, df: int) -> float:
    """``P(chi2_df > q)``."""
    if q < 0 or math.isnan(q):
        raise DomainError("chi-square statistic must be nonnegative")
    if df < 1:
        raise DomainError("degrees of freedom must be at least 1")
    return min(1.0, max(0.0, regularized_gamma_q(df / 2.0, q / 2.0)))


@dataclass(frozen=True)
class PortmanteauStatistic:
    variant: str
    r: int
    Q: float
    df: int
    p_value: float

    def to_dict(self) -> dict:
        return asdict(self)


def _autocorrelations(x: ArrayLike, r: int) -> tuple[int, list[float]]:
    a = as_array(x)
    n = a.size
    if not (1 <= r <= n - 2):
        raise DomainError(f"number of lags {r} outside 1..{n - 2}")
    if sample_variance(a) == 0.0:
        raise DegenerateSeriesError("portmanteau statistic of a constant series")
    return n, [autocorrelation(a, k) for k in range(1, r + 1)]


def ljung_box(x: ArrayLike, r: int = 1) -> PortmanteauStatistic:
    """``Q = n (n + 2) sum_k rho_k**2 / (n - k)`` against chi-square(r)."""
    n, rho = _autocorrelations(x, r)
    q = n * (n + 2) * sum(rk * rk / (n - k) for k, rk in enumerate(rho, start=1))
    return PortmanteauStatistic("ljung-box", r, q, r, chi_square_upper_tail(q, r))


def box_pierce(x: ArrayLike, r: int = 1) -> PortmanteauStatistic:
    """``Q = n sum_k rho_k**2`` against chi-square(r)."""
    n, rho = _autocorrelations(x, r)
    q = n * sum(rk * rk for rk in rho)
    return PortmanteauStatistic("box-pierce", r, q, r, chi_square_upper_tail(q, r))
