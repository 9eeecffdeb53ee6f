"""Long-run variance estimators and the studentized lag statistics.

For a series ``x`` with deviations ``d_i = x_i - mean`` the derived series are
``Y_i = d_i d_{i+k}`` (length ``n - k``) and ``Z_i = d_i**2`` (length ``n``).
The estimators are flat truncated sums of their centered cross products:

* ``K2``  -- long-run variance of ``Z``
* ``T2``  -- long-run variance of ``Y``
* ``nu``  -- long-run covariance of ``Y`` and ``Z``

and ``gamma2 = (T2 - 2 rho nu + rho**2 K2) / var**2``, floored at ``epsilon``.
Population counterparts (kappa^2, tau_k^2, nu_k, gamma_k^2) equal
``gamma_k^2 = 1`` for iid data, which is what makes the studentized statistic
pivotal under permutation.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .errors import DegenerateSeriesError, DomainError, SeriesTooShortError
from .series import ArrayLike, as_array


@dataclass(frozen=True)
class TruncationRule:
    """Truncation lag ``b_n`` as a function of ``n``.

    ``kind`` is one of ``"cbrt"`` (``floor(n**(1/3)) + 1``), ``"power"``
    (``floor(n**value) + 1``) or ``"fixed"`` (``value``).
    """

    kind: str = "cbrt"
    value: float = 1.0 / 3.0

    def __post_init__(self):
        if self.kind not in ("cbrt", "power", "fixed"):
            raise DomainError(f"unknown truncation rule {self.kind!r}")
        if self.kind == "fixed" and (self.value < 1 or int(self.value) != self.value):
            raise DomainError("fixed truncation lag must be a positive integer")
        if self.kind == "power" and not (0 < self.value < 0.5):
            raise DomainError("power truncation exponent must lie in (0, 1/2)")

    def __call__(self, n: int) -> int:
        if self.kind == "fixed":
            return int(self.value)
        if self.kind == "power":
            return int(math.floor(n**self.value)) + 1
        # integer cube root; n**(1/3) alone misses perfect cubes
        b = int(round(n ** (1.0 / 3.0)))
        while b**3 > n:
            b -= 1
        while (b + 1) ** 3 <= n:
            b += 1
        return b + 1

    def __str__(self) -> str:
        if self.kind == "cbrt":
            return "cbrt"
        if self.kind == "fixed":
            return f"fixed:{int(self.value)}"
        return f"power:{self.value:g}"

    @classmethod
    def parse(cls, text: str) -> "TruncationRule":
        """Parse ``cbrt``, ``fixed:<int>`` or ``power:<exponent>``."""
        text = text.strip()
        if text == "cbrt":
            return cls()
        m = re.fullmatch(r"(fixed|power):([0-9.eE+-]+)", text)
        if not m:
            raise DomainError(f"cannot parse truncation rule {text!r}")
        return cls(m.group(1), float(m.group(2)))


@dataclass(frozen=True)
class StudentizerConfig:
    lag: int = 1
    truncation: TruncationRule = field(default_factory=TruncationRule)
    epsilon: float = 1e-6
    n_min: int = 20

    def __post_init__(self):
        if self.lag < 1:
            raise DomainError("lag must be a positive integer")
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")

    def bandwidth(self, n: int) -> tuple[int, bool]:
        """Truncation lag for length ``n`` after clamping to ``n - lag - 2``.

        Returns ``(b, clamped)``.
        """
        upper = n - self.lag - 2
        if upper < 1:
            raise SeriesTooShortError(
                f"length {n} leaves no room for truncation at lag {self.lag}"
            )
        b = self.truncation(n)
        if b > upper:
            return upper, True
        return max(b, 1), False


@dataclass(frozen=True)
class VarianceComponents:
    K2: float
    T2: float
    nu: float
    gamma2: float
    floored: bool
    variance: float
    autocovariance: float
    autocorrelation: float
    bandwidth: int
    clamped: bool = False


def derived_series(x: ArrayLike, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Return the lag-``k`` product series ``Y`` and squared deviations ``Z``."""
    a = as_array(x)
    n = a.size
    if not (1 <= k <= n - 2):
        raise DomainError(f"lag {k} outside 1..{n - 2}")
    d = a - a.mean()
    return d[: n - k] * d[k:], d * d


def _prepare(x: ArrayLike, cfg: StudentizerConfig) -> tuple[np.ndarray, int, bool]:
    a = as_array(x)
    n = a.size
    if n < cfg.n_min:
        raise SeriesTooShortError(f"series of length {n} is shorter than n_min={cfg.n_min}")
    if cfg.lag > n - 2:
        raise DomainError(f"lag {cfg.lag} outside 1..{n - 2}")
    b, clamped = cfg.bandwidth(n)
    if np.all(a == a[0]):
        raise DegenerateSeriesError("studentizing a constant series")
    return np.ascontiguousarray(a), b, clamped


def variance_components(x: ArrayLike, cfg: StudentizerConfig = StudentizerConfig()) -> VarianceComponents:
    a, b, clamped = _prepare(x, cfg)
    var, c, K2, T2, nu = _kernels.components(a, cfg.lag, b)
    if var == 0.0:
        raise DegenerateSeriesError("studentizing a series with zero variance")
    rho = c / var
    raw = (T2 - 2.0 * rho * nu + rho * rho * K2) / (var * var)
    return VarianceComponents(
        K2=K2,
        T2=T2,
        nu=nu,
        gamma2=max(cfg.epsilon, raw),
        floored=bool(raw < cfg.epsilon),
        variance=var,
        autocovariance=c,
        autocorrelation=rho,
        bandwidth=b,
        clamped=clamped,
    )


def studentized_rho_statistic(x: ArrayLike, cfg: StudentizerConfig = StudentizerConfig()) -> float:
    """``sqrt(n) * rho_k / gamma_k`` with the floored studentizer."""
    vc = variance_components(x, cfg)
    n = as_array(x).size
    return math.sqrt(n) * vc.autocorrelation / math.sqrt(vc.gamma2)


def studentized_cov_statistic(x: ArrayLike, cfg: StudentizerConfig = StudentizerConfig()) -> float:
    """``sqrt(n) * c_k / T_k`` with ``T_k**2`` floored at ``epsilon``."""
    vc = variance_components(x, cfg)
    n = as_array(x).size
    return math.sqrt(n) * vc.autocovariance / math.sqrt(max(cfg.epsilon, vc.T2))


def unstudentized_rho_statistic(x: ArrayLike, k: int = 1) -> float:
    """Plain ``sqrt(n) * rho_k``, the statistic whose permutation test is not robust."""
    a = as_array(x)
    n = a.size
    if not (1 <= k <= n - 2):
        raise DomainError(f"lag {k} outside 1..{n - 2}")
    d = a - a.mean()
    var = float(np.dot(d, d)) / n
    if var == 0.0:
        raise DegenerateSeriesError("autocorrelation of a constant series")
    return math.sqrt(n) * float(np.dot(d[: n - k], d[k:])) / (n - k) / var


@dataclass(frozen=True)
class LagStatistic:
    """A permutation-ready lag statistic.

    Calling it on a 1-D series returns a float; :meth:`permuted` evaluates it on
    many reorderings at once through the compiled kernel. Both paths share the
    same kernel, so the identity ordering reproduces the observed value bit for
    bit.
    """

    kind: str = "studentized"
    config: StudentizerConfig = field(default_factory=StudentizerConfig)

    _KINDS = {
        "studentized": _kernels.RHO_STUDENTIZED,
        "unstudentized": _kernels.RHO,
        "cov": _kernels.COV_STUDENTIZED,
    }

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise DomainError(f"unknown statistic {self.kind!r}")

    @property
    def lag(self) -> int:
        return self.config.lag

    def _bandwidth(self, a: np.ndarray) -> int:
        if self.kind == "unstudentized":
            if not (1 <= self.lag <= a.size - 2):
                raise DomainError(f"lag {self.lag} outside 1..{a.size - 2}")
            if np.all(a == a[0]):
                raise DegenerateSeriesError("autocorrelation of a constant series")
            return 0
        return _prepare(a, self.config)[1]

    def __call__(self, x: ArrayLike) -> float:
        return float(self.permuted(x, np.arange(as_array(x).size)[None, :])[0])

    def permuted(self, x: ArrayLike, perms: np.ndarray) -> np.ndarray:
        a = np.ascontiguousarray(as_array(x))
        b = self._bandwidth(a)
        perms = np.ascontiguousarray(perms, dtype=np.int64)
        return _kernels.statistic_permuted(
            a, perms, self.lag, b, self.config.epsilon, self._KINDS[self.kind]
        )


def make_statistic(kind: str, lag: int = 1, config: Optional[StudentizerConfig] = None) -> LagStatistic:
    cfg = config or StudentizerConfig()
    if cfg.lag != lag:
        cfg = StudentizerConfig(lag, cfg.truncation, cfg.epsilon, cfg.n_min)
    return LagStatistic(kind, cfg)
