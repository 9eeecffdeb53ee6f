"""Permutation reference distributions, p-values and the randomized test."""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass
from typing import Callable, Union

import numpy as np

from .errors import DomainError, EnumerationTooLargeError
from .rng import substream
from .series import ArrayLike, as_array
from .studentizer import LagStatistic, StudentizerConfig, make_statistic

Statistic = Union[LagStatistic, Callable[[np.ndarray], float]]

FULL = "full-enumeration"
MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True)
class PermutationScheme:
    mode: str = MONTE_CARLO
    B: int = 2000
    seed: int = 0
    n_enum: int = 8

    def __post_init__(self):
        if self.mode not in (FULL, MONTE_CARLO):
            raise DomainError(f"unknown permutation mode {self.mode!r}")
        if self.B < 1:
            raise DomainError("B must be a positive integer")
        if not (0 <= self.seed < 2**64):
            raise DomainError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class PermutationDistribution:
    """Statistic values over the reference set of orderings.

    ``values[0]`` always belongs to the identity ordering.
    """

    values: np.ndarray
    mode: str

    @property
    def size(self) -> int:
        return int(self.values.size)

    def cdf(self, t: float) -> float:
        """Fraction of reference values ``<= t``."""
        return float(np.count_nonzero(self.values <= t)) / self.size


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_greater: float
    p_less: float
    p_two_sided: float
    m_plus: int
    m_zero: int
    a: float
    phi: float
    decision: str
    alpha: float
    mode: str
    n_reference: int
    reference_mean: float
    reference_sd: float

    def to_dict(self) -> dict:
        return asdict(self)


def all_permutations(n: int) -> np.ndarray:
    """Every ordering of ``range(n)`` with the identity in row 0."""
    return np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)


def sample_permutations(n: int, B: int, rng: np.random.Generator) -> np.ndarray:
    """Identity row followed by ``B`` uniform shuffles (with replacement)."""
    perms = np.empty((B + 1, n), dtype=np.int64)
    perms[0] = np.arange(n)
    perms[1:] = rng.permuted(np.broadcast_to(np.arange(n), (B, n)), axis=1)
    return perms


def reference_values(x: ArrayLike, statistic: Statistic, perms: np.ndarray) -> np.ndarray:
    a = as_array(x)
    if isinstance(statistic, LagStatistic):
        return statistic.permuted(a, perms)
    return np.array([statistic(a[p]) for p in perms], dtype=float)


def permutation_distribution(
    x: ArrayLike, statistic: Statistic, scheme: PermutationScheme = PermutationScheme()
) -> PermutationDistribution:
    a = as_array(x)
    n = a.size
    if scheme.mode == FULL:
        if n > scheme.n_enum:
            raise EnumerationTooLargeError(
                f"full enumeration of {n}! orderings exceeds n_enum={scheme.n_enum}"
            )
        perms = all_permutations(n)
    else:
        perms = sample_permutations(n, scheme.B, substream(scheme.seed))
    return PermutationDistribution(reference_values(a, statistic, perms), scheme.mode)


def p_values(dist: PermutationDistribution, observed: float) -> tuple[float, float, float]:
    """Return ``(p_greater, p_less, p_two_sided)``; ties count toward rejection."""
    v = dist.values
    if v.size == 0:
        raise DomainError("empty permutation distribution")
    N = v.size
    return (
        np.count_nonzero(v >= observed) / N,
        np.count_nonzero(v <= observed) / N,
        np.count_nonzero(np.abs(v) >= abs(observed)) / N,
    )


def randomized_test(dist: PermutationDistribution, observed: float, alpha: float) -> TestResult:
    """Randomized level-``alpha`` permutation test for large values of the statistic.

    With full enumeration the test is ``phi = 1`` above the order statistic
    ``T^(m)``, ``m = N - floor(alpha N)``, ``phi = a`` on ties with it, and
    ``0`` below, which makes it exact under exchangeability. With sampled
    permutations the decision is ``p_greater <= alpha`` and ``a = 0``.
    """
    if not (0.0 < alpha < 1.0):
        raise DomainError("alpha must lie in (0, 1)")
    v = np.sort(dist.values)
    N = v.size
    p_gt, p_lt, p_two = p_values(dist, observed)
    m = N - math.floor(alpha * N * (1 + 1e-12))
    t_m = v[m - 1]
    m_plus = int(np.count_nonzero(v > t_m))
    m_zero = int(np.count_nonzero(v == t_m))
    if dist.mode == FULL:
        a = (alpha * N - m_plus) / m_zero
        if observed > t_m:
            phi, decision = 1.0, "reject"
        elif observed == t_m:
            phi, decision = a, "randomized"
        else:
            phi, decision = 0.0, "accept"
    else:
        a = 0.0
        phi = 1.0 if p_gt <= alpha else 0.0
        decision = "reject" if phi else "accept"
    return TestResult(
        statistic=float(observed),
        p_greater=float(p_gt),
        p_less=float(p_lt),
        p_two_sided=float(p_two),
        m_plus=m_plus,
        m_zero=m_zero,
        a=float(a),
        phi=float(phi),
        decision=decision,
        alpha=float(alpha),
        mode=dist.mode,
        n_reference=int(N),
        reference_mean=float(v.mean()),
        reference_sd=float(v.std()),
    )


def permutation_test(
    x: ArrayLike,
    method: str = "studentized",
    lag: int = 1,
    scheme: PermutationScheme = PermutationScheme(),
    config: StudentizerConfig | None = None,
    alpha: float = 0.05,
) -> TestResult:
    """Permutation test of zero lag-``lag`` autocorrelation (or autocovariance).

    ``method`` is ``"studentized"``, ``"unstudentized"`` or ``"cov"``.
    """
    stat = make_statistic(method, lag, config)
    dist = permutation_distribution(x, stat, scheme)
    return randomized_test(dist, float(dist.values[0]), alpha)
