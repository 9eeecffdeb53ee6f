"""Familywise error control for the per-lag permutation p-values."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class PortmanteauResult:
    r: int
    pvalues: tuple[float, ...]
    correction: str
    alpha: float
    cutoff: float
    rejected: tuple[int, ...]  # 1-based lag indices

    @property
    def global_reject(self) -> bool:
        return bool(self.rejected)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["global_reject"] = self.global_reject
        return d


def _check(pvals: Sequence[float], alpha: float) -> np.ndarray:
    p = np.asarray(pvals, dtype=float).reshape(-1)
    if p.size == 0:
        raise DomainError("no p-values supplied")
    if np.any(~np.isfinite(p)) or np.any((p < 0) | (p > 1)):
        raise DomainError("p-values must lie in [0, 1]")
    if not (0 < alpha < 1):
        raise DomainError("alpha must lie in (0, 1)")
    return p


def _single_step(p, alpha, cutoff, name) -> PortmanteauResult:
    rejected = tuple(int(i) + 1 for i in np.flatnonzero(p <= cutoff))
    return PortmanteauResult(p.size, tuple(map(float, p)), name, alpha, float(cutoff), rejected)


def bonferroni(pvals: Sequence[float], alpha: float = 0.05) -> PortmanteauResult:
    p = _check(pvals, alpha)
    return _single_step(p, alpha, alpha / p.size, "bonferroni")


def sidak(pvals: Sequence[float], alpha: float = 0.05) -> PortmanteauResult:
    p = _check(pvals, alpha)
    # -expm1(log1p(-alpha)/r) == 1 - (1-alpha)**(1/r) without cancellation
    cutoff = alpha if p.size == 1 else -np.expm1(np.log1p(-alpha) / p.size)
    return _single_step(p, alpha, cutoff, "sidak")


def holm(pvals: Sequence[float], alpha: float = 0.05) -> PortmanteauResult:
    """Holm step-down; ties in the ordering are broken by original index.

    ``cutoff`` reports the first (most stringent) step, ``alpha / r``.
    """
    p = _check(pvals, alpha)
    r = p.size
    order = np.argsort(p, kind="stable")
    rejected = []
    for step, idx in enumerate(order):
        if p[idx] <= alpha / (r - step):
            rejected.append(int(idx) + 1)
        else:
            break
    return PortmanteauResult(r, tuple(map(float, p)), "holm", alpha, alpha / r, tuple(sorted(rejected)))


CORRECTIONS = {"bonferroni": bonferroni, "sidak": sidak, "holm": holm}


def correct(pvals: Sequence[float], alpha: float = 0.05, method: str = "bonferroni") -> PortmanteauResult:
    try:
        fn = CORRECTIONS[method]
    except KeyError:
        raise DomainError(f"unknown correction {method!r}") from None
    return fn(pvals, alpha)
