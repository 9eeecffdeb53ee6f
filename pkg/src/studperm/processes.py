"""Seeded simulators for the null and local-alternative processes.

Every generator is a deterministic function of its parameters and seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Optional, Union

import numpy as np
from scipy.signal import lfilter

from .errors import DomainError
from .rng import substream

KINDS = ("iid", "m-dependent-product", "ar1-local", "ar2", "ar2-product", "arma")
LAWS = ("gaussian", "uniform", "student-t")

Seed = Union[int, np.random.Generator]


def _rng(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return substream(seed)


def sample_innovation(law: str, rng: Seed, size: Optional[int] = None, df: Optional[float] = None):
    """Draw innovations: ``gaussian`` N(0,1), ``uniform`` U[-1,1] or ``student-t`` with ``df``.

    Student-t draws are a standard normal over ``sqrt(chi2(df)/df)``.
    Returns a float when ``size`` is None.
    """
    g = _rng(rng)
    m = 1 if size is None else size
    if law == "gaussian":
        out = g.standard_normal(m)
    elif law == "uniform":
        out = 2.0 * g.random(m) - 1.0
    elif law == "student-t":
        if df is None or not df > 0:
            raise DomainError("student-t innovations need df > 0")
        out = g.standard_normal(m) / np.sqrt(g.chisquare(df, m) / df)
    else:
        raise DomainError(f"unknown innovation law {law!r}")
    return float(out[0]) if size is None else out


def _check_ar_stationary(ar: tuple[float, ...]) -> None:
    if not ar:
        return
    # roots of 1 - a1 z - ... - ap z^p must lie outside the unit circle
    roots = np.roots(np.r_[-np.asarray(ar[::-1]), 1.0])
    if np.any(np.abs(roots) <= 1.0 + 1e-12):
        raise DomainError(f"AR coefficients {ar} are not stationary")


def gen_m_dependent_product(m: int, power: int, n: int, seed: Seed) -> np.ndarray:
    """Sliding products of ``m + 1`` consecutive ``G_j**power``, ``G_j`` iid N(0,1).

    ``m`` is the dependence range: ``m = 0`` gives an iid series.
    """
    if m < 0:
        raise DomainError("m must be nonnegative")
    if power < 1 or power % 2 == 0:
        raise DomainError("power must be a positive odd integer")
    if n < 1:
        raise DomainError("n must be positive")
    z = _rng(seed).standard_normal(n + m) ** power
    x = z[:n].copy()
    for j in range(1, m + 1):
        x *= z[j : j + n]
    return x


def gen_ar2(
    phi: float,
    rho: float,
    n: int,
    innovation: str = "gaussian",
    seed: Seed = 0,
    burn_in: int = 1000,
    df: Optional[float] = None,
) -> np.ndarray:
    """``X_t = phi X_{t-1} + rho X_{t-2} + e_t`` from a zero state, first ``burn_in`` dropped."""
    _check_ar_stationary((phi, rho))
    return gen_arma((phi, rho), (), n, innovation, seed, burn_in, df)


def gen_arma(
    ar: tuple[float, ...],
    ma: tuple[float, ...],
    n: int,
    innovation: str = "gaussian",
    seed: Seed = 0,
    burn_in: int = 1000,
    df: Optional[float] = None,
) -> np.ndarray:
    ar, ma = tuple(ar), tuple(ma)
    _check_ar_stationary(ar)
    if n < 1 or burn_in < 0:
        raise DomainError("n must be positive and burn_in nonnegative")
    e = sample_innovation(innovation, _rng(seed), n + burn_in, df)
    x = lfilter(np.r_[1.0, ma], np.r_[1.0, -np.asarray(ar, dtype=float)], e)
    return x[burn_in:]


def gen_ar2_product(rho: float, n: int, seed: Seed = 0, burn_in: int = 1000) -> np.ndarray:
    """Interleave two independent series of lag-adjacent products of AR(1)(``rho``) chains.

    Even positions carry ``A_i A_{i+1}``, odd positions ``B_i B_{i+1}``, where
    ``A`` and ``B`` are the (independent) even and odd subsequences of an
    AR(2) process with ``phi = 0``.
    """
    if not abs(rho) < 1:
        raise DomainError("|rho| must be < 1")
    if n < 1:
        raise DomainError("n must be positive")
    g = _rng(seed)
    half = (n + 1) // 2
    out = np.empty(2 * half)
    for offset in (0, 1):
        e = g.standard_normal(half + 1 + burn_in)
        chain = lfilter([1.0], [1.0, -rho], e)[burn_in:]
        out[offset::2] = chain[:-1] * chain[1:]
    return out[:n]


def gen_ar1_local(h: float, n: int, seed: Seed = 0) -> np.ndarray:
    """AR(1) with coefficient ``h / sqrt(n)``, started from its stationary law."""
    if n < 1:
        raise DomainError("n must be positive")
    if not (0 <= h < math.sqrt(n)):
        raise DomainError("h must lie in [0, sqrt(n))")
    r = h / math.sqrt(n)
    e = _rng(seed).standard_normal(n)
    e[0] /= math.sqrt(1.0 - r * r)
    return lfilter([1.0], [1.0, -r], e)


@dataclass(frozen=True)
class ProcessSpec:
    """Tagged description of a data-generating process."""

    kind: str = "iid"
    m: int = 0
    power: int = 1
    phi: float = 0.0
    rho: float = 0.0
    h: float = 0.0
    ar: tuple[float, ...] = ()
    ma: tuple[float, ...] = ()
    innovation: str = "gaussian"
    df: Optional[float] = None
    burn_in: int = 1000

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown process kind {self.kind!r}")
        if self.innovation not in LAWS:
            raise DomainError(f"unknown innovation law {self.innovation!r}")
        if self.innovation == "student-t" and not (self.df and self.df > 0):
            raise DomainError("student-t innovations need df > 0")
        if self.kind == "m-dependent-product" and (self.m < 0 or self.power % 2 == 0 or self.power < 1):
            raise DomainError("products need m >= 0 and an odd power")
        if self.kind == "ar2":
            _check_ar_stationary((self.phi, self.rho))
        if self.kind == "ar2-product" and not abs(self.rho) < 1:
            raise DomainError("|rho| must be < 1")
        if self.kind == "arma":
            _check_ar_stationary(tuple(self.ar))
        object.__setattr__(self, "ar", tuple(float(v) for v in self.ar))
        object.__setattr__(self, "ma", tuple(float(v) for v in self.ma))

    @property
    def label(self) -> str:
        law = {"gaussian": "N(0,1)", "uniform": "U[-1,1]"}.get(self.innovation) or f"t_{self.df:g}"
        if self.kind == "iid":
            return f"iid {law}"
        if self.kind == "m-dependent-product":
            return f"m={self.m}" if self.power == 1 else f"m={self.m}, r={self.power}"
        if self.kind == "ar2":
            return f"AR(2), {law} innov."
        if self.kind == "ar2-product":
            return "AR(2) Prod., N(0,1) innov."
        if self.kind == "ar1-local":
            return f"AR(1) local, h={self.h:g}"
        return f"ARMA(ar={list(self.ar)}, ma={list(self.ma)}), {law} innov."

    def generate(self, n: int, seed: Seed) -> np.ndarray:
        if self.kind == "iid":
            return sample_innovation(self.innovation, _rng(seed), n, self.df)
        if self.kind == "m-dependent-product":
            return gen_m_dependent_product(self.m, self.power, n, seed)
        if self.kind == "ar2":
            return gen_ar2(self.phi, self.rho, n, self.innovation, seed, self.burn_in, self.df)
        if self.kind == "ar2-product":
            return gen_ar2_product(self.rho, n, seed, self.burn_in)
        if self.kind == "ar1-local":
            return gen_ar1_local(self.h, n, seed)
        return gen_arma(self.ar, self.ma, n, self.innovation, seed, self.burn_in, self.df)


_INT_KEYS = {"m", "power", "burn_in", "seed"}
_FLOAT_KEYS = {"phi", "rho", "h", "df"}
_LIST_KEYS = {"ar", "ma"}


def dumps_config(spec: ProcessSpec, seed: Optional[int] = None) -> str:
    """Plain ``key = value`` rendering of a process spec (and optional seed)."""
    lines = []
    for f in fields(spec):
        v = getattr(spec, f.name)
        if v is None:
            continue
        if f.name in _LIST_KEYS:
            v = ", ".join(repr(c) for c in v)
        lines.append(f"{f.name} = {v}")
    if seed is not None:
        lines.append(f"seed = {seed}")
    return "\n".join(lines) + "\n"


def loads_config(text: str) -> tuple[ProcessSpec, Optional[int]]:
    """Parse the ``key = value`` format; ``#`` starts a comment."""
    values: dict = {}
    seed = None
    known = {f.name for f in fields(ProcessSpec)} | {"seed"}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"config line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise DomainError(f"config line {lineno}: unknown key {key!r}")
        try:
            if key in _INT_KEYS:
                parsed = int(val)
            elif key in _FLOAT_KEYS:
                parsed = float(val)
            elif key in _LIST_KEYS:
                parsed = tuple(float(v) for v in val.split(",") if v.strip())
            else:
                parsed = val
        except ValueError:
            raise DomainError(f"config line {lineno}: bad value for {key!r}") from None
        if key == "seed":
            seed = parsed
        else:
            values[key] = parsed
    return ProcessSpec(**values), seed
