"""Monte Carlo driver for rejection-probability tables and power curves.

Replication ``i`` at sample size ``n`` draws its data from the stream keyed
``(seed, n, i, 0)`` and its permutations from ``(seed, n, i, 1)``, so a table
is a deterministic function of its :class:`ExperimentSpec` no matter how the
replications are spread over workers.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.stats import norm

from .classic import box_pierce, ljung_box
from .errors import DegenerateSeriesError, DomainError, SeriesTooShortError
from .permutation import p_values, PermutationDistribution, MONTE_CARLO, sample_permutations
from .processes import ProcessSpec
from .rng import substream
from .studentizer import LagStatistic, StudentizerConfig, variance_components

log = logging.getLogger(__name__)

TEST_NAMES = {
    "studentized-perm": "Stud. Perm.",
    "unstudentized-perm": "Unst. Perm.",
    "ljung-box": "Ljung-Box",
    "box-pierce": "Box-Pierce",
    "cov-perm": "Cov. Perm.",
}
_PERM_KIND = {"studentized-perm": "studentized", "unstudentized-perm": "unstudentized", "cov-perm": "cov"}
SIDES = ("one-sided-greater", "two-sided")


@dataclass(frozen=True)
class ExperimentSpec:
    process: ProcessSpec
    sizes: tuple[int, ...]
    R: int = 2000
    B: int = 500
    alpha: float = 0.05
    tests: tuple[str, ...] = ("studentized-perm",)
    seed: int = 0
    sided: str = "one-sided-greater"
    config: StudentizerConfig = field(default_factory=StudentizerConfig)

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(self, "tests", tuple(self.tests))
        if self.R < 1 or self.B < 1:
            raise DomainError("R and B must be positive")
        if not (0 < self.alpha < 1):
            raise DomainError("alpha must lie in (0, 1)")
        if not self.sizes or min(self.sizes) < 3:
            raise DomainError("sample sizes must be at least 3")
        unknown = set(self.tests) - set(TEST_NAMES)
        if unknown or not self.tests:
            raise DomainError(f"unknown tests {sorted(unknown)}")
        if self.sided not in SIDES:
            raise DomainError(f"sidedness must be one of {SIDES}")


@dataclass
class Cell:
    rejections: int = 0
    R: int = 0
    degenerate: int = 0
    floored: int = 0

    @property
    def rate(self) -> float:
        return self.rejections / self.R if self.R else float("nan")

    @property
    def se(self) -> float:
        p = self.rate
        return math.sqrt(p * (1 - p) / self.R) if self.R else float("nan")


@dataclass
class RejectionTable:
    sizes: tuple[int, ...]
    rows: list[tuple[str, str]] = field(default_factory=list)
    cells: dict = field(default_factory=dict)  # (label, test) -> {n: Cell}
    meta: dict = field(default_factory=dict)

    def rate(self, label: str, test: str, n: int) -> float:
        return self.cells[(label, test)][n].rate

    def extend(self, other: "RejectionTable") -> None:
        for row in other.rows:
            self.rows.append(row)
            self.cells[row] = other.cells[row]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["process", "test", *self.sizes])
        for label, test in self.rows:
            cells = self.cells[(label, test)]
            w.writerow([label, TEST_NAMES[test], *(f"{cells[n].rate:.4f}" for n in self.sizes)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "sizes": list(self.sizes),
            "meta": self.meta,
            "rows": [
                {
                    "process": label,
                    "test": test,
                    "cells": [
                        {
                            "n": n,
                            "rejection": c.rate,
                            "se": c.se,
                            "R": c.R,
                            "degenerate": c.degenerate,
                            "floored": c.floored,
                        }
                        for n, c in ((n, self.cells[(label, test)][n]) for n in self.sizes)
                    ],
                }
                for label, test in self.rows
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def replicate(spec: ExperimentSpec, n: int, rep: int, keep: int = 0) -> dict:
    """Run one replication.

    Returns ``{test: (p_value | None, statistic | None, floored, extra)}``; a
    ``None`` p-value marks a degenerate replication. ``extra`` holds the first
    ``keep`` non-identity permutation values for permutation tests.
    """
    x = spec.process.generate(n, substream(spec.seed, n, rep, 0))
    perms = None
    out = {}
    for test in spec.tests:
        floored = False
        try:
            if test in _PERM_KIND:
                if perms is None:
                    perms = sample_permutations(n, spec.B, substream(spec.seed, n, rep, 1))
                stat = LagStatistic(_PERM_KIND[test], spec.config)
                values = stat.permuted(x, perms)
                if test != "unstudentized-perm":
                    vc = variance_components(x, spec.config)
                    floored = vc.floored if test == "studentized-perm" else vc.T2 < spec.config.epsilon
                p_gt, _, p_two = p_values(PermutationDistribution(values, MONTE_CARLO), values[0])
                p = p_gt if spec.sided == "one-sided-greater" else p_two
                out[test] = (p, float(values[0]), floored, values[1 : 1 + keep])
            else:
                res = (ljung_box if test == "ljung-box" else box_pierce)(x, 1)
                out[test] = (res.p_value, res.Q, False, None)
        except (DegenerateSeriesError, SeriesTooShortError):
            out[test] = (None, None, False, None)
    return out


def _run_block(args) -> dict:
    spec, n, start, stop = args
    counts = {t: [0, 0, 0] for t in spec.tests}
    for rep in range(start, stop):
        for test, (p, _, floored, _) in replicate(spec, n, rep).items():
            c = counts[test]
            if p is None:
                c[1] += 1
            elif p <= spec.alpha:
                c[0] += 1
            c[2] += int(floored)
    return counts


def _blocks(R: int, jobs: int) -> list[tuple[int, int]]:
    step = max(1, math.ceil(R / max(1, jobs * 4)))
    return [(s, min(R, s + step)) for s in range(0, R, step)]


def rejection_grid(spec: ExperimentSpec, jobs: int = 1) -> RejectionTable:
    """Rejection frequency of each test at each sample size."""
    label = spec.process.label
    table = RejectionTable(spec.sizes)
    for test in spec.tests:
        table.rows.append((label, test))
        table.cells[(label, test)] = {}
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for n in spec.sizes:
            tasks = [(spec, n, a, b) for a, b in _blocks(spec.R, jobs)]
            results = pool.map(_run_block, tasks) if pool else map(_run_block, tasks)
            totals = {t: [0, 0, 0] for t in spec.tests}
            for counts in results:
                for t, c in counts.items():
                    totals[t] = [u + v for u, v in zip(totals[t], c)]
            for t, (rej, deg, flo) in totals.items():
                table.cells[(label, t)][n] = Cell(rej, spec.R, deg, flo)
                if deg:
                    log.warning("%s / %s at n=%d: %d degenerate replications", label, t, n, deg)
    finally:
        if pool:
            pool.shutdown()
    table.meta = {
        "R": spec.R,
        "B": spec.B,
        "alpha": spec.alpha,
        "seed": spec.seed,
        "sided": spec.sided,
        "bn_rule": str(spec.config.truncation),
        "epsilon": spec.config.epsilon,
        "lag": spec.config.lag,
    }
    return table


class PowerPoint(NamedTuple):
    h: float
    rejection: float
    se: float


def local_power_target(h: float, alpha: float = 0.05) -> float:
    """Limiting one-sided power ``1 - Phi(z_{1-alpha} - h)``."""
    return float(norm.sf(norm.isf(alpha) - h))


def local_power_curve(
    h_values: Sequence[float],
    n: int,
    R: int = 2000,
    B: int = 500,
    alpha: float = 0.05,
    seed: int = 0,
    jobs: int = 1,
    config: StudentizerConfig = StudentizerConfig(),
) -> list[PowerPoint]:
    """One-sided studentized-permutation power along local AR(1) alternatives ``rho = h / sqrt(n)``."""
    out = []
    for h in h_values:
        if not (0 <= h < math.sqrt(n)):
            raise DomainError(f"h={h} outside [0, sqrt(n))")
        spec = ExperimentSpec(
            ProcessSpec("ar1-local", h=float(h)), (n,), R, B, alpha, ("studentized-perm",), seed, config=config
        )
        cell = rejection_grid(spec, jobs).cells[(spec.process.label, "studentized-perm")][n]
        out.append(PowerPoint(float(h), cell.rate, cell.se))
    return out


def silverman_bandwidth(samples: Sequence[float]) -> float:
    """``0.9 min(sd, IQR/1.34) N^(-1/5)``; falls back to ``sd`` when the IQR is zero."""
    x = np.asarray(samples, dtype=float)
    sd = float(np.std(x, ddof=1))
    q75, q25 = np.percentile(x, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34) or sd
    if not spread > 0:
        raise DomainError("bandwidth is zero: all samples are equal")
    return 0.9 * spread * x.size ** (-0.2)


def kde_curve(samples: Sequence[float], grid: Sequence[float], bandwidth: Optional[float] = None) -> list[tuple[float, float]]:
    """Gaussian-kernel density estimate evaluated on ``grid``."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2 and bandwidth is None:
        raise DomainError("need at least two samples")
    bw = silverman_bandwidth(x) if bandwidth is None else float(bandwidth)
    if not bw > 0:
        raise DomainError("bandwidth must be positive")
    t = np.asarray(grid, dtype=float)
    dens = np.zeros(t.size)
    for chunk in np.array_split(x, max(1, x.size // 4096)):
        dens += norm.pdf((t[:, None] - chunk[None, :]) / bw).sum(axis=1)
    dens /= x.size * bw
    return list(zip(t.tolist(), dens.tolist()))


def qq_pvalues(pvals: Sequence[float]) -> list[tuple[float, float]]:
    """Pairs ``((i - 0.5) / N, p_(i))`` for a uniform QQ plot."""
    p = np.sort(np.asarray(pvals, dtype=float))
    N = p.size
    if N == 0:
        raise DomainError("no p-values supplied")
    return list(zip(((np.arange(1, N + 1) - 0.5) / N).tolist(), p.tolist()))


def ks_distance(values: Sequence[float], cdf=norm.cdf) -> float:
    """Sup distance between the empirical CDF of ``values`` and ``cdf``."""
    v = np.sort(np.asarray(values, dtype=float))
    N = v.size
    F = cdf(v)
    upper = np.arange(1, N + 1) / N - F
    lower = F - np.arange(N) / N
    return float(max(upper.max(), lower.max()))


def figure_data(spec: ExperimentSpec, n: int, test: str = "studentized-perm", keep: int = 20) -> dict:
    """Plot-ready samples for one cell: observed statistics, pooled permutation values, p-values.

    ``keep`` permutation values per replication are pooled.
    """
    if test not in _PERM_KIND:
        raise DomainError("figure data is defined for permutation tests only")
    spec = replace(spec, tests=(test,))
    observed, pooled, pvals = [], [], []
    for rep in range(spec.R):
        p, stat, _, extra = replicate(spec, n, rep, keep)[test]
        if p is None:
            continue
        observed.append(stat)
        pvals.append(p)
        pooled.extend(extra.tolist())
    return {"observed": np.array(observed), "permutation": np.array(pooled), "pvalues": np.array(pvals)}


def write_two_column_csv(path, header: tuple[str, str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for a, b in rows:
            w.writerow([repr(float(a)), repr(float(b))])


# ---------------------------------------------------------------- presets

PAPER_SIZES = (10, 20, 50, 80, 100, 500, 1000)
SCALES = {"desk": (2000, 500), "full": (10_000, 2000)}
# studentized statistics are run down to n = 10 in the tables
TABLE_CONFIG = StudentizerConfig(n_min=10)

_MDEP = tuple(ProcessSpec("m-dependent-product", m=m) for m in range(4))
_ALPHA = (
    ProcessSpec("ar2", phi=0.0, rho=0.5),
    ProcessSpec("ar2-product", rho=0.5),
    ProcessSpec("ar2", phi=0.0, rho=0.5, innovation="uniform"),
    ProcessSpec("ar2", phi=0.0, rho=0.5, innovation="student-t", df=9.5),
)
_CLASSIC = ("studentized-perm", "unstudentized-perm", "ljung-box", "box-pierce")

PRESETS = {
    "table1": [(p, _CLASSIC) for p in _MDEP],
    "table2": [(p, _CLASSIC) for p in _ALPHA],
    "table5": [(p, ("cov-perm",)) for p in _MDEP + _ALPHA],
}
FIGURE4_H = tuple(np.round(np.arange(0.0, 3.01, 0.25), 2).tolist())
FIGURE4_SIZES = (100, 500, 1000)


def preset_specs(
    name: str,
    scale: str = "desk",
    seed: int = 0,
    sizes: Optional[Sequence[int]] = None,
    R: Optional[int] = None,
    B: Optional[int] = None,
) -> list[ExperimentSpec]:
    if name not in PRESETS:
        raise DomainError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    if scale not in SCALES:
        raise DomainError(f"unknown scale {scale!r}")
    r0, b0 = SCALES[scale]
    return [
        ExperimentSpec(p, tuple(sizes or PAPER_SIZES), R or r0, B or b0, 0.05, tests, seed, config=TABLE_CONFIG)
        for p, tests in PRESETS[name]
    ]


def run_preset(name: str, jobs: int = 1, **kwargs) -> RejectionTable:
    specs = preset_specs(name, **kwargs)
    table = RejectionTable(specs[0].sizes)
    for spec in specs:
        part = rejection_grid(spec, jobs)
        table.extend(part)
        table.meta = part.meta
    table.meta = {**table.meta, "preset": name}
    return table
