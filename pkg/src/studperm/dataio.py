"""Price-history ingestion, log returns and the multi-lag portmanteau pipeline."""
from __future__ import annotations

import csv
import datetime as dt
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .classic import ljung_box
from .errors import DataError, DomainError
from .multiple import PortmanteauResult, correct
from .permutation import PermutationScheme, TestResult, permutation_distribution, randomized_test
from .series import TimeSeries
from .studentizer import LagStatistic, StudentizerConfig


@dataclass(frozen=True)
class PriceHistory:
    dates: tuple[str, ...]
    closes: np.ndarray
    source: str = ""
    dropped: int = 0

    def __post_init__(self):
        closes = np.asarray(self.closes, dtype=float)
        if len(self.dates) != closes.size:
            raise DataError("dates and closes differ in length")
        if np.any(~(closes > 0)):
            raise DataError("closing prices must be positive")
        object.__setattr__(self, "closes", closes)
        object.__setattr__(self, "dates", tuple(self.dates))

    def __len__(self) -> int:
        return self.closes.size


@dataclass(frozen=True)
class ReturnSeries:
    series: TimeSeries
    dates: tuple[str, ...] = ()
    source: str = ""
    dropped: int = 0


def _parse_date(text: str, row: int) -> dt.date:
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError:
        raise DataError(f"row {row}: unparseable date {text!r}") from None


def load_prices(path, date_column: str = "Date", price_column: str = "Close") -> PriceHistory:
    """Read a header-first CSV of dated closing prices.

    Rows whose price is blank or not a number are skipped and counted in
    ``dropped``; a nonpositive price is an error.
    """
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{path} is empty")
        for col in (date_column, price_column):
            if col not in reader.fieldnames:
                raise DataError(f"{path} has no column {col!r}")
        dates, closes, dropped = [], [], 0
        last = None
        for row_no, row in enumerate(reader, start=2):
            raw = (row.get(price_column) or "").strip()
            try:
                price = float(raw)
            except ValueError:
                dropped += 1
                continue
            if not math.isfinite(price):
                dropped += 1
                continue
            if price <= 0:
                raise DataError(f"row {row_no}: nonpositive price {raw!r}")
            day = _parse_date(row[date_column], row_no)
            if last is not None and day <= last:
                raise DataError(f"row {row_no}: dates are not strictly increasing")
            last = day
            dates.append(day.isoformat())
            closes.append(price)
    if not closes:
        raise DataError(f"{path} has no usable price rows")
    return PriceHistory(tuple(dates), np.array(closes), str(path), dropped)


def write_prices(history: PriceHistory, path, date_column: str = "Date", price_column: str = "Close") -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([date_column, price_column])
        for d, c in zip(history.dates, history.closes):
            w.writerow([d, repr(float(c))])


def log_returns(prices: PriceHistory) -> ReturnSeries:
    if len(prices) < 2:
        raise DomainError("need at least two prices for a return")
    r = np.diff(np.log(prices.closes))
    return ReturnSeries(TimeSeries(r), prices.dates[1:], prices.source, prices.dropped)


@dataclass
class PipelineReport:
    per_lag: list[TestResult]
    portmanteau: PortmanteauResult
    ljung_box: dict
    sided: str
    meta: dict = field(default_factory=dict)

    def pvalue(self, result: TestResult) -> float:
        return result.p_two_sided if self.sided == "two-sided" else result.p_greater

    def to_dict(self) -> dict:
        return {
            "per_lag": [
                {"lag": k, "statistic": res.statistic, "p": self.pvalue(res)}
                for k, res in enumerate(self.per_lag, start=1)
            ],
            "sided": self.sided,
            "correction": self.portmanteau.correction,
            "alpha": self.portmanteau.alpha,
            "cutoff": self.portmanteau.cutoff,
            "rejected_lags": list(self.portmanteau.rejected),
            "global_reject": self.portmanteau.global_reject,
            "ljung_box": self.ljung_box,
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self, label: str = "series") -> str:
        """Wide per-lag layout: a header of lags, one row of p-values."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", *range(1, len(self.per_lag) + 1)])
        w.writerow([label, *(f"{self.pvalue(res):.4f}" for res in self.per_lag)])
        return buf.getvalue()


def lag_seed(seed: int, k: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(k,)).generate_state(1, dtype=np.uint64)[0])


def portmanteau_pipeline(
    returns,
    r: int = 10,
    scheme: PermutationScheme = PermutationScheme(),
    config: StudentizerConfig = StudentizerConfig(),
    correction: str = "bonferroni",
    alpha: float = 0.05,
    sided: str = "two-sided",
) -> PipelineReport:
    """Studentized permutation p-values at lags ``1..r`` combined by a FWER correction.

    Lag ``k`` uses the permutation stream seeded ``(scheme.seed, k)``. The
    Ljung-Box test on all ``r`` lags is reported alongside.
    """
    if sided not in ("two-sided", "one-sided-greater"):
        raise DomainError(f"unknown sidedness {sided!r}")
    series = returns.series if isinstance(returns, ReturnSeries) else TimeSeries(returns)
    results = []
    for k in range(1, r + 1):
        cfg = StudentizerConfig(k, config.truncation, config.epsilon, config.n_min)
        lag_scheme = PermutationScheme(scheme.mode, scheme.B, lag_seed(scheme.seed, k), scheme.n_enum)
        dist = permutation_distribution(series, LagStatistic("studentized", cfg), lag_scheme)
        results.append(randomized_test(dist, float(dist.values[0]), alpha))
    pvals = [res.p_two_sided if sided == "two-sided" else res.p_greater for res in results]
    lb = ljung_box(series, r)
    meta = {
        "n": series.n,
        "B": scheme.B,
        "seed": scheme.seed,
        "mode": scheme.mode,
        "bn_rule": str(config.truncation),
        "epsilon": config.epsilon,
    }
    if isinstance(returns, ReturnSeries):
        meta["dropped_rows"] = returns.dropped
    return PipelineReport(results, correct(pvals, alpha, correction), {"Q": lb.Q, "df": lb.df, "p": lb.p_value}, sided, meta)


def load_series(path, column: Optional[str] = None) -> TimeSeries:
    """Read one numeric column from a CSV; a non-numeric first row is taken as the header."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path} is empty")

    def numeric(row):
        try:
            [float(c) for c in row]
            return True
        except ValueError:
            return False

    header = None if numeric(rows[0]) else [c.strip() for c in rows.pop(0)]
    if column is None:
        idx = 0
    elif header is None or column not in header:
        raise DataError(f"{path} has no column {column!r}")
    else:
        idx = header.index(column)
    try:
        values = [float(r[idx]) for r in rows]
    except (ValueError, IndexError):
        raise DataError(f"{path}: non-numeric or missing value in column {idx + 1}") from None
    try:
        return TimeSeries(values)
    except DomainError as exc:
        raise DataError(f"{path}: {exc}") from None
