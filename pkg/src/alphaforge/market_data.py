"""OHLCV ingestion, validation, calendar alignment and chronological splitting.

Bars are daily resolution only. Inputs are assumed already split/dividend
adjusted; there is no forward-filling of missing dates (a halted ticker is
simply skipped by downstream consumers on that day).
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

from .errors import (
    DegenerateSplit,
    DuplicateDate,
    EmptyFile,
    EmptyUniverse,
    InvariantViolation,
    MalformedRow,
)

logger = logging.getLogger(__name__)

OHLCV_HEADER = ["date", "open", "high", "low", "close", "volume"]


@dataclass(frozen=True)
class Bar:
    """One daily OHLCV bar."""

    date: date
    open: float
    high: float
    low: float
    close: float
    volume: int

    def __post_init__(self) -> None:
        for name in ("open", "high", "low", "close"):
            px = getattr(self, name)
            if not math.isfinite(px) or px <= 0:
                raise InvariantViolation(f"{self.date}: {name}={px!r} must be a positive finite price")
        if self.volume < 0:
            raise InvariantViolation(f"{self.date}: volume={self.volume} must be >= 0")
        if self.low > min(self.open, self.close):
            raise InvariantViolation(f"{self.date}: low={self.low} above min(open, close)")
        if self.high < max(self.open, self.close):
            raise InvariantViolation(f"{self.date}: high={self.high} below max(open, close)")


@dataclass(frozen=True)
class BarSeries:
    """Chronologically ordered bars for one ticker."""

    ticker: str
    bars: tuple[Bar, ...]

    def __post_init__(self) -> None:
        if not self.ticker:
            raise InvariantViolation("ticker must be non-empty")
        if len(self.bars) < 1:
            raise InvariantViolation(f"{self.ticker}: series must contain at least one bar")
        for prev, cur in zip(self.bars, self.bars[1:]):
            if cur.date == prev.date:
                raise DuplicateDate(f"{self.ticker}: duplicate bar for {cur.date}")
            if cur.date < prev.date:
                raise InvariantViolation(f"{self.ticker}: bars not in ascending date order at {cur.date}")

    def __len__(self) -> int:
        return len(self.bars)

    @property
    def dates(self) -> tuple[date, ...]:
        return tuple(b.date for b in self.bars)

    def closes(self) -> list[float]:
        return [b.close for b in self.bars]

    def index_of(self, d: date) -> int | None:
        """Index of the bar dated exactly `d`, or None if the ticker has no bar that day."""
        lo, hi = 0, len(self.bars) - 1
        while lo <= hi:
            mid = (lo + hi) // 2
            if self.bars[mid].date < d:
                lo = mid + 1
            elif self.bars[mid].date > d:
                hi = mid - 1
            else:
                return mid
        return None


@dataclass(frozen=True)
class Universe:
    """Immutable collection of per-ticker series sharing one trading calendar."""

    series_by_ticker: dict[str, BarSeries]
    trading_calendar: tuple[date, ...] = field(init=False)

    def __post_init__(self) -> None:
        if not self.series_by_ticker:
            raise EmptyUniverse("universe has no tickers")
        all_dates: set[date] = set()
        for ticker, series in self.series_by_ticker.items():
            if ticker != series.ticker:
                raise InvariantViolation(f"key {ticker!r} does not match series ticker {series.ticker!r}")
            all_dates.update(series.dates)
        object.__setattr__(self, "trading_calendar", tuple(sorted(all_dates)))

    @property
    def tickers(self) -> list[str]:
        return sorted(self.series_by_ticker)


def _parse_row(lineno: int, row: list[str]) -> Bar:
    if len(row) != 6:
        raise MalformedRow(f"line {lineno}: expected 6 fields, got {len(row)}")
    try:
        d = date.fromisoformat(row[0])
    except ValueError as exc:
        raise MalformedRow(f"line {lineno}: bad date {row[0]!r} (daily YYYY-MM-DD only)") from exc
    try:
        o, h, l, c = (float(row[i]) for i in range(1, 5))
        volume_raw = float(row[5])
    except ValueError as exc:
        raise MalformedRow(f"line {lineno}: non-numeric field in {row!r}") from exc
    if volume_raw != int(volume_raw):
        raise MalformedRow(f"line {lineno}: volume {row[5]!r} is not an integer share count")
    return Bar(date=d, open=o, high=h, low=l, close=c, volume=int(volume_raw))


def load_ohlcv_csv(path: str | Path, ticker: str | None = None) -> BarSeries:
    """Load and validate one per-ticker OHLCV CSV.

    The ticker defaults to the file stem. Rows may arrive in any order; the
    returned series is sorted ascending by date.
    """
    path = Path(path)
    if ticker is None:
        ticker = path.stem
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFile(f"{path}: file is empty") from None
        if [h.strip().lower() for h in header] != OHLCV_HEADER:
            raise MalformedRow(f"{path}: bad header {header!r}, expected {OHLCV_HEADER}")
        bars = [_parse_row(lineno, row) for lineno, row in enumerate(reader, start=2) if row]
    if not bars:
        raise EmptyFile(f"{path}: no data rows")
    bars.sort(key=lambda b: b.date)
    return BarSeries(ticker=ticker, bars=tuple(bars))


def write_ohlcv_csv(series: BarSeries, path: str | Path) -> None:
    """Write a series in the canonical CSV format (floats as shortest round-trip repr)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(OHLCV_HEADER)
        for b in series.bars:
            writer.writerow([b.date.isoformat(), repr(b.open), repr(b.high), repr(b.low), repr(b.close), b.volume])


def load_universe(data_dir: str | Path, tickers: list[str] | None = None) -> Universe:
    """Load every `<TICKER>.csv` under `data_dir` (or the given subset) into a Universe."""
    data_dir = Path(data_dir)
    if tickers is None:
        paths = sorted(data_dir.glob("*.csv"))
    else:
        paths = [data_dir / f"{t}.csv" for t in sorted(tickers)]
    series = {}
    for p in paths:
        s = load_ohlcv_csv(p)
        series[s.ticker] = s
    return Universe(series_by_ticker=series)


def train_test_split(series: BarSeries, train_fraction: float) -> tuple[BarSeries, BarSeries]:
    """Chronological split: the earliest ceil(fraction * n) bars go to the train segment."""
    if not 0.0 < train_fraction < 1.0:
        raise DegenerateSplit(f"train_fraction={train_fraction} must be in (0, 1)")
    n = len(series)
    if n < 2:
        raise DegenerateSplit(f"{series.ticker}: need at least 2 bars to split, got {n}")
    n_train = math.ceil(train_fraction * n)
    if n_train == 0 or n_train == n:
        raise DegenerateSplit(f"{series.ticker}: split {n_train}/{n - n_train} leaves one side empty")
    train = BarSeries(ticker=series.ticker, bars=series.bars[:n_train])
    test = BarSeries(ticker=series.ticker, bars=series.bars[n_train:])
    return train, test


def truncate_series(series: BarSeries, end: date) -> BarSeries | None:
    """Bars dated <= end, or None if nothing remains."""
    kept = tuple(b for b in series.bars if b.date <= end)
    if not kept:
        return None
    return BarSeries(ticker=series.ticker, bars=kept)


def align_to_calendar(universe: Universe, start: date, end: date) -> Universe:
    """Restrict every series to [start, end], dropping tickers that become empty."""
    if start > end:
        raise InvariantViolation(f"start {start} after end {end}")
    kept: dict[str, BarSeries] = {}
    dropped: list[str] = []
    for ticker in universe.tickers:
        series = universe.series_by_ticker[ticker]
        bars = tuple(b for b in series.bars if start <= b.date <= end)
        if bars:
            kept[ticker] = BarSeries(ticker=ticker, bars=bars)
        else:
            dropped.append(ticker)
    if dropped:
        logger.warning("align_to_calendar dropped %d ticker(s) with no bars in range: %s", len(dropped), dropped)
    if not kept:
        raise EmptyUniverse(f"no ticker has bars within [{start}, {end}]")
    return Universe(series_by_ticker=kept)
