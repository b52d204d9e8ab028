"""Portfolio performance metrics, the portfolio log file, and benchmark rows.

Conventions: Sharpe uses daily simple returns, zero risk-free rate, sample
standard deviation and sqrt(252) annualization, and is defined as 0 when the
return variance is 0. CAGR year counts are exact day counts / 365.25. Win
ratio counts realized round trips only (a win needs sell proceeds strictly
above total cost); holding periods are calendar days from first entry fill to
exit fill.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np

from .backtest import EquityPoint, TradeRecord
from .errors import InvariantViolation, MissingRangeData, UnmatchedSell
from .market_data import BarSeries

TRADING_DAYS_PER_YEAR = 252
DAYS_PER_YEAR = 365.25


@dataclass(frozen=True)
class MetricsReport:
    final_value: float
    remaining_cash: float
    positions_value: float
    total_return_pct: float
    cagr_pct: float
    max_drawdown_pct: float
    sharpe: float
    win_ratio_pct: float
    avg_holding_days: float
    n_round_trips: int

    def to_dict(self) -> dict:
        return {
            "final_value": self.final_value,
            "remaining_cash": self.remaining_cash,
            "positions_value": self.positions_value,
            "total_return_pct": self.total_return_pct,
            "cagr_pct": self.cagr_pct,
            "max_drawdown_pct": self.max_drawdown_pct,
            "sharpe": self.sharpe,
            "win_ratio_pct": self.win_ratio_pct,
            "avg_holding_days": self.avg_holding_days,
            "n_round_trips": self.n_round_trips,
        }


@dataclass(frozen=True)
class BenchmarkRow:
    name: str
    final_value: float
    return_pct: float
    cagr_pct: float


@dataclass(frozen=True)
class RoundTrip:
    ticker: str
    entry_date: date
    exit_date: date
    total_cost: float
    proceeds: float

    @property
    def is_win(self) -> bool:
        return self.proceeds > self.total_cost

    @property
    def holding_days(self) -> int:
        return (self.exit_date - self.entry_date).days


def total_return(initial: float, final: float) -> float:
    """(final / initial - 1) * 100."""
    if initial <= 0:
        raise InvariantViolation(f"initial value {initial} must be > 0")
    return (final / initial - 1.0) * 100.0


def cagr(initial: float, final: float, years: float) -> float:
    """((final / initial) ** (1 / years) - 1) * 100."""
    if initial <= 0 or years <= 0:
        raise InvariantViolation(f"initial {initial} and years {years} must be > 0")
    return ((final / initial) ** (1.0 / years) - 1.0) * 100.0


def max_drawdown(values: list[float] | np.ndarray) -> float:
    """Worst peak-to-trough decline in percent (<= 0)."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise InvariantViolation("drawdown needs a non-empty curve")
    if (values <= 0).any():
        raise InvariantViolation("drawdown curve values must be > 0")
    running_max = np.maximum.accumulate(values)
    return float((values / running_max - 1.0).min() * 100.0)


def sharpe(values: list[float] | np.ndarray) -> float:
    """Annualized mean/std of daily simple returns; 0 for flat or too-short curves."""
    values = np.asarray(values, dtype=float)
    if values.size < 3:
        return 0.0
    rets = np.diff(values) / values[:-1]
    std = float(np.std(rets, ddof=1))
    if std == 0.0:
        return 0.0
    return float(np.mean(rets) / std * math.sqrt(TRADING_DAYS_PER_YEAR))


def round_trips(trades: list[TradeRecord]) -> list[RoundTrip]:
    """Pair BUY accumulations with their closing SELL per ticker (long-only, full exits)."""
    open_lots: dict[str, dict] = {}
    trips: list[RoundTrip] = []
    for t in trades:
        if t.action == "BUY":
            lot = open_lots.setdefault(t.symbol, {"cost": 0.0, "shares": 0, "entry": t.date})
            lot["cost"] += t.size * t.fill_price
            lot["shares"] += t.size
        elif t.action == "SELL":
            lot = open_lots.pop(t.symbol, None)
            if lot is None:
                raise UnmatchedSell(f"{t.symbol} {t.date}: SELL without prior BUY")
            if t.size != lot["shares"]:
                raise UnmatchedSell(f"{t.symbol} {t.date}: SELL size {t.size} != held {lot['shares']}")
            trips.append(RoundTrip(
                ticker=t.symbol, entry_date=lot["entry"], exit_date=t.date,
                total_cost=lot["cost"], proceeds=t.size * t.fill_price,
            ))
        else:
            raise InvariantViolation(f"unknown trade action {t.action!r}")
    return trips


def trade_stats(trades: list[TradeRecord]) -> tuple[float, float, int]:
    """(win_ratio_pct, avg_holding_days, n_round_trips); zeros when nothing closed."""
    trips = round_trips(trades)
    if not trips:
        return 0.0, 0.0, 0
    wins = sum(1 for t in trips if t.is_win)
    avg_days = sum(t.holding_days for t in trips) / len(trips)
    return wins / len(trips) * 100.0, avg_days, len(trips)


def compute_metrics_report(initial_cash: float, equity_curve: list[EquityPoint],
                           trades: list[TradeRecord]) -> MetricsReport:
    if not equity_curve:
        raise InvariantViolation("cannot report on an empty equity curve")
    last = equity_curve[-1]
    values = [p.total_value for p in equity_curve]
    years = max((equity_curve[-1].date - equity_curve[0].date).days, 1) / DAYS_PER_YEAR
    win_ratio, avg_days, n_trips = trade_stats(trades)
    return MetricsReport(
        final_value=last.total_value,
        remaining_cash=last.cash,
        positions_value=last.positions_value,
        total_return_pct=total_return(initial_cash, last.total_value),
        cagr_pct=cagr(initial_cash, last.total_value, years),
        max_drawdown_pct=max_drawdown(values),
        sharpe=sharpe(values),
        win_ratio_pct=win_ratio,
        avg_holding_days=avg_days,
        n_round_trips=n_trips,
    )


def benchmark_compare(index_series: dict[str, BarSeries], initial: float,
                      start: date, end: date) -> list[BenchmarkRow]:
    """Buy-and-hold each index over [start, end], normalized to `initial`, best first."""
    rows = []
    for name in sorted(index_series):
        series = index_series[name]
        in_range = [b for b in series.bars if start <= b.date <= end]
        if len(in_range) < 2:
            raise MissingRangeData(f"{name}: fewer than 2 bars within [{start}, {end}]")
        final = initial * in_range[-1].close / in_range[0].close
        years = max((in_range[-1].date - in_range[0].date).days, 1) / DAYS_PER_YEAR
        rows.append(BenchmarkRow(
            name=name,
            final_value=final,
            return_pct=total_return(initial, final),
            cagr_pct=cagr(initial, final, years),
        ))
    rows.sort(key=lambda r: -r.return_pct)
    return rows


PORTFOLIO_LOG_LINES = (
    ("Final Portfolio Value", "final_value"),
    ("Market Value of Positions", "positions_value"),
    ("Cash Balance", "remaining_cash"),
    ("Total Return (%)", "total_return_pct"),
    ("CAGR (%)", "cagr_pct"),
    ("Max Drawdown (%)", "max_drawdown_pct"),
    ("Sharpe Ratio", "sharpe"),
    ("Win Ratio (%)", "win_ratio_pct"),
    ("Avg Holding Period (days)", "avg_holding_days"),
)


def write_portfolio_log(report: MetricsReport, path: str | Path) -> None:
    """Fixed-order `key: value` lines, two decimals."""
    lines = [f"{label}: {getattr(report, attr):.2f}" for label, attr in PORTFOLIO_LOG_LINES]
    Path(path).write_text("\n".join(lines) + "\n")


def write_report_json(report: MetricsReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")


def write_benchmark_csv(strategy_row: BenchmarkRow, rows: list[BenchmarkRow], path: str | Path) -> None:
    """Benchmark table: the strategy plus each index, sorted by return descending."""
    merged = sorted([strategy_row, *rows], key=lambda r: -r.return_pct)
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "final_value", "return_pct", "cagr_pct"])
        for r in merged:
            writer.writerow([r.name, f"{r.final_value:.2f}", f"{r.return_pct:.2f}", f"{r.cagr_pct:.2f}"])


def write_plot_data_csv(equity_curve: list[EquityPoint], index_series: dict[str, BarSeries],
                        initial: float, path: str | Path) -> None:
    """Per-date strategy value plus each index normalized to `initial` (empty when no bar)."""
    names = sorted(index_series)
    first_close: dict[str, float] = {}
    closes: dict[str, dict[date, float]] = {}
    for name in names:
        bars = index_series[name].bars
        closes[name] = {b.date: b.close for b in bars}
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "strategy_value", *names])
        for p in equity_curve:
            row = [p.date.isoformat(), repr(p.total_value)]
            for name in names:
                px = closes[name].get(p.date)
                if px is None:
                    row.append("")
                else:
                    if name not in first_close:
                        first_close[name] = px
                    row.append(repr(initial * px / first_close[name]))
            writer.writerow(row)
