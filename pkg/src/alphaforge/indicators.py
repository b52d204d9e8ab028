"""Technical indicators and the per-ticker market regime label.

Conventions (all prefix-stable: the value at index t depends only on bars <= t):

* EMA(n): multiplier 2/(n+1), recursion seeded with the first close.
* MACD: EMA12 - EMA26; signal = EMA9 of the MACD line; histogram = MACD - signal.
* RSI(14): Wilder smoothing (first average = simple mean of the first 14
  gains/losses, then (prev*(n-1) + cur)/n). Zero average loss maps to 100,
  zero average gain to 0; the zero-loss rule is checked first, so a flat
  window reads 100.
* Bollinger(20, 2): SMA mid-band +/- 2 population standard deviations of close;
  width = (upper - lower) / mid.
* ATR(14): Wilder smoothing of the true range; the first true range is
  high - low (no previous close).
* vol20: 20-day rolling population standard deviation of one-day close-to-close
  percentage returns (computed on returns, so it is price-scale free).
* regime: sign of the 20-day mean of one-day percentage returns; +1 when
  strictly positive, else -1.

Values inside each field's warm-up window are NaN, never zero-filled. The
recursions run from index 0; the warm-up mask only marks where a field is
considered defined.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields as dataclass_fields
from datetime import date
from pathlib import Path

import numpy as np

from .errors import InvariantViolation, SeriesTooShort
from .market_data import BarSeries


@dataclass(frozen=True)
class IndicatorParams:
    ema_short: int = 50
    ema_long: int = 200
    macd_fast: int = 12
    macd_slow: int = 26
    macd_signal: int = 9
    rsi_period: int = 14
    bb_period: int = 20
    bb_num_std: float = 2.0
    atr_period: int = 14
    vol_period: int = 20
    regime_window: int = 20
    sma_short: int = 50
    sma_long: int = 200

    def __post_init__(self) -> None:
        for f in dataclass_fields(self):
            value = getattr(self, f.name)
            if value <= 0:
                raise InvariantViolation(f"indicator parameter {f.name}={value} must be > 0")


@dataclass(frozen=True)
class IndicatorFrame:
    """Per-date indicator values for one ticker; NaN marks undefined (warm-up)."""

    ticker: str
    dates: tuple[date, ...]
    ema50: np.ndarray
    ema200: np.ndarray
    ema_ratio: np.ndarray
    macd: np.ndarray
    macd_signal: np.ndarray
    macd_hist: np.ndarray
    rsi14: np.ndarray
    bb_upper: np.ndarray
    bb_mid: np.ndarray
    bb_lower: np.ndarray
    bb_width: np.ndarray
    atr14: np.ndarray
    vol20: np.ndarray
    regime: np.ndarray
    # Simple moving averages used only by the baseline strategy mode.
    sma50: np.ndarray
    sma200: np.ndarray

    FIELD_NAMES = (
        "ema50", "ema200", "ema_ratio", "macd", "macd_signal", "macd_hist",
        "rsi14", "bb_upper", "bb_mid", "bb_lower", "bb_width", "atr14",
        "vol20", "regime",
    )

    def warmup_index(self, field: str) -> int | None:
        """Index of the first defined value of `field`, or None if never defined."""
        values = getattr(self, field)
        defined = np.flatnonzero(~np.isnan(values))
        return int(defined[0]) if defined.size else None

    def defined_at(self, idx: int, field_names: tuple[str, ...]) -> bool:
        return all(not math.isnan(float(getattr(self, f)[idx])) for f in field_names)


def _ema(values: np.ndarray, period: int) -> np.ndarray:
    alpha = 2.0 / (period + 1.0)
    out = np.empty_like(values)
    acc = values[0]
    out[0] = acc
    for i in range(1, len(values)):
        acc = alpha * values[i] + (1.0 - alpha) * acc
        out[i] = acc
    return out


def _masked(values: np.ndarray, first_defined: int) -> np.ndarray:
    out = values.copy()
    out[:first_defined] = np.nan
    return out


def _wilder(values: np.ndarray, period: int) -> np.ndarray:
    """Wilder smoothing: SMA of the first `period` values, then the recursion.

    Output is aligned with `values`; the first period-1 slots are NaN.
    """
    n = len(values)
    out = np.full(n, np.nan)
    if n < period:
        return out
    acc = float(np.mean(values[:period]))
    out[period - 1] = acc
    for i in range(period, n):
        acc = (acc * (period - 1) + values[i]) / period
        out[i] = acc
    return out


def _rolling_windows(values: np.ndarray, period: int) -> np.ndarray:
    return np.lib.stride_tricks.sliding_window_view(values, period)


def _rolling_mean(values: np.ndarray, period: int) -> np.ndarray:
    n = len(values)
    out = np.full(n, np.nan)
    if n >= period:
        out[period - 1:] = _rolling_windows(values, period).mean(axis=1)
    return out


def _rolling_pstd(values: np.ndarray, period: int) -> np.ndarray:
    n = len(values)
    out = np.full(n, np.nan)
    if n >= period:
        out[period - 1:] = _rolling_windows(values, period).std(axis=1)
    return out


def _true_range(highs: np.ndarray, lows: np.ndarray, closes: np.ndarray) -> np.ndarray:
    tr = np.empty_like(closes)
    tr[0] = highs[0] - lows[0]
    prev_close = closes[:-1]
    tr[1:] = np.maximum(
        highs[1:] - lows[1:],
        np.maximum(np.abs(highs[1:] - prev_close), np.abs(lows[1:] - prev_close)),
    )
    return tr


def _rsi(closes: np.ndarray, period: int) -> np.ndarray:
    n = len(closes)
    out = np.full(n, np.nan)
    if n < period + 1:
        return out
    deltas = np.diff(closes)
    gains = np.where(deltas > 0, deltas, 0.0)
    losses = np.where(deltas < 0, -deltas, 0.0)
    avg_gain = _wilder(gains, period)
    avg_loss = _wilder(losses, period)
    # avg_* index i describes closes index i+1
    for i in range(period - 1, n - 1):
        ag, al = avg_gain[i], avg_loss[i]
        if al == 0.0:
            out[i + 1] = 100.0
        elif ag == 0.0:
            out[i + 1] = 0.0
        else:
            out[i + 1] = 100.0 - 100.0 / (1.0 + ag / al)
    return out


def pct_returns(closes: np.ndarray) -> np.ndarray:
    """One-day close-to-close percentage changes, aligned at index 1..n-1."""
    return np.diff(closes) / closes[:-1]


def detect_regime(series: BarSeries, window: int = 20) -> np.ndarray:
    """Per-date regime label: +1 when the `window`-day mean return is > 0, else -1.

    NaN during warm-up (the first `window` indices).
    """
    n = len(series)
    if n <= window:
        raise SeriesTooShort(f"{series.ticker}: regime needs more than {window} bars, got {n}")
    closes = np.array(series.closes(), dtype=float)
    rets = pct_returns(closes)
    mean_ret = _rolling_mean(rets, window)  # index i describes closes index i+1
    out = np.full(n, np.nan)
    defined = ~np.isnan(mean_ret)
    out[1:][defined] = np.where(mean_ret[defined] > 0.0, 1.0, -1.0)
    return out


def compute_indicators(series: BarSeries, params: IndicatorParams = IndicatorParams()) -> IndicatorFrame:
    """Compute every indicator field for one series with warm-up NaNs."""
    n = len(series)
    longest = max(params.ema_long, params.sma_long)
    if n < longest:
        raise SeriesTooShort(f"{series.ticker}: need >= {longest} bars for the longest warm-up, got {n}")

    closes = np.array(series.closes(), dtype=float)
    highs = np.array([b.high for b in series.bars], dtype=float)
    lows = np.array([b.low for b in series.bars], dtype=float)

    ema_s = _ema(closes, params.ema_short)
    ema_l = _ema(closes, params.ema_long)
    ema50 = _masked(ema_s, params.ema_short - 1)
    ema200 = _masked(ema_l, params.ema_long - 1)
    ema_ratio = ema50 / ema200  # NaN wherever either side is undefined

    macd_raw = _ema(closes, params.macd_fast) - _ema(closes, params.macd_slow)
    signal_raw = _ema(macd_raw, params.macd_signal)
    macd_warm = params.macd_slow - 1
    signal_warm = macd_warm + params.macd_signal - 1
    macd = _masked(macd_raw, macd_warm)
    macd_signal = _masked(signal_raw, signal_warm)
    macd_hist = _masked(macd_raw - signal_raw, signal_warm)

    rsi14 = _rsi(closes, params.rsi_period)

    bb_mid = _rolling_mean(closes, params.bb_period)
    bb_std = _rolling_pstd(closes, params.bb_period)
    bb_upper = bb_mid + params.bb_num_std * bb_std
    bb_lower = bb_mid - params.bb_num_std * bb_std
    bb_width = (bb_upper - bb_lower) / bb_mid

    tr = _true_range(highs, lows, closes)
    atr14 = _wilder(tr, params.atr_period)

    rets = pct_returns(closes)
    vol20 = np.full(n, np.nan)
    vol_ret = _rolling_pstd(rets, params.vol_period)
    vol20[1:] = vol_ret

    regime = detect_regime(series, params.regime_window) if n > params.regime_window else np.full(n, np.nan)

    sma50 = _rolling_mean(closes, params.sma_short)
    sma200 = _rolling_mean(closes, params.sma_long)

    return IndicatorFrame(
        ticker=series.ticker,
        dates=series.dates,
        ema50=ema50,
        ema200=ema200,
        ema_ratio=ema_ratio,
        macd=macd,
        macd_signal=macd_signal,
        macd_hist=macd_hist,
        rsi14=rsi14,
        bb_upper=bb_upper,
        bb_mid=bb_mid,
        bb_lower=bb_lower,
        bb_width=bb_width,
        atr14=atr14,
        vol20=vol20,
        regime=regime,
        sma50=sma50,
        sma200=sma200,
    )


def write_indicator_csv(frame: IndicatorFrame, path: str | Path) -> None:
    """Dump one frame; undefined values become empty fields, regime prints as 1/-1."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", *IndicatorFrame.FIELD_NAMES])
        for i, d in enumerate(frame.dates):
            row: list[str] = [d.isoformat()]
            for name in IndicatorFrame.FIELD_NAMES:
                v = float(getattr(frame, name)[i])
                if math.isnan(v):
                    row.append("")
                elif name == "regime":
                    row.append(str(int(v)))
                else:
                    row.append(repr(v))
            writer.writerow(row)
