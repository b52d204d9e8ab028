"""Feature matrix assembly, binary next-day labels, and z-score standardization.

The model consumes exactly ten features per row, in this fixed order. A row
exists for (ticker, date t) only when every feature is defined at t and the
ticker has a bar at t+1 inside the assembly range (the label needs the next
close, and reaching past the range end would leak).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import EmptyDataset, InvariantViolation, SeriesTooShort, TooFewRows
from .indicators import IndicatorFrame
from .market_data import BarSeries, Universe

FEATURE_NAMES = (
    "ema50", "ema200", "ema_ratio", "macd", "macd_signal", "macd_hist",
    "rsi14", "bb_width", "atr14", "vol20",
)
N_FEATURES = len(FEATURE_NAMES)


def check_feature_matrix(X: np.ndarray) -> np.ndarray:
    """Coerce to a finite (n, 10) float64 matrix or raise."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != N_FEATURES:
        raise InvariantViolation(f"expected an (n, {N_FEATURES}) feature matrix, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise InvariantViolation("feature matrix contains non-finite values")
    return X


class FeatureScaler(TransformerMixin, BaseEstimator):
    """Z-score scaler fitted on training rows only (population standard deviation).

    Zero-variance features get std clamped to 1 and are flagged constant, so the
    transformed column is identically 0 rather than an error.
    """

    def fit(self, X, y=None) -> "FeatureScaler":
        X = check_feature_matrix(X)
        if X.shape[0] < 2:
            raise TooFewRows(f"scaler needs >= 2 rows, got {X.shape[0]}")
        self.mean_ = X.mean(axis=0)
        std = X.std(axis=0)
        self.constant_flags_ = std == 0.0
        self.std_ = np.where(self.constant_flags_, 1.0, std)
        self.n_fitted_rows_ = int(X.shape[0])
        return self

    def transform(self, X) -> np.ndarray:
        X = check_feature_matrix(X)
        return (X - self.mean_) / self.std_

    def inverse_transform(self, X) -> np.ndarray:
        X = check_feature_matrix(X)
        return X * self.std_ + self.mean_

    def to_dict(self) -> dict:
        return {
            "features": list(FEATURE_NAMES),
            "mean": [float(v) for v in self.mean_],
            "std": [float(v) for v in self.std_],
            "constant_flags": [bool(v) for v in self.constant_flags_],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "FeatureScaler":
        if payload.get("features") != list(FEATURE_NAMES):
            raise InvariantViolation(f"scaler feature list {payload.get('features')!r} does not match {FEATURE_NAMES}")
        scaler = cls()
        scaler.mean_ = np.array(payload["mean"], dtype=float)
        scaler.std_ = np.array(payload["std"], dtype=float)
        scaler.constant_flags_ = np.array(payload["constant_flags"], dtype=bool)
        scaler.n_fitted_rows_ = int(payload.get("n_fitted_rows", 2))
        if (scaler.std_ <= 0).any():
            raise InvariantViolation("scaler std values must be > 0")
        return scaler

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "FeatureScaler":
        return cls.from_dict(json.loads(Path(path).read_text()))


def make_labels(series: BarSeries) -> list[tuple[date, int]]:
    """Binary next-day direction labels: 1 iff close(t+1) > close(t), for every t but the last."""
    if len(series) < 2:
        raise SeriesTooShort(f"{series.ticker}: need >= 2 bars for labels, got {len(series)}")
    closes = series.closes()
    return [
        (series.bars[t].date, 1 if closes[t + 1] > closes[t] else 0)
        for t in range(len(series) - 1)
    ]


@dataclass(frozen=True)
class Dataset:
    """Pooled multi-ticker rows: parallel (ticker, date) keys, features X, labels y."""

    tickers: tuple[str, ...]
    dates: tuple[date, ...]
    X: np.ndarray
    y: np.ndarray

    def __len__(self) -> int:
        return len(self.y)

    def subset(self, mask: np.ndarray) -> "Dataset":
        idx = np.flatnonzero(mask)
        return Dataset(
            tickers=tuple(self.tickers[i] for i in idx),
            dates=tuple(self.dates[i] for i in idx),
            X=self.X[idx],
            y=self.y[idx],
        )

    def split_by_date_fraction(self, train_fraction: float) -> tuple["Dataset", "Dataset"]:
        """Chronological split at a date boundary: the earliest ceil(fraction * n_dates)
        distinct dates form the first segment (no date straddles the cut)."""
        distinct = sorted(set(self.dates))
        if len(distinct) < 2:
            raise TooFewRows(f"need >= 2 distinct dates to split, got {len(distinct)}")
        n_train = math.ceil(train_fraction * len(distinct))
        n_train = min(max(n_train, 1), len(distinct) - 1)
        cutoff = distinct[n_train - 1]
        mask = np.array([d <= cutoff for d in self.dates])
        return self.subset(mask), self.subset(~mask)


def extract_features(frame: IndicatorFrame, idx: int) -> np.ndarray | None:
    """The 10-feature vector at one row of a frame, or None if any value is undefined."""
    values = np.array([float(getattr(frame, name)[idx]) for name in FEATURE_NAMES])
    if np.isnan(values).any():
        return None
    return values


def build_dataset(
    universe: Universe,
    frames: dict[str, IndicatorFrame],
    date_range: tuple[date, date],
) -> Dataset:
    """Pool labelable feature rows across tickers within [start, end].

    Row order is deterministic: ticker alphabetical, then date ascending. The
    label at date t uses the ticker's next bar, which must itself fall inside
    the range.
    """
    start, end = date_range
    tickers: list[str] = []
    dates: list[date] = []
    rows: list[np.ndarray] = []
    labels: list[int] = []
    for ticker in universe.tickers:
        series = universe.series_by_ticker[ticker]
        frame = frames[ticker]
        if frame.dates != series.dates:
            raise InvariantViolation(f"{ticker}: indicator frame dates do not match the series")
        closes = series.closes()
        for t in range(len(series) - 1):
            d = series.bars[t].date
            next_d = series.bars[t + 1].date
            if d < start or next_d > end:
                continue
            x = extract_features(frame, t)
            if x is None:
                continue
            tickers.append(ticker)
            dates.append(d)
            rows.append(x)
            labels.append(1 if closes[t + 1] > closes[t] else 0)
    if not rows:
        raise EmptyDataset(f"no labelable rows with defined features in [{start}, {end}]")
    return Dataset(
        tickers=tuple(tickers),
        dates=tuple(dates),
        X=np.vstack(rows),
        y=np.array(labels, dtype=np.int64),
    )
