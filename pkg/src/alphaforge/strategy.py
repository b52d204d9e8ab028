"""Trade decision logic: hybrid score, entry/exit rules and volatility sizing.

Hybrid mode, evaluated in order on each ticker-day:

1. standardize the raw feature vector with the model's embedded scaler,
2. classify next-day direction (y_hat in {0, 1}),
3. hybrid score = y_hat, +1 when price > EMA50 AND MACD > signal (both
   required), +1 when RSI14 < 30,
4. entry (only when flat): regime bullish AND price > EMA200 AND
   score >= 2, sized by min(floor(0.01*cash / ATR), floor(0.1*cash / price));
   a strongly negative sentiment score additionally blocks new entries,
5. exit (only when holding): y_hat == 0 OR regime bearish OR RSI14 > 70 OR
   sentiment score < -0.70 sells the full position,
6. otherwise hold.

Baseline mode uses SMA50/SMA200 trend confirmation with RSI(14)
mean-reversion entries and the same sizing formula: buy when flat, SMA50 >
SMA200 and RSI < 30; sell when holding and (SMA50 < SMA200 or RSI > 70). No
model, no sentiment, no regime.

Risk is measured against current free cash, long-only, integer shares.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, replace
from datetime import date
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import ConfigError, InvariantViolation, ZeroAtr
from .gbdt import ModelBundle
from .sentiment import SENTIMENT_GATE_THRESHOLD, DailySentiment, gate_blocks_entry

logger = logging.getLogger(__name__)


class ActionKind(Enum):
    BUY = "BUY"
    SELL_ALL = "SELL_ALL"
    HOLD = "HOLD"


@dataclass(frozen=True)
class TradeAction:
    kind: ActionKind
    shares: int = 0

    def __post_init__(self) -> None:
        if self.kind is ActionKind.BUY and self.shares <= 0:
            raise InvariantViolation("Buy action requires a positive share count")
        if self.kind is not ActionKind.BUY and self.shares != 0:
            raise InvariantViolation(f"{self.kind.value} carries no share count")


HOLD = TradeAction(ActionKind.HOLD)
SELL_ALL = TradeAction(ActionKind.SELL_ALL)


def buy(shares: int) -> TradeAction:
    return TradeAction(ActionKind.BUY, shares)


@dataclass(frozen=True)
class StrategyConfig:
    """Strategy thresholds and mode selection."""

    mode: str = "hybrid"
    score_min: int = 2
    rsi_entry: float = 30.0
    rsi_exit: float = 70.0
    sentiment_gate: float = SENTIMENT_GATE_THRESHOLD
    risk_frac: float = 0.01
    notional_cap_frac: float = 0.1

    def __post_init__(self) -> None:
        if self.mode not in ("hybrid", "baseline"):
            raise ConfigError(f"mode {self.mode!r} must be 'hybrid' or 'baseline'")
        if not 0.0 < self.risk_frac <= 1.0 or not 0.0 < self.notional_cap_frac <= 1.0:
            raise ConfigError("risk_frac and notional_cap_frac must be in (0, 1]")

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "thresholds": {
                "score_min": self.score_min,
                "rsi_entry": self.rsi_entry,
                "rsi_exit": self.rsi_exit,
                "sentiment_gate": self.sentiment_gate,
                "risk_frac": self.risk_frac,
                "notional_cap_frac": self.notional_cap_frac,
            },
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "StrategyConfig":
        thresholds = payload.get("thresholds", {})
        return cls(mode=payload.get("mode", "hybrid"), **thresholds)

    @classmethod
    def load(cls, path: str | Path) -> "StrategyConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def with_mode(self, mode: str) -> "StrategyConfig":
        return replace(self, mode=mode)


@dataclass(frozen=True)
class HybridScore:
    ml_component: int
    trend_bonus: int
    meanrev_bonus: int

    @property
    def total(self) -> int:
        return self.ml_component + self.trend_bonus + self.meanrev_bonus


@dataclass(frozen=True)
class DecisionInputs:
    """Everything one ticker-day decision may consult. All indicator values defined."""

    ticker: str
    date: date
    price: float
    features: np.ndarray
    ema50: float
    ema200: float
    macd: float
    macd_signal: float
    rsi14: float
    atr: float
    regime: int
    sentiment: DailySentiment | None
    cash: float
    has_open_position: bool
    sma50: float | None = None
    sma200: float | None = None

    def __post_init__(self) -> None:
        if self.price <= 0:
            raise InvariantViolation(f"{self.ticker} {self.date}: price must be > 0")
        if self.cash < 0:
            raise InvariantViolation(f"{self.ticker} {self.date}: cash must be >= 0")
        if self.regime not in (1, -1):
            raise InvariantViolation(f"{self.ticker} {self.date}: regime {self.regime} must be +1/-1")
        for name in ("ema50", "ema200", "macd", "macd_signal", "rsi14", "atr"):
            if math.isnan(getattr(self, name)):
                raise InvariantViolation(f"{self.ticker} {self.date}: {name} undefined")


def hybrid_score(y_hat: int, price: float, ema50: float, macd: float,
                 macd_signal: float, rsi14: float, cfg: StrategyConfig = StrategyConfig()) -> HybridScore:
    """Integer 0-3 combining the model vote, trend confirmation and mean reversion."""
    return HybridScore(
        ml_component=1 if y_hat == 1 else 0,
        trend_bonus=1 if (price > ema50 and macd > macd_signal) else 0,
        meanrev_bonus=1 if rsi14 < cfg.rsi_entry else 0,
    )


def size_position(cash: float, atr: float, price: float,
                  risk_frac: float = 0.01, notional_cap_frac: float = 0.1) -> int:
    """shares = min(floor(risk_frac*cash / ATR), floor(notional_cap_frac*cash / price))."""
    if atr <= 0 or math.isnan(atr):
        raise ZeroAtr(f"ATR {atr!r} must be > 0 for sizing")
    if price <= 0:
        raise InvariantViolation(f"price {price!r} must be > 0")
    if cash < 0:
        raise InvariantViolation(f"cash {cash!r} must be >= 0")
    shares_risk = math.floor(risk_frac * cash / atr)
    shares_cap = math.floor(notional_cap_frac * cash / price)
    return min(shares_risk, shares_cap)


def decide(inputs: DecisionInputs, model: ModelBundle,
           cfg: StrategyConfig = StrategyConfig()) -> TradeAction:
    """Hybrid decision for one ticker-day. Total: always returns an action."""
    y_hat = model.predict_label(inputs.features)
    score = hybrid_score(y_hat, inputs.price, inputs.ema50, inputs.macd,
                         inputs.macd_signal, inputs.rsi14, cfg)

    if not inputs.has_open_position:
        if (
            inputs.regime == 1
            and inputs.price > inputs.ema200
            and score.total >= cfg.score_min
            and not gate_blocks_entry(inputs.sentiment, cfg.sentiment_gate)
        ):
            try:
                shares = size_position(inputs.cash, inputs.atr, inputs.price,
                                       cfg.risk_frac, cfg.notional_cap_frac)
            except ZeroAtr:
                logger.warning("%s %s: entry skipped, non-positive ATR", inputs.ticker, inputs.date)
                return HOLD
            if shares > 0:
                return buy(shares)
        return HOLD

    if (
        y_hat == 0
        or inputs.regime == -1
        or inputs.rsi14 > cfg.rsi_exit
        or gate_blocks_entry(inputs.sentiment, cfg.sentiment_gate)
    ):
        return SELL_ALL
    return HOLD


def decide_baseline(inputs: DecisionInputs, cfg: StrategyConfig = StrategyConfig(mode="baseline")) -> TradeAction:
    """SMA-crossover + RSI baseline decision for one ticker-day."""
    if inputs.sma50 is None or inputs.sma200 is None:
        raise InvariantViolation(f"{inputs.ticker} {inputs.date}: baseline requires sma50/sma200")
    if not inputs.has_open_position:
        if inputs.sma50 > inputs.sma200 and inputs.rsi14 < cfg.rsi_entry:
            try:
                shares = size_position(inputs.cash, inputs.atr, inputs.price,
                                       cfg.risk_frac, cfg.notional_cap_frac)
            except ZeroAtr:
                logger.warning("%s %s: entry skipped, non-positive ATR", inputs.ticker, inputs.date)
                return HOLD
            if shares > 0:
                return buy(shares)
        return HOLD
    if inputs.sma50 < inputs.sma200 or inputs.rsi14 > cfg.rsi_exit:
        return SELL_ALL
    return HOLD
