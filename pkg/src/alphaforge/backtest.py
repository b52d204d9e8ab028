"""Deterministic event-driven daily backtest with strict no-look-ahead.

Each calendar day inside the run range, in order:

1. fill pending orders for tickers that trade today, at today's open
   (orders decided on day t therefore fill at the next available bar, never
   the bar that produced the signal),
2. take decisions per ticker in alphabetical order using data up to and
   including today's close; a ticker with an order still pending, a missing
   bar, or incomplete indicator warm-up is skipped,
3. mark the portfolio at the close.

Cash never goes negative: a buy whose cost exceeds free cash at fill time is
rejected and logged. Cash and prices are 64-bit floats; accounting checks run
at 1e-6 currency tolerance. Commission defaults to 0 and only affects cash,
not the recorded cost basis.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

from .errors import ConfigError, InvariantViolation, OverdraftRejected
from .gbdt import ModelBundle
from .indicators import IndicatorFrame
from .market_data import Universe
from .features import extract_features
from .sentiment import DailySentiment
from .strategy import (
    ActionKind,
    DecisionInputs,
    StrategyConfig,
    TradeAction,
    decide,
    decide_baseline,
)

logger = logging.getLogger(__name__)

CAP_SLACK = 1e-9  # relative slack for floating-point cap asserts

TRADE_LOG_HEADER = ["date", "symbol", "action", "size", "fill_price", "portfolio_value"]
EQUITY_HEADER = ["date", "cash", "positions_value", "total_value"]


@dataclass
class Position:
    shares: int
    avg_cost: float
    entry_date: date


@dataclass(frozen=True)
class TradeRecord:
    date: date
    symbol: str
    action: str  # BUY | SELL
    size: int
    fill_price: float
    portfolio_value_after: float

    def __post_init__(self) -> None:
        if self.size <= 0 or self.fill_price <= 0:
            raise InvariantViolation(f"{self.symbol} {self.date}: size and fill_price must be > 0")


@dataclass(frozen=True)
class EquityPoint:
    date: date
    cash: float
    positions_value: float

    @property
    def total_value(self) -> float:
        return self.cash + self.positions_value


@dataclass
class PortfolioState:
    cash: float
    positions: dict[str, Position] = field(default_factory=dict)
    trade_log: list[TradeRecord] = field(default_factory=list)
    equity_curve: list[EquityPoint] = field(default_factory=list)

    def positions_value(self, marks: dict[str, float]) -> float:
        return sum((pos.shares * marks[t] for t, pos in self.positions.items()), 0.0)


@dataclass(frozen=True)
class BacktestConfig:
    start: date
    end: date
    initial_cash: float = 100_000.0
    commission: float = 0.0
    fill_policy: str = "next-open"

    def __post_init__(self) -> None:
        if self.initial_cash <= 0:
            raise ConfigError(f"initial_cash={self.initial_cash} must be > 0")
        if self.start > self.end:
            raise ConfigError(f"start {self.start} after end {self.end}")
        if self.commission < 0:
            raise ConfigError(f"commission={self.commission} must be >= 0")
        if self.fill_policy != "next-open":
            raise ConfigError(f"unsupported fill policy {self.fill_policy!r}")


@dataclass(frozen=True)
class PendingOrder:
    ticker: str
    action: TradeAction
    decision_date: date


def execute_order(state: PortfolioState, order: PendingOrder, fill_price: float,
                  fill_date: date, commission: float, marks: dict[str, float]) -> TradeRecord:
    """Apply one fill to the ledger and append its TradeRecord.

    BUY debits shares*price + commission and updates the position's average
    cost as a share-weighted mean; SELL closes the full position and credits
    proceeds minus commission. The logged portfolio value marks the traded
    ticker at the fill price and every other position at its last close.
    """
    ticker = order.ticker
    if order.action.kind is ActionKind.BUY:
        shares = order.action.shares
        cost = shares * fill_price + commission
        if cost > state.cash:
            raise OverdraftRejected(
                f"{ticker} {fill_date}: BUY {shares} @ {fill_price} costs {cost:.2f} > cash {state.cash:.2f}")
        state.cash -= cost
        pos = state.positions.get(ticker)
        if pos is None:
            state.positions[ticker] = Position(shares=shares, avg_cost=fill_price, entry_date=fill_date)
        else:
            total = pos.shares + shares
            pos.avg_cost = (pos.shares * pos.avg_cost + shares * fill_price) / total
            pos.shares = total
        action = "BUY"
        size = shares
    elif order.action.kind is ActionKind.SELL_ALL:
        pos = state.positions.pop(ticker, None)
        if pos is None:
            raise InvariantViolation(f"{ticker} {fill_date}: SELL with no open position")
        state.cash += pos.shares * fill_price - commission
        action = "SELL"
        size = pos.shares
    else:
        raise InvariantViolation(f"cannot execute a {order.action.kind.value} order")

    fill_marks = dict(marks)
    fill_marks[ticker] = fill_price
    record = TradeRecord(
        date=fill_date,
        symbol=ticker,
        action=action,
        size=size,
        fill_price=fill_price,
        portfolio_value_after=state.cash + state.positions_value(fill_marks),
    )
    state.trade_log.append(record)
    return record


def _assert_buy_caps(action: TradeAction, cash: float, atr: float, price: float,
                     cfg: StrategyConfig) -> None:
    notional = action.shares * price
    risk = action.shares * atr
    cap = cfg.notional_cap_frac * cash
    risk_cap = cfg.risk_frac * cash
    if notional > cap * (1.0 + CAP_SLACK) or risk > risk_cap * (1.0 + CAP_SLACK):
        raise InvariantViolation(
            f"buy violates sizing caps: notional {notional} vs {cap}, risk {risk} vs {risk_cap}")


def run_backtest(
    universe: Universe,
    frames: dict[str, IndicatorFrame],
    sentiment: dict[tuple[str, date], DailySentiment],
    model: ModelBundle | None,
    config: BacktestConfig,
    strategy_cfg: StrategyConfig = StrategyConfig(),
) -> PortfolioState:
    """Run the daily simulation and return the final ledger (trade log + equity curve inside)."""
    if strategy_cfg.mode == "hybrid" and model is None:
        raise ConfigError("hybrid mode requires a trained model")

    calendar = [d for d in universe.trading_calendar if config.start <= d <= config.end]
    if not calendar:
        raise ConfigError(f"no trading days within [{config.start}, {config.end}]")

    tickers = universe.tickers
    bar_index = {t: {b.date: i for i, b in enumerate(universe.series_by_ticker[t].bars)} for t in tickers}

    state = PortfolioState(cash=config.initial_cash)
    marks: dict[str, float] = {}  # last known close per ticker
    pending: list[PendingOrder] = []
    warned_warmup: set[str] = set()

    for today in calendar:
        # 1. fills at today's open, oldest orders first (FIFO; alphabetical within a day)
        still_pending: list[PendingOrder] = []
        for order in pending:
            idx = bar_index[order.ticker].get(today)
            if idx is None:
                still_pending.append(order)
                continue
            open_px = universe.series_by_ticker[order.ticker].bars[idx].open
            try:
                execute_order(state, order, open_px, today, config.commission, marks)
            except OverdraftRejected as exc:
                logger.warning("order rejected: %s", exc)
        pending = still_pending

        # 2. decisions on data <= today, alphabetical ticker order (shared cash pool)
        pending_tickers = {o.ticker for o in pending}
        for ticker in tickers:
            if ticker in pending_tickers:
                continue
            idx = bar_index[ticker].get(today)
            if idx is None:
                continue
            frame = frames[ticker]
            inputs = _decision_inputs(universe, frame, ticker, idx, today, sentiment, state)
            if inputs is None:
                if ticker not in warned_warmup:
                    logger.info("%s: warm-up incomplete at %s, skipping until indicators defined", ticker, today)
                    warned_warmup.add(ticker)
                continue
            if strategy_cfg.mode == "hybrid":
                action = decide(inputs, model, strategy_cfg)
            else:
                action = decide_baseline(inputs, strategy_cfg)
            if action.kind is ActionKind.BUY:
                _assert_buy_caps(action, inputs.cash, inputs.atr, inputs.price, strategy_cfg)
                pending.append(PendingOrder(ticker=ticker, action=action, decision_date=today))
            elif action.kind is ActionKind.SELL_ALL:
                pending.append(PendingOrder(ticker=ticker, action=action, decision_date=today))

        # 3. mark at the close
        for ticker in tickers:
            idx = bar_index[ticker].get(today)
            if idx is not None:
                marks[ticker] = universe.series_by_ticker[ticker].bars[idx].close
        positions_value = state.positions_value(marks)
        state.equity_curve.append(EquityPoint(date=today, cash=state.cash, positions_value=positions_value))

    if pending:
        logger.info("range ended with %d unfilled order(s); dropped", len(pending))
    return state


_REQUIRED_FIELDS = ("ema50", "ema200", "macd", "macd_signal", "rsi14", "atr14",
                    "regime", "sma50", "sma200")


def _decision_inputs(universe, frame, ticker, idx, today, sentiment, state):
    """Assemble DecisionInputs at one bar, or None while warm-up is incomplete.

    Both modes wait for the full 200-bar warm-up (sma200/ema200 dominate), so
    hybrid and baseline runs trade over identical eligible ticker-days.
    """
    if not frame.defined_at(idx, _REQUIRED_FIELDS):
        return None
    features = extract_features(frame, idx)
    if features is None:
        return None
    bar = universe.series_by_ticker[ticker].bars[idx]
    return DecisionInputs(
        ticker=ticker,
        date=today,
        price=bar.close,
        features=features,
        ema50=float(frame.ema50[idx]),
        ema200=float(frame.ema200[idx]),
        macd=float(frame.macd[idx]),
        macd_signal=float(frame.macd_signal[idx]),
        rsi14=float(frame.rsi14[idx]),
        atr=float(frame.atr14[idx]),
        regime=int(frame.regime[idx]),
        sentiment=sentiment.get((ticker, today)),
        cash=state.cash,
        has_open_position=ticker in state.positions,
        sma50=float(frame.sma50[idx]),
        sma200=float(frame.sma200[idx]),
    )


def write_trade_log_csv(trades: list[TradeRecord], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRADE_LOG_HEADER)
        for t in trades:
            writer.writerow([t.date.isoformat(), t.symbol, t.action, t.size,
                             repr(t.fill_price), repr(t.portfolio_value_after)])


def load_trade_log_csv(path: str | Path) -> list[TradeRecord]:
    out = []
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != TRADE_LOG_HEADER:
            raise InvariantViolation(f"{path}: bad trade log header {header!r}")
        for row in reader:
            out.append(TradeRecord(
                date=date.fromisoformat(row[0]), symbol=row[1], action=row[2],
                size=int(row[3]), fill_price=float(row[4]), portfolio_value_after=float(row[5]),
            ))
    return out


def write_equity_csv(curve: list[EquityPoint], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(EQUITY_HEADER)
        for p in curve:
            writer.writerow([p.date.isoformat(), repr(p.cash), repr(p.positions_value),
                             repr(p.total_value)])


def load_equity_csv(path: str | Path) -> list[EquityPoint]:
    out = []
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != EQUITY_HEADER:
            raise InvariantViolation(f"{path}: bad equity header {header!r}")
        for row in reader:
            out.append(EquityPoint(date=date.fromisoformat(row[0]), cash=float(row[1]),
                                   positions_value=float(row[2])))
    return out
