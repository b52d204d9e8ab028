"""Independent oracle implementations and synthetic-data builders for the tests.

Every oracle here recomputes a quantity from its direct definition, on a
different code path from the library (closed forms instead of recursions,
stdlib statistics instead of numpy reductions, explicit replays instead of
incremental ledgers), so implementation and check never share a route.
"""

from __future__ import annotations

import math
import statistics
from datetime import date, timedelta

import numpy as np

from alphaforge.backtest import TradeRecord
from alphaforge.market_data import Bar, BarSeries


# ---------------------------------------------------------------------------
# synthetic bar builders

def make_series(closes, ticker="TEST", start=date(2020, 1, 1), opens=None,
                highs=None, lows=None, volume=1000) -> BarSeries:
    """Weekday bars from a close path; OHLC tightened around open/close."""
    bars = []
    d = start
    prev_close = closes[0]
    for i, c in enumerate(closes):
        while d.weekday() >= 5:
            d += timedelta(days=1)
        o = opens[i] if opens is not None else prev_close
        h = highs[i] if highs is not None else max(o, c)
        l = lows[i] if lows is not None else min(o, c)
        bars.append(Bar(date=d, open=float(o), high=float(h), low=float(l),
                        close=float(c), volume=volume))
        prev_close = c
        d += timedelta(days=1)
    return BarSeries(ticker=ticker, bars=tuple(bars))


def random_walk_series(seed: int, n: int = 512, ticker="WALK", base=100.0,
                       drift=0.0002, vol=0.02) -> BarSeries:
    """Seeded geometric random walk with wicks, built directly on numpy."""
    rng = np.random.default_rng(seed)
    rets = drift + vol * rng.standard_normal(n)
    closes = base * np.exp(np.cumsum(rets))
    opens = np.concatenate([[base], closes[:-1]])
    u = 0.5 * vol * np.abs(rng.standard_normal(n))
    highs = np.maximum(opens, closes) * (1.0 + u)
    lows = np.minimum(opens, closes) * (1.0 - u)
    return make_series(closes, ticker=ticker, opens=opens, highs=highs, lows=lows)


# ---------------------------------------------------------------------------
# indicator oracles (direct definitions)

_EMA_WEIGHTS: dict[tuple[int, int], np.ndarray] = {}


def _ema_weight_matrix(period: int, n: int) -> np.ndarray:
    """W such that ema = W @ x, from the unrolled recursion seeded at x[0]:
    ema[t] = (1-a)^t x[0] + sum_{i=1..t} a (1-a)^(t-i) x[i]."""
    key = (period, n)
    if key not in _EMA_WEIGHTS:
        a = 2.0 / (period + 1.0)
        t = np.arange(n)[:, None]
        i = np.arange(n)[None, :]
        w = np.where(i <= t, a * (1.0 - a) ** (t - i), 0.0)
        w[:, 0] = (1.0 - a) ** t[:, 0]
        _EMA_WEIGHTS[key] = w
    return _EMA_WEIGHTS[key]


def oracle_ema(values: np.ndarray, period: int) -> np.ndarray:
    return _ema_weight_matrix(period, len(values)) @ np.asarray(values, dtype=float)


def oracle_sma(values, period: int) -> np.ndarray:
    """Rolling mean via the prefix-sum identity (S[t] - S[t-w]) / w, a different
    route from the library's per-window reductions."""
    x = np.asarray(values, dtype=float)
    csum = np.concatenate([[0.0], np.cumsum(x)])
    out = np.full(len(x), np.nan)
    out[period - 1:] = (csum[period:] - csum[:-period]) / period
    return out


def oracle_rolling_pstd(values, period: int) -> np.ndarray:
    """Rolling population std via the E[x^2] - E[x]^2 prefix-sum identity."""
    x = np.asarray(values, dtype=float)
    csum = np.concatenate([[0.0], np.cumsum(x)])
    csum2 = np.concatenate([[0.0], np.cumsum(x * x)])
    s1 = csum[period:] - csum[:-period]
    s2 = csum2[period:] - csum2[:-period]
    var = s2 / period - (s1 / period) ** 2
    out = np.full(len(x), np.nan)
    out[period - 1:] = np.sqrt(np.maximum(var, 0.0))
    return out


def oracle_rsi(closes, period: int = 14) -> np.ndarray:
    """Wilder RSI transcribed from the definition, one value at a time."""
    closes = list(map(float, closes))
    n = len(closes)
    out = np.full(n, np.nan)
    if n < period + 1:
        return out
    gains, losses = [], []
    for t in range(1, n):
        change = closes[t] - closes[t - 1]
        gains.append(max(change, 0.0))
        losses.append(max(-change, 0.0))
    avg_gain = statistics.fmean(gains[:period])
    avg_loss = statistics.fmean(losses[:period])
    for t in range(period, n):
        if t > period:
            avg_gain = (avg_gain * (period - 1) + gains[t - 1]) / period
            avg_loss = (avg_loss * (period - 1) + losses[t - 1]) / period
        if avg_loss == 0.0:
            out[t] = 100.0
        elif avg_gain == 0.0:
            out[t] = 0.0
        else:
            rs = avg_gain / avg_loss
            out[t] = 100.0 - 100.0 / (1.0 + rs)
    return out


def oracle_atr(highs, lows, closes, period: int = 14) -> np.ndarray:
    highs, lows, closes = (list(map(float, v)) for v in (highs, lows, closes))
    n = len(closes)
    trs = [highs[0] - lows[0]]
    for t in range(1, n):
        trs.append(max(highs[t] - lows[t],
                       abs(highs[t] - closes[t - 1]),
                       abs(lows[t] - closes[t - 1])))
    out = np.full(n, np.nan)
    if n < period:
        return out
    atr = statistics.fmean(trs[:period])
    out[period - 1] = atr
    for t in range(period, n):
        atr = (atr * (period - 1) + trs[t]) / period
        out[t] = atr
    return out


def oracle_pct_returns(closes) -> list[float]:
    closes = list(map(float, closes))
    return [(closes[t] - closes[t - 1]) / closes[t - 1] for t in range(1, len(closes))]


def oracle_regime(closes, window: int = 20) -> np.ndarray:
    closes = list(map(float, closes))
    mean_ret = oracle_sma(np.array(oracle_pct_returns(closes)), window)
    out = np.full(len(closes), np.nan)
    for t in range(window, len(closes)):
        out[t] = 1.0 if mean_ret[t - 1] > 0.0 else -1.0
    return out


def assert_matches(actual: np.ndarray, expected: np.ndarray, rel: float = 1e-9, label: str = ""):
    """NaN patterns must agree exactly; defined values to relative tolerance
    (atol equal to rtol covers exact-zero expectations)."""
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    nan_a, nan_e = np.isnan(actual), np.isnan(expected)
    assert (nan_a == nan_e).all(), f"{label}: NaN masks differ"
    a, e = actual[~nan_a], expected[~nan_e]
    if a.size:
        worst = float(np.max(np.abs(a - e) / np.maximum(np.abs(e), 1.0)))
        assert np.allclose(a, e, rtol=rel, atol=rel), f"{label}: worst rel err {worst:.3e}"


# ---------------------------------------------------------------------------
# metrics oracles

def oracle_max_drawdown_all_pairs(values) -> float:
    """O(n^2) brute force over every (peak, trough) ordered pair."""
    values = list(map(float, values))
    worst = 0.0
    for i in range(len(values)):
        for j in range(i, len(values)):
            dd = (values[j] / values[i] - 1.0) * 100.0
            worst = min(worst, dd)
    return worst


def oracle_sharpe(values) -> float:
    values = list(map(float, values))
    rets = [(values[t] - values[t - 1]) / values[t - 1] for t in range(1, len(values))]
    if len(rets) < 2:
        return 0.0
    sd = statistics.stdev(rets)
    if sd == 0.0:
        return 0.0
    return statistics.fmean(rets) / sd * math.sqrt(252)


# ---------------------------------------------------------------------------
# ledger replay oracle

def verify_accounting(universe, state, initial_cash: float):
    """Replay the trade log against bar data and check every accounting invariant:
    the daily cash + position-value identity (1e-6), non-negative cash, long-only
    share counts, and bought == sold + held-at-end conservation per ticker."""
    closes = {t: {b.date: b.close for b in s.bars} for t, s in universe.series_by_ticker.items()}
    by_date: dict = {}
    for p in state.equity_curve:
        by_date[p.date] = p
    cash = initial_cash
    shares: dict[str, int] = {}
    bought: dict[str, int] = {}
    sold: dict[str, int] = {}
    marks: dict[str, float] = {}
    log = list(state.trade_log)
    for d in [p.date for p in state.equity_curve]:
        while log and log[0].date == d:
            t = log.pop(0)
            if t.action == "BUY":
                cash -= t.size * t.fill_price
                shares[t.symbol] = shares.get(t.symbol, 0) + t.size
                bought[t.symbol] = bought.get(t.symbol, 0) + t.size
            else:
                cash += t.size * t.fill_price
                shares[t.symbol] = shares.get(t.symbol, 0) - t.size
                sold[t.symbol] = sold.get(t.symbol, 0) + t.size
            assert cash >= -1e-6, f"cash negative after {t}"
            assert shares[t.symbol] >= 0, f"short position after {t}"
        for ticker in universe.tickers:
            if d in closes[ticker]:
                marks[ticker] = closes[ticker][d]
        value = cash + sum(n * marks[t] for t, n in shares.items())
        point = by_date[d]
        assert abs(point.cash - cash) <= 1e-6, f"cash mismatch on {d}"
        assert abs(point.total_value - value) <= 1e-6, f"equity identity broken on {d}"
    assert not log, "trade log has fills outside the equity curve dates"
    held = {t: p.shares for t, p in state.positions.items()}
    for ticker in set(bought) | set(sold) | set(held):
        assert bought.get(ticker, 0) == sold.get(ticker, 0) + held.get(ticker, 0), \
            f"share conservation broken for {ticker}"


def replay_trade_log(initial_cash: float, trades: list[TradeRecord], commission: float = 0.0):
    """Rebuild cash and share counts from the log alone.

    Returns (cash, shares_by_ticker, bought_by_ticker, sold_by_ticker).
    """
    cash = initial_cash
    shares: dict[str, int] = {}
    bought: dict[str, int] = {}
    sold: dict[str, int] = {}
    for t in trades:
        if t.action == "BUY":
            cash -= t.size * t.fill_price + commission
            shares[t.symbol] = shares.get(t.symbol, 0) + t.size
            bought[t.symbol] = bought.get(t.symbol, 0) + t.size
        elif t.action == "SELL":
            cash += t.size * t.fill_price - commission
            shares[t.symbol] = shares.get(t.symbol, 0) - t.size
            sold[t.symbol] = sold.get(t.symbol, 0) + t.size
        else:
            raise AssertionError(f"unknown action {t.action}")
        assert cash >= -1e-6, f"cash went negative after {t}"
        assert shares[t.symbol] >= 0, f"short position after {t}"
    return cash, shares, bought, sold


# ---------------------------------------------------------------------------
# model helpers

def make_constant_model(p_positive: float):
    """A legitimate zero-tree bundle predicting P(up) = p_positive for any input,
    with an identity scaler."""
    from alphaforge.features import N_FEATURES, FeatureScaler
    from alphaforge.gbdt import GradientBoostedClassifier, ModelBundle

    clf = GradientBoostedClassifier()
    clf.classes_ = np.array([0, 1])
    clf.base_score_logit_ = math.log(p_positive / (1.0 - p_positive))
    clf.trees_ = []
    clf.train_loss_history_ = []
    scaler = FeatureScaler()
    scaler.mean_ = np.zeros(N_FEATURES)
    scaler.std_ = np.ones(N_FEATURES)
    scaler.constant_flags_ = np.zeros(N_FEATURES, dtype=bool)
    scaler.n_fitted_rows_ = 2
    return ModelBundle(classifier=clf, scaler=scaler)


def walk_serialized_tree(node: dict, x) -> float:
    """Path-following oracle over the serialized node dicts."""
    while "w" not in node:
        node = node["l"] if x[node["f"]] < node["v"] else node["r"]
    return node["w"]


def oracle_predict_proba(payload: dict, x) -> float:
    """Probability from the serialized model document, independent of TreeNode."""
    margin = payload["base_score_logit"]
    lr = payload["hyperparams"]["learning_rate"]
    margin += lr * sum(walk_serialized_tree(t, x) for t in payload["trees"])
    return 1.0 / (1.0 + math.exp(-margin))
