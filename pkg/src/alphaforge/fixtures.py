"""Deterministic synthetic market and news fixtures.

Bars follow a geometric random walk with per-segment drift and volatility of
daily log returns. The generator is Mersenne Twister (Python's
``random.Random``), one independent stream per ticker seeded with the string
``"<seed>:<ticker>"``; each bar consumes exactly three draws in order:
``gauss`` for the return, ``gauss`` for the wick size, ``randrange`` for
volume. The manifest written next to the CSVs records this so any fixture can
be regenerated byte-for-byte.

Wicks: high = max(open, close) * (1 + u), low = min(open, close) * (1 - u)
with u = 0.5 * vol * |gauss| >= 0, so OHLC ordering holds by construction and
zero-volatility segments degenerate to constant prices. Opens equal the prior
close. Trading dates are consecutive weekdays from the start date.

News injections place one pre-cutoff article (08:00 US Eastern) per scripted
(ticker, date, probability triple), so the daily sentiment score on that date
equals p_pos - p_neg exactly.
"""

from __future__ import annotations

import argparse
import json
import math
import random
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta
from pathlib import Path

from .errors import InvalidSpec
from .market_data import Bar, BarSeries, write_ohlcv_csv
from .sentiment import EASTERN, ScoredArticle, write_scored_articles_csv

NEWS_PUBLISH_TIME = time(8, 0)  # Eastern, one hour before the 09:30 cutoff


@dataclass(frozen=True)
class SegmentSpec:
    days: int
    drift: float  # mean daily log return
    volatility: float  # std of daily log returns

    def __post_init__(self) -> None:
        if self.days < 1:
            raise InvalidSpec(f"segment days {self.days} must be >= 1")
        if self.volatility < 0:
            raise InvalidSpec(f"segment volatility {self.volatility} must be >= 0")


@dataclass(frozen=True)
class NewsInjection:
    ticker: str
    date: date
    p_pos: float
    p_neu: float
    p_neg: float


@dataclass(frozen=True)
class FixtureSpec:
    tickers: tuple[str, ...]
    start: date
    segments: tuple[SegmentSpec, ...]
    news: tuple[NewsInjection, ...] = ()
    seed: int = 0
    base_price: float = 100.0

    def __post_init__(self) -> None:
        if not self.tickers or len(set(self.tickers)) != len(self.tickers):
            raise InvalidSpec("tickers must be non-empty and unique")
        if not self.segments:
            raise InvalidSpec("at least one segment is required")
        if self.base_price <= 0:
            raise InvalidSpec(f"base price {self.base_price} must be > 0")

    @property
    def days(self) -> int:
        return sum(s.days for s in self.segments)


def trading_dates(start: date, days: int) -> list[date]:
    """`days` consecutive weekdays beginning at the first weekday >= start."""
    out: list[date] = []
    d = start
    while len(out) < days:
        if d.weekday() < 5:
            out.append(d)
        d += timedelta(days=1)
    return out


def _daily_params(spec: FixtureSpec) -> list[tuple[float, float]]:
    params: list[tuple[float, float]] = []
    for seg in spec.segments:
        params.extend([(seg.drift, seg.volatility)] * seg.days)
    return params


def generate_bars(spec: FixtureSpec) -> dict[str, BarSeries]:
    """One deterministic geometric-random-walk series per ticker."""
    dates = trading_dates(spec.start, spec.days)
    params = _daily_params(spec)
    out: dict[str, BarSeries] = {}
    for ticker in spec.tickers:
        rng = random.Random(f"{spec.seed}:{ticker}")
        bars: list[Bar] = []
        prev_close = spec.base_price
        for d, (drift, vol) in zip(dates, params):
            ret = drift + vol * rng.gauss(0.0, 1.0)
            u = 0.5 * vol * abs(rng.gauss(0.0, 1.0))
            volume = rng.randrange(100_000, 5_000_000)
            open_px = prev_close
            close_px = prev_close * math.exp(ret)
            high = max(open_px, close_px) * (1.0 + u)
            low = min(open_px, close_px) * (1.0 - u)
            bars.append(Bar(date=d, open=open_px, high=high, low=low, close=close_px, volume=volume))
            prev_close = close_px
        out[ticker] = BarSeries(ticker=ticker, bars=tuple(bars))
    return out


def generate_articles(spec: FixtureSpec) -> list[ScoredArticle]:
    """Scored articles exactly as scripted, published pre-cutoff on their date."""
    articles = [
        ScoredArticle(
            ticker=inj.ticker,
            published_at=datetime.combine(inj.date, NEWS_PUBLISH_TIME, tzinfo=EASTERN),
            p_pos=inj.p_pos,
            p_neu=inj.p_neu,
            p_neg=inj.p_neg,
        )
        for inj in spec.news
    ]
    articles.sort(key=lambda a: (a.ticker, a.published_at))
    return articles


def write_fixture(spec: FixtureSpec, out_dir: str | Path) -> dict[str, Path]:
    """Write `ohlcv/<TICKER>.csv`, `articles.csv` and `manifest.json` under out_dir."""
    out_dir = Path(out_dir)
    ohlcv_dir = out_dir / "ohlcv"
    ohlcv_dir.mkdir(parents=True, exist_ok=True)
    for ticker, series in generate_bars(spec).items():
        write_ohlcv_csv(series, ohlcv_dir / f"{ticker}.csv")
    articles_path = out_dir / "articles.csv"
    write_scored_articles_csv(generate_articles(spec), articles_path)
    manifest = {
        "generator": "mersenne-twister (python random.Random, per-ticker seed '<seed>:<ticker>'; "
                     "draws per bar: gauss return, gauss wick, randrange volume)",
        "seed": spec.seed,
        "tickers": list(spec.tickers),
        "start": spec.start.isoformat(),
        "days": spec.days,
        "base_price": spec.base_price,
        "segments": [{"days": s.days, "drift": s.drift, "volatility": s.volatility} for s in spec.segments],
        "news_injections": len(spec.news),
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    return {"ohlcv_dir": ohlcv_dir, "articles": articles_path, "manifest": manifest_path}


STANDARD_TICKERS = ("ALFA", "BRAV", "CHLO", "DELT", "ECHO")


def standard_spec(seed: int = 7) -> FixtureSpec:
    """Five tickers, four years of mixed regimes, sparse mixed-polarity news.

    Sized so a 2021-2022 training range and a 2023-2024 backtest range both
    clear the 200-bar indicator warm-up.
    """
    segments = (
        SegmentSpec(days=260, drift=0.0008, volatility=0.012),
        SegmentSpec(days=130, drift=-0.0010, volatility=0.018),
        SegmentSpec(days=260, drift=0.0012, volatility=0.010),
        SegmentSpec(days=130, drift=-0.0006, volatility=0.016),
        SegmentSpec(days=264, drift=0.0010, volatility=0.011),
    )
    start = date(2021, 1, 4)
    dates = trading_dates(start, sum(s.days for s in segments))
    news = []
    for i, ticker in enumerate(STANDARD_TICKERS):
        # a few strongly negative days and a few positive ones per ticker
        for k, offset in enumerate((310, 420, 640, 760, 900)):
            d = dates[offset + 7 * i]
            if k % 2 == 0:
                news.append(NewsInjection(ticker=ticker, date=d, p_pos=0.03, p_neu=0.07, p_neg=0.90))
            else:
                news.append(NewsInjection(ticker=ticker, date=d, p_pos=0.85, p_neu=0.10, p_neg=0.05))
    return FixtureSpec(tickers=STANDARD_TICKERS, start=start, segments=segments,
                       news=tuple(news), seed=seed)


def trend_crash_spec(seed: int = 21) -> FixtureSpec:
    """Bullish trend, a sharp oversold dip, brief chop, then a crash with bad news daily.

    The dip forces RSI(14) under 30 while SMA50 stays above SMA200, so the
    baseline strategy enters and then rides the crash; the scripted news keeps
    the hybrid mode out (or exits it) from the first crash day.
    """
    tickers = ("NOVA", "ORIN")
    segments = (
        SegmentSpec(days=600, drift=0.0015, volatility=0.010),  # training history
        SegmentSpec(days=200, drift=0.0015, volatility=0.008),  # backtest uptrend
        SegmentSpec(days=5, drift=-0.045, volatility=0.002),    # oversold dip
        SegmentSpec(days=15, drift=0.002, volatility=0.004),    # chop before the fall
        SegmentSpec(days=40, drift=-0.020, volatility=0.008),   # crash, bad news daily
        SegmentSpec(days=20, drift=0.0, volatility=0.006),      # aftermath
    )
    start = date(2021, 1, 4)
    dates = trading_dates(start, sum(s.days for s in segments))
    crash_start = 600 + 200 + 5 + 15
    news = tuple(
        NewsInjection(ticker=t, date=dates[i], p_pos=0.03, p_neu=0.04, p_neg=0.93)
        for i in range(crash_start, crash_start + 40)
        for t in tickers
    )
    return FixtureSpec(tickers=tickers, start=start, segments=segments, news=news, seed=seed)


PRESETS = {"standard": standard_spec, "trend-crash": trend_crash_spec}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="Generate a synthetic market/news fixture")
    parser.add_argument("--preset", choices=sorted(PRESETS), default="standard")
    parser.add_argument("--seed", type=int, default=None, help="override the preset seed")
    parser.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args(argv)
    spec = PRESETS[args.preset]() if args.seed is None else PRESETS[args.preset](seed=args.seed)
    paths = write_fixture(spec, args.out)
    print(f"wrote {paths['ohlcv_dir']}, {paths['articles']}, {paths['manifest']}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
