"""Daily per-ticker news sentiment aggregation and the trading gate.

Articles carry class-probability triples (positive, neutral, negative). For a
trading date D the attribution window is [previous trading date 09:30 US
Eastern, D 09:30 US Eastern): each article counts exactly once and nothing
published at or after D's cutoff can influence day D. The daily score is the
mean of (p_pos - p_neg); a ticker-day with no articles has no score at all
(absent is not neutral zero) and never blocks trading.

The gate trips on scores strictly below the threshold (default -0.70).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta
from pathlib import Path
from zoneinfo import ZoneInfo

from .errors import InvalidProbabilities, InvariantViolation, MalformedRow

EASTERN = ZoneInfo("America/New_York")
MARKET_OPEN = time(9, 30)
SENTIMENT_GATE_THRESHOLD = -0.70
SIMPLEX_TOLERANCE = 1e-6

SCORED_ARTICLE_HEADER = ["ticker", "published_at", "p_pos", "p_neu", "p_neg"]


@dataclass(frozen=True)
class ScoredArticle:
    """One classified article with its probability triple."""

    ticker: str
    published_at: datetime
    p_pos: float
    p_neu: float
    p_neg: float

    def __post_init__(self) -> None:
        if self.published_at.tzinfo is None:
            raise InvariantViolation(f"{self.ticker}: published_at must be timezone-aware")
        triple = (self.p_pos, self.p_neu, self.p_neg)
        if any(p < 0.0 or p > 1.0 for p in triple):
            raise InvalidProbabilities(f"{self.ticker} @ {self.published_at}: probabilities {triple} outside [0, 1]")
        if abs(sum(triple) - 1.0) > SIMPLEX_TOLERANCE:
            raise InvalidProbabilities(f"{self.ticker} @ {self.published_at}: probabilities {triple} sum to {sum(triple)}")

    @property
    def polarity(self) -> float:
        return self.p_pos - self.p_neg


@dataclass(frozen=True)
class DailySentiment:
    """Aggregated ticker-day score; constructed only when at least one article matched."""

    ticker: str
    date: date
    score: float
    n_articles: int

    def __post_init__(self) -> None:
        if self.n_articles < 1:
            raise InvariantViolation("DailySentiment requires n_articles >= 1; use None for no-news days")
        if not -1.0 - SIMPLEX_TOLERANCE <= self.score <= 1.0 + SIMPLEX_TOLERANCE:
            raise InvariantViolation(f"score {self.score} outside [-1, 1]")


def cutoff_instant(trading_date: date, cutoff: time = MARKET_OPEN) -> datetime:
    """The Eastern-local decision cutoff for a trading date (DST honored)."""
    return datetime.combine(trading_date, cutoff, tzinfo=EASTERN)


def aggregate_daily(
    articles: list[ScoredArticle],
    ticker: str,
    trading_date: date,
    prev_trading_date: date | None = None,
    cutoff: time = MARKET_OPEN,
) -> DailySentiment | None:
    """Aggregate one ticker-day: mean polarity of articles inside the attribution window.

    The window is [prev_trading_date @ cutoff, trading_date @ cutoff) Eastern.
    When the previous trading date is unknown (start of a calendar), the prior
    calendar day is used. Returns None when no article matches.
    """
    if prev_trading_date is None:
        prev_trading_date = trading_date - timedelta(days=1)
    if prev_trading_date >= trading_date:
        raise InvariantViolation(f"prev_trading_date {prev_trading_date} not before {trading_date}")
    lo = cutoff_instant(prev_trading_date, cutoff)
    hi = cutoff_instant(trading_date, cutoff)
    polarities = [a.polarity for a in articles if a.ticker == ticker and lo <= a.published_at < hi]
    if not polarities:
        return None
    return DailySentiment(
        ticker=ticker,
        date=trading_date,
        score=sum(polarities) / len(polarities),
        n_articles=len(polarities),
    )


def build_daily_sentiment(
    articles: list[ScoredArticle],
    tickers: list[str],
    trading_calendar: tuple[date, ...] | list[date],
    cutoff: time = MARKET_OPEN,
) -> dict[tuple[str, date], DailySentiment]:
    """Aggregate every ticker-day along a trading calendar.

    Consecutive calendar entries bound each window, so weekend and holiday news
    attributes to the next trading day and no article is counted twice.
    """
    out: dict[tuple[str, date], DailySentiment] = {}
    for ticker in tickers:
        prev: date | None = None
        for d in trading_calendar:
            sent = aggregate_daily(articles, ticker, d, prev_trading_date=prev, cutoff=cutoff)
            if sent is not None:
                out[(ticker, d)] = sent
            prev = d
    return out


def gate_blocks_entry(sent: DailySentiment | None, threshold: float = SENTIMENT_GATE_THRESHOLD) -> bool:
    """True iff a score exists and is strictly below the threshold. No news never blocks."""
    return sent is not None and sent.score < threshold


def load_scored_articles_csv(path: str | Path) -> list[ScoredArticle]:
    """Load the scored-article CSV (`ticker,published_at,p_pos,p_neu,p_neg`)."""
    path = Path(path)
    articles: list[ScoredArticle] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != SCORED_ARTICLE_HEADER:
            raise MalformedRow(f"{path}: bad header {header!r}, expected {SCORED_ARTICLE_HEADER}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise MalformedRow(f"{path} line {lineno}: expected 5 fields, got {len(row)}")
            try:
                published = datetime.fromisoformat(row[1])
                p_pos, p_neu, p_neg = (float(v) for v in row[2:5])
            except ValueError as exc:
                raise MalformedRow(f"{path} line {lineno}: {exc}") from exc
            articles.append(ScoredArticle(
                ticker=row[0], published_at=published, p_pos=p_pos, p_neu=p_neu, p_neg=p_neg,
            ))
    return articles


def write_scored_articles_csv(articles: list[ScoredArticle], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SCORED_ARTICLE_HEADER)
        for a in articles:
            writer.writerow([
                a.ticker, a.published_at.isoformat(),
                repr(a.p_pos), repr(a.p_neu), repr(a.p_neg),
            ])


def write_daily_sentiment_csv(rows: dict[tuple[str, date], DailySentiment], path: str | Path) -> None:
    """Optional dump: `ticker,date,score,n_articles` sorted by (ticker, date)."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["ticker", "date", "score", "n_articles"])
        for key in sorted(rows):
            s = rows[key]
            writer.writerow([s.ticker, s.date.isoformat(), repr(s.score), s.n_articles])
