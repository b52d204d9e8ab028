"""Command-line surface: ingest, train, backtest, report, compare.

All commands read a single JSON run-config (paths resolved relative to the
config file) with flag overrides for mode, output directory, ticker subset
and seed. Exit codes: 0 success, 2 validation/config error, 3 runtime data
error. The ALPHAFORGE_LOG environment variable sets the log level.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path

from . import backtest as bt
from . import metrics as mx
from .errors import (
    AlphaForgeError,
    ConfigError,
    EmptyDataset,
    SeriesTooShort,
    SingleClassDataset,
    TooFewRows,
)
from .features import FeatureScaler, build_dataset
from .gbdt import GradientBoostedClassifier, ModelBundle
from .indicators import IndicatorParams, compute_indicators
from .market_data import Universe, load_ohlcv_csv, load_universe, truncate_series
from .metrics import BenchmarkRow, benchmark_compare, compute_metrics_report
from .sentiment import build_daily_sentiment, load_scored_articles_csv
from .strategy import StrategyConfig

logger = logging.getLogger(__name__)

TRAIN_HOLDOUT_FRACTION = 0.7  # chronological share of training-range rows used to fit


@dataclass(frozen=True)
class RunConfig:
    data_dir: Path
    model_file: Path
    output_dir: Path
    train_range: tuple[date, date]
    backtest_range: tuple[date, date]
    sentiment_file: Path | None = None
    benchmark_dir: Path | None = None
    tickers: tuple[str, ...] | None = None
    strategy: StrategyConfig = StrategyConfig()
    initial_cash: float = 100_000.0
    commission: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("train_range", "backtest_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ConfigError(f"{name}: start {lo} after end {hi}")
        if self.train_range[1] > self.backtest_range[0]:
            raise ConfigError(
                f"train range end {self.train_range[1]} overlaps backtest start "
                f"{self.backtest_range[0]} (out-of-sample evaluation requires train <= backtest)")
        if not self.data_dir.is_dir():
            raise ConfigError(f"data_dir {self.data_dir} is not a directory")
        if self.sentiment_file is not None and not self.sentiment_file.is_file():
            raise ConfigError(f"sentiment_file {self.sentiment_file} not found")
        if self.benchmark_dir is not None and not self.benchmark_dir.is_dir():
            raise ConfigError(f"benchmark_dir {self.benchmark_dir} is not a directory")

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        try:
            payload = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        base = path.parent

        def resolve(key: str, required: bool = True) -> Path | None:
            value = payload.get(key)
            if value is None:
                if required:
                    raise ConfigError(f"config missing required key {key!r}")
                return None
            return (base / value).resolve()

        def parse_range(key: str) -> tuple[date, date]:
            value = payload.get(key)
            if not isinstance(value, list) or len(value) != 2:
                raise ConfigError(f"config key {key!r} must be [start, end]")
            try:
                return date.fromisoformat(value[0]), date.fromisoformat(value[1])
            except ValueError as exc:
                raise ConfigError(f"config key {key!r}: {exc}") from exc

        backtest_cfg = payload.get("backtest", {})
        tickers = payload.get("tickers")
        return cls(
            data_dir=resolve("data_dir"),
            model_file=resolve("model_file"),
            output_dir=resolve("output_dir"),
            sentiment_file=resolve("sentiment_file", required=False),
            benchmark_dir=resolve("benchmark_dir", required=False),
            train_range=parse_range("train_range"),
            backtest_range=parse_range("backtest_range"),
            tickers=tuple(tickers) if tickers else None,
            strategy=StrategyConfig.from_dict(payload.get("strategy", {})),
            initial_cash=float(backtest_cfg.get("initial_cash", 100_000.0)),
            commission=float(backtest_cfg.get("commission", 0.0)),
            seed=int(payload.get("seed", 0)),
        )

    def apply_overrides(self, args: argparse.Namespace) -> "RunConfig":
        cfg = self
        if getattr(args, "mode", None):
            cfg = replace(cfg, strategy=cfg.strategy.with_mode(args.mode))
        if getattr(args, "out", None):
            cfg = replace(cfg, output_dir=Path(args.out).resolve())
        if getattr(args, "tickers", None):
            cfg = replace(cfg, tickers=tuple(args.tickers.split(",")))
        if getattr(args, "seed", None) is not None:
            cfg = replace(cfg, seed=args.seed)
        return cfg


def _load_frames(universe: Universe) -> tuple[Universe, dict]:
    """Indicator frames per ticker; tickers too short for warm-up are dropped with a warning."""
    frames = {}
    kept = {}
    for ticker in universe.tickers:
        series = universe.series_by_ticker[ticker]
        try:
            frames[ticker] = compute_indicators(series, IndicatorParams())
        except SeriesTooShort as exc:
            logger.warning("skipping %s: %s", ticker, exc)
            continue
        kept[ticker] = series
    if not kept:
        raise EmptyDataset("no ticker has enough history for the indicator warm-up")
    return Universe(series_by_ticker=kept), frames


def cmd_ingest(config: RunConfig) -> int:
    paths = sorted(config.data_dir.glob("*.csv"))
    if config.tickers is not None:
        wanted = set(config.tickers)
        paths = [p for p in paths if p.stem in wanted]
    if not paths:
        print(f"no CSV files found in {config.data_dir}", file=sys.stderr)
        return 2
    failures = 0
    for p in paths:
        try:
            series = load_ohlcv_csv(p)
        except AlphaForgeError as exc:
            failures += 1
            print(f"{p.name}: INVALID - {exc}")
            continue
        print(f"{series.ticker}: {len(series)} bars, {series.bars[0].date} .. {series.bars[-1].date}")
    print(f"{len(paths) - failures}/{len(paths)} files valid")
    return 2 if failures else 0


def cmd_train(config: RunConfig) -> int:
    universe = load_universe(config.data_dir, list(config.tickers) if config.tickers else None)
    train_start, train_end = config.train_range
    truncated = {}
    for ticker in universe.tickers:
        series = truncate_series(universe.series_by_ticker[ticker], train_end)
        if series is not None:
            truncated[ticker] = series
    universe = Universe(series_by_ticker=truncated)
    universe, frames = _load_frames(universe)
    dataset = build_dataset(universe, frames, (train_start, train_end))
    fit_ds, holdout_ds = dataset.split_by_date_fraction(TRAIN_HOLDOUT_FRACTION)

    scaler = FeatureScaler().fit(fit_ds.X)
    clf = GradientBoostedClassifier(seed=config.seed)
    clf.fit(scaler.transform(fit_ds.X), fit_ds.y)
    train_acc = float((clf.predict(scaler.transform(fit_ds.X)) == fit_ds.y).mean())
    holdout_acc = float((clf.predict(scaler.transform(holdout_ds.X)) == holdout_ds.y).mean())

    bundle = ModelBundle(classifier=clf, scaler=scaler)
    config.model_file.parent.mkdir(parents=True, exist_ok=True)
    bundle.save(config.model_file)
    print(f"dataset: {len(dataset)} rows ({len(fit_ds)} fit / {len(holdout_ds)} held out)")
    print(f"train accuracy: {train_acc:.4f}")
    print(f"held-out accuracy: {holdout_acc:.4f}")
    print(f"model written to {config.model_file}")
    return 0


def _prepare_backtest(config: RunConfig):
    universe = load_universe(config.data_dir, list(config.tickers) if config.tickers else None)
    start, end = config.backtest_range
    truncated = {}
    for ticker in universe.tickers:
        series = truncate_series(universe.series_by_ticker[ticker], end)
        if series is not None:
            truncated[ticker] = series
    universe, frames = _load_frames(Universe(series_by_ticker=truncated))
    if config.sentiment_file is not None:
        articles = load_scored_articles_csv(config.sentiment_file)
        sentiment = build_daily_sentiment(articles, universe.tickers, universe.trading_calendar)
    else:
        sentiment = {}
    return universe, frames, sentiment


def cmd_backtest(config: RunConfig) -> int:
    universe, frames, sentiment = _prepare_backtest(config)
    model = None
    if config.strategy.mode == "hybrid":
        if not config.model_file.is_file():
            raise ConfigError(f"model file {config.model_file} not found; run `train` first")
        model = ModelBundle.load(config.model_file)
    bt_config = bt.BacktestConfig(
        start=config.backtest_range[0], end=config.backtest_range[1],
        initial_cash=config.initial_cash, commission=config.commission,
    )
    state = bt.run_backtest(universe, frames, sentiment, model, bt_config, config.strategy)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    bt.write_trade_log_csv(state.trade_log, config.output_dir / "trades.csv")
    bt.write_equity_csv(state.equity_curve, config.output_dir / "equity.csv")
    report = compute_metrics_report(config.initial_cash, state.equity_curve, state.trade_log)
    mx.write_portfolio_log(report, config.output_dir / "portfolio_log.txt")
    print(f"{config.strategy.mode} backtest: {len(state.trade_log)} fills, "
          f"final value {report.final_value:.2f} ({report.total_return_pct:+.2f}%)")
    print(f"artifacts written to {config.output_dir}")
    return 0


def _load_benchmarks(config: RunConfig) -> dict:
    index_series = {}
    for p in sorted(config.benchmark_dir.glob("*.csv")):
        index_series[p.stem] = load_ohlcv_csv(p)
    if not index_series:
        raise ConfigError(f"no index CSVs in {config.benchmark_dir}")
    return index_series


def _require_artifacts(config: RunConfig) -> tuple[Path, Path]:
    equity_path = config.output_dir / "equity.csv"
    trades_path = config.output_dir / "trades.csv"
    if not equity_path.is_file() or not trades_path.is_file():
        raise ConfigError(f"missing backtest artifacts in {config.output_dir}; run `backtest` first")
    return equity_path, trades_path


def cmd_report(config: RunConfig) -> int:
    equity_path, trades_path = _require_artifacts(config)
    equity = bt.load_equity_csv(equity_path)
    trades = bt.load_trade_log_csv(trades_path)
    report = compute_metrics_report(config.initial_cash, equity, trades)
    mx.write_report_json(report, config.output_dir / "report.json")
    mx.write_portfolio_log(report, config.output_dir / "portfolio_log.txt")
    if config.benchmark_dir is not None:
        index_series = _load_benchmarks(config)
        rows = benchmark_compare(index_series, config.initial_cash, *config.backtest_range)
        strategy_row = BenchmarkRow(
            name=f"{config.strategy.mode}-strategy", final_value=report.final_value,
            return_pct=report.total_return_pct, cagr_pct=report.cagr_pct,
        )
        mx.write_benchmark_csv(strategy_row, rows, config.output_dir / "benchmark.csv")
        mx.write_plot_data_csv(equity, index_series, config.initial_cash,
                               config.output_dir / "plot_data.csv")
    for label, attr in mx.PORTFOLIO_LOG_LINES:
        print(f"{label}: {getattr(report, attr):.2f}")
    return 0


def cmd_compare(config: RunConfig) -> int:
    if config.benchmark_dir is None:
        raise ConfigError("compare requires benchmark_dir in the config")
    equity_path, trades_path = _require_artifacts(config)
    equity = bt.load_equity_csv(equity_path)
    trades = bt.load_trade_log_csv(trades_path)
    report = compute_metrics_report(config.initial_cash, equity, trades)
    index_series = _load_benchmarks(config)
    rows = benchmark_compare(index_series, config.initial_cash, *config.backtest_range)
    strategy_row = BenchmarkRow(
        name=f"{config.strategy.mode}-strategy", final_value=report.final_value,
        return_pct=report.total_return_pct, cagr_pct=report.cagr_pct,
    )
    mx.write_benchmark_csv(strategy_row, rows, config.output_dir / "benchmark.csv")
    mx.write_plot_data_csv(equity, index_series, config.initial_cash,
                           config.output_dir / "plot_data.csv")
    print(f"{'name':<20} {'final value':>14} {'return %':>10} {'CAGR %':>8}")
    for r in sorted([strategy_row, *rows], key=lambda r: -r.return_pct):
        print(f"{r.name:<20} {r.final_value:>14.2f} {r.return_pct:>10.2f} {r.cagr_pct:>8.2f}")
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "train": cmd_train,
    "backtest": cmd_backtest,
    "report": cmd_report,
    "compare": cmd_compare,
}

# errors that signal an invalid configuration or unusable inputs (exit 2)
VALIDATION_ERRORS = (ConfigError, EmptyDataset, SingleClassDataset, TooFewRows)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alphaforge",
                                     description="hybrid-strategy backtesting engine")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the run-config JSON")
        p.add_argument("--mode", choices=["hybrid", "baseline"], help="strategy mode override")
        p.add_argument("--out", help="output directory override")
        p.add_argument("--tickers", help="comma-separated ticker subset")
        p.add_argument("--seed", type=int, help="training seed override")
    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("ALPHAFORGE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig.load(args.config).apply_overrides(args)
        return COMMANDS[args.command](config)
    except VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (AlphaForgeError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
