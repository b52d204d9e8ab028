"""Event-driven backtesting engine and hybrid trading strategy library.

Pipeline: file-based OHLCV and scored-news ingestion -> technical indicators
and per-ticker regime labels -> pooled feature/label dataset with a
train-only z-score scaler -> gradient-boosted direction classifier ->
hybrid (or SMA/RSI baseline) decision rules with volatility sizing ->
deterministic daily backtest -> metrics report and benchmark comparison.
"""

from .backtest import (
    BacktestConfig,
    EquityPoint,
    PortfolioState,
    Position,
    TradeRecord,
    execute_order,
    run_backtest,
)
from .features import FEATURE_NAMES, Dataset, FeatureScaler, build_dataset, make_labels
from .gbdt import GradientBoostedClassifier, ModelBundle, TreeNode
from .indicators import IndicatorFrame, IndicatorParams, compute_indicators, detect_regime
from .market_data import Bar, BarSeries, Universe, align_to_calendar, load_ohlcv_csv, train_test_split
from .metrics import (
    BenchmarkRow,
    MetricsReport,
    benchmark_compare,
    cagr,
    compute_metrics_report,
    max_drawdown,
    sharpe,
    total_return,
    trade_stats,
)
from .sentiment import (
    DailySentiment,
    ScoredArticle,
    aggregate_daily,
    build_daily_sentiment,
    gate_blocks_entry,
    load_scored_articles_csv,
)
from .strategy import (
    ActionKind,
    DecisionInputs,
    HybridScore,
    StrategyConfig,
    TradeAction,
    decide,
    decide_baseline,
    hybrid_score,
    size_position,
)

__version__ = "0.1.0"

__all__ = [
    "ActionKind", "BacktestConfig", "Bar", "BarSeries", "BenchmarkRow", "DailySentiment",
    "Dataset", "DecisionInputs", "EquityPoint", "FEATURE_NAMES", "FeatureScaler",
    "GradientBoostedClassifier", "HybridScore", "IndicatorFrame", "IndicatorParams",
    "MetricsReport", "ModelBundle", "PortfolioState", "Position", "ScoredArticle",
    "StrategyConfig", "TradeAction", "TradeRecord", "TreeNode", "Universe",
    "aggregate_daily", "align_to_calendar", "benchmark_compare", "build_daily_sentiment",
    "build_dataset", "cagr", "compute_indicators", "compute_metrics_report", "decide",
    "decide_baseline", "detect_regime", "execute_order", "gate_blocks_entry",
    "hybrid_score", "load_ohlcv_csv", "load_scored_articles_csv", "make_labels",
    "max_drawdown", "run_backtest", "sharpe", "size_position", "total_return",
    "trade_stats", "train_test_split",
]
