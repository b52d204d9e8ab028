"""Shared fixtures: the standard synthetic market, a trained model, and one hybrid run."""

from __future__ import annotations

import json

import pytest

from alphaforge import cli
from alphaforge.backtest import BacktestConfig, run_backtest
from alphaforge.fixtures import standard_spec, write_fixture
from alphaforge.gbdt import ModelBundle

STD_CONFIG = {
    "data_dir": "ohlcv",
    "sentiment_file": "articles.csv",
    "model_file": "out/model.json",
    "output_dir": "out",
    "train_range": ["2021-01-04", "2022-12-30"],
    "backtest_range": ["2023-01-02", "2024-12-31"],
    "strategy": {"mode": "hybrid"},
    "backtest": {"initial_cash": 100000.0, "commission": 0.0},
}


@pytest.fixture(scope="session")
def std_fixture(tmp_path_factory):
    """Standard five-ticker fixture directory with a ready-to-use run config."""
    root = tmp_path_factory.mktemp("std_fixture")
    write_fixture(standard_spec(), root)
    config_path = root / "config.json"
    config_path.write_text(json.dumps(STD_CONFIG, indent=2))
    return {"root": root, "config": config_path}


@pytest.fixture(scope="session")
def std_model(std_fixture):
    """Model trained once on the standard fixture's training range."""
    rc = cli.main(["train", "--config", str(std_fixture["config"])])
    assert rc == 0
    model_path = std_fixture["root"] / "out" / "model.json"
    return {"path": model_path, "bundle": ModelBundle.load(model_path)}


@pytest.fixture(scope="session")
def std_inputs(std_fixture):
    """(universe, frames, sentiment) for the standard fixture's backtest range."""
    config = cli.RunConfig.load(std_fixture["config"])
    universe, frames, sentiment = cli._prepare_backtest(config)
    return {"config": config, "universe": universe, "frames": frames, "sentiment": sentiment}


@pytest.fixture(scope="session")
def std_hybrid_state(std_inputs, std_model):
    """One in-process hybrid run over the standard fixture."""
    config = std_inputs["config"]
    bt_config = BacktestConfig(start=config.backtest_range[0], end=config.backtest_range[1],
                               initial_cash=config.initial_cash, commission=config.commission)
    return run_backtest(std_inputs["universe"], std_inputs["frames"], std_inputs["sentiment"],
                        std_model["bundle"], bt_config, config.strategy)
