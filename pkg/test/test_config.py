import importlib
import logging

import pytest

from curve_proximity import config, gunicorn_config
from curve_proximity.common.forge import Config, load_config
from curve_proximity.common.log import init_logging
from curve_proximity.http_exceptions import InvalidConfigurationException


def test_defaults(tmp_path):
    cfg = load_config(str(tmp_path / "missing.yml"))
    assert cfg == Config()
    assert cfg.solver.budget_factor == 10
    assert cfg.oracle.grid_divisor == 8
    assert cfg.oracle.max_grid == 512
    assert cfg.proofset.margin_slack == 1e-9


def test_yaml_overrides(tmp_path):
    path = tmp_path / "config.yml"
    path.write_text("solver:\n  budget_offset: 100\nbench:\n  jobs: 4\n")
    cfg = load_config(str(path), overrides={"oracle": {"max_grid": 2000}})
    assert cfg.solver.budget_offset == 100
    assert cfg.solver.budget_factor == 10
    assert cfg.bench.jobs == 4
    assert cfg.oracle.max_grid == 2000


@pytest.mark.parametrize("text", [
    "solver:\n  budget: 10\n",
    "colour: blue\n",
    "solver:\n  budget_factor: lots\n",
    "ui:\n  debug: maybe\n",
    "solver: [1, 2]\n",
    "solver: {budget_factor: 10\n",
])
def test_invalid_configuration(tmp_path, text):
    path = tmp_path / "config.yml"
    path.write_text(text)
    with pytest.raises(InvalidConfigurationException):
        load_config(str(path))


def test_loaded_test_configuration():
    assert config.ORACLE_MAX_GRID == 512
    assert config.SAMPLE_BUDGET_OFFSET == 64
    assert config.LOGGER.name == "curve_proximity.engine"


def test_init_logging():
    cfg = load_config(overrides={"logging": {"log_level": "DEBUG", "log_to_console": True}})
    logger = init_logging("curve_proximity_test", cfg.logging)
    assert logger.level == logging.DEBUG
    handlers = len(logger.handlers)

    # A second call only adjusts the level
    init_logging("curve_proximity_test", cfg.logging, log_level=logging.ERROR)
    assert logger.level == logging.ERROR
    assert len(logger.handlers) == handlers

    bad = load_config(overrides={"logging": {"log_level": "LOUD"}})
    with pytest.raises(InvalidConfigurationException):
        init_logging("curve_proximity_test_bad", bad.logging)


def test_gunicorn_settings(monkeypatch):
    for name in ("TIMEOUT", "WORKER_CLASS", "CURVE_PROXIMITY_TIMEOUT", "CURVE_PROXIMITY_WORKER_CLASS"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv("PORT", "6000")
    monkeypatch.setenv("CURVE_PROXIMITY_PORT", "7000")
    monkeypatch.setenv("WORKERS", "3")
    monkeypatch.setenv("CURVE_PROXIMITY_PRELOAD", "false")
    reloaded = importlib.reload(gunicorn_config)
    assert reloaded.bind == ":7000"
    assert reloaded.workers == 3
    assert reloaded.preload_app is False
    assert reloaded.worker_class == "gevent"
    assert reloaded.timeout == 120
