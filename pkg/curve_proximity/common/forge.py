import os

from dataclasses import dataclass, field, fields, is_dataclass
from functools import lru_cache
from typing import Any, Dict, Optional

import yaml

from curve_proximity.http_exceptions import InvalidConfigurationException

CONFIG_PATH_ENV = 'CURVE_PROXIMITY_CONFIG'
DEFAULT_CONFIG_PATH = '/etc/curve_proximity/config.yml'


@dataclass
class LoggingConfig:
    log_level: str = "INFO"
    log_to_console: bool = True
    log_to_file: bool = False
    log_directory: str = "/var/log/curve_proximity/"


@dataclass
class SolverConfig:
    # Sample budget is budget_factor * ceil(1/epsilon) + budget_offset
    budget_factor: int = 10
    budget_offset: int = 64
    replay_key_tolerance: float = 1e-10
    replay_length_slack: float = 1e-9


@dataclass
class OracleConfig:
    # Grid step defaults to epsilon / grid_divisor
    grid_divisor: int = 8
    max_grid: int = 512


@dataclass
class ProofSetConfig:
    margin_slack: float = 1e-9


@dataclass
class BenchConfig:
    jobs: int = 1
    output_directory: str = "."


@dataclass
class UIConfig:
    debug: bool = False
    secret_key: str = "This is the default flask secret key... you should change this!"


@dataclass
class Config:
    logging: LoggingConfig = field(default_factory=LoggingConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    proofset: ProofSetConfig = field(default_factory=ProofSetConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)
    ui: UIConfig = field(default_factory=UIConfig)


def _apply(section: Any, data: Any, path: str) -> None:
    if not isinstance(data, dict):
        raise InvalidConfigurationException(f"Configuration section '{path or 'root'}' must be a mapping")

    known = {f.name for f in fields(section)}
    for key, value in data.items():
        if key not in known:
            raise InvalidConfigurationException(f"Unknown configuration key: {path}{key}")

        current = getattr(section, key)
        if is_dataclass(current):
            _apply(current, value or {}, f"{path}{key}.")
            continue

        try:
            if isinstance(current, bool):
                if not isinstance(value, bool):
                    raise ValueError(value)
            else:
                value = type(current)(value)
        except (TypeError, ValueError):
            raise InvalidConfigurationException(f"Invalid value for {path}{key}: {value!r}")
        setattr(section, key, value)


def load_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> Config:
    """
    Build a configuration object from the defaults, the YAML file found at
    `path` (or the file named by the CURVE_PROXIMITY_CONFIG environment variable)
    and an optional dictionary of overrides.
    """
    path = path or os.environ.get(CONFIG_PATH_ENV, DEFAULT_CONFIG_PATH)
    config = Config()

    if os.path.exists(path):
        with open(path) as config_file:
            try:
                data = yaml.safe_load(config_file)
            except yaml.YAMLError as e:
                raise InvalidConfigurationException(f"Could not parse configuration file {path}: {e}")
        if data:
            _apply(config, data, "")

    if overrides:
        _apply(config, overrides, "")

    return config


@lru_cache(maxsize=None)
def get_config() -> Config:
    return load_config()
