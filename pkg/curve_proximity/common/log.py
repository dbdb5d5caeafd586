import logging
import os

from curve_proximity.common.forge import LoggingConfig
from curve_proximity.common.logformat import CURVE_LOG_FORMAT, CURVE_DATE_FORMAT
from curve_proximity.http_exceptions import InvalidConfigurationException

LOG_LEVEL_MAP = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
    "CRITICAL": logging.CRITICAL,
    "DISABLED": 60,
}


def init_logging(name: str, log_config: LoggingConfig, log_level=None):
    logger = logging.getLogger(name)

    if log_level is None:
        try:
            log_level = LOG_LEVEL_MAP[log_config.log_level.upper()]
        except KeyError:
            raise InvalidConfigurationException(f"Unknown log level: {log_config.log_level}")
    logger.setLevel(log_level)

    # Handlers are only installed once per process
    if getattr(logger, '_curve_proximity_ready', False):
        return logger

    formatter = logging.Formatter(CURVE_LOG_FORMAT, CURVE_DATE_FORMAT)

    if log_config.log_to_file:
        if not os.path.isdir(log_config.log_directory):
            os.makedirs(log_config.log_directory, exist_ok=True)

        fh = logging.FileHandler(os.path.join(log_config.log_directory, f'{name}.log'))
        fh.setLevel(log_level)
        fh.setFormatter(formatter)
        logger.addHandler(fh)

    if log_config.log_to_console:
        console = logging.StreamHandler()
        console.setLevel(log_level)
        console.setFormatter(formatter)
        logger.addHandler(console)

    logger._curve_proximity_ready = True
    return logger
