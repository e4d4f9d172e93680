import logging
import os
from typing import Optional

from config import get_config

ROOT_LOGGER = 'capillary'


def setup_logger(name: str = ROOT_LOGGER, log_file: Optional[str] = None,
                 level: Optional[str] = None) -> logging.Logger:
    """
    Set up a logger with a console handler and an optional file handler

    Args:
        name: Logger name; service loggers are children of it
        log_file: Path to log file (optional)
        level: Level name overriding Config.LOG_LEVEL

    Returns:
        Configured logger instance
    """
    config = get_config()
    level_value = getattr(logging, (level or config.LOG_LEVEL).upper(), logging.INFO)

    logger = logging.getLogger(name)
    logger.setLevel(level_value)

    # Handlers are attached once per process
    if logger.handlers:
        return logger

    console_handler = logging.StreamHandler()
    console_handler.setLevel(level_value)
    console_handler.setFormatter(logging.Formatter('%(asctime)s - %(levelname)s - %(name)s - %(message)s'))
    logger.addHandler(console_handler)

    if log_file:
        log_dir = os.path.dirname(log_file)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(funcName)s:%(lineno)d - %(message)s'
        ))
        logger.addHandler(file_handler)

    logger.propagate = False
    return logger


def get_logger(module: str) -> logging.Logger:
    """Child of the shared logger for a module, e.g. get_logger(__name__)"""
    return logging.getLogger(f"{ROOT_LOGGER}.{module}")


logger = setup_logger(log_file=get_config().LOG_FILE)
