"""
Logging Configuration
---------------------
loguru setup shared by the library modules and the command-line frontend.

Logs go to stderr: stdout carries command output (JSON, edge lists) and must
stay byte-identical across seeded runs.
"""

import sys

from loguru import logger

from ghype.config import LOG_LEVEL

LOG_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
    "<level>{level: <8}</level> | "
    "<cyan>{extra[module]}</cyan> | "
    "<level>{message}</level>"
)

_handler_id = None


def _install_handler() -> None:
    global _handler_id
    if _handler_id is not None:
        return
    logger.remove()
    # colorize=None lets loguru decide from the stream (off when piped)
    _handler_id = logger.add(sys.stderr, level=LOG_LEVEL, format=LOG_FORMAT, colorize=None)


def setup_logger(module_name: str = "ghype") -> logger:
    """
    Logger bound to module_name.

    The stderr handler is installed on first use and shared by every module.
    """
    _install_handler()
    return logger.bind(module=module_name)
