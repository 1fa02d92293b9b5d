"""
model/tools/logger.py
------------------------
This module provides a simple logger wrapper around Python's built-in logging.
It logs messages to both a file and the console using a unified format.

The console goes through rich on stderr; stdout carries JSON payloads only.
"""

import logging
import os

from rich.console import Console
from rich.logging import RichHandler


class Logger:
    """
    Logger
    ------
    A static logger class that provides methods for logging informational,
    warning, error, and debug messages.

    Logs are written to:
    - File: <log_dir>/contribnet.log (log_dir defaults to "log")
    - Console: standard error, rendered by rich
    """

    log_dir: str = os.environ.get("CONTRIBNET_LOG_DIR", "log")
    log_file: str = os.path.join(log_dir, "contribnet.log")
    file_format: str = "%(asctime)s - %(filename)s - %(levelname)5s - %(message)s"

    _logger: logging.Logger = logging.getLogger("contribnet")
    _file_handler: logging.Handler
    _console_handler: logging.Handler

    os.makedirs(log_dir, exist_ok=True)

    _file_handler = logging.FileHandler(log_file, encoding="utf-8")
    _file_handler.setFormatter(logging.Formatter(file_format))
    _console_handler = RichHandler(
        console=Console(stderr=True), show_path=False, rich_tracebacks=False
    )
    _console_handler.setFormatter(logging.Formatter("%(message)s"))
    _logger.addHandler(_file_handler)
    _logger.addHandler(_console_handler)
    _logger.setLevel(logging.INFO)

    @classmethod
    def configure(cls, log_dir: str = None, level: str = "INFO") -> None:
        """
        Re-point the file handler and set the level.

        Args:
            log_dir (str): New log directory; None keeps the current one.
            level (str): Standard logging level name.
        """
        if log_dir and log_dir != cls.log_dir:
            os.makedirs(log_dir, exist_ok=True)
            cls._logger.removeHandler(cls._file_handler)
            cls._file_handler.close()
            cls.log_dir = log_dir
            cls.log_file = os.path.join(log_dir, "contribnet.log")
            cls._file_handler = logging.FileHandler(cls.log_file, encoding="utf-8")
            cls._file_handler.setFormatter(logging.Formatter(cls.file_format))
            cls._logger.addHandler(cls._file_handler)
        cls._logger.setLevel(level.upper())

    @classmethod
    def info(cls, message: str) -> None:
        """Log an informational message."""
        cls._logger.info(message)

    @classmethod
    def warning(cls, message: str) -> None:
        """Log a warning message."""
        cls._logger.warning(message)

    @classmethod
    def error(cls, message: str) -> None:
        """Log an error message."""
        cls._logger.error(message)

    @classmethod
    def debug(cls, message: str) -> None:
        """Log a debug message (only shown if the level is DEBUG)."""
        cls._logger.debug(message)
