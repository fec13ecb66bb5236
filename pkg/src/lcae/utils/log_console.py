"""
Console logging for the lcae command line.
Logs go to stderr (and optionally a file) so CSV on stdout stays clean.
"""

import logging
import sys
from typing import Optional

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%H:%M:%S'
LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


class _ConsoleHandler(logging.StreamHandler):
    """Marks handlers installed here so a second setup replaces them."""


class _LogFileHandler(logging.FileHandler):
    pass


def setup_logging(level: str = "INFO", log_file: Optional[str] = None) -> logging.Logger:
    """Install the stderr handler (and a file handler when log_file is set) on the root logger."""
    level = level.upper()
    if level not in LEVELS:
        raise ValueError(f"log level must be one of {LEVELS}, got {level!r}")

    root = logging.getLogger()
    for handler in list(root.handlers):
        if isinstance(handler, (_ConsoleHandler, _LogFileHandler)):
            root.removeHandler(handler)
            handler.close()

    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)
    console = _ConsoleHandler(sys.stderr)
    console.setFormatter(formatter)
    root.addHandler(console)

    if log_file:
        file_handler = _LogFileHandler(log_file, mode="a", encoding="utf-8")
        file_handler.setFormatter(formatter)
        root.addHandler(file_handler)

    root.setLevel(getattr(logging, level))
    return root
