"""
Exception types raised across lcae.
The CLI maps them onto exit codes; library code only raises.
"""

from typing import Optional


class LcaeError(Exception):
    """Base class for every error lcae raises on purpose."""


class ShapeError(LcaeError, ValueError):
    """Matrix dimensions do not line up."""


class NumericError(LcaeError, ArithmeticError):
    """Singular system, failed generation or non-finite result."""


class ConfigError(LcaeError):
    """Unknown config key or out-of-range value."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UsageError(LcaeError):
    """Bad command line."""


class DataFormatError(LcaeError):
    """
    Input file does not follow its documented format.
    Carries the path and 1-based line number when known.
    """

    def __init__(self, message: str, path=None, line: Optional[int] = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(f"{where}{message}")
