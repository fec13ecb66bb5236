"""
Version helpers for lcae.
Reports the installed package version and guards the binary model format
against files written by a newer release.
"""

import logging

# Try to import packaging, but define fallback if missing
try:
    from packaging import version
    HAS_PACKAGING = True
except ImportError:
    HAS_PACKAGING = False

from lcae.utils.errors import DataFormatError

logger = logging.getLogger(__name__)

# Hardcoded version as fallback (updated during build)
APP_VERSION = "0.4.0"

# Version of the binary model container written by save_model
MODEL_FORMAT_VERSION = "1.0"


def get_current_version() -> str:
    """Get the installed lcae version."""
    try:
        import importlib.metadata
        return importlib.metadata.version("lcae")
    except Exception:
        pass

    return APP_VERSION


def parse_version_fallback(v_str: str) -> tuple:
    """
    Parse version string to tuple of integers for comparison.
    Handles '1.0.0', 'v1.0.0', '1.0', etc.
    """
    try:
        v_str = v_str.lstrip('v').strip()
        parts = []
        for part in v_str.split('.'):
            num = ''.join(c for c in part if c.isdigit())
            if num:
                parts.append(int(num))
        return tuple(parts)
    except Exception:
        return (0, 0, 0)


def is_version_newer(candidate: str, reference: str) -> bool:
    """
    Compare versions using packaging if available, or fallback logic.
    Returns True if candidate > reference.
    """
    if HAS_PACKAGING:
        try:
            return version.parse(candidate) > version.parse(reference)
        except Exception:
            logger.warning("Packaging version comparison failed, using fallback")

    try:
        return parse_version_fallback(candidate) > parse_version_fallback(reference)
    except Exception as e:
        logger.error(f"Version comparison failed: {e}")
        return False


def check_format_version(found: str, path=None, supported: str = MODEL_FORMAT_VERSION) -> None:
    """Raise DataFormatError when a file's format version is newer than this reader."""
    if not found:
        raise DataFormatError("missing format version", path=path)
    if is_version_newer(found, supported):
        raise DataFormatError(
            f"format version {found} is newer than the supported {supported}; "
            f"upgrade lcae (running {get_current_version()})",
            path=path,
        )
    if found != supported:
        logger.info(f"Reading format version {found} with a {supported} reader")
