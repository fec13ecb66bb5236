import logging

import pytest

from lcae.utils import versioning
from lcae.utils.errors import DataFormatError
from lcae.utils.versioning import (
    MODEL_FORMAT_VERSION,
    check_format_version,
    get_current_version,
    is_version_newer,
    parse_version_fallback,
)


def test_current_version_is_a_version_string():
    assert parse_version_fallback(get_current_version())


@pytest.mark.parametrize(
    "text,expected",
    [("1.0.0", (1, 0, 0)), ("v2.3", (2, 3)), (" 0.4.1 ", (0, 4, 1)), ("1.2rc1", (1, 21))],
)
def test_parse_version_fallback(text, expected):
    assert parse_version_fallback(text) == expected


@pytest.mark.parametrize(
    "candidate,reference,newer",
    [("1.1", "1.0", True), ("1.0", "1.0", False), ("0.9", "1.0", False), ("1.10", "1.9", True)],
)
def test_is_version_newer(candidate, reference, newer):
    assert is_version_newer(candidate, reference) is newer


def test_is_version_newer_without_packaging(monkeypatch):
    monkeypatch.setattr(versioning, "HAS_PACKAGING", False)
    assert is_version_newer("2.0", "1.9")
    assert not is_version_newer("1.0", "1.0")


def test_supported_format_passes():
    check_format_version(MODEL_FORMAT_VERSION)


def test_older_format_is_read(caplog):
    with caplog.at_level(logging.INFO, logger="lcae.utils.versioning"):
        check_format_version("0.9", supported="1.0")
    assert "0.9" in caplog.text


def test_newer_format_is_rejected():
    with pytest.raises(DataFormatError, match="newer"):
        check_format_version("1.1", path="m.lcae", supported="1.0")


def test_missing_format_version():
    with pytest.raises(DataFormatError):
        check_format_version("")
