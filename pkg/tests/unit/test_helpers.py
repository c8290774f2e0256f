"""
Unit Tests for Helper Utilities
"""

import hashlib

import pandas as pd
import pytest

from src.utils.helpers import (
    AttemptsExhausted,
    format_duration,
    hash_inputs,
    render_table,
    retry_until_valid,
    sha256_file,
    truncate_string,
)


pytestmark = pytest.mark.unit


class TestRetryUntilValid:
    """Tests for the retry wrapper."""

    def test_returns_first_success(self):
        """Test the call is retried until it stops raising."""
        calls = []

        def flaky():
            calls.append(1)
            if len(calls) < 3:
                raise ValueError("not yet")
            return "ok"

        assert retry_until_valid(flaky, 5, ValueError) == "ok"
        assert len(calls) == 3

    def test_exhausted(self):
        """Test the attempt count and last error are kept."""
        def never():
            raise ValueError("still bad")

        with pytest.raises(AttemptsExhausted) as exc_info:
            retry_until_valid(never, 4, ValueError)
        assert exc_info.value.attempts == 4
        assert str(exc_info.value.last_error) == "still bad"

    def test_other_errors_propagate(self):
        """Test exceptions outside retry_on are not retried."""
        def broken():
            raise KeyError("x")

        with pytest.raises(KeyError):
            retry_until_valid(broken, 4, ValueError)


class TestFormatting:
    """Tests for formatting and table helpers."""

    def test_format_duration(self):
        """Test durations are rendered in words."""
        assert "seconds" in format_duration(3.5)

    def test_render_table(self):
        """Test a frame renders with headers."""
        text = render_table(pd.DataFrame({"zone": ["Global"], "E_delta": [1.23456]}))
        assert "zone" in text and "1.235" in text

    def test_render_empty(self):
        """Test an empty frame renders a placeholder."""
        assert render_table(pd.DataFrame()) == "(no rows)"

    def test_truncate(self):
        """Test truncation keeps the suffix within the limit."""
        assert truncate_string("abcdefgh", 5) == "ab..."
        assert truncate_string("abc", 5) == "abc"


class TestHashing:
    """Tests for input hashing."""

    def test_sha256(self, tmp_path):
        """Test the digest matches hashlib."""
        path = tmp_path / "a.csv"
        path.write_bytes(b"year,value\n")
        assert sha256_file(path) == hashlib.sha256(b"year,value\n").hexdigest()
        assert hash_inputs([path]) == {str(path): sha256_file(path)}
