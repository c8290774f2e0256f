"""
Utils Package - Utility functions and helpers

Formatting, retry, table rendering and hashing helpers.
"""

from .helpers import (
    AttemptsExhausted,
    format_duration,
    hash_inputs,
    render_table,
    retry_until_valid,
    sha256_file,
    truncate_string,
)

__all__ = [
    'AttemptsExhausted',
    'format_duration',
    'hash_inputs',
    'render_table',
    'retry_until_valid',
    'sha256_file',
    'truncate_string',
]
