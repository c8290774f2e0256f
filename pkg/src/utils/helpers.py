"""
Helper Utilities - Thin wrappers around open-source libraries

Convenience wrappers for retry logic (tenacity), human-readable formatting
(humanize), table rendering (tabulate) and file hashing.
"""

import hashlib
from pathlib import Path
from typing import Callable, Iterable, Optional, Tuple, Type, TypeVar, Union

import humanize
import pandas as pd
from tabulate import tabulate
from tenacity import RetryError, Retrying, retry_if_exception_type, stop_after_attempt

T = TypeVar('T')

# ============================================================================
# Formatting Helpers (using 'humanize' library)
# ============================================================================

def format_duration(seconds: float) -> str:
    """Format a duration for progress messages (e.g., '2 minutes and 3.51 seconds')."""
    return humanize.precisedelta(seconds, minimum_unit="milliseconds", format="%0.2f")


# ============================================================================
# Retry Helper (using 'tenacity' library)
# ============================================================================

class AttemptsExhausted(Exception):
    """Raised by ``retry_until_valid`` when every attempt failed."""

    def __init__(self, attempts: int, last_error: Optional[BaseException]):
        super().__init__(f"gave up after {attempts} attempts: {last_error}")
        self.attempts = attempts
        self.last_error = last_error


def retry_until_valid(
    fn: Callable[[], T],
    max_attempts: int,
    retry_on: Union[Type[BaseException], Tuple[Type[BaseException], ...]],
) -> T:
    """
    Call ``fn`` until it stops raising ``retry_on``, without waiting in between.

    Used for randomized searches (e.g. a valid MCMC starting point) rather
    than I/O, so there is no backoff.

    Raises:
        AttemptsExhausted: carrying the attempt count and the last error
    """
    retrying = Retrying(
        stop=stop_after_attempt(max_attempts),
        retry=retry_if_exception_type(retry_on),
        reraise=False,
    )
    try:
        return retrying(fn)
    except RetryError as e:
        last = e.last_attempt.exception() if e.last_attempt else None
        raise AttemptsExhausted(max_attempts, last) from last


# ============================================================================
# Tables (using 'tabulate' library)
# ============================================================================

def render_table(frame: pd.DataFrame, floatfmt: str = ".4g") -> str:
    """Render a DataFrame as a plain-text table for stdout."""
    if frame.empty:
        return "(no rows)"
    return tabulate(frame, headers="keys", tablefmt="github", floatfmt=floatfmt, showindex=False)


# ============================================================================
# Files
# ============================================================================

def sha256_file(path: Union[str, Path], chunk_size: int = 1 << 20) -> str:
    """Hex SHA-256 digest of a file's contents."""
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(chunk_size), b""):
            digest.update(chunk)
    return digest.hexdigest()


def hash_inputs(paths: Iterable[Union[str, Path]]) -> dict:
    """Map each input path to its SHA-256 digest."""
    return {str(p): sha256_file(p) for p in paths}


def truncate_string(text: str, max_length: int, suffix: str = "...") -> str:
    """
    Truncate string to maximum length.

    Args:
        text: String to truncate
        max_length: Maximum length
        suffix: Suffix to add if truncated

    Returns:
        Truncated string
    """
    if len(text) <= max_length:
        return text
    return text[:max_length - len(suffix)] + suffix
