"""
CLI Middleware - Logging setup and error reporting for subcommands

Provides:
- Root logging configuration (stderr, so stdout stays free for tables)
- Mapping of a ToolResult or escaped exception to the process exit code
- One-line or JSON error output on stderr

Exit codes: 0 success, 1 user error, 2 data validation, 3 numerical failure.

Usage:
    from cli.middleware import configure_logging, report_result

    configure_logging("INFO")
    exit_code = report_result(result, json_errors=False)
"""

import json
import logging
import sys
from typing import Any, Callable, Dict, Optional, TextIO

from pydantic import ValidationError

from src.core.errors import ClimdeltaError
from src.models.tool_result import ToolResult

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USER_ERROR = 1

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: str = "INFO", stream: Optional[TextIO] = None) -> None:
    """
    Configure the root handler once per process.

    Args:
        level: Level name (DEBUG, INFO, WARNING, ERROR)
        stream: Destination, stderr by default
    """
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        raise ValueError(f"unknown log level {level!r}")
    logging.basicConfig(
        level=numeric,
        format=LOG_FORMAT,
        stream=stream or sys.stderr,
        force=True,
    )
    logger.debug(f"Logging configured at {level.upper()}")


def _emit(payload: Dict[str, Any], json_errors: bool, stream: TextIO) -> None:
    if json_errors:
        stream.write(json.dumps(payload, sort_keys=True) + "\n")
    else:
        stream.write(f"error: {payload['message']}\n")
    stream.flush()


def report_result(result: ToolResult, json_errors: bool = False, stream: Optional[TextIO] = None) -> int:
    """
    Exit code for a tool result; failures are reported on ``stream``.

    Per-file failures of a batch that still succeeded are reported as warnings
    and do not change the exit code.
    """
    stream = stream or sys.stderr
    if result.success:
        for failure in result.failures:
            logger.warning(f"skipped {failure.path}: {failure.error}")
        return EXIT_OK

    exit_code = int(result.metadata.get("exit_code", EXIT_USER_ERROR))
    payload = dict(result.metadata.get("error") or {})
    payload.setdefault("error", "ToolFailure")
    payload.setdefault("exit_code", exit_code)
    payload["message"] = result.error or "failed"
    payload["command"] = result.tool_name
    if result.failures:
        payload["failures"] = [f.model_dump() for f in result.failures]
    _emit(payload, json_errors, stream)
    return exit_code


def report_exception(error: BaseException, json_errors: bool = False, stream: Optional[TextIO] = None) -> int:
    """Exit code for an exception that escaped a tool (argument building, registry lookup)."""
    stream = stream or sys.stderr
    if isinstance(error, ClimdeltaError):
        payload = error.to_dict()
        exit_code = error.exit_code
    elif isinstance(error, ValidationError):
        payload = {"error": "ValidationError", "message": f"invalid value: {error.errors()[0]['msg']}"}
        exit_code = EXIT_USER_ERROR
    else:
        logger.error(f"Unhandled exception: {error}", exc_info=error)
        payload = {"error": type(error).__name__, "message": str(error)}
        exit_code = EXIT_USER_ERROR
    payload["exit_code"] = exit_code
    _emit(payload, json_errors, stream)
    return exit_code


def guarded(fn: Callable[[], ToolResult], json_errors: bool = False) -> int:
    """Run a subcommand body and turn its outcome into an exit code."""
    try:
        result = fn()
    except Exception as e:
        return report_exception(e, json_errors)
    return report_result(result, json_errors)


__all__ = [
    "configure_logging",
    "report_result",
    "report_exception",
    "guarded",
]
