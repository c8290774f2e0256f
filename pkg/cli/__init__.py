"""
CLI Package - argparse subcommands and error middleware
"""

from cli.commands import build_parser, main
from cli.middleware import configure_logging, guarded, report_exception, report_result

__all__ = [
    "build_parser",
    "main",
    "configure_logging",
    "guarded",
    "report_exception",
    "report_result",
]
