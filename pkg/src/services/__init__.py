"""
Services Package - Logging and file I/O

Run-message logging and the readers/writers for every pipeline file.
"""

from .logging_service import LoggingService
from . import io_service

__all__ = [
    'LoggingService',
    'io_service',
]
