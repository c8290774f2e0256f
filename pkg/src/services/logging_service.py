"""
Logging Service

Structured run messages for pipeline tools. Messages are sanitized and
written through the ``climdelta`` logger, either as plain text or as one
JSON object per line.

Usage:
    from src.services.logging_service import LoggingService

    log = LoggingService(json_output=False)
    log.status("Fitting 12 series", task_id="fit")
"""

import logging
import re
from typing import Optional

from src.models.message import MessageType, RunMessage
from src.utils.helpers import truncate_string

_LEVELS = {
    "status": logging.INFO,
    "progress": logging.INFO,
    "result": logging.INFO,
    "error": logging.ERROR,
}


class LoggingService:
    """Structured run-message channel with message sanitization."""

    def __init__(self, json_output: bool = False, logger_name: str = "climdelta"):
        """
        Initialize logging service.

        Args:
            json_output: Emit each message as a JSON object instead of plain text
            logger_name: Logger the messages are written to
        """
        self.json_output = json_output
        self.logger = logging.getLogger(logger_name)

    @staticmethod
    def sanitize_message(message: str, max_length: int = 2000) -> str:
        """
        Sanitize message text.

        Removes null bytes and control characters (except newlines and tabs),
        collapses runs of blank lines and spaces, and caps the length.

        Args:
            message: Message to sanitize
            max_length: Maximum message length

        Returns:
            Sanitized message
        """
        message = message.replace('\x00', '')
        message = ''.join(
            char for char in message
            if char in ('\n', '\t') or (ord(char) >= 32 and ord(char) != 127)
        )
        message = re.sub(r'\n{3,}', '\n\n', message)
        message = re.sub(r' {2,}', ' ', message)
        return truncate_string(message.strip(), max_length, suffix=" [truncated]")

    def log(
        self,
        message: str,
        message_type: MessageType = "status",
        task_id: Optional[str] = None,
    ) -> Optional[RunMessage]:
        """
        Emit one run message.

        Returns:
            The emitted RunMessage, or None when nothing is left after sanitizing
        """
        text = self.sanitize_message(message)
        if not text:
            return None
        record = RunMessage(type=message_type, message=text, task_id=task_id)
        if self.json_output:
            line = record.model_dump_json()
        else:
            prefix = f"[{task_id}] " if task_id else ""
            line = f"{prefix}{text}"
        self.logger.log(_LEVELS[message_type], line)
        return record

    def status(self, message: str, task_id: Optional[str] = None):
        """Convenience method for status messages."""
        return self.log(message, "status", task_id)

    def progress(self, message: str, task_id: Optional[str] = None):
        """Convenience method for progress messages."""
        return self.log(message, "progress", task_id)

    def result(self, message: str, task_id: Optional[str] = None):
        """Convenience method for result messages."""
        return self.log(message, "result", task_id)

    def error(self, message: str, task_id: Optional[str] = None):
        """Convenience method for error messages."""
        return self.log(message, "error", task_id)
