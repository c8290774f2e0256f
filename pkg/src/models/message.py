"""
Run Message Models

Structured progress messages emitted by pipeline tools.

Usage:
    from src.models.message import RunMessage

    msg = RunMessage(type="progress", message="fitted 3/12 series", task_id="fit")
"""

from datetime import datetime
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

MessageType = Literal["status", "progress", "result", "error"]


class RunMessage(BaseModel):
    """One log record on the run-message channel."""

    model_config = ConfigDict(frozen=True)

    type: MessageType = Field(..., description="Message category")
    message: str = Field(..., min_length=1)
    timestamp: str = Field(default_factory=lambda: datetime.now().isoformat())
    task_id: Optional[str] = Field(default=None, pattern=r"^[A-Za-z0-9_.-]+$")

    @field_validator("message")
    @classmethod
    def _not_blank(cls, v: str) -> str:
        if not v.strip():
            raise ValueError("message cannot be blank")
        return v
