"""
Tool Result Model

Standardized result of one pipeline step. Every tool returns this shape so
the CLI can map success and failure onto exit codes uniformly.
"""

from datetime import datetime
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field


class FileFailure(BaseModel):
    """One input that failed inside a batch step."""

    path: str
    error: str
    error_type: str
    exit_code: int


class ToolResult(BaseModel):
    """
    Result of a pipeline tool execution.

    Example:
        # Success case
        result = ToolResult(
            success=True,
            data={"outputs": ["out/tas__max__Global__UK__SSP585__r1i1p1f2.csv"]},
            metadata={"count": 1},
        )

        # Error case
        result = ToolResult(
            success=False,
            error="zone Arctic has no grid locations",
            metadata={"exit_code": 2},
        )
    """

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "success": True,
                "data": {"outputs": ["out/chains/x.chain.csv"]},
                "error": None,
                "metadata": {"exit_code": 0},
                "tool_name": "fit",
            }
        }
    )

    success: bool = Field(description="Whether the step succeeded")
    data: Optional[Any] = Field(default=None, description="Step output (paths, tables, reports)")
    error: Optional[str] = Field(default=None, description="Error message if the step failed")
    metadata: Dict[str, Any] = Field(default_factory=dict, description="exit_code, counts, error details")
    failures: List[FileFailure] = Field(default_factory=list, description="Per-file failures in batch steps")
    # Log-only; never written into output files.
    timestamp: str = Field(default_factory=lambda: datetime.now().isoformat())
    tool_name: Optional[str] = None

    @property
    def exit_code(self) -> int:
        if self.success:
            return 0
        return int(self.metadata.get("exit_code", 1))

    def __str__(self) -> str:
        if self.success:
            return f"ToolResult(success=True, tool={self.tool_name})"
        return f"ToolResult(success=False, error='{self.error}')"
