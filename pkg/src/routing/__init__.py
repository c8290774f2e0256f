"""
Tool Routing

Subcommand name -> pipeline tool lookup.

Usage:
    from src.routing import default_registry

    tool = default_registry().create("summarize")
"""

from src.routing.tool_registry import (
    ToolCategory,
    ToolMetadata,
    ToolRegistry,
    default_registry,
)

__all__ = [
    "ToolCategory",
    "ToolMetadata",
    "ToolRegistry",
    "default_registry",
]
