"""
Tools Package - Pipeline steps

One tool per subcommand; each returns a ToolResult.
"""

from .base import BaseTool
from .aggregate_tool import AggregateTool
from .fit_tool import FitTool
from .delta_tool import DeltaTool
from .summarize_tool import SummarizeTool
from .lmm_tool import LmmTool
from .simulate_tool import SimulateTool, VerifyTool

__all__ = [
    'BaseTool',
    'AggregateTool',
    'FitTool',
    'DeltaTool',
    'SummarizeTool',
    'LmmTool',
    'SimulateTool',
    'VerifyTool',
]
