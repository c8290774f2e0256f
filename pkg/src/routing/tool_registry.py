"""
Tool Registry - Centralized Tool Management

Maps subcommand names onto pipeline tools together with metadata about the
pipeline stage each one belongs to, what it consumes and what it produces.
The CLI dispatches through the registry.

Usage:
    from src.routing.tool_registry import default_registry

    registry = default_registry()
    tool = registry.create("fit", logger=log)
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Set

from src.core.errors import UsageError
from src.services.logging_service import LoggingService
from src.tools.base import BaseTool


class ToolCategory(Enum):
    """Pipeline stage of a tool."""
    INGEST = "ingest"
    INFERENCE = "inference"
    SYNOPTIC = "synoptic"
    VERIFICATION = "verification"


@dataclass
class ToolMetadata:
    """
    Metadata about a tool.

    ``consumes`` and ``produces`` name file roles (e.g. ``chain.csv``) so
    pipeline order can be checked without running anything.
    """
    name: str
    description: str
    factory: Callable[..., BaseTool]
    category: ToolCategory
    consumes: Set[str] = field(default_factory=set)
    produces: Set[str] = field(default_factory=set)
    parallel: bool = False
    version: str = "1.0.0"

    def __post_init__(self):
        """Ensure file-role collections are sets."""
        if not isinstance(self.consumes, set):
            self.consumes = set(self.consumes)
        if not isinstance(self.produces, set):
            self.produces = set(self.produces)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            "name": self.name,
            "description": self.description,
            "category": self.category.value,
            "consumes": sorted(self.consumes),
            "produces": sorted(self.produces),
            "parallel": self.parallel,
            "version": self.version,
        }


class ToolRegistry:
    """
    Central registry for pipeline tools.

    Example:
        registry = ToolRegistry()
        registry.register(
            name="fit",
            description="Fit GEVR or NHGR by adaptive MCMC",
            factory=FitTool,
            category=ToolCategory.INFERENCE,
            consumes={"csv"},
            produces={"chain.csv", "chain.json"},
            parallel=True,
        )
        tool = registry.create("fit")
    """

    def __init__(self):
        """Initialize empty registry."""
        self.tools: Dict[str, ToolMetadata] = {}
        self.category_index: Dict[ToolCategory, Set[str]] = {}

    def register(
        self,
        name: str,
        description: str,
        factory: Callable[..., BaseTool],
        category: ToolCategory,
        consumes: Optional[Set[str]] = None,
        produces: Optional[Set[str]] = None,
        parallel: bool = False,
        version: str = "1.0.0",
    ) -> ToolMetadata:
        """
        Register a tool.

        Raises:
            UsageError: name already registered
        """
        if name in self.tools:
            raise UsageError(f"tool {name!r} is already registered")
        metadata = ToolMetadata(
            name=name,
            description=description,
            factory=factory,
            category=category,
            consumes=consumes or set(),
            produces=produces or set(),
            parallel=parallel,
            version=version,
        )
        self.tools[name] = metadata
        self.category_index.setdefault(category, set()).add(name)
        return metadata

    def get(self, name: str) -> Optional[ToolMetadata]:
        return self.tools.get(name)

    def names(self) -> List[str]:
        """Registered tool names in registration order."""
        return list(self.tools)

    def find_by_category(self, category: ToolCategory) -> List[ToolMetadata]:
        return [self.tools[name] for name in sorted(self.category_index.get(category, set()))]

    def producers_of(self, role: str) -> List[ToolMetadata]:
        """Tools whose outputs include the given file role."""
        return [m for m in self.tools.values() if role in m.produces]

    def create(self, name: str, logger: Optional[LoggingService] = None) -> BaseTool:
        """
        Instantiate a registered tool.

        Raises:
            UsageError: unknown tool name
        """
        metadata = self.tools.get(name)
        if metadata is None:
            raise UsageError(f"unknown command {name!r}", choices=",".join(self.names()))
        return metadata.factory(logger=logger)


def default_registry() -> ToolRegistry:
    """Registry of the seven pipeline subcommands in pipeline order."""
    from src.tools.aggregate_tool import AggregateTool
    from src.tools.delta_tool import DeltaTool
    from src.tools.fit_tool import FitTool
    from src.tools.lmm_tool import LmmTool
    from src.tools.simulate_tool import SimulateTool, VerifyTool
    from src.tools.summarize_tool import SummarizeTool

    registry = ToolRegistry()
    registry.register(
        name="aggregate",
        description="Compile zonal, global and point annual series from a grid CSV",
        factory=AggregateTool,
        category=ToolCategory.INGEST,
        consumes={"grid.csv"},
        produces={"csv", "manifest.json"},
    )
    registry.register(
        name="fit",
        description="Fit GEVR or NHGR by adaptive MCMC to annual series",
        factory=FitTool,
        category=ToolCategory.INFERENCE,
        consumes={"csv", "manifest.json"},
        produces={"chain.csv", "chain.json"},
        parallel=True,
    )
    registry.register(
        name="delta",
        description="Compute change draws from chains",
        factory=DeltaTool,
        category=ToolCategory.INFERENCE,
        consumes={"chain.csv", "chain.json"},
        produces={"delta.csv", "delta.json", "return_values.csv"},
    )
    registry.register(
        name="summarize",
        description="Pool change draws into expected-change and box-whisker tables",
        factory=SummarizeTool,
        category=ToolCategory.SYNOPTIC,
        consumes={"delta.csv"},
        produces={"summary.csv", "box_whisker.csv"},
    )
    registry.register(
        name="lmm",
        description="Fit the scenario / GCM / ensemble mixed model",
        factory=LmmTool,
        category=ToolCategory.SYNOPTIC,
        consumes={"delta.csv", "observations.csv"},
        produces={"lmm.csv"},
        parallel=True,
    )
    registry.register(
        name="simulate",
        description="Generate synthetic datasets from a JSON spec",
        factory=SimulateTool,
        category=ToolCategory.VERIFICATION,
        consumes={"spec.json"},
        produces={"csv", "manifest.json", "observations.csv"},
    )
    registry.register(
        name="verify",
        description="Credible-interval coverage over simulated datasets",
        factory=VerifyTool,
        category=ToolCategory.VERIFICATION,
        consumes={"spec.json"},
        produces={"coverage.json", "coverage.csv"},
        parallel=True,
    )
    return registry
