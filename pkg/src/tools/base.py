"""
Base Tool Class

Abstract base class for the pipeline steps (aggregate, fit, delta,
summarize, lmm, simulate, verify). Each step is a tool with a uniform
``execute`` that turns domain errors into a failed ToolResult carrying the
exit code, and writes a ``run_metadata.json`` sidecar next to its outputs.

Usage:
    from src.tools.base import BaseTool, ToolResult

    class MyTool(BaseTool):
        @property
        def name(self) -> str:
            return "my_tool"

        @property
        def description(self) -> str:
            return "Description of what the tool does"

        def _execute_impl(self, run: RunConfig, **kwargs) -> ToolResult:
            return ToolResult(success=True, data=result)
"""

import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, TypeVar

from pydantic import ValidationError

from src.core.errors import ClimdeltaError
from src.models.run import RunConfig, RunMetadata
from src.models.tool_result import FileFailure, ToolResult
from src.services.io_service import write_run_metadata
from src.services.logging_service import LoggingService
from src.utils.helpers import hash_inputs

T = TypeVar("T")

logger = logging.getLogger(__name__)


class BaseTool(ABC):
    """
    Abstract base class for all pipeline tools.

    All tools must implement:
    - name: Subcommand name
    - description: One-line summary shown in the CLI help
    - _execute_impl: The step logic
    """

    def __init__(self, logger: Optional[LoggingService] = None):
        """
        Initialize the tool.

        Args:
            logger: Optional run-message channel for progress output
        """
        self.logger = logger or LoggingService()

    @property
    @abstractmethod
    def name(self) -> str:
        """Subcommand name."""
        pass

    @property
    @abstractmethod
    def description(self) -> str:
        """What the step does."""
        pass

    @abstractmethod
    def _execute_impl(self, run: RunConfig, **kwargs) -> ToolResult:
        """
        Execute the step.

        Args:
            run: Merged configuration for this invocation
            **kwargs: Step-specific parameters

        Returns:
            ToolResult with success status and data or error
        """
        pass

    def execute(self, run: RunConfig, **kwargs) -> ToolResult:
        """
        Public execute method with error handling.

        Domain errors become a failed result with their exit code; anything
        else is reported as exit code 1.
        """
        try:
            if not self.validate_params(run=run, **kwargs):
                return self._failure("Invalid parameters provided", exit_code=1)
            result = self._execute_impl(run=run, **kwargs)
            return result.model_copy(update={"tool_name": self.name})
        except ClimdeltaError as e:
            self.logger.error(f"{self.name} failed: {e.message}", task_id=self.name)
            return self._failure(e.message, exit_code=e.exit_code, error=e.to_dict())
        except ValidationError as e:
            message = f"invalid value: {e.errors()[0]['msg']}"
            self.logger.error(f"{self.name} failed: {message}", task_id=self.name)
            return self._failure(message, exit_code=1)
        except Exception as e:
            logger.exception(f"Unexpected error in {self.name}")
            return self._failure(f"Error executing {self.name}: {e}", exit_code=1)

    def validate_params(self, **kwargs) -> bool:
        """
        Validate input parameters.
        Override in subclass for custom validation.
        """
        return True

    def _failure(self, message: str, exit_code: int, **metadata: Any) -> ToolResult:
        return ToolResult(
            success=False,
            error=message,
            metadata={"exit_code": exit_code, **metadata},
            tool_name=self.name,
        )

    # ------------------------------------------------------------------
    # Batch helpers
    # ------------------------------------------------------------------

    def _isolated(self, path: Path, fn: Callable[[], T]) -> Tuple[Optional[T], Optional[FileFailure]]:
        """Run ``fn`` for one input file; a domain error becomes a FileFailure."""
        try:
            return fn(), None
        except ClimdeltaError as e:
            self.logger.error(f"{path.name}: {e.message}", task_id=self.name)
            return None, failure_for(path, e)

    def _finish(
        self,
        run: RunConfig,
        inputs: Iterable[Path],
        outputs: Sequence[Path],
        failures: Sequence[FileFailure] = (),
        strict: bool = False,
        data: Optional[Dict[str, Any]] = None,
    ) -> ToolResult:
        """
        Write the run metadata sidecar and build the batch result.

        A batch fails when every input failed, or when ``strict`` and any input failed.
        """
        out_dir = Path(run.out)
        metadata = RunMetadata.for_run(
            run,
            inputs=hash_inputs(sorted(set(Path(p) for p in inputs))),
            outputs=[_relative(p, out_dir) for p in outputs],
            failures=[f.model_dump() for f in failures],
        )
        sidecar = write_run_metadata(out_dir, metadata)

        payload = {"outputs": [str(p) for p in outputs], "metadata": str(sidecar), **(data or {})}
        counts = {"n_outputs": len(outputs), "n_failed": len(failures)}
        failed = bool(failures) and (strict or not outputs)
        if failed:
            worst = max(failures, key=lambda f: f.exit_code)
            return ToolResult(
                success=False,
                data=payload,
                error=f"{len(failures)} input(s) failed; first: {failures[0].path}: {failures[0].error}",
                metadata={"exit_code": worst.exit_code, **counts},
                failures=list(failures),
            )
        return ToolResult(success=True, data=payload, metadata={"exit_code": 0, **counts},
                          failures=list(failures))


def failure_for(path: Path, error: ClimdeltaError) -> FileFailure:
    return FileFailure(
        path=str(path),
        error=error.message,
        error_type=type(error).__name__,
        exit_code=error.exit_code,
    )


def _relative(path: Path, base: Path) -> str:
    try:
        return Path(path).relative_to(base).as_posix()
    except ValueError:
        return Path(path).as_posix()
