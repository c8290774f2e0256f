"""
Fit Tool

Runs one adaptive MCMC chain per annual series and writes
``<slug>.chain.csv`` with its JSON sidecar. Minima are negated before a
GEVR fit and the chain is keyed by the negated series. Each input is
isolated: a corrupt or invalid file is reported as a failure without
stopping the batch.

Example:
    tool = FitTool()
    result = tool.execute(run=run, inputs=[Path("series/")], model="auto")
"""

import time
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from src.core.errors import ClimdeltaError, UsageError
from src.models.identifiers import DatasetKey, Statistic
from src.models.run import RunConfig
from src.models.series import AnnualSeries, require_valid
from src.models.tool_result import FileFailure, ToolResult
from src.services.io_service import expand_inputs, file_role, load_manifest, read_series_csv, write_chain
from src.stats.aggregate import negate
from src.stats.mcmc import chain_metadata, fit_many
from src.stats.trend import RegressionModel, get_model
from src.tools.base import BaseTool, failure_for
from src.utils.helpers import format_duration

MODEL_CHOICES = ("gevr", "nhgr", "auto")


def choose_model(statistic: Statistic, model: str) -> str:
    """``auto`` fits means with NHGR and everything else with GEVR."""
    if model == "auto":
        return "nhgr" if statistic == Statistic.MEAN else "gevr"
    return model


class FitTool(BaseTool):
    """Posterior sampling for every input series."""

    @property
    def name(self) -> str:
        return "fit"

    @property
    def description(self) -> str:
        return "Fit GEVR or NHGR by adaptive MCMC to annual series"

    def validate_params(self, model: str = "auto", **kwargs) -> bool:
        return model in MODEL_CHOICES

    def _entries(self, inputs: Sequence[Path], manifest: Optional[Path]) -> List[Tuple[Path, Optional[DatasetKey]]]:
        if manifest is not None:
            return [(e.path, e.key) for e in load_manifest(manifest)]
        files = [p for p in expand_inputs(inputs, "*.csv") if file_role(p) == "csv"]
        return [(p, None) for p in files]

    def _prepare(
        self,
        path: Path,
        key: Optional[DatasetKey],
        model: str,
        run: RunConfig,
        reject_outliers: bool,
        outlier_k: float,
        require_positive_mean: bool,
    ) -> Tuple[AnnualSeries, RegressionModel, bool]:
        series = read_series_csv(path, key)
        report = require_valid(series, run.window.span, reject_outliers, outlier_k)
        for issue in report.issues:
            self.logger.status(f"{path.name}: {issue.message}", task_id=self.name)

        family = choose_model(series.key.statistic, model)
        negated = family == "gevr" and series.key.statistic == Statistic.MIN
        if negated:
            series = negate(series)
        options = {"require_positive_mean": require_positive_mean} if family == "nhgr" else {}
        return series, get_model(family, **options), negated

    def _execute_impl(
        self,
        run: RunConfig,
        inputs: Sequence[Path] = (),
        manifest: Optional[Path] = None,
        model: str = "auto",
        strict: bool = False,
        reject_outliers: bool = False,
        outlier_k: float = 10.0,
        require_positive_mean: bool = True,
        **_,
    ) -> ToolResult:
        if run.chain is None:
            raise UsageError("fit requires a chain configuration")
        entries = self._entries(inputs, manifest)
        if not entries:
            raise UsageError("no series files to fit")

        prepared, paths, failures = [], [], []
        for path, key in entries:
            item, failure = self._isolated(path, lambda: self._prepare(
                path, key, model, run, reject_outliers, outlier_k, require_positive_mean,
            ))
            if failure:
                failures.append(failure)
            else:
                prepared.append(item)
                paths.append(path)

        self.logger.status(
            f"Fitting {len(prepared)} series with {run.jobs} worker(s), "
            f"{run.chain.n_iterations} iterations each",
            task_id=self.name,
        )
        started = time.perf_counter()
        results = fit_many(
            [s for s, _, _ in prepared],
            [m for _, m, _ in prepared],
            run.chain,
            jobs=run.jobs,
            negated=[n for _, _, n in prepared],
        )

        out_dir = Path(run.out)
        outputs: List[Path] = []
        for path, result in zip(paths, results):
            if isinstance(result, ClimdeltaError):
                self.logger.error(f"{path.name}: {result.message}", task_id=self.name)
                failures.append(failure_for(path, result))
                continue
            outputs.extend(write_chain(result, out_dir, chain_metadata(result)))

        self.logger.result(
            f"Fitted {len(outputs) // 2} of {len(entries)} series in "
            f"{format_duration(time.perf_counter() - started)}",
            task_id=self.name,
        )
        inputs_used = [p for p, _ in entries if p.is_file()]
        if manifest is not None:
            inputs_used.append(manifest)
        return self._finish(run, inputs=inputs_used, outputs=outputs,
                            failures=_sorted(failures), strict=strict)


def _sorted(failures: List[FileFailure]) -> List[FileFailure]:
    return sorted(failures, key=lambda f: f.path)
