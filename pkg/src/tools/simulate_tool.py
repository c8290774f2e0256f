"""
Simulate and Verify Tools

``simulate`` turns a JSON simulation spec into synthetic inputs that flow
through the same pipeline as real data: annual series CSVs plus a manifest
for GEVR/NHGR specs, observation-record CSVs for mixed-model specs.

``verify`` runs the simulate-fit-check recovery experiment and writes the
coverage report as JSON and CSV.

Example:
    tool = SimulateTool()
    result = tool.execute(run=run, spec_path=Path("gevr_spec.json"))
"""

import time
from pathlib import Path
from typing import List, Optional

from src.core.errors import MissingInputError, UsageError
from src.models.params import ReturnSpec
from src.models.run import RunConfig
from src.models.simulation import CoverageReport, LmmSimulationSpec, SimulationSpec, load_simulation_spec
from src.models.tool_result import ToolResult
from src.services.io_service import (
    ManifestEntry,
    save_manifest,
    write_json,
    write_observations,
    write_series_csv,
    write_table,
)
from src.stats.simulator import coverage_experiment, gen_lmm_dataset, gen_series, lmm_recovery
from src.tools.base import BaseTool
from src.utils.helpers import format_duration

COVERAGE_COLUMNS = ["name", "covered", "total", "fraction", "ci_low", "ci_high"]


def read_spec(path: Path) -> SimulationSpec:
    path = Path(path)
    if not path.is_file():
        raise MissingInputError(f"simulation spec not found: {path}", path=str(path))
    return load_simulation_spec(path.read_text(encoding="utf-8"))


class SimulateTool(BaseTool):
    """Synthetic datasets from a known truth."""

    @property
    def name(self) -> str:
        return "simulate"

    @property
    def description(self) -> str:
        return "Generate synthetic series or mixed-model observations from a JSON spec"

    def _execute_impl(self, run: RunConfig, spec_path: Optional[Path] = None, **_) -> ToolResult:
        if spec_path is None:
            raise UsageError("simulate requires a spec file")
        spec = read_spec(spec_path)
        out_dir = Path(run.out)
        outputs: List[Path] = []

        if isinstance(spec, LmmSimulationSpec):
            for r in range(spec.n_replicates):
                outputs.append(write_observations(gen_lmm_dataset(spec, r), out_dir / f"observations_r{r}.csv"))
        else:
            series = gen_series(spec)
            outputs = [write_series_csv(s, out_dir) for s in series]
            outputs.append(save_manifest(
                [ManifestEntry(key=s.key, path=p) for s, p in zip(series, outputs)],
                out_dir / "manifest.json",
            ))
        outputs.append(write_json(out_dir / "truth.json", spec.model_dump(mode="json")))

        self.logger.result(f"Simulated {spec.n_replicates} {spec.kind} replicate(s)", task_id=self.name)
        return self._finish(run, inputs=[Path(spec_path)], outputs=outputs)


class VerifyTool(BaseTool):
    """Coverage of credible intervals (or LMM recovery) over synthetic replicates."""

    @property
    def name(self) -> str:
        return "verify"

    @property
    def description(self) -> str:
        return "Measure credible-interval coverage of the truth over simulated datasets"

    def _execute_impl(
        self,
        run: RunConfig,
        spec_path: Optional[Path] = None,
        n_datasets: Optional[int] = None,
        level: float = 0.95,
        criterion: str = "ml",
        **_,
    ) -> ToolResult:
        if spec_path is None:
            raise UsageError("verify requires a spec file")
        if not 0 < level < 1:
            raise UsageError(f"level must lie in (0, 1), got {level}")
        spec = read_spec(spec_path)
        started = time.perf_counter()

        if isinstance(spec, LmmSimulationSpec):
            report = lmm_recovery(spec, n_datasets=n_datasets, criterion=criterion)
        else:
            if run.chain is None:
                raise UsageError("verify requires a chain configuration")
            report = coverage_experiment(
                spec, run.chain, n_datasets=n_datasets, jobs=run.jobs, level=level,
                returns=run.returns or ReturnSpec(),
            )

        out_dir = Path(run.out)
        outputs = [write_json(out_dir / "coverage.json", report.model_dump(mode="json"))]
        outputs += write_table(_coverage_rows(report), out_dir / "coverage.csv", COVERAGE_COLUMNS)
        self.logger.result(
            f"Verified {report.n_datasets} replicate(s), {report.n_failed} failed, "
            f"in {format_duration(time.perf_counter() - started)}",
            task_id=self.name,
        )
        return self._finish(run, inputs=[Path(spec_path)], outputs=outputs,
                            data={"report": report.model_dump(mode="json")})


def _coverage_rows(report: CoverageReport) -> List[dict]:
    items = list(report.parameters) + ([report.delta] if report.delta is not None else [])
    return [item.model_dump() for item in items]
