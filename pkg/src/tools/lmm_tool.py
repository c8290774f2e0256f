"""
LMM Tool

Fits the scenario / model / ensemble mixed model per (variable, zone) and
writes one ``lmm_<measure>.csv`` table per measure with columns

    variable, zone, iota_plus_g1, g2_minus_g1, g3_minus_g1,
    tau_R, tau_FE, tau_eps, tau_delta, tau_zeta, R2_FE, R2_ME

Input is either change-draw files (each draw is one observation) or an
observation-records CSV as written by ``simulate``.

Example:
    tool = LmmTool()
    result = tool.execute(run=run, inputs=[Path("deltas/")])
"""

from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd

from src.core.errors import ClimdeltaError, UsageError
from src.models.run import RunConfig
from src.models.synoptic import LmmFit
from src.models.tool_result import ToolResult
from src.services.io_service import deltas_to_observations, expand_inputs, read_observations, write_table
from src.stats.lmm import lmm_fit
from src.tools.base import BaseTool, failure_for
from src.tools.summarize_tool import load_deltas
from src.utils.helpers import render_table

TABLE_COLUMNS = [
    "variable", "zone", "iota_plus_g1", "g2_minus_g1", "g3_minus_g1",
    "tau_R", "tau_FE", "tau_eps", "tau_delta", "tau_zeta", "R2_FE", "R2_ME",
]
DETAIL_COLUMNS = TABLE_COLUMNS + [
    "criterion", "log_likelihood", "fe_log_likelihood", "n_obs", "n_models", "n_ensembles", "fixed_components",
]

GroupKey = Tuple[str, str, str]


def _fit_group(args) -> Union[LmmFit, ClimdeltaError]:
    frame, criterion = args
    try:
        return lmm_fit(frame, criterion=criterion)
    except ClimdeltaError as e:
        return e


def _groups(frame: pd.DataFrame) -> Dict[GroupKey, pd.DataFrame]:
    frame = frame.copy()
    for column, default in (("variable", "-"), ("zone", "-"), ("measure", "obs")):
        if column not in frame.columns:
            frame[column] = default
    return {
        (str(measure), str(variable), str(zone)): group
        for (measure, variable, zone), group in frame.groupby(["measure", "variable", "zone"], sort=True)
    }


class LmmTool(BaseTool):
    """Mixed-effects decomposition of change draws."""

    @property
    def name(self) -> str:
        return "lmm"

    @property
    def description(self) -> str:
        return "Fit scenario fixed effects with nested GCM / ensemble random effects"

    def validate_params(self, criterion: str = "ml", **kwargs) -> bool:
        return criterion in ("ml", "reml")

    def _observations(self, inputs: Sequence[Path], observations: Optional[Path]) -> Tuple[pd.DataFrame, List[Path]]:
        if observations is not None:
            return read_observations(observations), [Path(observations)]
        deltas = load_deltas(inputs)
        frames = []
        for measure in sorted({d.measure for d in deltas}):
            part = deltas_to_observations([d for d in deltas if d.measure == measure])
            part["measure"] = measure
            frames.append(part)
        return pd.concat(frames, ignore_index=True), expand_inputs(inputs, "*.delta_*.csv")

    def _execute_impl(
        self,
        run: RunConfig,
        inputs: Sequence[Path] = (),
        observations: Optional[Path] = None,
        criterion: str = "ml",
        strict: bool = False,
        excel: bool = False,
        **_,
    ) -> ToolResult:
        if observations is None and not inputs:
            raise UsageError("give change-draw files or an observations CSV")
        frame, inputs_used = self._observations(inputs, observations)
        groups = _groups(frame)

        tasks = [(group, criterion) for group in groups.values()]
        if run.jobs <= 1 or len(tasks) <= 1:
            fits = [_fit_group(t) for t in tasks]
        else:
            with ProcessPoolExecutor(max_workers=run.jobs) as pool:
                fits = list(pool.map(_fit_group, tasks))

        rows: Dict[str, List[dict]] = {}
        details: Dict[str, List[dict]] = {}
        failures = []
        for (measure, variable, zone), fit in zip(groups, fits):
            if isinstance(fit, ClimdeltaError):
                failures.append(failure_for(Path(f"{measure}/{variable}/{zone}"), fit))
                self.logger.error(f"{variable}/{zone} ({measure}): {fit.message}", task_id=self.name)
                continue
            row = {"variable": variable, "zone": zone, **fit.table_row()}
            rows.setdefault(measure, []).append(row)
            details.setdefault(measure, []).append({
                **row,
                "criterion": fit.criterion,
                "log_likelihood": fit.log_likelihood,
                "fe_log_likelihood": fit.fe_log_likelihood,
                "n_obs": fit.n_obs,
                "n_models": fit.n_models,
                "n_ensembles": fit.n_ensembles,
                "fixed_components": ";".join(fit.fixed_components),
            })

        out_dir = Path(run.out)
        outputs: List[Path] = []
        tables: Dict[str, str] = {}
        for measure in sorted(rows):
            outputs += write_table(rows[measure], out_dir / f"lmm_{measure}.csv", TABLE_COLUMNS,
                                   excel=excel, sheet_name=f"lmm_{measure}")
            outputs += write_table(details[measure], out_dir / f"lmm_{measure}.details.csv", DETAIL_COLUMNS)
            tables[measure] = render_table(pd.DataFrame(rows[measure], columns=TABLE_COLUMNS), floatfmt=".2f")
        return self._finish(run, inputs=inputs_used, outputs=outputs, failures=failures,
                            strict=strict, data={"tables": tables})
