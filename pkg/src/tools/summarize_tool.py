"""
Summarize Tool

Pools change draws across climate models with equal weight per model and
writes, per measure (Q, M_parametric, M_predictive):

    summary_<measure>.csv       variable, zone, scenario, E_delta, P_positive
    box_whisker_<measure>.csv   mean and quantiles per (variable, zone, gcm, scenario)

Example:
    tool = SummarizeTool()
    result = tool.execute(run=run, inputs=[Path("deltas/")])
"""

from collections import defaultdict
from pathlib import Path
from typing import Dict, List, Sequence

import pandas as pd

from src.core.errors import UsageError
from src.models.run import RunConfig
from src.models.synoptic import DeltaDraws
from src.models.tool_result import ToolResult
from src.services.io_service import expand_inputs, read_delta, write_table
from src.stats.synoptic import box_whisker_rows, summary_rows
from src.tools.base import BaseTool
from src.utils.helpers import render_table

SUMMARY_COLUMNS = ["variable", "zone", "scenario", "E_delta", "P_positive"]
BOX_WHISKER_COLUMNS = ["variable", "zone", "gcm", "scenario", "mean", "q025", "q25", "median", "q75", "q975"]


def load_deltas(inputs: Sequence[Path]) -> List[DeltaDraws]:
    files = expand_inputs(inputs, "*.delta_*.csv")
    if not files:
        raise UsageError("no change-draw files given")
    return [read_delta(p) for p in files]


class SummarizeTool(BaseTool):
    """Expected change and probability of increase across climate models."""

    @property
    def name(self) -> str:
        return "summarize"

    @property
    def description(self) -> str:
        return "Pool change draws across GCMs into expected-change and box-whisker tables"

    def _execute_impl(
        self,
        run: RunConfig,
        inputs: Sequence[Path] = (),
        excel: bool = False,
        **_,
    ) -> ToolResult:
        deltas = load_deltas(inputs)
        by_measure: Dict[str, List[DeltaDraws]] = defaultdict(list)
        for d in deltas:
            by_measure[d.measure].append(d)

        out_dir = Path(run.out)
        outputs: List[Path] = []
        tables: Dict[str, str] = {}
        for measure in sorted(by_measure):
            members = by_measure[measure]
            rows = summary_rows(members)
            outputs += write_table(rows, out_dir / f"summary_{measure}.csv", SUMMARY_COLUMNS,
                                   excel=excel, sheet_name=f"summary_{measure}")
            outputs += write_table(box_whisker_rows(members), out_dir / f"box_whisker_{measure}.csv",
                                   BOX_WHISKER_COLUMNS, excel=excel, sheet_name=f"box_whisker_{measure}")
            tables[measure] = render_table(pd.DataFrame(rows, columns=SUMMARY_COLUMNS))
            self.logger.result(
                f"{measure}: {len(rows)} group(s) from {len(members)} dataset(s)", task_id=self.name,
            )

        inputs_used = [Path(p) for p in expand_inputs(inputs, "*.delta_*.csv")]
        return self._finish(run, inputs=inputs_used, outputs=outputs, data={"tables": tables})
