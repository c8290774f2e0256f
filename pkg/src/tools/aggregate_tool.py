"""
Aggregate Tool

Compiles annual zonal, global and point series from a long-format grid CSV
and writes one ``<slug>.csv`` per series plus a ``manifest.json`` listing
them. With ``screen`` the exploratory median smoother and OLS slope are
written under ``screen/``.

Example:
    tool = AggregateTool()
    result = tool.execute(run=run, grid_path=Path("grid.csv"), source=source,
                          statistic=Statistic.MAX, zones=["all"])
"""

from pathlib import Path
from typing import List, Sequence, Tuple

from src.core.errors import UsageError
from src.models.grid import GridSeries, GridSource
from src.models.identifiers import Statistic, ZoneId
from src.models.run import RunConfig
from src.models.series import AnnualSeries
from src.models.tool_result import ToolResult
from src.services.io_service import (
    ManifestEntry,
    read_grid_csv,
    save_manifest,
    write_series_csv,
    write_table,
)
from src.stats.aggregate import (
    compile_zones,
    drop_leading_years,
    moving_median_smooth,
    ols_slope,
    point_series,
    spatial_extreme,
    zone_mean,
)
from src.tools.base import BaseTool

PointSpec = Tuple[str, float, float]


class AggregateTool(BaseTool):
    """Spatial summaries of a gridded annualized field."""

    @property
    def name(self) -> str:
        return "aggregate"

    @property
    def description(self) -> str:
        return "Compile zonal, global and point annual series from a grid CSV"

    def _select(
        self,
        grid: GridSeries,
        statistic: Statistic,
        zones: Sequence[str],
        skip_missing: bool,
        area_weighted: bool,
    ) -> List[AnnualSeries]:
        if not zones:
            return []
        if "all" in zones:
            return list(compile_zones(grid, statistic, skip_missing, area_weighted).values())

        selected = []
        for name in zones:
            zone = parse_zone(name)
            if statistic == Statistic.MEAN:
                if zone == ZoneId.GLOBAL:
                    selected.append(compile_zones(grid, statistic, skip_missing, area_weighted)[zone])
                else:
                    selected.append(zone_mean(grid, zone, skip_missing, area_weighted))
            else:
                selected.append(spatial_extreme(grid, zone, statistic.value, skip_missing))
        return selected

    def _execute_impl(
        self,
        run: RunConfig,
        grid_path: Path,
        source: GridSource,
        statistic: Statistic,
        zones: Sequence[str] = ("all",),
        points: Sequence[PointSpec] = (),
        skip_missing: bool = False,
        area_weighted: bool = False,
        drop_years: int = 0,
        screen: bool = False,
        smooth_half_window: int = 10,
        **_,
    ) -> ToolResult:
        statistic = Statistic(statistic)
        if not zones and not points:
            raise UsageError("nothing to aggregate: give zones and/or points")
        grid = read_grid_csv(grid_path, source)
        self.logger.status(
            f"Grid {grid_path.name}: {grid.values.shape[1]} locations x {grid.values.shape[0]} years",
            task_id=self.name,
        )

        series = self._select(grid, statistic, zones, skip_missing, area_weighted)
        series += [point_series(grid, label, lat, lon, statistic) for label, lat, lon in points]
        if drop_years:
            series = [drop_leading_years(s, drop_years) for s in series]

        out_dir = Path(run.out)
        outputs = [write_series_csv(s, out_dir) for s in series]
        manifest = save_manifest(
            [ManifestEntry(key=s.key, path=p) for s, p in zip(series, outputs)],
            out_dir / "manifest.json",
        )
        outputs.append(manifest)
        if screen:
            outputs += self._screen(series, out_dir / "screen", smooth_half_window)

        self.logger.result(f"Wrote {len(series)} series to {out_dir}", task_id=self.name)
        return self._finish(run, inputs=[grid_path], outputs=outputs,
                            data={"series": [s.key.slug() for s in series]})

    def _screen(self, series: Sequence[AnnualSeries], directory: Path, half_window: int) -> List[Path]:
        rows = []
        written = []
        for s in series:
            smoothed = moving_median_smooth(s, half_window)
            written.append(write_series_csv(smoothed, directory))
            rows.append({"slug": s.key.slug(), "slope_per_year": ols_slope(s)})
        written += write_table(rows, directory / "slopes.csv", columns=["slug", "slope_per_year"])
        return written


def parse_point(text: str) -> PointSpec:
    """``LABEL:LAT:LON`` as given on the command line."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"point must be LABEL:LAT:LON, got {text!r}")
    label, lat, lon = parts
    try:
        return label, float(lat), float(lon)
    except ValueError as e:
        raise UsageError(f"point coordinates must be numbers: {text!r}") from e


def parse_zone(name: str) -> ZoneId:
    if name.lower() == "global":
        return ZoneId.GLOBAL
    try:
        return ZoneId(name)
    except ValueError as e:
        choices = ", ".join(z.value for z in ZoneId)
        raise UsageError(f"unknown zone {name!r} (choose from {choices}, all)") from e
