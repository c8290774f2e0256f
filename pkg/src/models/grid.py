"""
Grid Models

Gridded annualized model output: one value per (year, grid location), with
NaN marking an explicitly missing cell.

Usage:
    from src.models.grid import GridSeries, GridSource

    grid = GridSeries.from_frame(df, source=GridSource(gcm="UK", variable="sfcWind",
                                                      scenario="SSP585", ensemble="r1i1p1f2"))
"""

from typing import Dict, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.core.errors import GridError
from src.models.identifiers import LABEL_PATTERN, EnsembleId, ScenarioId, VariableId, ZoneId

GRID_COLUMNS = ("year", "lat", "lon", "value")


class GridSource(BaseModel):
    """Which simulation a grid came from; completes the keys of compiled series."""

    model_config = ConfigDict(frozen=True)

    gcm: str = Field(pattern=LABEL_PATTERN)
    variable: VariableId
    scenario: ScenarioId
    ensemble: EnsembleId

    @field_validator("ensemble", mode="before")
    @classmethod
    def _parse_ensemble(cls, v):
        return EnsembleId.parse(v) if isinstance(v, str) else v


class GridSeries(BaseModel):
    """Values indexed (year, location); locations are (lat, lon) pairs in degrees."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    source: GridSource
    lats: np.ndarray
    lons: np.ndarray
    years: np.ndarray
    values: np.ndarray

    @model_validator(mode="after")
    def _consistent(self) -> "GridSeries":
        if self.lats.ndim != 1 or self.lats.shape != self.lons.shape:
            raise GridError("lats and lons must be 1-d arrays of equal length")
        if np.any(~np.isfinite(self.lats)) or np.any(np.abs(self.lats) > 90):
            raise GridError("latitudes must lie in [-90, 90]")
        if self.values.shape != (self.years.size, self.lats.size):
            raise GridError(
                f"values shape {self.values.shape} does not match "
                f"{self.years.size} years x {self.lats.size} locations"
            )
        if self.years.size and np.any(np.diff(self.years) != 1):
            raise GridError("years must be consecutive and increasing")
        if np.any(np.isinf(self.values)):
            raise GridError("values must be finite or NaN (missing)")
        return self

    @property
    def n_locations(self) -> int:
        return int(self.lats.size)

    @property
    def base_year(self) -> int:
        return int(self.years[0])

    def locations(self) -> Tuple[Tuple[float, float], ...]:
        return tuple(zip(self.lats.tolist(), self.lons.tolist()))

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, source: GridSource) -> "GridSeries":
        """
        Build from the long layout ``year,lat,lon,value``.

        Raises:
            GridError: missing columns, duplicate cells or an incomplete year x location table
        """
        missing = [c for c in GRID_COLUMNS if c not in frame.columns]
        if missing:
            raise GridError(f"grid is missing columns: {', '.join(missing)}")
        if frame.duplicated(subset=["year", "lat", "lon"]).any():
            raise GridError("grid has duplicate (year, lat, lon) rows")
        wide = frame.pivot(index="year", columns=["lat", "lon"], values="value").sort_index()
        if wide.shape[0] * wide.shape[1] != len(frame):
            raise GridError("grid is not a complete year x location table")
        lats = np.asarray([loc[0] for loc in wide.columns], dtype=float)
        lons = np.asarray([loc[1] for loc in wide.columns], dtype=float)
        return cls(
            source=source,
            lats=lats,
            lons=lons,
            years=wide.index.to_numpy(dtype=int),
            values=wide.to_numpy(dtype=float),
        )


class ZoneWeights(BaseModel):
    """Surface-area fraction of each latitude band (spherical Earth)."""

    model_config = ConfigDict(frozen=True)

    fractions: Dict[ZoneId, float]

    @model_validator(mode="after")
    def _normalized(self) -> "ZoneWeights":
        total = sum(self.fractions.values())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"zone fractions sum to {total!r}, not 1")
        return self

    def __getitem__(self, zone: ZoneId) -> float:
        return self.fractions[zone]
