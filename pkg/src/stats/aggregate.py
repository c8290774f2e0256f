"""
Spatial Aggregation

Compiles zonal and global annual series from gridded annualized output:
spatial maxima/minima, zone means, the area-weighted global mean, plus the
exploratory median smoother and OLS slope screen.

Zones are half-open latitude intervals [lower, upper); the Arctic band is
closed at +90.

Usage:
    from src.stats.aggregate import compile_zones, spatial_extreme

    series = spatial_extreme(grid, ZoneId.TROPICAL, "max")
    all_zones = compile_zones(grid, Statistic.MEAN)
"""

import logging
from typing import Dict, Mapping, Optional

import numpy as np
import pandas as pd
from scipy import stats

from src.core.errors import (
    EmptyZoneError,
    InvalidParameterError,
    MissingDataError,
    SeriesValidationError,
)
from src.models.grid import GridSeries, ZoneWeights
from src.models.identifiers import (
    ZONE_BOUNDS,
    DatasetKey,
    Statistic,
    VariableId,
    ZoneId,
    ZoneOrPoint,
)
from src.models.series import AnnualSeries

logger = logging.getLogger(__name__)

EARTH_RADIUS_KM = 6371.0


# ============================================================================
# Zones
# ============================================================================

def zone_of(lat: float) -> ZoneId:
    """Latitude band containing ``lat`` (degrees)."""
    if not np.isfinite(lat) or abs(lat) > 90:
        raise InvalidParameterError(f"latitude {lat} outside [-90, 90]", lat=lat)
    for zone, (lower, upper) in ZONE_BOUNDS.items():
        if lower <= lat < upper:
            return zone
    return ZoneId.ARCTIC


def zone_mask(lats: np.ndarray, zone: ZoneId) -> np.ndarray:
    """Boolean mask of locations inside ``zone`` (all True for Global)."""
    lats = np.asarray(lats, dtype=float)
    if zone == ZoneId.GLOBAL:
        return np.ones(lats.shape, dtype=bool)
    lower, upper = ZONE_BOUNDS[zone]
    if zone == ZoneId.ARCTIC:
        return (lats >= lower) & (lats <= upper)
    return (lats >= lower) & (lats < upper)


def zone_area_fractions() -> ZoneWeights:
    """Fraction of a sphere's surface in each band: (sin(upper) - sin(lower)) / 2."""
    fractions = {
        zone: (np.sin(np.radians(upper)) - np.sin(np.radians(lower))) / 2.0
        for zone, (lower, upper) in ZONE_BOUNDS.items()
    }
    return ZoneWeights(fractions={zone: float(f) for zone, f in fractions.items()})


# ============================================================================
# Spatial summaries
# ============================================================================

def _series_key(grid: GridSeries, statistic: Statistic, zone: ZoneOrPoint) -> DatasetKey:
    if statistic in (Statistic.MIN, Statistic.NEGMIN) and grid.source.variable != VariableId.TAS:
        raise InvalidParameterError(
            f"statistic {statistic.value} is only permitted for tas",
            variable=grid.source.variable.value,
        )
    return DatasetKey(
        gcm=grid.source.gcm,
        variable=grid.source.variable,
        scenario=grid.source.scenario,
        ensemble=grid.source.ensemble,
        statistic=statistic,
        zone=zone,
    )


def _zone_block(grid: GridSeries, zone: ZoneId, skip_missing: bool):
    mask = zone_mask(grid.lats, zone)
    if not mask.any():
        raise EmptyZoneError(f"zone {zone.value} has no grid locations", zone=zone.value)
    block = grid.values[:, mask]
    missing = np.isnan(block)
    if missing.any():
        if not skip_missing:
            year = int(grid.years[np.argmax(missing.any(axis=1))])
            raise MissingDataError(
                f"missing values in zone {zone.value} (first in {year}); use skip-missing to ignore",
                zone=zone.value, year=year,
            )
        empty_years = missing.all(axis=1)
        if empty_years.any():
            year = int(grid.years[np.argmax(empty_years)])
            raise MissingDataError(
                f"every location in zone {zone.value} is missing in {year}",
                zone=zone.value, year=year,
            )
    return mask, block


def spatial_extreme(
    grid: GridSeries,
    zone: ZoneId,
    kind: str,
    skip_missing: bool = False,
) -> AnnualSeries:
    """
    Per-year maximum or minimum over the zone's locations.

    Args:
        grid: Gridded annualized values
        zone: Band, or Global for all locations
        kind: "max" or "min"
        skip_missing: Ignore missing cells instead of failing

    Raises:
        EmptyZoneError: zone has no locations
        MissingDataError: missing cells (or a fully missing year with skip_missing)
    """
    statistic = Statistic(kind)
    if statistic not in (Statistic.MAX, Statistic.MIN):
        raise InvalidParameterError(f"kind must be max or min, got {kind!r}")
    key = _series_key(grid, statistic, zone)
    _, block = _zone_block(grid, zone, skip_missing)
    reduce = np.nanmax if statistic == Statistic.MAX else np.nanmin
    return AnnualSeries(key=key, base_year=grid.base_year, values=reduce(block, axis=1))


def zone_mean(
    grid: GridSeries,
    zone: ZoneId,
    skip_missing: bool = False,
    area_weighted: bool = False,
) -> AnnualSeries:
    """
    Per-year mean over the zone's locations.

    The default is the unweighted arithmetic mean over grid points; with
    ``area_weighted`` each location is weighted by cos(latitude).
    """
    key = _series_key(grid, Statistic.MEAN, zone)
    mask, block = _zone_block(grid, zone, skip_missing)
    present = ~np.isnan(block)
    if area_weighted:
        w = np.cos(np.radians(grid.lats[mask]))[None, :] * present
    else:
        w = present.astype(float)
    totals = w.sum(axis=1)
    if np.any(totals <= 0):
        raise MissingDataError(f"zero total weight in zone {zone.value}", zone=zone.value)
    values = np.where(present, block, 0.0)
    means = (values * w).sum(axis=1) / totals
    return AnnualSeries(key=key, base_year=grid.base_year, values=means)


def global_mean(
    zone_means: Mapping[ZoneId, AnnualSeries],
    weights: Optional[ZoneWeights] = None,
) -> AnnualSeries:
    """
    Area-weighted average of the five zone means.

    Raises:
        SeriesValidationError: zones missing or covering different years
    """
    weights = weights or zone_area_fractions()
    bands = ZoneId.bands()
    missing = [z.value for z in bands if z not in zone_means]
    if missing:
        raise SeriesValidationError(f"zone means missing for: {', '.join(missing)}")
    first = zone_means[bands[0]]
    for zone in bands[1:]:
        other = zone_means[zone]
        if other.base_year != first.base_year or other.span != first.span:
            raise SeriesValidationError(
                f"zone {zone.value} covers {other.base_year}-{other.last_year}, "
                f"expected {first.base_year}-{first.last_year}"
            )
    w = np.array([weights[z] for z in bands], dtype=float)
    w = w / w.sum()
    stacked = np.vstack([zone_means[z].to_array() for z in bands])
    key = first.key.with_(zone=ZoneId.GLOBAL)
    return AnnualSeries(key=key, base_year=first.base_year, values=w @ stacked)


def great_circle_km(lat1, lon1, lat2, lon2):
    """Haversine distance in km."""
    phi1, phi2 = np.radians(lat1), np.radians(lat2)
    dphi = phi2 - phi1
    dlam = np.radians(np.asarray(lon2) - np.asarray(lon1))
    a = np.sin(dphi / 2) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin(dlam / 2) ** 2
    return 2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def point_series(
    grid: GridSeries,
    label: str,
    lat: float,
    lon: float,
    statistic: Statistic = Statistic.MAX,
) -> AnnualSeries:
    """Series of the grid location nearest to (lat, lon), keyed by ``label``."""
    if abs(lat) > 90:
        raise InvalidParameterError(f"latitude {lat} outside [-90, 90]", lat=lat)
    distances = great_circle_km(lat, lon, grid.lats, grid.lons)
    j = int(np.argmin(distances))
    logger.debug("point %s -> grid location (%.3f, %.3f), %.1f km",
                 label, grid.lats[j], grid.lons[j], distances[j])
    column = grid.values[:, j]
    if np.isnan(column).any():
        raise MissingDataError(f"missing values at the location nearest to {label}", label=label)
    return AnnualSeries(key=_series_key(grid, statistic, label), base_year=grid.base_year, values=column)


def compile_zones(
    grid: GridSeries,
    statistic: Statistic,
    skip_missing: bool = False,
    area_weighted: bool = False,
) -> Dict[ZoneId, AnnualSeries]:
    """
    All five bands plus Global for one statistic.

    For means, Global is the area-weighted mean of the zone means rather
    than a plain mean over every grid point.
    """
    statistic = Statistic(statistic)
    out: Dict[ZoneId, AnnualSeries] = {}
    if statistic == Statistic.MEAN:
        for zone in ZoneId.bands():
            out[zone] = zone_mean(grid, zone, skip_missing, area_weighted)
        out[ZoneId.GLOBAL] = global_mean(out)
        return out
    if statistic not in (Statistic.MAX, Statistic.MIN):
        raise InvalidParameterError(f"cannot compile statistic {statistic.value}")
    for zone in (*ZoneId.bands(), ZoneId.GLOBAL):
        out[zone] = spatial_extreme(grid, zone, statistic.value, skip_missing)
    return out


# ============================================================================
# Series transforms and screens
# ============================================================================

def moving_median_smooth(series: AnnualSeries, half_window: int = 10) -> AnnualSeries:
    """Centred running median over [t-h, t+h]; the window shrinks at the edges."""
    if half_window < 0:
        raise InvalidParameterError("half_window must be >= 0", half_window=half_window)
    smoothed = (
        pd.Series(series.to_array())
        .rolling(window=2 * half_window + 1, center=True, min_periods=1)
        .median()
    )
    return series.with_values(smoothed.to_numpy())


def ols_slope(series: AnnualSeries) -> float:
    """Least-squares slope of value on calendar year (units per year)."""
    if series.span < 2:
        raise InvalidParameterError("ols_slope needs at least 2 years", span=series.span)
    return float(stats.linregress(series.years(), series.to_array()).slope)


def negate(series: AnnualSeries) -> AnnualSeries:
    """Flip the sign of a minima series (min <-> negmin); an involution."""
    flipped = {Statistic.MIN: Statistic.NEGMIN, Statistic.NEGMIN: Statistic.MIN}
    statistic = series.key.statistic
    if statistic not in flipped:
        raise InvalidParameterError(
            f"negate applies to minima only, not {statistic.value}", statistic=statistic.value
        )
    return series.with_values(-series.to_array(), key=series.key.with_(statistic=flipped[statistic]))


def drop_leading_years(series: AnnualSeries, n: int) -> AnnualSeries:
    """Remove the first ``n`` observations and move base_year forward."""
    if n < 0 or n >= series.span:
        raise InvalidParameterError(f"cannot drop {n} of {series.span} years", n=n)
    return series.with_values(series.to_array()[n:], base_year=series.base_year + n)
