"""
I/O Service

Reads and writes every file the pipeline exchanges:

    manifest.json                  [{gcm, variable, scenario, ensemble, statistic, zone, path}, ...]
    <slug>.csv                     annual series, header ``year,value``
    <grid>.csv                     long grid layout, header ``year,lat,lon,value``
    <slug>.chain.csv / .json       retained draws ``draw,<params>,log_likelihood`` plus sidecar
    <slug>.delta_Q.csv / .json     change draws ``draw,delta`` plus sidecar
    <slug>.delta_M_<variant>.csv
    observations.csv               mixed-model records ``value,scenario,gcm,ensemble``
    run_metadata.json              reproducibility sidecar per output directory

The slug is ``DatasetKey.slug()``; everything after its first ``.`` is the
file role, so keys can be recovered from filenames alone. Floats are written
with 17 significant digits so that reading a file back is exact.

Usage:
    from src.services.io_service import read_series_csv, write_chain

    series = read_series_csv("out/sfcWind__max__Global__UK__SSP585__r1i1p1f1.csv")
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, ValidationError

from src.core.errors import (
    DataValidationError,
    GridError,
    ManifestError,
    MissingInputError,
    SeriesValidationError,
)
from src.models.chain import ChainConfig, Phase, PosteriorChain
from src.models.grid import GRID_COLUMNS, GridSeries, GridSource
from src.models.identifiers import DatasetKey
from src.models.params import ObservationWindow
from src.models.run import RunMetadata
from src.models.series import AnnualSeries
from src.models.synoptic import DeltaDraws, DeltaKind

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
FLOAT_FORMAT = "%.17g"
SERIES_COLUMNS = ["year", "value"]
OBSERVATION_COLUMNS = ["value", "scenario", "gcm", "ensemble"]
RUN_METADATA_FILE = "run_metadata.json"


# ============================================================================
# Helpers
# ============================================================================

def _require_file(path: PathLike) -> Path:
    path = Path(path)
    if not path.is_file():
        raise MissingInputError(f"input file not found: {path}", path=str(path))
    return path


def _read_csv(path: Path, expected: Sequence[str], error=DataValidationError) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise error(f"{path}: cannot parse CSV: {e}", path=str(path)) from e
    if list(frame.columns) != list(expected):
        raise error(
            f"{path}: expected header {','.join(expected)}, got {','.join(map(str, frame.columns))}",
            path=str(path),
        )
    return frame


def _numeric(frame: pd.DataFrame, column: str, path: Path, error=DataValidationError) -> np.ndarray:
    """Column as floats; the first unparseable cell is reported with its file line."""
    converted = pd.to_numeric(frame[column], errors="coerce")
    bad = converted.isna() & frame[column].notna()
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise error(
            f"{path}:{row + 2}: {column} value {frame[column].iloc[row]!r} is not a number",
            path=str(path),
            line=row + 2,
        )
    return converted.to_numpy(dtype=float)


def write_json(path: PathLike, payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_json(path: PathLike) -> Any:
    path = _require_file(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DataValidationError(f"{path}:{e.lineno}: invalid JSON: {e.msg}", path=str(path)) from e


def file_role(path: PathLike) -> str:
    """Part of the filename after the slug, e.g. ``chain.csv``."""
    name = Path(path).name
    return name.split(".", 1)[1] if "." in name else ""


def expand_inputs(paths: Iterable[PathLike], pattern: str) -> List[Path]:
    """Files named directly plus ``pattern`` matches inside named directories, sorted."""
    found: List[Path] = []
    for p in paths:
        p = Path(p)
        if p.is_dir():
            found.extend(sorted(p.glob(pattern)))
        else:
            found.append(_require_file(p))
    return sorted(dict.fromkeys(found))


# ============================================================================
# Manifest
# ============================================================================

class ManifestEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    key: DatasetKey
    path: Path


def load_manifest(path: PathLike) -> List[ManifestEntry]:
    """
    Load a manifest; relative paths resolve against the manifest's directory.

    Raises:
        MissingInputError: manifest file does not exist
        ManifestError: malformed JSON, unknown enum token or duplicate key
    """
    path = _require_file(path)
    try:
        records = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ManifestError(f"{path}:{e.lineno}: invalid JSON: {e.msg}", path=str(path)) from e
    if not isinstance(records, list):
        raise ManifestError(f"{path}: manifest must be a JSON array", path=str(path))

    entries: List[ManifestEntry] = []
    seen: Dict[str, int] = {}
    for i, record in enumerate(records):
        if not isinstance(record, dict) or "path" not in record:
            raise ManifestError(f"{path}: entry {i} must be an object with a path", entry=i)
        fields = {k: v for k, v in record.items() if k != "path"}
        try:
            key = DatasetKey(**fields)
        except ValidationError as e:
            raise ManifestError(f"{path}: entry {i}: {e.errors()[0]['msg']}", entry=i) from e
        except DataValidationError as e:
            raise ManifestError(f"{path}: entry {i}: {e.message}", entry=i) from e
        slug = key.slug()
        if slug in seen:
            raise ManifestError(f"{path}: entries {seen[slug]} and {i} share key {slug}", key=slug)
        seen[slug] = i
        file_path = Path(record["path"])
        if not file_path.is_absolute():
            file_path = path.parent / file_path
        entries.append(ManifestEntry(key=key, path=file_path))
    return entries


def save_manifest(entries: Sequence[ManifestEntry], path: PathLike) -> Path:
    """Inverse of load_manifest; paths are written relative to the manifest when possible."""
    path = Path(path)
    base = path.parent.resolve()
    records = []
    for entry in entries:
        file_path = entry.path.resolve() if entry.path.is_absolute() else (base / entry.path).resolve()
        try:
            rel = file_path.relative_to(base)
        except ValueError:
            rel = file_path
        records.append({**entry.key.to_record(), "path": rel.as_posix()})
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(records, indent=2) + "\n", encoding="utf-8")
    return path


# ============================================================================
# Annual series and grids
# ============================================================================

def series_filename(key: DatasetKey) -> str:
    return f"{key.slug()}.csv"


def read_series_csv(path: PathLike, key: Optional[DatasetKey] = None) -> AnnualSeries:
    """
    Read a ``year,value`` series; the key defaults to the one encoded in the filename.

    Raises:
        MissingInputError: file does not exist
        DataValidationError: bad header, unparseable cell or a filename that is not a slug
        SeriesValidationError: years not strictly increasing by 1
    """
    path = _require_file(path)
    frame = _read_csv(path, SERIES_COLUMNS)
    if frame.empty:
        raise SeriesValidationError(f"{path}: series has no rows", path=str(path))
    years = _numeric(frame, "year", path)
    values = _numeric(frame, "value", path)
    if np.any(years != np.round(years)):
        raise SeriesValidationError(f"{path}: years must be integers", path=str(path))
    steps = np.diff(years)
    if np.any(steps != 1):
        row = int(np.flatnonzero(steps != 1)[0]) + 1
        raise SeriesValidationError(
            f"{path}:{row + 2}: year {int(years[row])} does not follow {int(years[row - 1])}",
            path=str(path),
            line=row + 2,
        )
    if key is None:
        try:
            key = DatasetKey.from_slug(path.name)
        except (ValueError, ValidationError) as e:
            raise DataValidationError(
                f"{path}: filename does not encode a dataset key; use a manifest", path=str(path),
            ) from e
    return AnnualSeries(key=key, base_year=int(years[0]), values=values)


def write_series_csv(series: AnnualSeries, directory: PathLike) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / series_filename(series.key)
    frame = pd.DataFrame({"year": series.years(), "value": series.to_array()})
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def read_grid_csv(path: PathLike, source: GridSource) -> GridSeries:
    """
    Read the long ``year,lat,lon,value`` grid layout; empty value cells are missing data.

    Raises:
        MissingInputError: file does not exist
        GridError: bad header, unparseable cell or incomplete table
    """
    path = _require_file(path)
    frame = _read_csv(path, GRID_COLUMNS, error=GridError)
    for column in GRID_COLUMNS:
        frame[column] = _numeric(frame, column, path, error=GridError)
    if frame[["year", "lat", "lon"]].isna().any().any():
        raise GridError(f"{path}: year, lat and lon must be present on every row", path=str(path))
    frame["year"] = frame["year"].astype(int)
    return GridSeries.from_frame(frame, source)


# ============================================================================
# Chains
# ============================================================================

def chain_paths(key: DatasetKey, directory: PathLike) -> Tuple[Path, Path]:
    directory = Path(directory)
    return directory / f"{key.slug()}.chain.csv", directory / f"{key.slug()}.chain.json"


def write_chain(chain: PosteriorChain, directory: PathLike, metadata: Dict[str, Any]) -> Tuple[Path, Path]:
    """Write ``<slug>.chain.csv`` and its JSON sidecar."""
    csv_path, json_path = chain_paths(chain.key, directory)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(chain.draws, columns=list(chain.param_names))
    frame.insert(0, "draw", np.arange(1, chain.n_draws + 1))
    frame["log_likelihood"] = chain.log_likelihood
    frame.to_csv(csv_path, index=False, float_format=FLOAT_FORMAT)
    write_json(json_path, metadata)
    return csv_path, json_path


def load_chain(path: PathLike) -> PosteriorChain:
    """
    Read a chain CSV and its sidecar back into a PosteriorChain.

    Raises:
        MissingInputError: CSV or sidecar missing
        DataValidationError: columns disagree with the sidecar
    """
    csv_path = _require_file(path)
    json_path = csv_path.with_name(csv_path.name[: -len(".csv")] + ".json")
    meta = read_json(json_path)
    names = tuple(meta["param_names"])
    frame = _read_csv(csv_path, ["draw", *names, "log_likelihood"])
    draws = np.column_stack([_numeric(frame, n, csv_path) for n in names])
    return PosteriorChain(
        model=meta["model"],
        param_names=names,
        draws=draws,
        log_likelihood=_numeric(frame, "log_likelihood", csv_path),
        accepted={Phase(k): v for k, v in meta["accepted"].items()},
        proposed={Phase(k): v for k, v in meta["proposed"].items()},
        config=ChainConfig(**meta["config"]),
        window=ObservationWindow(**meta["window"]),
        key=DatasetKey(**meta["key"]) if meta.get("key") else None,
        negated=bool(meta.get("negated", False)),
        require_positive_mean=bool(meta.get("require_positive_mean", True)),
        branch_counts=meta.get("branch_counts", {}),
    )


# ============================================================================
# Change draws
# ============================================================================

def delta_role(kind: DeltaKind, variant: Optional[str] = None) -> str:
    return f"delta_{kind.value}" if not variant else f"delta_{kind.value}_{variant}"


def write_delta(draws: DeltaDraws, directory: PathLike, metadata: Dict[str, Any]) -> Tuple[Path, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    stem = f"{draws.key.slug()}.{delta_role(draws.kind, draws.variant)}"
    csv_path, json_path = directory / f"{stem}.csv", directory / f"{stem}.json"
    frame = pd.DataFrame({"draw": np.arange(1, draws.draws.size + 1), "delta": draws.draws})
    frame.to_csv(csv_path, index=False, float_format=FLOAT_FORMAT)
    write_json(json_path, {
        "key": draws.key.to_record(),
        "kind": draws.kind.value,
        "variant": draws.variant,
        "excluded_count": draws.excluded_count,
        **metadata,
    })
    return csv_path, json_path


def read_delta(path: PathLike) -> DeltaDraws:
    """Read change draws; kind, variant and key come from the filename."""
    path = _require_file(path)
    role = file_role(path)
    if not role.startswith("delta_") or not role.endswith(".csv"):
        raise DataValidationError(f"{path}: not a change-draws file", path=str(path))
    kind_variant = role[len("delta_"): -len(".csv")]
    kind_text, _, variant = kind_variant.partition("_")
    try:
        kind = DeltaKind(kind_text)
        key = DatasetKey.from_slug(path.name)
    except (ValueError, ValidationError) as e:
        raise DataValidationError(f"{path}: cannot decode filename: {e}", path=str(path)) from e

    frame = _read_csv(path, ["draw", "delta"])
    values = _numeric(frame, "delta", path)
    sidecar = path.with_name(path.name[: -len(".csv")] + ".json")
    excluded = int(read_json(sidecar).get("excluded_count", 0)) if sidecar.is_file() else 0
    try:
        return DeltaDraws(key=key, kind=kind, draws=values, excluded_count=excluded, variant=variant or None)
    except ValidationError as e:
        raise DataValidationError(f"{path}: {e.errors()[0]['msg']}", path=str(path)) from e


def deltas_to_observations(deltas: Iterable[DeltaDraws]) -> pd.DataFrame:
    """Mixed-model records, one per draw, keyed by variable and zone."""
    frames = [
        pd.DataFrame({
            "variable": d.key.variable.value,
            "zone": d.key.zone_label,
            "value": d.draws,
            "scenario": d.key.scenario.value,
            "gcm": d.key.gcm,
            "ensemble": str(d.key.ensemble),
        })
        for d in deltas
    ]
    if not frames:
        return pd.DataFrame(columns=["variable", "zone", *OBSERVATION_COLUMNS])
    return pd.concat(frames, ignore_index=True)


def read_observations(path: PathLike) -> pd.DataFrame:
    """Observation records; optional ``variable`` and ``zone`` columns group the fits."""
    path = _require_file(path)
    try:
        frame = pd.read_csv(path, dtype={"gcm": str, "ensemble": str, "scenario": str})
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataValidationError(f"{path}: cannot parse CSV: {e}", path=str(path)) from e
    missing = [c for c in OBSERVATION_COLUMNS if c not in frame.columns]
    if missing:
        raise DataValidationError(f"{path}: missing columns {','.join(missing)}", path=str(path))
    frame["value"] = _numeric(frame, "value", path)
    return frame


def write_observations(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


# ============================================================================
# Tables and metadata
# ============================================================================

def write_table(rows: Sequence[Dict[str, Any]], path: PathLike, columns: Sequence[str],
                excel: bool = False, sheet_name: str = "Sheet1") -> List[Path]:
    """Write rows as CSV, plus an .xlsx workbook next to it when ``excel`` is set."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(list(rows), columns=list(columns))
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    written = [path]
    if excel:
        xlsx = path.with_suffix(".xlsx")
        frame.to_excel(xlsx, sheet_name=sheet_name, index=False, engine='openpyxl')
        written.append(xlsx)
    return written


def write_run_metadata(directory: PathLike, metadata: RunMetadata) -> Path:
    return write_json(Path(directory) / RUN_METADATA_FILE, metadata.model_dump(mode="json"))
