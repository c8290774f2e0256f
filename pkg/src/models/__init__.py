"""
Models Package - Value types and schemas

Pydantic models shared by every stage of the pipeline.
"""

from .identifiers import (
    DatasetKey,
    EnsembleId,
    ScenarioId,
    Statistic,
    VariableId,
    ZoneId,
    parse_ensemble_id,
)
from .params import GevrParams, NhgrParams, ObservationWindow, ReturnSpec
from .series import AnnualSeries, SeriesValidationReport, require_valid, validate_series
from .chain import ChainConfig, Phase, PosteriorChain, ProposalBranch
from .synoptic import DeltaDraws, DeltaKind, LmmFit, PooledDraws, QuantileSummary
from .grid import GridSeries, GridSource
from .tool_result import ToolResult

__all__ = [
    'DatasetKey',
    'EnsembleId',
    'ScenarioId',
    'Statistic',
    'VariableId',
    'ZoneId',
    'parse_ensemble_id',
    'GevrParams',
    'NhgrParams',
    'ObservationWindow',
    'ReturnSpec',
    'AnnualSeries',
    'SeriesValidationReport',
    'require_valid',
    'validate_series',
    'ChainConfig',
    'Phase',
    'PosteriorChain',
    'ProposalBranch',
    'DeltaDraws',
    'DeltaKind',
    'LmmFit',
    'PooledDraws',
    'QuantileSummary',
    'GridSeries',
    'GridSource',
    'ToolResult',
]
