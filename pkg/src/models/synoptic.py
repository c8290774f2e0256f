"""
Synoptic Models

Posterior draws of return-value / mean changes and the summaries computed
across climate models: pooled draws, box-whisker quantiles and the
mixed-effects fit.
"""

from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.identifiers import DatasetKey


class DeltaKind(str, Enum):
    """Change in return value (Q) or in the mean (M)."""
    Q = "Q"
    M = "M"


class DeltaDraws(BaseModel):
    """Posterior draws of one change quantity for one dataset."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    key: DatasetKey
    kind: DeltaKind
    draws: np.ndarray
    excluded_count: int = Field(default=0, ge=0)
    variant: Optional[str] = Field(default=None, description="e.g. 'parametric' or 'predictive' for M")

    @model_validator(mode="after")
    def _finite_non_empty(self) -> "DeltaDraws":
        if self.draws.ndim != 1 or self.draws.size == 0:
            raise ValueError("draws must be a non-empty 1-d array")
        if not np.all(np.isfinite(self.draws)):
            raise ValueError("draws must be finite")
        return self

    @property
    def group(self) -> Tuple[str, str, str]:
        """(variable, zone, scenario) pooling group."""
        return self.key.variable.value, self.key.zone_label, self.key.scenario.value

    @property
    def measure(self) -> str:
        """Kind plus variant, e.g. 'Q' or 'M_predictive'."""
        return self.kind.value if not self.variant else f"{self.kind.value}_{self.variant}"


class PooledDraws(BaseModel):
    """Draws with normalized per-draw weights."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: np.ndarray
    weights: np.ndarray

    @model_validator(mode="after")
    def _aligned(self) -> "PooledDraws":
        if self.values.shape != self.weights.shape or self.values.size == 0:
            raise ValueError("values and weights must be non-empty and aligned")
        return self


class QuantileSummary(BaseModel):
    """Box-whisker summary: mean plus the 2.5/25/50/75/97.5% quantiles."""

    model_config = ConfigDict(frozen=True)

    mean: float
    median: float
    q025: float
    q25: float
    q75: float
    q975: float

    @model_validator(mode="after")
    def _ordered(self) -> "QuantileSummary":
        if not self.q025 <= self.q25 <= self.median <= self.q75 <= self.q975:
            raise ValueError("quantiles must satisfy q025 <= q25 <= median <= q75 <= q975")
        return self


class LmmFit(BaseModel):
    """Mixed-effects fit with SSP126 as reference scenario."""

    model_config = ConfigDict(frozen=True)

    intercept_plus_g1: float
    g2_minus_g1: Optional[float] = None
    g3_minus_g1: Optional[float] = None
    tau_delta: float = Field(ge=0.0)
    tau_zeta: float = Field(ge=0.0)
    tau_eps: float = Field(ge=0.0)
    tau_R: float = Field(ge=0.0)
    tau_FE: float = Field(ge=0.0)
    r2_fe: Optional[float] = None
    r2_me: Optional[float] = None
    criterion: str = "ml"
    log_likelihood: float
    fe_log_likelihood: float
    n_obs: int
    n_models: int
    n_ensembles: int
    fixed_components: Tuple[str, ...] = Field(
        default=(), description="Variance components pinned at 0 because the design cannot identify them"
    )

    def table_row(self) -> Dict[str, Optional[float]]:
        return {
            "iota_plus_g1": self.intercept_plus_g1,
            "g2_minus_g1": self.g2_minus_g1,
            "g3_minus_g1": self.g3_minus_g1,
            "tau_R": self.tau_R,
            "tau_FE": self.tau_FE,
            "tau_eps": self.tau_eps,
            "tau_delta": self.tau_delta,
            "tau_zeta": self.tau_zeta,
            "R2_FE": self.r2_fe,
            "R2_ME": self.r2_me,
        }
