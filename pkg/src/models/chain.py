"""
Chain Models

``ChainConfig`` holds the adaptive Metropolis-Hastings schedule and
``PosteriorChain`` the retained draws with their acceptance bookkeeping.

Usage:
    from src.models.chain import ChainConfig

    cfg = ChainConfig(n_adapt_start=200, n_burnin=500, n_draws=1000, seed=7)
"""

from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.identifiers import DatasetKey
from src.models.params import ObservationWindow


class Phase(str, Enum):
    """Proposal phase: fixed-step (k <= n_S) or adaptive mixture (k > n_S)."""
    FIXED = "fixed"
    ADAPTIVE = "adaptive"


class ProposalBranch(str, Enum):
    FIXED = "fixed"
    ADAPTIVE = "adaptive"
    SMALL_STEP = "small_step"


class ChainConfig(BaseModel):
    """Schedule and tuning of one MCMC run."""

    model_config = ConfigDict(frozen=True)

    n_adapt_start: int = Field(default=2000, gt=0, description="n_S: fixed-proposal iterations")
    n_burnin: int = Field(default=5000, description="n_B: discarded iterations")
    n_draws: int = Field(default=10000, ge=1, description="n_I: retained draws")
    beta_mix: float = Field(default=0.05, gt=0.0, lt=1.0)
    fixed_step_sd: float = Field(default=0.1, gt=0.0)
    literal_proposal: bool = False
    max_init_retries: int = Field(default=1000, ge=1)
    covariance_jitter: float = Field(default=1e-10, ge=0.0)
    seed: int = Field(default=0, ge=0, lt=2**64)

    @model_validator(mode="after")
    def _schedule(self) -> "ChainConfig":
        if not self.n_adapt_start < self.n_burnin:
            raise ValueError(
                f"n_adapt_start ({self.n_adapt_start}) must be below n_burnin ({self.n_burnin})"
            )
        return self

    @property
    def n_iterations(self) -> int:
        return self.n_burnin + self.n_draws


class PosteriorChain(BaseModel):
    """Retained draws of one chain plus provenance."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    model: str
    param_names: Tuple[str, ...]
    draws: np.ndarray
    log_likelihood: np.ndarray
    accepted: Dict[Phase, int]
    proposed: Dict[Phase, int]
    config: ChainConfig
    window: ObservationWindow = ObservationWindow()
    key: Optional[DatasetKey] = None
    negated: bool = Field(default=False, description="Fitted to negated minima")
    require_positive_mean: bool = Field(default=True, description="NHGR support required a positive mean")
    branch_counts: Dict[str, int] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _shapes(self) -> "PosteriorChain":
        if self.draws.ndim != 2 or self.draws.shape[1] != len(self.param_names):
            raise ValueError(f"draws must be (n, {len(self.param_names)}), got {self.draws.shape}")
        if self.log_likelihood.shape != (self.draws.shape[0],):
            raise ValueError("log_likelihood must have one entry per draw")
        if not np.all(np.isfinite(self.log_likelihood)):
            raise ValueError("every retained draw must have finite log-likelihood")
        return self

    @property
    def n_draws(self) -> int:
        return int(self.draws.shape[0])

    def column(self, name: str) -> np.ndarray:
        return self.draws[:, self.param_names.index(name)]



class FunctionalDraws(BaseModel):
    """A scalar functional evaluated on every retained draw."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: np.ndarray
    excluded_count: int = 0
    excluded_by: Dict[str, int] = Field(default_factory=dict, description="Exclusions per offending parameter")
