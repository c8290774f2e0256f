"""
Configuration Management

Centralized configuration using Pydantic Settings.
All tunables are validated and type-checked, and can be overridden through
environment variables prefixed with ``CLIMDELTA_`` or a local ``.env`` file.

Usage:
    from src.core.config import settings

    n_draws = settings.n_draws
    cfg = settings.chain_config(seed=42)
"""

from typing import Literal

from pydantic_settings import BaseSettings, SettingsConfigDict

from src.models.chain import ChainConfig
from src.models.params import ObservationWindow, ReturnSpec


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    # Observation window
    base_year: int = 2015  # First observed year
    span: int = 86  # Number of annual observations P

    # Return values and change window
    return_period: float = 100.0  # Return period T in years
    change_from_year: int = 2025
    change_to_year: int = 2125

    # MCMC
    seed: int = 0  # Master seed when --seed is not given
    n_adapt_start: int = 2000  # n_S: fixed-proposal iterations
    n_burnin: int = 5000  # n_B: discarded iterations
    n_draws: int = 10000  # n_I: retained draws
    beta_mix: float = 0.05  # Small-step share of adaptive proposals
    fixed_step_sd: float = 0.1  # Step size s of the fixed proposal
    literal_proposal: bool = False
    max_init_retries: int = 1000  # Starting-value attempts before InitializationError
    covariance_jitter: float = 1e-10

    # Validation
    outlier_iqr_k: float = 10.0  # Outlier fence in interquartile ranges
    require_positive_mean: bool = True

    # Synoptic summaries
    lmm_criterion: Literal["ml", "reml"] = "ml"
    delta_m_mode: Literal["parametric", "predictive", "both"] = "predictive"

    # Runtime
    jobs: int = 1  # Worker processes; 1 runs in-process
    log_level: str = "INFO"
    log_json: bool = False
    json_errors: bool = False

    model_config = SettingsConfigDict(
        env_prefix="CLIMDELTA_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    def observation_window(self) -> ObservationWindow:
        """Observation window built from the configured base year and span."""
        return ObservationWindow(base_year=self.base_year, span=self.span)

    def return_spec(self) -> ReturnSpec:
        """Return-value specification built from the configured period and years."""
        return ReturnSpec(
            period=self.return_period,
            from_year=self.change_from_year,
            to_year=self.change_to_year,
        )

    def chain_config(self, seed: int = 0) -> ChainConfig:
        """Chain configuration with the configured defaults and the given seed."""
        return ChainConfig(
            n_adapt_start=self.n_adapt_start,
            n_burnin=self.n_burnin,
            n_draws=self.n_draws,
            beta_mix=self.beta_mix,
            fixed_step_sd=self.fixed_step_sd,
            literal_proposal=self.literal_proposal,
            max_init_retries=self.max_init_retries,
            covariance_jitter=self.covariance_jitter,
            seed=seed,
        )


# Global settings instance
settings = Settings()
