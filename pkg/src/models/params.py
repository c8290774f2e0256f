"""
Parameter Models

Observation window, return-value specification and the two regression
parameter sets. Parameters are stored as base-year values (``*0``) plus the
total change over the observation window (``*1``).

Usage:
    from src.models.params import GevrParams, ObservationWindow

    window = ObservationWindow()          # 2015, 86 years
    theta = GevrParams(mu0=10, mu1=8.5, sigma0=1, sigma1=0, xi0=0, xi1=0)
    theta.at(2125, window)                # (21.0, 1.0, 0.0)
"""

from typing import ClassVar, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

XI_LOWER = -1.0
XI_UPPER = 0.2


class ObservationWindow(BaseModel):
    """Calendar window of the annual observations."""

    model_config = ConfigDict(frozen=True)

    base_year: int = 2015
    span: int = Field(default=86, ge=2, description="Number of years P")

    @property
    def last_year(self) -> int:
        return self.base_year + self.span - 1

    def fraction(self, t):
        """(t - base_year) / (P - 1); works on scalars and arrays."""
        if np.ndim(t) == 0:
            return (float(t) - self.base_year) / (self.span - 1)
        return (np.asarray(t, dtype=float) - self.base_year) / (self.span - 1)

    def years(self) -> np.ndarray:
        return np.arange(self.base_year, self.base_year + self.span)

    def fractions(self) -> np.ndarray:
        return np.arange(self.span, dtype=float) / (self.span - 1)


class ReturnSpec(BaseModel):
    """Return period and the pair of years a change is measured between."""

    model_config = ConfigDict(frozen=True)

    period: float = Field(default=100.0, ge=2.0, description="Return period T in years")
    from_year: int = 2025
    to_year: int = 2125

    @property
    def p(self) -> float:
        """Non-exceedance probability 1 - 1/T."""
        return 1.0 - 1.0 / self.period

    @model_validator(mode="after")
    def _ordered_years(self) -> "ReturnSpec":
        if self.to_year <= self.from_year:
            raise ValueError("to_year must be after from_year")
        return self


class _TrendParams(BaseModel):
    """Shared vector conversion for the trend parameter sets."""

    model_config = ConfigDict(frozen=True)

    PARAM_NAMES: ClassVar[Tuple[str, ...]] = ()

    def to_vector(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in self.PARAM_NAMES], dtype=float)

    @classmethod
    def from_vector(cls, vector: Sequence[float]):
        values = [float(v) for v in vector]
        if len(values) != len(cls.PARAM_NAMES):
            raise ValueError(f"{cls.__name__} expects {len(cls.PARAM_NAMES)} values, got {len(values)}")
        return cls(**dict(zip(cls.PARAM_NAMES, values)))


class GevrParams(_TrendParams):
    """Non-stationary GEV parameters (location, scale, shape trends)."""

    PARAM_NAMES: ClassVar[Tuple[str, ...]] = ("mu0", "mu1", "sigma0", "sigma1", "xi0", "xi1")

    mu0: float
    mu1: float = 0.0
    sigma0: float
    sigma1: float = 0.0
    xi0: float = 0.0
    xi1: float = 0.0

    def at(self, t: float, window: ObservationWindow) -> Tuple[float, float, float]:
        """(mu_t, sigma_t, xi_t) at calendar year t."""
        f = window.fraction(t)
        return self.mu0 + f * self.mu1, self.sigma0 + f * self.sigma1, self.xi0 + f * self.xi1

    def support_violation(self) -> Optional[str]:
        """Name of the first prior-support violation at the window endpoints, or None."""
        for f in (0.0, 1.0):
            sigma = self.sigma0 + f * self.sigma1
            xi = self.xi0 + f * self.xi1
            if not sigma > 0:
                return "sigma"
            if not XI_LOWER < xi < XI_UPPER:
                return "xi"
        return None


class NhgrParams(_TrendParams):
    """Non-homogeneous Gaussian parameters (mean and scale trends)."""

    PARAM_NAMES: ClassVar[Tuple[str, ...]] = ("alpha0", "alpha1", "beta0", "beta1")

    alpha0: float
    alpha1: float = 0.0
    beta0: float
    beta1: float = 0.0

    def at(self, t: float, window: ObservationWindow) -> Tuple[float, float]:
        """(alpha_t, beta_t) at calendar year t."""
        f = window.fraction(t)
        return self.alpha0 + f * self.alpha1, self.beta0 + f * self.beta1

    def support_violation(self, require_positive_mean: bool = True) -> Optional[str]:
        for f in (0.0, 1.0):
            if require_positive_mean and not self.alpha0 + f * self.alpha1 > 0:
                return "alpha"
            if not self.beta0 + f * self.beta1 > 0:
                return "beta"
        return None
