"""
Linear Parameter Trends and the Regression Model Interface

Both regressions let every distribution parameter move linearly over the
observation window:

    eta_t = eta0 + ((t - base_year) / (P - 1)) * eta1

so ``eta0`` is the base-year value and ``eta1`` the total change by the last
observed year. ``RegressionModel`` is the contract the MCMC engine drives.

Usage:
    from src.stats.trend import get_model, param_at

    model = get_model("gevr")
    ll = model.log_likelihood(theta, x, window.fractions())
"""

from abc import ABC, abstractmethod
from typing import Dict, Optional, Tuple, Type

import numpy as np

from src.core.errors import InvalidParameterError


def param_at(eta0, eta1, t, base_year: int = 2015, span: int = 86):
    """Value of a linearly trending parameter at year ``t``; extrapolates freely."""
    if span < 2:
        raise InvalidParameterError("span must be at least 2", span=span)
    return eta0 + ((t - base_year) / (span - 1)) * eta1


def trend(theta0: float, theta1: float, fractions: np.ndarray) -> np.ndarray:
    """Vectorized trend at precomputed window fractions."""
    return theta0 + fractions * theta1


class RegressionModel(ABC):
    """
    Likelihood, support and starting values for one regression family.

    Parameter vectors are plain float arrays ordered as ``param_names``.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """Registry name ('gevr', 'nhgr', ...)."""

    @property
    @abstractmethod
    def param_names(self) -> Tuple[str, ...]:
        """Names of the vector components, in order."""

    @property
    def dim(self) -> int:
        return len(self.param_names)

    @abstractmethod
    def log_likelihood(self, theta: np.ndarray, x: np.ndarray, fractions: np.ndarray) -> float:
        """Sum of log densities; -inf when any observation leaves the support."""

    @abstractmethod
    def support_violation(self, theta: np.ndarray) -> Optional[str]:
        """Name of the violated prior constraint, or None inside the support."""

    @abstractmethod
    def initial_guess(self, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Random starting vector near data-driven moments."""

    def log_target(self, theta: np.ndarray, x: np.ndarray, fractions: np.ndarray) -> float:
        """Log posterior under flat priors restricted to the support."""
        if self.support_violation(theta) is not None:
            return -np.inf
        return self.log_likelihood(theta, x, fractions)


_MODELS: Dict[str, Type[RegressionModel]] = {}


def register_model(cls: Type[RegressionModel]) -> Type[RegressionModel]:
    """Class decorator adding a model family to the registry."""
    _MODELS[cls.NAME] = cls
    return cls


def get_model(name: str, **options) -> RegressionModel:
    """Instantiate a registered model family by name."""
    # Importing registers the built-in families.
    from src.stats import gevr, nhgr  # noqa: F401

    try:
        cls = _MODELS[name]
    except KeyError:
        raise InvalidParameterError(
            f"unknown model {name!r}; expected one of {sorted(_MODELS)}", model=name
        ) from None
    return cls(**options)
