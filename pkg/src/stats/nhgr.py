"""
Non-Homogeneous Gaussian Regression (NHGR)

Gaussian model for annual means with linearly trending mean alpha_t and
scale beta_t, the predicted annual mean M_t ~ N(alpha_t, beta_t^2) and the
mean change between two years, either deterministic (alpha_to - alpha_from)
or predictive (M_to - M_from with independent draws).

Usage:
    from src.stats.nhgr import delta_m_parametric, delta_m_predictive

    delta_m_parametric(NhgrParams(alpha0=280, alpha1=8.5, beta0=1))   # 10.0
    delta_m_predictive(theta, rng)
"""

from typing import Optional, Tuple

import numpy as np

from src.core.errors import InvalidExtrapolationError, InvalidParameterError
from src.models.params import NhgrParams, ObservationWindow, ReturnSpec
from src.stats.trend import RegressionModel, register_model, trend

LOG_2PI = float(np.log(2.0 * np.pi))


def _logpdf(x, alpha, beta) -> np.ndarray:
    return -0.5 * (LOG_2PI + 2.0 * np.log(beta)) - (x - alpha) ** 2 / (2.0 * beta ** 2)


def nhgr_log_density(x, alpha, beta):
    """
    Gaussian log density -log(2 pi beta^2)/2 - (x - alpha)^2 / (2 beta^2).

    Raises:
        InvalidParameterError: beta <= 0
    """
    if np.any(np.asarray(beta) <= 0):
        raise InvalidParameterError("beta must be positive", beta=float(np.min(beta)))
    out = _logpdf(np.asarray(x, dtype=float), np.asarray(alpha, dtype=float), np.asarray(beta, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def nhgr_log_likelihood(series, theta: NhgrParams, require_positive_mean: bool = True) -> float:
    """Log-likelihood of an AnnualSeries under NHGR parameters."""
    model = NhgrModel(require_positive_mean=require_positive_mean)
    return model.log_likelihood(theta.to_vector(), series.to_array(), series.window.fractions())


def _params_at(theta: NhgrParams, t: int, window: ObservationWindow,
               require_positive_mean: bool) -> Tuple[float, float]:
    alpha, beta = theta.at(t, window)
    if not beta > 0:
        raise InvalidExtrapolationError(t, "beta", beta)
    if require_positive_mean and not alpha > 0:
        raise InvalidExtrapolationError(t, "alpha", alpha)
    return alpha, beta


def predict_mean_draw(
    theta: NhgrParams,
    t: int,
    rng: np.random.Generator,
    window: ObservationWindow = ObservationWindow(),
    require_positive_mean: bool = True,
) -> float:
    """
    One draw of M_t ~ N(alpha_t, beta_t^2).

    Raises:
        InvalidExtrapolationError: beta_t <= 0 (or alpha_t <= 0 when means must be positive)
    """
    alpha, beta = _params_at(theta, t, window, require_positive_mean)
    return float(alpha + beta * rng.standard_normal())


def delta_m_parametric(
    theta: NhgrParams,
    spec: ReturnSpec = ReturnSpec(),
    window: ObservationWindow = ObservationWindow(),
) -> float:
    """Deterministic mean change alpha_to - alpha_from = alpha1 (to - from) / (P - 1)."""
    return theta.alpha1 * (spec.to_year - spec.from_year) / (window.span - 1)


def delta_m_predictive(
    theta: NhgrParams,
    rng: np.random.Generator,
    spec: ReturnSpec = ReturnSpec(),
    window: ObservationWindow = ObservationWindow(),
    require_positive_mean: bool = True,
) -> float:
    """M_to - M_from with independent draws for the two years."""
    # Both years are validated before any random number is consumed.
    a_from, b_from = _params_at(theta, spec.from_year, window, require_positive_mean)
    a_to, b_to = _params_at(theta, spec.to_year, window, require_positive_mean)
    z = rng.standard_normal(2)
    return float((a_to + b_to * z[1]) - (a_from + b_from * z[0]))


@register_model
class NhgrModel(RegressionModel):
    """Four-parameter NHGR family: (alpha0, alpha1, beta0, beta1)."""

    NAME = "nhgr"

    def __init__(self, require_positive_mean: bool = True):
        self.require_positive_mean = require_positive_mean

    @property
    def name(self) -> str:
        return self.NAME

    @property
    def param_names(self) -> Tuple[str, ...]:
        return NhgrParams.PARAM_NAMES

    def log_likelihood(self, theta: np.ndarray, x: np.ndarray, fractions: np.ndarray) -> float:
        beta = trend(theta[2], theta[3], fractions)
        alpha = trend(theta[0], theta[1], fractions)
        if np.any(beta <= 0) or (self.require_positive_mean and np.any(alpha <= 0)):
            return -np.inf
        total = float(np.sum(_logpdf(x, alpha, beta)))
        return total if np.isfinite(total) else -np.inf

    def support_violation(self, theta: np.ndarray) -> Optional[str]:
        return NhgrParams.from_vector(theta).support_violation(self.require_positive_mean)

    def initial_guess(self, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        sd = float(np.std(x, ddof=1))
        z = rng.standard_normal(4)
        return np.array([
            float(np.mean(x)) + 0.1 * sd * z[0],
            0.1 * sd * z[1],
            sd * np.exp(0.1 * z[2]),
            0.1 * sd * z[3],
        ])
