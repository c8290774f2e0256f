"""
Non-Stationary GEV Regression (GEVR)

Generalized extreme value model with linearly trending location, scale and
shape, its log-likelihood, closed-form CDF/quantile, return values and the
return-value change between two years.

The density is the complete standard form

    log f = -log(sigma) - (1 + 1/xi) log z - z^(-1/xi),   z = 1 + xi (x - mu) / sigma

with the Gumbel limit used when |xi| < XI_TOL. Observations outside the
support give -inf rather than an error, so MCMC can reject them.

Minima are analysed as maxima of negated data: for a chain fitted to
negated minima, the change of the minimum's return value in original units
is ``-delta_q``.

Usage:
    from src.stats.gevr import delta_q, return_value

    q100 = return_value(0.0, 1.0, 0.0, ReturnSpec())      # 4.600149...
    change = delta_q(theta, ReturnSpec(), ObservationWindow())
"""

from typing import Optional, Tuple

import numpy as np

from src.core.errors import InvalidExtrapolationError, InvalidParameterError
from src.models.params import XI_LOWER, XI_UPPER, GevrParams, ObservationWindow, ReturnSpec
from src.stats.trend import RegressionModel, register_model, trend

XI_TOL = 1e-8
EULER_GAMMA = 0.5772156649015329


def _as_result(values: np.ndarray):
    return float(values) if values.ndim == 0 else values


def _logpdf(x, mu, sigma, xi) -> np.ndarray:
    """Elementwise GEV log density for sigma > 0; -inf outside the support."""
    x, mu, sigma, xi = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (x, mu, sigma, xi)))
    out = np.full(x.shape, -np.inf)
    y = (x - mu) / sigma
    gumbel = np.abs(xi) < XI_TOL
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        g = gumbel
        out[g] = -np.log(sigma[g]) - y[g] - np.exp(-y[g])
        z = 1.0 + xi * y
        ok = ~gumbel & (z > 0)
        log_z = np.log(z[ok])
        out[ok] = -np.log(sigma[ok]) - (1.0 + 1.0 / xi[ok]) * log_z - np.exp(-log_z / xi[ok])
    out[np.isnan(out)] = -np.inf
    return out


def gev_log_density(x, mu, sigma, xi):
    """
    GEV log density.

    Args:
        x: Observation(s)
        mu, sigma, xi: Location, scale (> 0), shape

    Returns:
        Log density, -inf outside the support

    Raises:
        InvalidParameterError: sigma <= 0
    """
    if np.any(np.asarray(sigma) <= 0):
        raise InvalidParameterError("sigma must be positive", sigma=float(np.min(sigma)))
    return _as_result(_logpdf(x, mu, sigma, xi))


def gev_cdf(x, mu, sigma, xi):
    """Closed-form GEV distribution function."""
    if np.any(np.asarray(sigma) <= 0):
        raise InvalidParameterError("sigma must be positive", sigma=float(np.min(sigma)))
    x, mu, sigma, xi = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (x, mu, sigma, xi)))
    y = (x - mu) / sigma
    out = np.empty(x.shape)
    gumbel = np.abs(xi) < XI_TOL
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        out[gumbel] = np.exp(-np.exp(-y[gumbel]))
        z = 1.0 + xi * y
        inside = ~gumbel & (z > 0)
        out[inside] = np.exp(-np.exp(-np.log(z[inside]) / xi[inside]))
        # Below the lower bound (xi > 0) or above the upper bound (xi < 0).
        outside = ~gumbel & ~inside
        out[outside] = np.where(xi[outside] > 0, 0.0, 1.0)
    return _as_result(out)


def gev_ppf(p, mu, sigma, xi):
    """Closed-form GEV quantile function."""
    if np.any(np.asarray(sigma) <= 0):
        raise InvalidParameterError("sigma must be positive", sigma=float(np.min(sigma)))
    p, mu, sigma, xi = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (p, mu, sigma, xi)))
    if np.any((p <= 0) | (p >= 1)):
        raise InvalidParameterError("probabilities must lie in (0, 1)")
    log_y = np.log(-np.log(p))
    gumbel = np.abs(xi) < XI_TOL
    safe_xi = np.where(gumbel, 1.0, xi)
    q = np.where(
        gumbel,
        mu - sigma * log_y,
        mu + sigma * np.expm1(-safe_xi * log_y) / safe_xi,
    )
    return _as_result(q)


def return_value(mu: float, sigma: float, xi: float, spec: ReturnSpec = ReturnSpec()) -> float:
    """Return value Q_T: the 1 - 1/T quantile."""
    return gev_ppf(spec.p, mu, sigma, xi)


def _params_at(theta: GevrParams, t: int, window: ObservationWindow) -> Tuple[float, float, float]:
    mu, sigma, xi = theta.at(t, window)
    if not sigma > 0:
        raise InvalidExtrapolationError(t, "sigma", sigma)
    if not xi > XI_LOWER:
        raise InvalidExtrapolationError(t, "xi", xi)
    return mu, sigma, xi


def return_value_at_year(
    theta: GevrParams,
    t: int,
    spec: ReturnSpec = ReturnSpec(),
    window: ObservationWindow = ObservationWindow(),
) -> float:
    """
    Return value at year ``t`` with linearly extrapolated parameters.

    Raises:
        InvalidExtrapolationError: sigma_t <= 0 or xi_t <= -1
    """
    return return_value(*_params_at(theta, t, window), spec)


def return_values(
    theta: GevrParams,
    spec: ReturnSpec = ReturnSpec(),
    window: ObservationWindow = ObservationWindow(),
) -> Tuple[float, float]:
    """(Q_from, Q_to) at the ReturnSpec change years."""
    return (
        return_value_at_year(theta, spec.from_year, spec, window),
        return_value_at_year(theta, spec.to_year, spec, window),
    )


def delta_q(
    theta: GevrParams,
    spec: ReturnSpec = ReturnSpec(),
    window: ObservationWindow = ObservationWindow(),
) -> float:
    """Change in return value Q_to - Q_from."""
    q_from, q_to = return_values(theta, spec, window)
    return q_to - q_from


def gevr_log_likelihood(series, theta: GevrParams) -> float:
    """Log-likelihood of an AnnualSeries under GEVR parameters."""
    return GevrModel().log_likelihood(theta.to_vector(), series.to_array(), series.window.fractions())


@register_model
class GevrModel(RegressionModel):
    """Six-parameter GEVR family: (mu0, mu1, sigma0, sigma1, xi0, xi1)."""

    NAME = "gevr"

    @property
    def name(self) -> str:
        return self.NAME

    @property
    def param_names(self) -> Tuple[str, ...]:
        return GevrParams.PARAM_NAMES

    def log_likelihood(self, theta: np.ndarray, x: np.ndarray, fractions: np.ndarray) -> float:
        sigma = trend(theta[2], theta[3], fractions)
        if np.any(sigma <= 0):
            return -np.inf
        mu = trend(theta[0], theta[1], fractions)
        xi = trend(theta[4], theta[5], fractions)
        total = float(np.sum(_logpdf(x, mu, sigma, xi)))
        return total if np.isfinite(total) else -np.inf

    def support_violation(self, theta: np.ndarray) -> Optional[str]:
        return GevrParams.from_vector(theta).support_violation()

    def initial_guess(self, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        # Gumbel moment estimates, jittered; shape drawn from its prior.
        sd = float(np.std(x, ddof=1))
        scale = sd * np.sqrt(6.0) / np.pi
        location = float(np.mean(x)) - EULER_GAMMA * scale
        z = rng.standard_normal(4)
        xi0 = rng.uniform(XI_LOWER, XI_UPPER)
        return np.array([
            location + 0.1 * scale * z[0],
            0.1 * scale * z[1],
            scale * np.exp(0.1 * z[2]),
            0.1 * scale * z[3],
            xi0,
            0.0,
        ])
