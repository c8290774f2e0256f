"""
Weighted Sample Statistics

Weighted mean, exceedance probability and quantiles of draws carrying
per-draw weights. Quantiles generalize the type-7 (linear interpolation)
rule: the k-th order statistic sits at plotting position

    p_k = C_{k-1} / (1 - w_k)

with C the cumulative normalized weight. For equal weights this is
(k - 1)/(n - 1), i.e. ``np.quantile``'s default.
"""

from typing import Optional, Sequence, Union

import numpy as np

from src.core.errors import InvalidParameterError


def normalize_weights(values: np.ndarray, weights: Optional[np.ndarray]) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise InvalidParameterError("no draws to summarize")
    if weights is None:
        return np.full(values.size, 1.0 / values.size)
    weights = np.asarray(weights, dtype=float)
    if weights.shape != values.shape:
        raise InvalidParameterError("weights must align with values")
    if np.any(weights < 0) or not weights.sum() > 0:
        raise InvalidParameterError("weights must be non-negative with positive total")
    return weights / weights.sum()


def weighted_mean(values, weights=None) -> float:
    w = normalize_weights(values, weights)
    return float(np.average(np.asarray(values, dtype=float), weights=w))


def weighted_fraction_positive(values, weights=None) -> float:
    """Weighted share of draws strictly above zero."""
    w = normalize_weights(values, weights)
    return float(min(1.0, w[np.asarray(values) > 0].sum()))


def weighted_quantile(
    values,
    q: Union[float, Sequence[float]],
    weights=None,
):
    """
    Type-7 weighted quantile(s).

    Args:
        values: Draws
        q: Probability or probabilities in [0, 1]
        weights: Optional non-negative weights (normalized internally)

    Returns:
        float for scalar q, array otherwise
    """
    values = np.asarray(values, dtype=float)
    w = normalize_weights(values, weights)
    q_arr = np.asarray(q, dtype=float)
    if np.any((q_arr < 0) | (q_arr > 1)):
        raise InvalidParameterError("quantile probabilities must lie in [0, 1]")

    keep = w > 0
    values, w = values[keep], w[keep] / w[keep].sum()
    order = np.argsort(values, kind="stable")
    values, w = values[order], w[order]

    if values.size == 1:
        out = np.full(q_arr.shape, values[0])
    else:
        cumulative_before = np.concatenate(([0.0], np.cumsum(w)[:-1]))
        positions = cumulative_before / (1.0 - w)
        positions[-1] = 1.0
        out = np.interp(q_arr, positions, values)
    return float(out) if out.ndim == 0 else out
