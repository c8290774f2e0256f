"""
Streaming Covariance

Welford's online mean/covariance update, used by the adaptive proposal to
track the empirical covariance of the whole chain history in O(d^2) per
iteration. The sample (n - 1) denominator matches ``np.cov``.

Usage:
    from src.stats.covariance import RunningCovariance

    acc = RunningCovariance(dim=6)
    for theta in history:
        acc.update(theta)
    sigma = acc.regularized(1e-10)
"""

import numpy as np


class RunningCovariance:
    """Online mean and covariance of d-dimensional vectors."""

    def __init__(self, dim: int):
        self.dim = dim
        self.n = 0
        self.mean = np.zeros(dim)
        self._m2 = np.zeros((dim, dim))

    def update(self, x: np.ndarray) -> None:
        x = np.asarray(x, dtype=float)
        self.n += 1
        delta = x - self.mean
        self.mean += delta / self.n
        self._m2 += np.outer(delta, x - self.mean)

    def covariance(self) -> np.ndarray:
        """Sample covariance; zeros until two vectors have been seen."""
        if self.n < 2:
            return np.zeros((self.dim, self.dim))
        cov = self._m2 / (self.n - 1)
        return 0.5 * (cov + cov.T)

    def regularized(self, jitter: float = 1e-10) -> np.ndarray:
        return self.covariance() + jitter * np.eye(self.dim)


def update_running_covariance(state: RunningCovariance, draw: np.ndarray,
                              jitter: float = 1e-10) -> np.ndarray:
    """Add one draw to ``state`` and return the jittered covariance."""
    state.update(draw)
    return state.regularized(jitter)
