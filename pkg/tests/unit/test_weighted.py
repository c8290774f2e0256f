"""
Unit Tests for Weighted Sample Statistics
"""

import numpy as np
import pytest

from src.core.errors import InvalidParameterError
from src.stats.weighted import (
    normalize_weights,
    weighted_fraction_positive,
    weighted_mean,
    weighted_quantile,
)


pytestmark = pytest.mark.unit


class TestWeightedQuantile:
    """Tests for the type-7 weighted quantile."""

    def test_equal_weights_match_numpy(self):
        """Test equal weights reproduce np.quantile's default rule."""
        values = np.random.default_rng(0).gamma(2.0, size=101)
        q = [0.0, 0.025, 0.25, 0.5, 0.75, 0.975, 1.0]
        np.testing.assert_allclose(weighted_quantile(values, q), np.quantile(values, q), rtol=1e-12)
        np.testing.assert_allclose(weighted_quantile(values, q, weights=np.full(101, 3.0)),
                                   np.quantile(values, q), rtol=1e-12)

    def test_scalar_returns_float(self):
        """Test a scalar probability returns a float."""
        assert isinstance(weighted_quantile([3.0, 1.0, 2.0], 0.5), float)
        assert weighted_quantile([3.0, 1.0, 2.0], 0.5) == 2.0

    def test_unequal_weights_example(self):
        """Test weights (0.5, 0.25, 0.25) put the median at 1.75."""
        assert weighted_quantile([1.0, 2.0, 3.0], 0.5, weights=[0.5, 0.25, 0.25]) == pytest.approx(1.75)

    def test_zero_weights_dropped(self):
        """Test zero-weight draws have no influence."""
        values = np.array([1.0, 100.0, 2.0, 3.0])
        weights = np.array([1.0, 0.0, 1.0, 1.0])
        assert weighted_quantile(values, 0.9, weights) == pytest.approx(np.quantile([1.0, 2.0, 3.0], 0.9))

    def test_single_value(self):
        """Test a single draw is every quantile."""
        np.testing.assert_array_equal(weighted_quantile([4.0], [0.1, 0.9]), [4.0, 4.0])

    def test_monotone_in_q(self):
        """Test quantiles never decrease in q."""
        rng = np.random.default_rng(1)
        values, weights = rng.normal(size=50), rng.random(50)
        out = weighted_quantile(values, np.linspace(0, 1, 41), weights)
        assert np.all(np.diff(out) >= 0)

    def test_probability_out_of_range(self):
        """Test q outside [0, 1] raises."""
        with pytest.raises(InvalidParameterError):
            weighted_quantile([1.0, 2.0], 1.5)


class TestWeights:
    """Tests for weight validation and the weighted mean."""

    def test_normalized(self):
        """Test weights are scaled to sum to one."""
        np.testing.assert_allclose(normalize_weights(np.zeros(3), np.array([1.0, 1.0, 2.0])), [0.25, 0.25, 0.5])

    @pytest.mark.parametrize("weights", [[1.0, -1.0], [0.0, 0.0], [1.0]])
    def test_invalid_weights(self, weights):
        """Test negative, all-zero and misaligned weights raise."""
        with pytest.raises(InvalidParameterError):
            normalize_weights(np.array([1.0, 2.0]), np.array(weights))

    def test_empty_values(self):
        """Test an empty sample raises."""
        with pytest.raises(InvalidParameterError):
            weighted_mean([])

    def test_weighted_mean(self):
        """Test the weighted mean of a small sample."""
        assert weighted_mean([1.0, 3.0], [3.0, 1.0]) == pytest.approx(1.5)

    def test_fraction_positive(self):
        """Test zero is not counted as positive."""
        assert weighted_fraction_positive([-1.0, 0.0, 2.0, 5.0]) == pytest.approx(0.5)
        assert weighted_fraction_positive([-1.0, 2.0], [3.0, 1.0]) == pytest.approx(0.25)
