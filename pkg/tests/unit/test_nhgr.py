"""
Unit Tests for the Gaussian Regression

Tests the Gaussian density and likelihood, predicted annual means and
both forms of the mean change.
"""

import math

import numpy as np
import pytest
from scipy import integrate

from src.core.errors import InvalidExtrapolationError, InvalidParameterError
from src.models.params import NhgrParams, ObservationWindow
from src.stats.nhgr import (
    NhgrModel,
    delta_m_parametric,
    delta_m_predictive,
    nhgr_log_density,
    nhgr_log_likelihood,
    predict_mean_draw,
)


pytestmark = pytest.mark.unit


class TestNhgrDensity:
    """Tests for the Gaussian log density."""

    def test_standard_normal_at_zero(self):
        """Test x=0, alpha=0, beta=1 gives -log(2 pi)/2."""
        assert nhgr_log_density(0.0, 0.0, 1.0) == pytest.approx(-0.9189385332046727, abs=1e-15)

    def test_mode_value(self):
        """Test the density at the mean is -log(2 pi beta^2)/2."""
        assert nhgr_log_density(3.0, 3.0, 2.0) == pytest.approx(-0.5 * math.log(2 * math.pi * 4.0))

    def test_symmetry(self):
        """Test f(alpha + d) = f(alpha - d)."""
        assert nhgr_log_density(5.7, 5.0, 0.3) == pytest.approx(nhgr_log_density(4.3, 5.0, 0.3))

    def test_beta_must_be_positive(self):
        """Test beta <= 0 raises."""
        with pytest.raises(InvalidParameterError):
            nhgr_log_density(0.0, 0.0, 0.0)

    @pytest.mark.parametrize("beta", [0.1, 1.0, 10.0])
    def test_normalization(self, beta):
        """Test the density integrates to 1 within 1e-9."""
        total, _ = integrate.quad(lambda x: math.exp(nhgr_log_density(x, 2.0, beta)), -np.inf, np.inf,
                                  epsabs=1e-12, epsrel=1e-12)
        assert abs(total - 1.0) < 1e-9


class TestNhgrLikelihood:
    """Tests for the NHGR log-likelihood."""

    def test_stationary_is_iid_sum(self, make_series):
        """Test a stationary model reduces to an i.i.d. Gaussian sum."""
        series = make_series()
        theta = NhgrParams(alpha0=30.0, beta0=1.0)
        expected = float(np.sum(nhgr_log_density(series.to_array(), 30.0, 1.0)))
        assert nhgr_log_likelihood(series, theta) == pytest.approx(expected, rel=1e-12)

    def test_two_point_sum(self, make_series):
        """Test a 2-point series against the direct two-term sum."""
        series = make_series(values=[10.0, 13.0])
        theta = NhgrParams(alpha0=9.0, alpha1=2.0, beta0=1.0, beta1=1.0)
        expected = nhgr_log_density(10.0, 9.0, 1.0) + nhgr_log_density(13.0, 11.0, 2.0)
        assert nhgr_log_likelihood(series, theta) == pytest.approx(expected, rel=1e-12)

    def test_non_positive_scale_sentinel(self, make_series):
        """Test beta_t <= 0 in the window gives -inf."""
        theta = NhgrParams(alpha0=30.0, beta0=1.0, beta1=-1.0)
        assert nhgr_log_likelihood(make_series(), theta) == -np.inf

    def test_non_positive_mean_sentinel(self, make_series):
        """Test alpha_t <= 0 gives -inf unless positivity is relaxed."""
        series = make_series(values=np.zeros(86))
        theta = NhgrParams(alpha0=-1.0, beta0=1.0)
        assert nhgr_log_likelihood(series, theta) == -np.inf
        assert np.isfinite(nhgr_log_likelihood(series, theta, require_positive_mean=False))

    def test_stationary_mle_is_maximum(self, make_series):
        """Test perturbing the stationary MLE never raises the likelihood."""
        series = make_series()
        x = series.to_array()
        alpha, beta = float(np.mean(x)), float(np.std(x))
        best = nhgr_log_likelihood(series, NhgrParams(alpha0=alpha, beta0=beta))
        for da in (-0.2, -0.05, 0.05, 0.2):
            for db in (-0.1, 0.0, 0.1):
                other = NhgrParams(alpha0=alpha + da, beta0=beta + db)
                assert nhgr_log_likelihood(series, other) <= best


class TestPredictMeanDraw:
    """Tests for draws of the annual mean."""

    def test_degenerate_scale(self):
        """Test a vanishing scale concentrates draws at alpha_t."""
        theta = NhgrParams(alpha0=5.0, alpha1=1.7, beta0=1e-12)
        rng = np.random.default_rng(0)
        draws = [predict_mean_draw(theta, 2100, rng) for _ in range(10)]
        np.testing.assert_allclose(draws, 6.7, atol=1e-9)

    def test_moments(self):
        """Test 10^6 draws match N(alpha_t, beta_t^2)."""
        theta = NhgrParams(alpha0=10.0, alpha1=2.0, beta0=2.0, beta1=1.0)
        window = ObservationWindow()
        alpha_t, beta_t = theta.at(2060, window)
        rng = np.random.default_rng(1)
        draws = alpha_t + beta_t * rng.standard_normal(1_000_000)
        assert abs(draws.mean() - alpha_t) < 4 * beta_t / 1e3
        assert draws.var() == pytest.approx(beta_t ** 2, rel=0.01)
        single = predict_mean_draw(theta, 2060, np.random.default_rng(1))
        assert single == pytest.approx(alpha_t + beta_t * np.random.default_rng(1).standard_normal())

    def test_invalid_extrapolation(self):
        """Test beta_t <= 0 at the requested year raises."""
        theta = NhgrParams(alpha0=10.0, beta0=1.0, beta1=-0.9)
        with pytest.raises(InvalidExtrapolationError) as exc_info:
            predict_mean_draw(theta, 2125, np.random.default_rng(0))
        assert exc_info.value.parameter == "beta"


class TestDeltaM:
    """Tests for the parametric and predictive mean changes."""

    def test_parametric_exact(self):
        """Test alpha1 = 8.5 gives a change of exactly 10."""
        assert delta_m_parametric(NhgrParams(alpha0=280.0, alpha1=8.5, beta0=1.0)) == pytest.approx(10.0, abs=1e-12)

    def test_parametric_zero(self):
        """Test no trend gives no change."""
        assert delta_m_parametric(NhgrParams(alpha0=280.0, beta0=1.0)) == 0.0

    @pytest.mark.parametrize("alpha1", [-3.0, 0.5, 7.0])
    def test_parametric_sign(self, alpha1):
        """Test the change has the sign of alpha1."""
        assert np.sign(delta_m_parametric(NhgrParams(alpha0=280.0, alpha1=alpha1, beta0=1.0))) == np.sign(alpha1)

    def test_predictive_collapses_to_parametric(self):
        """Test a vanishing scale gives the parametric change."""
        theta = NhgrParams(alpha0=280.0, alpha1=8.5, beta0=1e-12)
        value = delta_m_predictive(theta, np.random.default_rng(0))
        assert value == pytest.approx(delta_m_parametric(theta), abs=1e-9)

    def test_predictive_moments(self):
        """Test 10^6 predictive draws match N((100/85) alpha1, beta_2025^2 + beta_2125^2)."""
        theta = NhgrParams(alpha0=280.0, alpha1=8.5, beta0=1.0, beta1=0.85)
        window = ObservationWindow()
        rng = np.random.default_rng(42)
        draws = np.array([delta_m_predictive(theta, rng) for _ in range(200_000)])
        b_from = theta.at(2025, window)[1]
        b_to = theta.at(2125, window)[1]
        sd = math.sqrt(b_from ** 2 + b_to ** 2)
        assert abs(draws.mean() - 10.0) < 4 * sd / math.sqrt(draws.size)
        assert draws.var() == pytest.approx(b_from ** 2 + b_to ** 2, rel=0.02)

    def test_predictive_invalid_years_consume_no_randomness(self):
        """Test an invalid extrapolation raises before drawing."""
        theta = NhgrParams(alpha0=280.0, beta0=1.0, beta1=-0.9)
        rng = np.random.default_rng(5)
        with pytest.raises(InvalidExtrapolationError):
            delta_m_predictive(theta, rng)
        assert rng.standard_normal() == np.random.default_rng(5).standard_normal()


class TestNhgrModel:
    """Tests for the regression model interface."""

    def test_initial_guess_in_support(self, make_series):
        """Test starting values lie in the prior support."""
        model = NhgrModel()
        rng = np.random.default_rng(0)
        x = make_series().to_array()
        for _ in range(20):
            assert model.support_violation(model.initial_guess(x, rng)) is None

    def test_positive_mean_switch(self):
        """Test relaxing positivity accepts negative means."""
        theta = np.array([-1.0, 0.0, 1.0, 0.0])
        assert NhgrModel().support_violation(theta) == "alpha"
        assert NhgrModel(require_positive_mean=False).support_violation(theta) is None

    def test_support_checks_trend_endpoint(self):
        """Test a trend driving the mean below zero by the last year is rejected."""
        theta = np.array([1.0, -2.0, 1.0, 0.0])
        assert NhgrModel().support_violation(theta) == "alpha"
        assert NhgrParams.from_vector(theta).support_violation() == "alpha"
        assert NhgrModel().support_violation(np.array([1.0, 0.0, 1.0, -1.0])) == "beta"
