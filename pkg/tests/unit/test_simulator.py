"""
Unit Tests for Synthetic Data and Recovery Experiments
"""

import numpy as np
import pytest

from src.core.errors import InvalidParameterError
from src.models.chain import ChainConfig
from src.models.params import GevrParams
from src.models.simulation import (
    GevrSyntheticSpec,
    LmmSimulationSpec,
    LmmTruth,
    NhgrSyntheticSpec,
    load_simulation_spec,
)
from src.stats.gevr import gev_ppf
from src.stats.simulator import (
    clopper_pearson,
    coverage_experiment,
    draw_gev,
    gen_lmm_dataset,
    gen_replicate,
    gen_series,
    lmm_recovery,
)


pytestmark = pytest.mark.unit

# Lower bound on intervals covering the truth out of 100 replicates at nominal 0.95
MIN_COVERED_OF_100 = 86


@pytest.fixture
def gevr_spec(gevr_truth):
    """Provide a three-replicate GEVR spec."""
    return GevrSyntheticSpec(truth=gevr_truth, n_replicates=3, seed=21)


@pytest.fixture
def nhgr_spec(nhgr_truth):
    """Provide a two-replicate NHGR spec for temperature means."""
    return NhgrSyntheticSpec(truth=nhgr_truth, n_replicates=2, seed=8, variable="tas")


class TestDrawGev:
    """Tests for inverse-CDF GEV sampling."""

    def test_exceedance_of_hundred_year_level(self):
        """Test 10^6 draws exceed the 0.99 quantile 1% of the time."""
        level = gev_ppf(0.99, 0.0, 1.0, 0.1)
        draws = draw_gev(0.0, 1.0, 0.1, size=1_000_000, rng=np.random.default_rng(0))
        assert np.mean(draws > level) == pytest.approx(0.01, abs=0.0003)

    def test_bounded_tail(self):
        """Test a negative shape keeps draws below mu - sigma / xi."""
        draws = draw_gev(0.0, 1.0, -0.5, size=10_000, rng=np.random.default_rng(1))
        assert draws.max() < 2.0

    def test_broadcast_parameters(self):
        """Test per-year parameters broadcast against size."""
        mu = np.array([0.0, 100.0])
        draws = draw_gev(mu, 1e-9, 0.0, size=2, rng=np.random.default_rng(2))
        np.testing.assert_allclose(draws, mu, atol=1e-6)


class TestSeriesGenerators:
    """Tests for synthetic annual series."""

    def test_replicate_count_and_keys(self, gevr_spec):
        """Test one 86-year series per replicate with distinct ensemble labels."""
        series = gen_series(gevr_spec)
        assert len(series) == 3
        assert all(s.span == 86 for s in series)
        assert [str(s.key.ensemble) for s in series] == ["r1i1p1f1", "r2i1p1f1", "r3i1p1f1"]

    def test_replicate_alone_matches_batch(self, gevr_spec, nhgr_spec):
        """Test gen_replicate(spec, r) equals gen_series(spec)[r]."""
        for spec in (gevr_spec, nhgr_spec):
            np.testing.assert_array_equal(gen_replicate(spec, 1).to_array(), gen_series(spec)[1].to_array())

    def test_replicates_differ(self, gevr_spec):
        """Test replicates use separate streams."""
        a, b = gen_series(gevr_spec)[:2]
        assert not np.array_equal(a.to_array(), b.to_array())

    def test_nhgr_moments(self, nhgr_truth):
        """Test the pooled residual scale matches beta0."""
        spec = NhgrSyntheticSpec(truth=nhgr_truth, n_replicates=50, seed=2)
        series = gen_series(spec)
        window = series[0].window
        alpha, _ = nhgr_truth.at(window.years(), window)
        residuals = np.concatenate([s.to_array() - alpha for s in series])
        assert residuals.std() == pytest.approx(0.5, rel=0.05)

    def test_truth_outside_support_rejected(self):
        """Test a spec whose truth leaves the prior support fails validation."""
        with pytest.raises(ValueError):
            GevrSyntheticSpec(truth={"mu0": 0.0, "sigma0": 1.0, "xi0": 0.5})

    def test_load_spec_dispatches_on_kind(self):
        """Test JSON documents validate to the matching spec type."""
        spec = load_simulation_spec('{"kind": "nhgr", "truth": {"alpha0": 280, "beta0": 1}}')
        assert isinstance(spec, NhgrSyntheticSpec)
        assert isinstance(load_simulation_spec('{"kind": "lmm"}'), LmmSimulationSpec)


class TestLmmDataset:
    """Tests for mixed-model datasets."""

    def test_balanced_design(self):
        """Test the default design has 3 x 5 x 3 x 50 records."""
        frame = gen_lmm_dataset(LmmSimulationSpec())
        assert len(frame) == 2250
        assert list(frame.columns) == ["value", "scenario", "gcm", "ensemble"]
        assert sorted(frame["scenario"].unique()) == ["SSP126", "SSP245", "SSP585"]
        assert frame.groupby(["scenario", "gcm", "ensemble"]).size().eq(50).all()

    def test_noise_free_values(self):
        """Test zero variances give iota + gamma_j exactly."""
        spec = LmmSimulationSpec(truth=LmmTruth(iota=1.0, gamma=(0.0, 2.0, 5.0), tau_eps=0.0), n_per_cell=2)
        frame = gen_lmm_dataset(spec)
        means = frame.groupby("scenario")["value"].agg(["min", "max"])
        assert means.loc["SSP245", "min"] == means.loc["SSP245", "max"] == 3.0
        assert means.loc["SSP585", "max"] == 6.0

    def test_replicates_differ(self):
        """Test each replicate uses its own stream."""
        spec = LmmSimulationSpec(truth=LmmTruth(tau_delta=1.0))
        a, b = gen_lmm_dataset(spec, 0), gen_lmm_dataset(spec, 1)
        assert not np.array_equal(a["value"].to_numpy(), b["value"].to_numpy())


class TestClopperPearson:
    """Tests for the exact binomial interval."""

    def test_none_covered(self):
        """Test 0/10 gives [0, 1 - 0.025^(1/10)]."""
        low, high = clopper_pearson(0, 10)
        assert low == 0.0
        assert high == pytest.approx(1.0 - 0.025 ** 0.1)

    def test_all_covered(self):
        """Test 10/10 gives [0.025^(1/10), 1]."""
        low, high = clopper_pearson(10, 10)
        assert low == pytest.approx(0.025 ** 0.1)
        assert high == 1.0

    def test_symmetric_at_half(self):
        """Test 50/100 is symmetric about one half."""
        low, high = clopper_pearson(50, 100)
        assert low + high == pytest.approx(1.0)
        assert low < 0.5 < high

    def test_empty(self):
        """Test no trials give the whole unit interval."""
        assert clopper_pearson(0, 0) == (0.0, 1.0)


class TestCoverageExperiment:
    """Tests for the simulate-fit-check loop."""

    @pytest.fixture
    def tiny_config(self):
        """Provide a very short chain."""
        return ChainConfig(n_adapt_start=100, n_burnin=300, n_draws=300, seed=0)

    def test_report_structure(self, nhgr_spec, tiny_config):
        """Test one indicator per replicate and parameter plus the change."""
        report = coverage_experiment(nhgr_spec, tiny_config)
        assert report.model == "nhgr"
        assert report.n_datasets == 2
        assert [p.name for p in report.parameters] == ["alpha0", "alpha1", "beta0", "beta1"]
        assert report.n_failed + len(report.indicators["alpha0"]) == 2
        assert report.delta is not None
        assert 0.0 <= report.coverage("delta").fraction <= 1.0

    def test_deterministic(self, gevr_spec, tiny_config):
        """Test reruns give identical indicators."""
        a = coverage_experiment(gevr_spec, tiny_config, n_datasets=2)
        b = coverage_experiment(gevr_spec, tiny_config, n_datasets=2)
        assert a.indicators == b.indicators

    def test_requires_a_dataset(self, gevr_spec, tiny_config):
        """Test n_datasets must be positive."""
        with pytest.raises(InvalidParameterError):
            coverage_experiment(gevr_spec, tiny_config, n_datasets=0)

    @pytest.mark.slow
    def test_nhgr_change_coverage(self, nhgr_truth):
        """Test 95% intervals of the mean change cover the truth in most replicates."""
        spec = NhgrSyntheticSpec(truth=nhgr_truth, n_replicates=40, seed=3)
        cfg = ChainConfig(n_adapt_start=500, n_burnin=1500, n_draws=3000, seed=0)
        report = coverage_experiment(spec, cfg)
        assert report.n_failed == 0
        assert report.coverage("delta").ci_high >= 0.95
        assert report.coverage("delta").fraction >= 0.8

    @pytest.fixture
    def long_config(self):
        """Chain lengths for the 100-replicate GEVR checks."""
        return ChainConfig(n_adapt_start=1000, n_burnin=3000, n_draws=5000, seed=0)

    @pytest.mark.slow
    def test_gevr_parameter_coverage(self, gevr_truth, long_config):
        """Test each of the six GEVR parameters is covered in at least 86 of 100 replicates."""
        spec = GevrSyntheticSpec(truth=gevr_truth, n_replicates=100, seed=31)
        report = coverage_experiment(spec, long_config, jobs=4)
        assert report.n_failed == 0
        for name in GevrParams.PARAM_NAMES:
            item = report.coverage(name)
            assert item.total == 100
            assert item.covered >= MIN_COVERED_OF_100, f"{name}: {item.covered}/100"

    @pytest.mark.slow
    def test_stationary_change_interval_contains_zero(self, long_config):
        """Test a stationary truth gives Q-change intervals containing 0 in at least 86 of 100 replicates."""
        truth = GevrParams(mu0=30.0, sigma0=2.0, xi0=-0.1)
        spec = GevrSyntheticSpec(truth=truth, n_replicates=100, seed=32)
        report = coverage_experiment(spec, long_config, jobs=4)
        assert report.n_failed == 0
        assert report.delta.total == 100
        assert report.delta.covered >= MIN_COVERED_OF_100


class TestLmmRecovery:
    """Tests for the mixed-model recovery check."""

    def test_indicators_per_replicate(self):
        """Test components and scenario differences are scored per replicate."""
        spec = LmmSimulationSpec(
            truth=LmmTruth(gamma=(0.0, 1.0, 2.0), tau_delta=1.0, tau_zeta=0.5, tau_eps=1.0),
            n_models=6, n_per_cell=20,
        )
        report = lmm_recovery(spec, n_datasets=3)
        assert report.model == "lmm"
        assert report.n_failed == 0
        assert set(report.indicators) == {"tau_delta", "tau_zeta", "tau_eps", "g2_minus_g1", "g3_minus_g1"}
        assert all(len(v) == 3 for v in report.indicators.values())
        assert report.coverage("tau_eps").covered == 3

    @pytest.mark.slow
    def test_balanced_design_recovery(self):
        """Test the 3 x 5 x 3 x 50 design recovers tau_eps and scenario differences in 18 of 20 replicates."""
        spec = LmmSimulationSpec(
            truth=LmmTruth(iota=1.0, gamma=(0.0, 1.0, 2.5), tau_delta=2.0, tau_zeta=1.0, tau_eps=0.5),
            seed=41,
        )
        report = lmm_recovery(spec, n_datasets=20)
        assert report.n_failed == 0
        for name in ("tau_eps", "g2_minus_g1", "g3_minus_g1"):
            assert report.coverage(name).covered >= 18, name

    @pytest.mark.slow
    def test_group_deviations_recovered_with_many_models(self):
        """Test tau_delta and tau_zeta land within 15% in 18 of 20 replicates once there are enough models."""
        spec = LmmSimulationSpec(
            truth=LmmTruth(iota=1.0, gamma=(0.0, 1.0, 2.5), tau_delta=2.0, tau_zeta=1.0, tau_eps=0.5),
            n_models=150, n_ensembles=3, n_per_cell=20, seed=42,
        )
        report = lmm_recovery(spec, n_datasets=20)
        assert report.n_failed == 0
        for name in ("tau_delta", "tau_zeta", "tau_eps", "g2_minus_g1", "g3_minus_g1"):
            assert report.coverage(name).covered >= 18, name
