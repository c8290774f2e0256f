"""
Pytest Configuration and Fixtures

Provides common fixtures for all tests including mocked services,
short chain configurations, toy grids and sample series.
"""

import os
from pathlib import Path
from typing import Callable, Optional
from unittest.mock import Mock

import numpy as np
import pytest

# Keep a developer's .env or CLIMDELTA_* variables out of the tests
for _name in list(os.environ):
    if _name.startswith("CLIMDELTA_"):
        del os.environ[_name]

from src.models.chain import ChainConfig
from src.models.grid import GridSeries, GridSource
from src.models.identifiers import DatasetKey
from src.models.params import GevrParams, NhgrParams, ReturnSpec
from src.models.run import RunConfig
from src.models.series import AnnualSeries
from src.models.tool_result import ToolResult
from src.services.logging_service import LoggingService


@pytest.fixture
def sample_key():
    """Provide a wind-maximum dataset key."""
    return DatasetKey(
        gcm="UK",
        variable="sfcWind",
        scenario="SSP585",
        ensemble="r1i1p1f2",
        statistic="max",
        zone="Global",
    )


@pytest.fixture
def tas_mean_key():
    """Provide a temperature-mean dataset key."""
    return DatasetKey(
        gcm="CE",
        variable="tas",
        scenario="SSP126",
        ensemble="r11i1p1f1",
        statistic="mean",
        zone="Tropical",
    )


@pytest.fixture
def make_series(sample_key) -> Callable[..., AnnualSeries]:
    """Factory for annual series; defaults to 86 wind maxima around 30."""
    def _make(values=None, key: Optional[DatasetKey] = None, base_year: int = 2015, seed: int = 0):
        if values is None:
            values = 30.0 + np.random.default_rng(seed).normal(0.0, 1.0, 86)
        return AnnualSeries(key=key or sample_key, base_year=base_year, values=values)
    return _make


@pytest.fixture
def short_chain_config():
    """Provide a chain configuration short enough for unit tests."""
    return ChainConfig(n_adapt_start=300, n_burnin=700, n_draws=1500, seed=7)


@pytest.fixture
def gevr_truth():
    """Provide GEVR parameters well inside the prior support."""
    return GevrParams(mu0=30.0, mu1=2.0, sigma0=2.0, sigma1=0.2, xi0=-0.1, xi1=0.0)


@pytest.fixture
def nhgr_truth():
    """Provide NHGR parameters with a positive mean."""
    return NhgrParams(alpha0=288.0, alpha1=3.0, beta0=0.5, beta1=0.0)


@pytest.fixture
def return_spec():
    """Provide the default 100-year return specification."""
    return ReturnSpec()


@pytest.fixture
def grid_source():
    """Provide the simulation a toy grid came from."""
    return GridSource(gcm="UK", variable="tas", scenario="SSP585", ensemble="r1i1p1f2")


@pytest.fixture
def toy_grid(grid_source):
    """Provide a 10-year grid with two locations per latitude band."""
    lats = np.array([-80.0, -70.0, -50.0, -30.0, -10.0, 10.0, 30.0, 60.0, 70.0, 89.0])
    lons = np.linspace(0.0, 324.0, lats.size)
    years = np.arange(2015, 2025)
    rng = np.random.default_rng(3)
    values = 250.0 + 40.0 * np.cos(np.radians(lats))[None, :] + rng.normal(0.0, 1.0, (years.size, lats.size))
    return GridSeries(source=grid_source, lats=lats, lons=lons, years=years, values=values)


@pytest.fixture
def make_run(tmp_path) -> Callable[..., RunConfig]:
    """Factory for run configurations writing under a temporary directory."""
    def _make(command: str = "test", out: Optional[Path] = None, **changes) -> RunConfig:
        data = {
            "command": command,
            "out": str(out or tmp_path / "out"),
            "seed": 11,
            "chain": ChainConfig(n_adapt_start=200, n_burnin=300, n_draws=800, seed=11),
            "returns": ReturnSpec(),
        }
        data.update(changes)
        return RunConfig(**data)
    return _make


@pytest.fixture
def mock_logger():
    """Provide mock logging service."""
    logger = Mock(spec=LoggingService)
    logger.status = Mock()
    logger.progress = Mock()
    logger.result = Mock()
    logger.error = Mock()
    return logger


@pytest.fixture
def sample_tool_result_success():
    """Provide successful tool result."""
    return ToolResult(
        success=True,
        data={"outputs": ["out/a.csv"]},
        metadata={"exit_code": 0},
        tool_name="fit",
    )


@pytest.fixture
def sample_tool_result_failure():
    """Provide failed tool result."""
    return ToolResult(
        success=False,
        error="zone Arctic has no grid locations",
        metadata={"exit_code": 2},
        tool_name="aggregate",
    )


# Pytest configuration
def pytest_configure(config):
    """Configure pytest with custom markers."""
    config.addinivalue_line(
        "markers", "unit: mark test as a unit test"
    )
    config.addinivalue_line(
        "markers", "integration: mark test as an integration test"
    )
    config.addinivalue_line(
        "markers", "slow: mark test as slow running"
    )
