"""
Integration Tests for the Command-Line Pipeline

Runs the subcommands end to end through ``main`` on synthetic inputs and
checks the files they hand to each other, exit codes and bitwise
reproducibility.
"""

import io
import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from cli.commands import build_parser, main, run_command
from src.models.chain import ChainConfig
from src.models.params import ReturnSpec
from src.models.run import RunConfig
from src.services import io_service
from src.tools import DeltaTool, FitTool


pytestmark = pytest.mark.integration

CHAIN_FLAGS = ["--iterations", "800", "--burnin", "300", "--adapt-start", "200", "--seed", "21"]


@pytest.fixture
def gevr_spec(tmp_path):
    """Spec for two synthetic wind-maximum replicates."""
    path = tmp_path / "gevr_spec.json"
    path.write_text(json.dumps({
        "kind": "gevr", "n_replicates": 2, "seed": 6,
        "truth": {"mu0": 30.0, "mu1": 2.0, "sigma0": 2.0, "xi0": -0.1},
    }))
    return path


def write_grid(grid, path: Path) -> Path:
    """Write a GridSeries in the long year,lat,lon,value layout."""
    n_years, n_locs = grid.values.shape
    pd.DataFrame({
        "year": np.repeat(grid.years, n_locs),
        "lat": np.tile(grid.lats, n_years),
        "lon": np.tile(grid.lons, n_years),
        "value": grid.values.ravel(),
    }).to_csv(path, index=False)
    return path


def run_pipeline(spec: Path, root: Path) -> Path:
    """simulate -> fit -> delta through the CLI; returns the delta directory."""
    assert main(["simulate", str(spec), "--out", str(root / "series")]) == 0
    assert main(["fit", "--manifest", str(root / "series" / "manifest.json"),
                 "--out", str(root / "chains"), *CHAIN_FLAGS]) == 0
    assert main(["delta", str(root / "chains"), "--out", str(root / "deltas"), *CHAIN_FLAGS]) == 0
    return root / "deltas"


class TestCliPipeline:
    """Tests chaining the subcommands through their files."""

    def test_aggregate(self, toy_grid, tmp_path):
        """Test aggregate writes a manifest that fit can read."""
        grid_path = write_grid(toy_grid, tmp_path / "grid.csv")
        code = main([
            "aggregate", str(grid_path), "--gcm", "UK", "--variable", "tas", "--scenario", "SSP585",
            "--ensemble", "r1i1p1f2", "--statistic", "max", "--zones", "Arctic", "Tropical",
            "--span", "10", "--out", str(tmp_path / "series"),
        ])
        assert code == 0
        manifest = io_service.load_manifest(tmp_path / "series" / "manifest.json")
        assert sorted(entry.key.zone_label for entry in manifest) == ["Arctic", "Tropical"]

    def test_simulate_fit_delta_summarize(self, gevr_spec, tmp_path, capsys):
        """Test the full chain of steps prints the Q tables."""
        deltas = run_pipeline(gevr_spec, tmp_path)
        assert len(list((tmp_path / "chains").glob("*.chain.csv"))) == 2
        assert len(list(deltas.glob("*.delta_Q.csv"))) == 2
        capsys.readouterr()

        assert main(["summarize", str(deltas), "--out", str(tmp_path / "tables")]) == 0
        assert capsys.readouterr().out.startswith("# Q\n")
        summary = pd.read_csv(tmp_path / "tables" / "summary_Q.csv")
        assert len(summary) == 1
        assert np.isfinite(summary["E_delta"].iloc[0])
        metadata = json.loads((tmp_path / "tables" / "run_metadata.json").read_text())
        assert metadata["command"] == "summarize"
        assert len(metadata["inputs"]) == 2

    def test_lmm_from_observations(self, tmp_path):
        """Test simulated observations feed the mixed model."""
        spec = tmp_path / "lmm_spec.json"
        spec.write_text(json.dumps({"kind": "lmm", "n_per_cell": 10, "seed": 2,
                                    "truth": {"tau_delta": 1.0, "tau_zeta": 0.5}}))
        assert main(["simulate", str(spec), "--out", str(tmp_path / "sim")]) == 0
        assert main(["lmm", "--observations", str(tmp_path / "sim" / "observations_r0.csv"),
                     "--out", str(tmp_path / "lmm")]) == 0
        table = pd.read_csv(tmp_path / "lmm" / "lmm_obs.csv")
        assert len(table) == 1

    def test_partial_failure_keeps_exit_zero(self, gevr_spec, tmp_path):
        """Test a broken series is skipped unless --strict is given."""
        assert main(["simulate", str(gevr_spec), "--out", str(tmp_path / "series")]) == 0
        (tmp_path / "series" / "broken.csv").write_text("year,value\n2015,x\n")
        inputs = sorted(str(p) for p in (tmp_path / "series").glob("*.csv"))
        assert main(["fit", *inputs, "--out", str(tmp_path / "chains"), *CHAIN_FLAGS]) == 0
        assert main(["fit", *inputs, "--out", str(tmp_path / "strict"), "--strict", *CHAIN_FLAGS]) == 2

    def test_json_error_output(self, tmp_path, capsys):
        """Test --json-errors reports a parseable failure on stderr."""
        code = main(["delta", str(tmp_path / "missing"), "--out", str(tmp_path), "--json-errors"])
        assert code == 1
        payload = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert payload["command"] == "delta"


class TestReproducibility:
    """Tests bitwise reproducibility of pipeline outputs."""

    def test_rerun_is_bitwise_identical(self, gevr_spec, tmp_path):
        """Test two runs with the same seed write identical CSV files."""
        first = run_pipeline(gevr_spec, tmp_path / "a")
        second = run_pipeline(gevr_spec, tmp_path / "b")
        names = sorted(p.name for p in first.glob("*.csv"))
        assert names == sorted(p.name for p in second.glob("*.csv"))
        for name in names:
            assert (first / name).read_bytes() == (second / name).read_bytes()
        for path in (tmp_path / "a" / "chains").glob("*.chain.csv"):
            assert path.read_bytes() == (tmp_path / "b" / "chains" / path.name).read_bytes()

    def test_cli_matches_in_process(self, gevr_spec, tmp_path, mock_logger):
        """Test the CLI and direct tool calls produce the same draws."""
        deltas = run_pipeline(gevr_spec, tmp_path / "cli")

        chain = ChainConfig(n_adapt_start=200, n_burnin=300, n_draws=800, seed=21)
        fit_run = RunConfig(command="fit", out=str(tmp_path / "direct" / "chains"), seed=21,
                            chain=chain, returns=ReturnSpec())
        assert FitTool(mock_logger).execute(
            run=fit_run, inputs=[], manifest=tmp_path / "cli" / "series" / "manifest.json",
        ).success
        delta_run = fit_run.model_copy(update={"command": "delta", "out": str(tmp_path / "direct" / "deltas")})
        assert DeltaTool(mock_logger).execute(run=delta_run, inputs=[Path(fit_run.out)]).success

        for path in deltas.glob("*.delta_Q.csv"):
            assert path.read_bytes() == (tmp_path / "direct" / "deltas" / path.name).read_bytes()

    def test_run_command_stdout(self, gevr_spec, tmp_path):
        """Test run_command writes tables to the given stream only."""
        deltas = run_pipeline(gevr_spec, tmp_path)
        args = build_parser().parse_args(["summarize", str(deltas), "--out", str(tmp_path / "tables")])
        args.log_json = False
        stream = io.StringIO()
        result = run_command(args, stdout=stream)
        assert result.success, result.error
        assert "# Q" in stream.getvalue()


@pytest.mark.slow
class TestRecoveryExperiments:
    """Tests the verify subcommand on its own synthetic data."""

    def test_gevr_coverage(self, tmp_path):
        """Test 95% intervals cover the change in return level in most replicates."""
        spec = tmp_path / "spec.json"
        spec.write_text(json.dumps({
            "kind": "gevr", "n_replicates": 20, "seed": 12,
            "truth": {"mu0": 30.0, "mu1": 2.0, "sigma0": 2.0, "xi0": -0.1},
        }))
        assert main(["verify", str(spec), "--out", str(tmp_path), "--jobs", "2",
                     "--iterations", "3000", "--burnin", "2000", "--adapt-start", "500"]) == 0
        report = json.loads((tmp_path / "coverage.json").read_text())
        assert report["n_failed"] == 0
        assert report["delta"]["covered"] >= 15

    def test_lmm_recovery(self, tmp_path):
        """Test the mixed model recovers the residual deviation in every replicate."""
        spec = tmp_path / "spec.json"
        spec.write_text(json.dumps({
            "kind": "lmm", "n_replicates": 5, "n_models": 8, "n_per_cell": 30, "seed": 3,
            "truth": {"gamma": [0.0, 1.0, 2.0], "tau_delta": 1.0, "tau_zeta": 0.5},
        }))
        assert main(["verify", str(spec), "--out", str(tmp_path)]) == 0
        rows = pd.read_csv(tmp_path / "coverage.csv").set_index("name")
        assert rows.loc["tau_eps", "covered"] == 5
