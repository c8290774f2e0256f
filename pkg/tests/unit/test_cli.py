"""
Unit Tests for the Command-Line Layer

Tests argument parsing, the merge of flags over settings and the mapping
of results and exceptions onto exit codes and error output.
"""

import io
import json

import pytest
from pydantic import BaseModel, ValidationError

from cli.commands import build_parser, build_run_config, main, tool_kwargs
from cli.middleware import configure_logging, report_exception, report_result
from src.core.config import settings
from src.core.errors import EmptyZoneError, InitializationError, UsageError
from src.models.tool_result import FileFailure, ToolResult


pytestmark = pytest.mark.unit


class TestParser:
    """Tests for subcommand parsing and RunConfig construction."""

    def test_run_config_from_flags(self):
        """Test chain and window flags override the settings."""
        args = build_parser().parse_args([
            "fit", "series/", "--out", "chains", "--seed", "5", "--iterations", "300",
            "--burnin", "200", "--adapt-start", "100", "--span", "30", "--return-period", "50",
        ])
        run = build_run_config(args)
        assert run.command == "fit"
        assert run.out == "chains"
        assert (run.chain.n_draws, run.chain.n_burnin, run.chain.n_adapt_start) == (300, 200, 100)
        assert run.chain.seed == 5
        assert run.window.span == 30
        assert run.returns.period == 50.0
        assert run.params["inputs"] == ["series"]

    def test_defaults_from_settings(self):
        """Test omitted flags fall back to the settings."""
        run = build_run_config(build_parser().parse_args(["summarize", "deltas/"]))
        assert run.chain.n_draws == 10000
        assert run.returns.from_year == 2025
        assert run.jobs == 1

    def test_seed_from_settings(self, monkeypatch):
        """Test an omitted --seed falls back to the configured seed."""
        monkeypatch.setattr(settings, "seed", 5)
        run = build_run_config(build_parser().parse_args(["summarize", "deltas/"]))
        assert run.seed == 5
        assert run.chain.seed == 5
        explicit = build_run_config(build_parser().parse_args(["summarize", "deltas/", "--seed", "0"]))
        assert explicit.seed == 0

    def test_aggregate_kwargs(self):
        """Test aggregate flags become tool parameters."""
        args = build_parser().parse_args([
            "aggregate", "grid.csv", "--gcm", "UK", "--variable", "tas", "--scenario", "SSP585",
            "--ensemble", "r1i1p1f2", "--statistic", "min", "--zones", "Arctic", "Global",
            "--point", "NA:51.5:-0.1",
        ])
        kwargs = tool_kwargs(args)
        assert kwargs["zones"] == ["Arctic", "Global"]
        assert kwargs["points"] == [("NA", 51.5, -0.1)]
        assert kwargs["source"].gcm == "UK"
        assert kwargs["statistic"].value == "min"

    def test_allow_nonpositive(self):
        """Test the fit flag relaxes the positive-mean constraint."""
        args = build_parser().parse_args(["fit", "series.csv", "--allow-nonpositive"])
        assert tool_kwargs(args)["require_positive_mean"] is False

    def test_delta_has_no_positivity_flag(self):
        """Test delta takes the positivity rule from the chain rather than a flag."""
        assert "require_positive_mean" not in tool_kwargs(build_parser().parse_args(["delta", "chains/"]))
        with pytest.raises(SystemExit):
            build_parser().parse_args(["delta", "chains/", "--allow-nonpositive"])

    def test_invalid_schedule_is_validation_error(self):
        """Test an adaptation start after burn-in fails RunConfig construction."""
        args = build_parser().parse_args(["fit", "--burnin", "10", "--adapt-start", "20"])
        with pytest.raises(ValidationError):
            build_run_config(args)


class TestMain:
    """Tests for the console entry point."""

    def test_help_exits_zero(self, capsys):
        """Test --help is a success."""
        assert main(["--help"]) == 0

    def test_bad_usage_exits_one(self, capsys):
        """Test argparse errors map to exit code 1."""
        assert main(["fit", "--model", "gpd"]) == 1

    def test_unknown_log_level(self, capsys, tmp_path):
        """Test an unknown log level is a usage error."""
        assert main(["summarize", str(tmp_path), "--log-level", "LOUD", "--out", str(tmp_path)]) == 1
        assert "unknown log level" in capsys.readouterr().err

    def test_missing_input_exit_code(self, capsys, tmp_path):
        """Test a missing spec file reports exit code 1 as JSON."""
        code = main(["simulate", str(tmp_path / "none.json"), "--out", str(tmp_path), "--json-errors"])
        assert code == 1
        payload = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert payload["error"] == "MissingInputError"
        assert payload["command"] == "simulate"


class TestReportResult:
    """Tests for result reporting."""

    def test_success(self):
        """Test success is exit 0 and prints nothing."""
        stream = io.StringIO()
        assert report_result(ToolResult(success=True), stream=stream) == 0
        assert stream.getvalue() == ""

    def test_failure_plain(self, sample_tool_result_failure):
        """Test a failure prints one line and keeps its exit code."""
        stream = io.StringIO()
        assert report_result(sample_tool_result_failure, stream=stream) == 2
        assert stream.getvalue() == "error: zone Arctic has no grid locations\n"

    def test_failure_json_with_files(self):
        """Test JSON output lists per-file failures."""
        result = ToolResult(
            success=False, error="1 input(s) failed", tool_name="fit",
            metadata={"exit_code": 3},
            failures=[FileFailure(path="a.csv", error="no start", error_type="InitializationError", exit_code=3)],
        )
        stream = io.StringIO()
        assert report_result(result, json_errors=True, stream=stream) == 3
        payload = json.loads(stream.getvalue())
        assert payload["failures"][0]["path"] == "a.csv"
        assert payload["exit_code"] == 3


class TestReportException:
    """Tests for escaped exceptions."""

    @pytest.mark.parametrize("error, code", [
        (UsageError("bad flag"), 1),
        (EmptyZoneError("no locations"), 2),
        (InitializationError("no start"), 3),
    ])
    def test_domain_errors(self, error, code):
        """Test domain errors keep their exit codes."""
        stream = io.StringIO()
        assert report_exception(error, json_errors=True, stream=stream) == code
        assert json.loads(stream.getvalue())["error"] == type(error).__name__

    def test_validation_error(self):
        """Test pydantic validation errors are user errors."""
        class Positive(BaseModel):
            n: int

        with pytest.raises(ValidationError) as exc_info:
            Positive(n="x")
        stream = io.StringIO()
        assert report_exception(exc_info.value, stream=stream) == 1
        assert stream.getvalue().startswith("error: invalid value")

    def test_unexpected_error(self):
        """Test anything else is exit 1."""
        assert report_exception(RuntimeError("boom"), stream=io.StringIO()) == 1


class TestConfigureLogging:
    """Tests for root logging setup."""

    def test_unknown_level(self):
        """Test unknown level names raise."""
        with pytest.raises(ValueError):
            configure_logging("LOUD", stream=io.StringIO())
