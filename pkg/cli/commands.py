"""
Command-Line Entry Point

argparse subcommands for the pipeline:

    aggregate -> fit -> delta -> summarize | lmm
    simulate, verify

Every subcommand shares the run flags (seed, chain lengths, return period,
observation window, output directory, jobs). Flag values override the
``CLIMDELTA_*`` settings; the merged values form the RunConfig echoed into
``run_metadata.json``. Tables go to stdout, logs and errors to stderr.

Usage:
    climdelta aggregate grid.csv --gcm UK --variable tas --scenario SSP585 \\
        --ensemble r1i1p1f2 --statistic max --out series/
    climdelta fit --manifest series/manifest.json --out chains/ --jobs 4
    climdelta delta chains/ --kind auto --out deltas/
    climdelta summarize deltas/ --out tables/
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

from cli.middleware import configure_logging, guarded, report_exception
from src.core.config import settings
from src.core.errors import UsageError
from src.models.chain import ChainConfig
from src.models.grid import GridSource
from src.models.identifiers import ScenarioId, Statistic, VariableId
from src.models.params import ObservationWindow, ReturnSpec
from src.models.run import RunConfig
from src.models.tool_result import ToolResult
from src.routing.tool_registry import ToolRegistry, default_registry
from src.services.logging_service import LoggingService
from src.tools.aggregate_tool import parse_point
from src.tools.delta_tool import KIND_CHOICES, MODE_CHOICES
from src.tools.fit_tool import MODEL_CHOICES

logger = logging.getLogger(__name__)

PROG = "climdelta"


# ============================================================================
# Parser
# ============================================================================

def _common_flags() -> argparse.ArgumentParser:
    """Flags shared by every subcommand; ``None`` means "use the setting"."""
    common = argparse.ArgumentParser(add_help=False)
    run = common.add_argument_group("run")
    run.add_argument("--out", type=Path, default=Path("."), help="Output directory")
    run.add_argument("--seed", type=int, default=None, help="Master seed")
    run.add_argument("--jobs", type=int, default=None, help="Worker processes")
    run.add_argument("--strict", action="store_true", help="Any per-file failure fails the command")

    chain = common.add_argument_group("chain")
    chain.add_argument("--iterations", type=int, default=None, help="Retained draws n_I")
    chain.add_argument("--burnin", type=int, default=None, help="Discarded iterations n_B")
    chain.add_argument("--adapt-start", type=int, default=None, help="Fixed-proposal iterations n_S")
    chain.add_argument("--literal-proposal", action="store_true", default=None,
                       help="Use the printed proposal form (variance mixing)")

    model = common.add_argument_group("model")
    model.add_argument("--return-period", type=float, default=None, help="Return period T in years")
    model.add_argument("--from-year", type=int, default=None, help="First year of the change window")
    model.add_argument("--to-year", type=int, default=None, help="Last year of the change window")
    model.add_argument("--base-year", type=int, default=None, help="First observation year")
    model.add_argument("--span", type=int, default=None, help="Number of annual observations P")
    model.add_argument("--delta-m-mode", choices=MODE_CHOICES, default=None,
                       help="Mean-change functional for NHGR chains")

    output = common.add_argument_group("output")
    output.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    output.add_argument("--log-json", action="store_true", default=None, help="Run messages as JSON lines")
    output.add_argument("--json-errors", action="store_true", default=None, help="Errors as JSON on stderr")
    return common


def build_parser(registry: Optional[ToolRegistry] = None) -> argparse.ArgumentParser:
    registry = registry or default_registry()
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Return-value and mean changes from climate-model ensembles",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], help=registry.get(name).description)

    p = add("aggregate")
    p.add_argument("grid", type=Path, help="Long-format grid CSV (year, lat, lon, value)")
    p.add_argument("--gcm", required=True)
    p.add_argument("--variable", required=True, choices=[v.value for v in VariableId])
    p.add_argument("--scenario", required=True, choices=[s.value for s in ScenarioId])
    p.add_argument("--ensemble", required=True, help="r<i>i<i>p<i>f<i>")
    p.add_argument("--statistic", required=True, choices=[Statistic.MAX.value, Statistic.MIN.value,
                                                          Statistic.MEAN.value])
    p.add_argument("--zones", nargs="*", default=["all"], help="Zone names, 'Global' or 'all'")
    p.add_argument("--point", action="append", default=[], metavar="LABEL:LAT:LON",
                   help="Series at the grid location nearest a point (repeatable)")
    p.add_argument("--skip-missing", action="store_true")
    p.add_argument("--area-weighted", action="store_true", help="cos(latitude) weights for zone means")
    p.add_argument("--drop-years", type=int, default=0, help="Drop leading years")
    p.add_argument("--screen", action="store_true", help="Write smoothed series and OLS slopes")
    p.add_argument("--smooth-half-window", type=int, default=10)

    p = add("fit")
    p.add_argument("inputs", nargs="*", type=Path, help="Series CSV files or directories")
    p.add_argument("--manifest", type=Path, default=None)
    p.add_argument("--model", choices=MODEL_CHOICES, default="auto")
    p.add_argument("--reject-outliers", action="store_true")
    p.add_argument("--outlier-k", type=float, default=None)
    p.add_argument("--allow-nonpositive", action="store_true",
                   help="Accept non-positive values in mean series")

    p = add("delta")
    p.add_argument("inputs", nargs="+", type=Path, help="Chain CSV files or directories")
    p.add_argument("--kind", choices=KIND_CHOICES, default="auto")
    p.add_argument("--export-return-values", action="store_true")

    p = add("summarize")
    p.add_argument("inputs", nargs="+", type=Path, help="Change-draw CSV files or directories")
    p.add_argument("--excel", action="store_true", help="Also write .xlsx workbooks")

    p = add("lmm")
    p.add_argument("inputs", nargs="*", type=Path, help="Change-draw CSV files or directories")
    p.add_argument("--observations", type=Path, default=None, help="Observation-record CSV")
    p.add_argument("--criterion", choices=["ml", "reml"], default=None)
    p.add_argument("--excel", action="store_true")

    p = add("simulate")
    p.add_argument("spec", type=Path, help="JSON simulation spec")

    p = add("verify")
    p.add_argument("spec", type=Path, help="JSON simulation spec")
    p.add_argument("--n-datasets", type=int, default=None)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--criterion", choices=["ml", "reml"], default=None)
    return parser


# ============================================================================
# Argument -> RunConfig / tool parameters
# ============================================================================

def _pick(value: Any, default: Any) -> Any:
    return default if value is None else value


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Merge flags over settings."""
    seed = _pick(args.seed, settings.seed)
    chain = ChainConfig(**{
        **settings.chain_config(seed=seed).model_dump(),
        "n_draws": _pick(args.iterations, settings.n_draws),
        "n_burnin": _pick(args.burnin, settings.n_burnin),
        "n_adapt_start": _pick(args.adapt_start, settings.n_adapt_start),
        "literal_proposal": _pick(args.literal_proposal, settings.literal_proposal),
    })
    returns = ReturnSpec(
        period=_pick(args.return_period, settings.return_period),
        from_year=_pick(args.from_year, settings.change_from_year),
        to_year=_pick(args.to_year, settings.change_to_year),
    )
    window = ObservationWindow(
        base_year=_pick(args.base_year, settings.base_year),
        span=_pick(args.span, settings.span),
    )
    return RunConfig(
        command=args.command,
        out=Path(args.out).as_posix(),
        seed=seed,
        window=window,
        chain=chain,
        returns=returns,
        manifest=Path(args.manifest).as_posix() if getattr(args, "manifest", None) else None,
        jobs=_pick(args.jobs, settings.jobs),
        params=_recorded_params(args),
    )


_RUN_FLAGS = {
    "command", "out", "seed", "jobs", "iterations", "burnin", "adapt_start", "literal_proposal",
    "return_period", "from_year", "to_year", "base_year", "span", "manifest",
    "log_level", "log_json", "json_errors",
}


def _recorded_params(args: argparse.Namespace) -> Dict[str, Any]:
    """Subcommand parameters in JSON-friendly form."""
    params = {}
    for name, value in sorted(vars(args).items()):
        if name in _RUN_FLAGS:
            continue
        if isinstance(value, Path):
            value = value.as_posix()
        elif isinstance(value, (list, tuple)):
            value = [v.as_posix() if isinstance(v, Path) else v for v in value]
        params[name] = value
    return params


def tool_kwargs(args: argparse.Namespace) -> Dict[str, Any]:
    """Keyword arguments of the tool behind ``args.command``."""
    command = args.command
    require_positive_mean = not getattr(args, "allow_nonpositive", False) and settings.require_positive_mean
    if command == "aggregate":
        return {
            "grid_path": args.grid,
            "source": GridSource(gcm=args.gcm, variable=args.variable, scenario=args.scenario,
                                 ensemble=args.ensemble),
            "statistic": Statistic(args.statistic),
            "zones": args.zones,
            "points": [parse_point(p) for p in args.point],
            "skip_missing": args.skip_missing,
            "area_weighted": args.area_weighted,
            "drop_years": args.drop_years,
            "screen": args.screen,
            "smooth_half_window": args.smooth_half_window,
        }
    if command == "fit":
        return {
            "inputs": args.inputs,
            "manifest": args.manifest,
            "model": args.model,
            "strict": args.strict,
            "reject_outliers": args.reject_outliers,
            "outlier_k": _pick(args.outlier_k, settings.outlier_iqr_k),
            "require_positive_mean": require_positive_mean,
        }
    if command == "delta":
        return {
            "inputs": args.inputs,
            "kind": args.kind,
            "delta_m_mode": _pick(args.delta_m_mode, settings.delta_m_mode),
            "export_return_values": args.export_return_values,
            "strict": args.strict,
        }
    if command == "summarize":
        return {"inputs": args.inputs, "excel": args.excel}
    if command == "lmm":
        return {
            "inputs": args.inputs,
            "observations": args.observations,
            "criterion": _pick(args.criterion, settings.lmm_criterion),
            "strict": args.strict,
            "excel": args.excel,
        }
    if command == "simulate":
        return {"spec_path": args.spec}
    if command == "verify":
        return {
            "spec_path": args.spec,
            "n_datasets": args.n_datasets,
            "level": args.level,
            "criterion": _pick(args.criterion, settings.lmm_criterion),
        }
    raise ValueError(f"no parameters defined for {command!r}")


# ============================================================================
# Entry point
# ============================================================================

def run_command(args: argparse.Namespace, registry: Optional[ToolRegistry] = None,
                stdout=None) -> ToolResult:
    """Execute one parsed subcommand and print any rendered tables."""
    registry = registry or default_registry()
    run = build_run_config(args)
    Path(run.out).mkdir(parents=True, exist_ok=True)
    tool = registry.create(args.command, logger=LoggingService(json_output=bool(args.log_json)))
    result = tool.execute(run=run, **tool_kwargs(args))

    stdout = stdout or sys.stdout
    tables = (result.data or {}).get("tables", {}) if isinstance(result.data, dict) else {}
    for measure, table in tables.items():
        stdout.write(f"# {measure}\n{table}\n\n")
    return result


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Console-script entry point; returns the process exit code."""
    registry = default_registry()
    parser = build_parser(registry)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on bad usage; usage errors are exit 1 here
        return 0 if e.code == 0 else 1

    json_errors = bool(_pick(args.json_errors, settings.json_errors))
    if args.log_json is None:
        args.log_json = settings.log_json
    try:
        configure_logging(_pick(args.log_level, settings.log_level))
    except ValueError as e:
        return report_exception(UsageError(str(e)), json_errors)
    logger.debug(f"{PROG} {args.command}")
    return guarded(lambda: run_command(args, registry), json_errors=json_errors)


if __name__ == "__main__":
    sys.exit(main())
