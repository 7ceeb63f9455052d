#!/usr/bin/env python3
"""
Heat Content Lab CLI

Command-line front end for the spectral heat content experiments: supremum
tails, subordinator densities, heat content curves, small-time expansions,
coefficient fits and the acceptance suite. Every output file is accompanied
by `<out>.spec.json`, which `--spec` replays to a byte-identical result.
"""

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

# Add the project root to the Python path
sys.path.append(str(Path(__file__).parent))

import config
from heatlab import asymptotics, heatcontent, subordinator, supremum
from heatlab.nodes.logger import RunLogger
from heatlab.run import run_suite
from heatlab.state import (
    CriterionResult, DensityEvalConfig, DomainError, ExperimentSpec, HeatCurve, HeatLabError, HeatPoint,
    McConfig, ProcessKind, Provenance, SupSampleConfig, UnsupportedRegimeError
)
from heatlab.utils.validation import (
    expand_points, parse_alpha, parse_basis, parse_interval, parse_number_list,
    parse_t_grid, parse_window
)
from tools import FileTool

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

# Arguments that do not change the content of an output
_NON_CONTENT_ARGS = {"command", "spec", "out", "format", "seed", "log_level", "workers", "report"}

TAIL_KINDS = ["bm", "cauchy-sup", "skbm-sup", "stable-sup"]


# Output helpers -------------------------------------------------------------

def _default_format(command: str) -> str:
    return "json" if command in ("expand", "fit") else "csv"


def _experiment_spec(args: argparse.Namespace) -> ExperimentSpec:
    params = {k: v for k, v in vars(args).items() if k not in _NON_CONTENT_ARGS}
    return ExperimentSpec(
        command=args.command,
        params=params,
        seed=args.seed,
        out=args.out,
        format=args.format,
    )


def _output_path(args: argparse.Namespace) -> Path:
    if args.out:
        return Path(args.out)
    return Path(config.ARTIFACT_DIR) / f"{args.command}.{args.format}"


def _write_rows(
    args: argparse.Namespace,
    spec: ExperimentSpec,
    rows: List[Dict[str, Any]],
    columns: List[str],
    extra_metadata: Optional[Dict[str, Any]] = None
) -> Path:
    """Write rows as CSV or JSON, with the spec's metadata and the spec file alongside."""
    path = _output_path(args)
    tool = FileTool(base_dir=path.parent)
    metadata = {**spec.metadata(), **(extra_metadata or {})}
    if args.format == "csv":
        tool.save_csv(rows, path.name, metadata=metadata, columns=columns)
    else:
        tool.save_json([{c: row.get(c) for c in columns} for row in rows], path.name, metadata=metadata)
    tool.save_json(spec.dict(), f"{path.name}.spec.json")
    logger.info(f"Wrote {len(rows)} rows to {path}")
    return path


def _write_document(
    args: argparse.Namespace,
    spec: ExperimentSpec,
    document: Dict[str, Any],
    rows: List[Dict[str, Any]]
) -> Path:
    """Write a structured result as JSON, or its coefficient rows as CSV."""
    path = _output_path(args)
    tool = FileTool(base_dir=path.parent)
    if args.format == "json":
        tool.save_json(document, path.name, metadata=spec.metadata())
    else:
        tool.save_csv(rows, path.name, metadata=spec.metadata())
    tool.save_json(spec.dict(), f"{path.name}.spec.json")
    logger.info(f"Wrote {args.command} result to {path}")
    return path


def _fmt(value: Optional[float]) -> Optional[float]:
    return None if value is None else float(value)


# Commands -------------------------------------------------------------------

def cmd_tail(args: argparse.Namespace, spec: ExperimentSpec) -> Path:
    """(u, survival, stderr) rows for the chosen supremum tail."""
    if not args.kind:
        raise ValueError(f"tail needs --kind, one of {TAIL_KINDS}")
    u_values = expand_points(parse_number_list(args.u) if args.u else None, args.u_grid)
    if any(u < 0 for u in u_values):
        raise DomainError("Tail abscissae must be nonnegative")

    if args.kind == "bm":
        tail = supremum.bm_sup_tail()
    elif args.kind == "cauchy-sup":
        tail = supremum.cauchy_sup_tail()
    elif args.kind == "skbm-sup":
        tail = supremum.skbm_sup_tail(parse_alpha(args.alpha), fast_path=not args.no_fast_path)
    else:
        sup_cfg = SupSampleConfig(
            n_steps=args.steps, paths=args.paths, seed=args.seed, block_cells=args.block_cells
        )
        tail = supremum.stable_sup_tail(parse_alpha(args.alpha), sup_cfg, args.workers)

    rows = [
        {"u": float(u), "survival": float(tail(u)), "stderr": float(tail.stderr(u))}
        for u in u_values
    ]
    return _write_rows(
        args, spec, rows, ["u", "survival", "stderr"],
        {"tail": tail.name or args.kind, "method": tail.method.value}
    )


def cmd_density(args: argparse.Namespace, spec: ExperimentSpec) -> Path:
    """(x, density, method, error_estimate) rows for the subordinator at time 1."""
    alpha = parse_alpha(args.alpha)
    x_values = expand_points(parse_number_list(args.x) if args.x else None, args.x_grid)
    cfg = DensityEvalConfig(
        series_terms=args.series_terms,
        small_x_fallback=not args.no_fallback,
    )
    rows = []
    for x in x_values:
        result = subordinator.density_value(alpha, x, cfg)
        rows.append({
            "x": float(x),
            "density": result.value,
            "method": result.method.value,
            "error_estimate": result.error_estimate,
            "low_accuracy": result.low_accuracy,
        })
    return _write_rows(args, spec, rows, ["x", "density", "method", "error_estimate", "low_accuracy"])


def _times(args: argparse.Namespace) -> List[float]:
    if args.t:
        times = parse_number_list(args.t)
        if any(t <= 0 for t in times):
            raise DomainError("Times must be positive")
        return times
    return parse_t_grid(args.t_grid).values()


def cmd_heat(args: argparse.Namespace, spec: ExperimentSpec) -> Path:
    """HeatCurve rows; with --process both, one block per process on the same paths."""
    alpha = parse_alpha(args.alpha)
    interval = parse_interval(args.interval)
    times = _times(args)
    provenance = Provenance(args.provenance)
    kinds = [ProcessKind.KILLED_SUBORDINATE, ProcessKind.SUBORDINATE_KILLED] \
        if args.process == "both" else [ProcessKind(args.process)]

    cfg = McConfig(
        paths=args.paths, n_steps=args.steps, x_strata=args.x_strata, seed=args.seed, block_cells=args.block_cells
    )
    rows: List[Dict[str, Any]] = []
    for kind in kinds:
        curve = heatcontent.heat_curve(
            kind, alpha, interval, times, provenance,
            cfg=cfg if provenance != Provenance.SERIES else None,
            workers=args.workers
        )
        for point in curve.points:
            rows.append({
                "t": point.t,
                "value": point.value,
                "stderr": point.stderr,
                "provenance": provenance.value,
                "bias_diag": _fmt(point.bias_diag),
                "process": kind.value,
            })

    columns = ["t", "value", "stderr", "provenance", "bias_diag"]
    if len(kinds) > 1:
        columns.append("process")
    return _write_rows(args, spec, rows, columns, {
        "alpha": alpha.alpha,
        "interval": f"{interval.a},{interval.b}",
        "process": args.process,
        "provenance": provenance.value,
    })


def _expansion(args: argparse.Namespace):
    alpha = parse_alpha(args.alpha)
    interval = parse_interval(args.interval)
    if args.eigenseries:
        if args.process != ProcessKind.SUBORDINATE_KILLED.value:
            raise DomainError("The eigenvalue series exists for the subordinate-killed process only")
        return asymptotics.series_expansion(alpha, interval)
    resources = asymptotics.ExpansionResources(
        sup_cfg=SupSampleConfig(
            n_steps=args.steps, paths=args.paths, seed=args.seed, block_cells=args.block_cells
        ),
        workers=args.workers,
    )
    return asymptotics.theorem_expansion(ProcessKind(args.process), alpha, interval, resources)


def _expansion_rows(expansion) -> List[Dict[str, Any]]:
    rows = []
    for name in ("c1", "c2", "c2log", "c3"):
        rows.append({
            "coefficient": name,
            "value": getattr(expansion, name),
            "stderr": expansion.c2_stderr if name == "c2" else 0.0,
            "provenance": expansion.constant_provenance.get(name, "closed_form"),
        })
    return rows


def cmd_expand(args: argparse.Namespace, spec: ExperimentSpec) -> Path:
    """Expansion coefficients from the theorems or from the eigenvalue series."""
    expansion = _expansion(args)
    return _write_document(args, spec, expansion.dict(), _expansion_rows(expansion))


def _curve_from_csv(path: str, process: Optional[str]) -> HeatCurve:
    metadata, df = FileTool().load_csv(path)
    if "process" in df.columns:
        if process is None:
            raise DomainError("The curve holds both processes; choose one with --process")
        df = df[df["process"] == process]
        kind = ProcessKind(process)
    else:
        kind = ProcessKind(metadata.get("process", process))
    for key in ("alpha", "interval"):
        if key not in metadata:
            raise DomainError(f"Curve file {path} lacks the '{key}' metadata line")
    bias = df["bias_diag"] if "bias_diag" in df.columns else [None] * len(df)
    points = [
        HeatPoint(t=t, value=v, stderr=s, bias_diag=None if b is None or b != b else b)
        for t, v, s, b in zip(df["t"], df["value"], df["stderr"], bias)
    ]
    return HeatCurve(
        process_kind=kind,
        alpha=parse_alpha(metadata["alpha"]),
        interval=parse_interval(metadata["interval"]),
        points=points,
        provenance=Provenance(df["provenance"].iloc[0]),
    )


def cmd_fit(args: argparse.Namespace, spec: ExperimentSpec) -> Path:
    """Least-squares coefficients of a curve file or of an expansion-generated curve."""
    if not (args.curve or args.synthetic):
        raise ValueError("fit needs --curve <csv> or --synthetic")
    if args.curve:
        curve = _curve_from_csv(args.curve, args.process if args.process_given else None)
    else:
        expansion = _expansion(args)
        curve = asymptotics.expansion_curve(expansion, parse_t_grid(args.t_grid))
    window = parse_window(args.window) if args.window else (min(curve.times()), max(curve.times()))
    result = asymptotics.fit_coefficients(curve, parse_basis(args.basis), window)
    rows = [
        {"coefficient": term, "value": value, "stderr": stderr}
        for term, (value, stderr) in result.coefficients.items()
    ]
    return _write_document(args, spec, result.dict(), rows)


def cmd_validate(args: argparse.Namespace, spec: ExperimentSpec) -> Path:
    """Run the acceptance suite; the exit code reflects the outcome."""
    report_path = args.report or str(Path(config.ARTIFACT_DIR) / f"validate_{args.suite}.json")
    report = run_suite(args.suite, report_path, budgets={"block_cells": args.block_cells})
    run_logger = RunLogger(config.LOG_DIR)
    for row in report["criteria"]:
        run_logger.log_criterion(CriterionResult(**row), args.suite, args.seed)
        status = "pass" if row["passed"] else "FAIL"
        print(f"{row['id']:>4}  {status}  {row['description']}" + (f"  ({row['error']})" if row["error"] else ""))
    args.suite_passed = report["passed"]
    return Path(report_path)


COMMANDS: Dict[str, Callable[[argparse.Namespace, ExperimentSpec], Path]] = {
    "tail": cmd_tail,
    "density": cmd_density,
    "heat": cmd_heat,
    "expand": cmd_expand,
    "fit": cmd_fit,
    "validate": cmd_validate,
}


# Parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", default="1.5", help="Stable index in (0, 2)")
    common.add_argument("--interval", default="0,1", help="Interval endpoints a,b")
    common.add_argument("--seed", type=int, default=config.DEFAULT_SEED, help="Root seed")
    common.add_argument("--paths", type=int, default=100_000, help="Monte Carlo paths")
    common.add_argument("--steps", type=int, default=64, help="Skeleton steps per path")
    common.add_argument(
        "--block-cells", type=int, default=config.BLOCK_CELLS,
        help="Simulated cells per random-stream block; recorded so a replay draws the same numbers"
    )
    common.add_argument("--out", help="Output file (default: artifacts/<command>.<format>)")
    common.add_argument("--format", choices=["csv", "json"], help="Output format")
    common.add_argument("--workers", type=int, default=config.WORKERS, help="Worker processes")

    parser = argparse.ArgumentParser(description="Spectral heat content lab")
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="Set the logging level"
    )
    parser.add_argument("--spec", help="Replay a persisted <out>.spec.json")
    sub = parser.add_subparsers(dest="command")

    tail = sub.add_parser("tail", parents=[common], help="Supremum tail P(M > u)")
    tail.add_argument("--kind", choices=TAIL_KINDS)
    tail.add_argument("--u", help="Comma-separated abscissae")
    tail.add_argument("--u-grid", help="lo,hi,points log grid (lo may be 0)")
    tail.add_argument("--no-fast-path", action="store_true", help="Quadrature even where the arctan law applies")

    density = sub.add_parser("density", parents=[common], help="Subordinator density at time 1")
    density.add_argument("--x", help="Comma-separated points")
    density.add_argument("--x-grid", help="lo,hi,points log grid")
    density.add_argument("--series-terms", type=int, default=60)
    density.add_argument("--no-fallback", action="store_true", help="Fail where the series diverges")

    heat = sub.add_parser("heat", parents=[common], help="Heat content curve")
    heat.add_argument("--process", choices=["ksbm", "skbm", "both"], default="skbm")
    heat.add_argument("--provenance", choices=[p.value for p in Provenance], default="series")
    heat.add_argument("--t", help="Comma-separated times")
    heat.add_argument("--t-grid", default="1e-4,1e-1,10", help="t_min,t_max,points log grid")
    heat.add_argument("--x-strata", type=int, default=64)

    for name, help_text in (("expand", "Small-time expansion coefficients"), ("fit", "Fit expansion coefficients")):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--process", choices=[k.value for k in ProcessKind], default=None)
        source = p.add_mutually_exclusive_group()
        source.add_argument("--theorem", action="store_true", help="Coefficients from the theorems (default)")
        source.add_argument("--eigenseries", action="store_true", help="Exact eigenvalue-series coefficients")

    fit = sub.choices["fit"]
    fit_source = fit.add_mutually_exclusive_group()
    fit_source.add_argument("--curve", help="Heat CSV written by the heat command")
    fit_source.add_argument("--synthetic", action="store_true", help="Fit a curve generated from an expansion")
    fit.add_argument("--basis", default="t^(1/alpha),t", help="Comma-separated basis terms")
    fit.add_argument("--window", help="t_min,t_max of the points used")
    fit.add_argument("--t-grid", default="1e-6,1e-3,12")

    validate = sub.add_parser("validate", parents=[common], help="Run the acceptance suite")
    validate.add_argument("--suite", choices=["fast", "full"], default="fast")
    validate.add_argument("--report", help="Report path (default: artifacts/validate_<suite>.json)")
    return parser


def _resolve_args(parser: argparse.ArgumentParser, argv: Optional[List[str]]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if args.spec:
        stored = FileTool().load_json(args.spec, ExperimentSpec)
        replay = parser.parse_args(["--log-level", args.log_level, stored.command])
        for key, value in stored.params.items():
            setattr(replay, key, value)
        replay.seed = stored.seed
        replay.format = stored.format
        replay.out = (args.out if getattr(args, "out", None) else None) or stored.out
        replay.spec = args.spec
        args = replay
    if not args.command:
        parser.error("a subcommand or --spec is required")
    if args.format is None:
        args.format = _default_format(args.command)
    if args.command in ("expand", "fit"):
        args.process_given = args.process is not None
        args.process = args.process or ProcessKind.SUBORDINATE_KILLED.value
    return args


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the CLI."""
    parser = build_parser()
    args = _resolve_args(parser, argv)

    # Configure logging
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    run_logger = RunLogger(config.LOG_DIR)

    start = time.time()
    output: Optional[Path] = None
    try:
        spec = _experiment_spec(args)
        output = COMMANDS[args.command](args, spec)
        outcome = EXIT_OK
        if args.command == "validate" and not args.suite_passed:
            outcome = EXIT_FAILURE
        run_logger.log_run(
            args.command, spec.params, args.seed, "ok" if outcome == EXIT_OK else "failed",
            start_time=start, output_path=str(output) if output else None,
            metadata={"spec_hash": spec.spec_hash()}
        )
        return outcome
    except (UnsupportedRegimeError, DomainError) as e:
        code, error = EXIT_USAGE, e
    except HeatLabError as e:
        code, error = EXIT_FAILURE, e
    except ValueError as e:
        code, error = EXIT_USAGE, e
    except OSError as e:
        code, error = EXIT_FAILURE, e

    logger.error(f"{args.command} failed: {error}")
    print(f"Error: {error}", file=sys.stderr)
    run_logger.log_run(args.command, None, args.seed, "error", error=error, start_time=start)
    return code


if __name__ == "__main__":
    sys.exit(main())
