"""
Command-line interface: `nmfbench run | list-inits | serve`.

Exit codes: 0 when every grid cell succeeded, 2 when some cells failed,
1 on usage errors (bad options, unreadable data, invalid rank).
"""

import argparse
import logging
import sys
from typing import Dict, List, Optional

from dotenv import load_dotenv

from nmfbench.bench import run_benchmark, summarize
from nmfbench.config import get_settings, load_run_file
from nmfbench.errors import NmfError
from nmfbench.initializers import REGISTRY
from nmfbench.output import emit_csv, emit_svg_plot
from nmfbench.schemas import DEFAULT_TOL, RunSpec, SolverConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARTIAL = 2

# Run options that may also come from a run file, by long option name
RUN_OPTIONS = ("data", "rank", "init", "solver", "seeds", "master-seed", "max-iter", "tol",
               "train-count", "out", "plot", "summary", "jobs", "param", "timing",
               "linear-y", "store")


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="nmfbench",
                            description="Benchmark NMF initializers and solvers.")
    parser.add_argument("--log-level", help="Log level (default: NMFBENCH_LOG_LEVEL or WARNING)")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    run = commands.add_parser("run", help="Run an initializer x solver x seed grid")
    run.add_argument("--config", help="Run file of key=value lines; options override it")
    run.add_argument("--data", help="csv:PATH, pgm:DIR or synth:m,n,r,density,noise")
    run.add_argument("--rank", help="Factorization rank, or 'auto'")
    run.add_argument("--init", action="append",
                     help="Initializer name(s), comma-separated or repeated")
    run.add_argument("--solver", choices=["sed-mu", "kl-mu", "anls"])
    run.add_argument("--seeds", type=int, help="Replicates per randomized initializer")
    run.add_argument("--master-seed", type=int)
    run.add_argument("--max-iter", type=int)
    run.add_argument("--tol", type=float, help=f"Stopping tolerance (default {DEFAULT_TOL:g})")
    run.add_argument("--train-count", type=int, help="Number of training columns")
    run.add_argument("--out", help="CSV file for all records")
    run.add_argument("--plot", help="SVG file for the error curves")
    run.add_argument("--linear-y", action="store_true", default=None,
                     help="Plot on a linear instead of a log scale")
    run.add_argument("--summary", help="CSV file for seed-averaged records")
    run.add_argument("--jobs", type=int, help="Concurrent cells (default: NMFBENCH_JOBS or 1)")
    run.add_argument("--param", action="append", metavar="KEY=VALUE",
                     help="Initializer parameter, repeatable")
    run.add_argument("--timing", action="store_true", default=None,
                     help="Record wall-clock milliseconds")
    run.add_argument("--store", action="store_true", default=None,
                     help="Also save the run in the results store")

    commands.add_parser("list-inits", help="List registered initializers")

    serve = commands.add_parser("serve", help="Start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser

# ===== RUN OPTIONS =====

def _split_list(values: List[str]) -> List[str]:
    return [item.strip() for value in values for item in value.split(",") if item.strip()]


def _parse_params(values: List[str]) -> Dict[str, str]:
    params = {}
    for item in _split_list(values):
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"parameter {item!r} must look like KEY=VALUE")
        params[key.strip()] = value.strip()
    return params


def _truthy(value) -> bool:
    if isinstance(value, bool):
        return value
    return str(value).strip().lower() in ("1", "true", "yes", "on")


def merge_options(args: argparse.Namespace) -> Dict[str, object]:
    """
    Combine run-file values with explicit options; explicit options win.

    List-valued options (init, param) from the file are comma-separated.
    """
    options: Dict[str, object] = {}
    if args.config:
        for key, value in load_run_file(args.config).items():
            if key not in RUN_OPTIONS:
                raise UsageError(f"unknown key {key!r} in run file {args.config}")
            options[key] = [value] if key in ("init", "param") else value

    for key in RUN_OPTIONS:
        value = getattr(args, key.replace("-", "_"))
        if value is None:
            continue
        if key == "param" and "param" in options:
            value = options["param"] + value
        options[key] = value
    return options


def build_spec(options: Dict[str, object]) -> RunSpec:
    """
    Validate merged options into a RunSpec.

    Raises:
        UsageError: If a required option is missing or a value is invalid
    """
    for required in ("data", "out"):
        if not options.get(required):
            raise UsageError(f"--{required} is required")

    rank = str(options.get("rank", "4")).strip()
    solver = {"kind": options.get("solver", "sed-mu")}
    if "max-iter" in options:
        solver["max_iter"] = options["max-iter"]
    if "tol" in options:
        solver["tol"] = options["tol"]

    fields = {
        "data": options["data"],
        "rank": rank,
        "inits": _split_list(options.get("init", ["random"])),
        "params": _parse_params(options.get("param", [])),
        "solver": SolverConfig(**solver),
        "timing": _truthy(options.get("timing", False)),
        "jobs": options.get("jobs", get_settings().jobs),
    }
    for key in ("seeds", "master-seed", "train-count"):
        if key in options:
            fields[key.replace("-", "_")] = options[key]
    return RunSpec(**fields)

# ===== COMMANDS =====

def command_run(args: argparse.Namespace) -> int:
    try:
        options = merge_options(args)
        spec = build_spec(options)
        result = run_benchmark(spec)
    except (UsageError, NmfError, ValueError) as e:
        # pydantic's ValidationError is a ValueError
        print(f"nmfbench: error: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        emit_csv(result.records, options["out"])
        if options.get("summary"):
            emit_csv(summarize(result.records), options["summary"])
        if options.get("plot"):
            emit_svg_plot(result.records, options["plot"],
                          log_y=not _truthy(options.get("linear-y", False)),
                          title=result.dataset)
    except NmfError as e:
        print(f"nmfbench: error: {e}", file=sys.stderr)
        return EXIT_USAGE

    if _truthy(options.get("store", False)):
        store_result(spec, result)

    for failure in result.failures:
        print(f"failed cell {failure.init}/{failure.solver}/{failure.seed}: {failure.message}",
              file=sys.stderr)
    return EXIT_OK if result.ok else EXIT_PARTIAL


def store_result(spec: RunSpec, result) -> int:
    """Persist a finished run in the results store and return its id."""
    from nmfbench import database, models

    database.init_db()
    db = database.SessionLocal()
    try:
        run = models.BenchmarkRun.from_result(spec, result)
        db.add(run)
        db.commit()
        logger.info("Stored run %d", run.id)
        return run.id
    finally:
        db.close()


def command_list_inits(args: argparse.Namespace) -> int:
    for name in sorted(REGISTRY):
        entry = REGISTRY[name]
        kind = "randomized" if entry.randomized else "deterministic"
        print(f"{name:<12} {entry.family:<11} {kind}")
    return EXIT_OK


def command_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("nmfbench.main:app", host=args.host, port=args.port)
    return EXIT_OK


COMMANDS = {
    "run": command_run,
    "list-inits": command_list_inits,
    "serve": command_serve,
}


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        settings = get_settings()
    except ValueError as e:
        print(f"nmfbench: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    level = (args.log_level or settings.log_level).upper()
    if not isinstance(logging.getLevelName(level), int):
        parser.error(f"unknown log level {level!r}")
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    return COMMANDS[args.command](args)
