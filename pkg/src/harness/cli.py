"""
rvsim command line.

    rvsim run prog.bin --fetch buffer --bpred gshare --log prog.log
    rvsim run prog.bin --engine ref --log ref.log
    rvsim diff prog.log ref.log
    rvsim bench suite/ --fetch dualpc,buffer --bpred gshare,none --stats bench.csv
    rvsim gen fetchmiss --size 1000 --out build/fetchmiss.bin

Exit codes: 0 success, 1 program fault, 2 diff mismatch, 3 usage error.
"""
import argparse
import csv
import json
import logging
import sys
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from src.errors import ConfigError, ErrorReport, ImageError, LogFormatError, SimError, report_error
from src.harness.bench import discover_programs, run_bench
from src.harness.config import BenchMatrix, RunConfig, build_model, env_defaults
from src.harness.diff import diff_files
from src.harness.gen import GENERATORS, generate, write_program
from src.harness.report import render_report
from src.harness.runner import execute
from src.memsys.image import load_image
from src.monitoring.monitor import BenchMonitor
from src.pipeline.stats import CSV_HEADER
from src.refmodel.commit_log import write_log

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger("rvsim.cli")

EXIT_OK = 0
EXIT_FAULT = 1
EXIT_MISMATCH = 2
EXIT_USAGE = 3

USAGE_ERRORS = (ConfigError, ImageError, LogFormatError)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_list(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def _add_machine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--imem-kb", dest="imem_kb", type=int, help="Instruction memory size in KB (power of two)")
    p.add_argument("--dmem-kb", dest="dmem_kb", type=int, help="Data memory size in KB (power of two)")
    p.add_argument("--max-cycles", dest="max_cycles", type=int, help="Cycle (or step) limit")
    p.add_argument("--sp-init", dest="sp_init", action="store_true", default=None,
                   help="Start with sp at the top of data memory")


def build_parser(defaults: Optional[Dict[str, Any]] = None) -> argparse.ArgumentParser:
    defaults = defaults or {}
    parser = _Parser(
        prog="rvsim",
        description="Cycle-accurate RV32IC pipeline simulator",
        formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="Run one program")
    run.add_argument("program", help="Flat binary or hex-words image")
    run.add_argument("--format", choices=["bin", "hex"], help="Image format (default: by extension)")
    run.add_argument("--engine", choices=["pipeline", "ref"], help="Execution engine")
    run.add_argument("--fetch", help="Fetch unit: dualpc, buffer or naive")
    run.add_argument("--bpred", help="Branch predictor: gshare, bimodal or none")
    _add_machine_flags(run)
    run.add_argument("--log", help="Write the commit log to this file")
    run.add_argument("--stats", help="Write the stats CSV (header and row) to this file, '-' for stdout")
    run.add_argument("--trace", action="store_true", help="Per-cycle pipeline trace on the rvsim.trace logger")
    run.set_defaults(**{k: v for k, v in defaults.items() if k in ("engine", "fetch", "bpred", "imem_kb",
                                                                     "dmem_kb", "max_cycles", "sp_init")})

    diff = sub.add_parser("diff", help="Compare two commit logs")
    diff.add_argument("log_a")
    diff.add_argument("log_b")

    bench = sub.add_parser("bench", help="Run a program suite across fetch/bpred configurations")
    bench.add_argument("suite", help="Directory of .bin/.hex programs")
    bench.add_argument("--fetch", type=_csv_list, help="Comma-separated fetch units")
    bench.add_argument("--bpred", type=_csv_list, help="Comma-separated predictors")
    bench.add_argument("--matrix", help="YAML file with fetch: and bpred: lists")
    _add_machine_flags(bench)
    bench.add_argument("--jobs", type=int, default=1, help="Concurrent cells")
    bench.add_argument("--stats", help="Write the bench CSV to this file, '-' for stdout")
    bench.add_argument("--metrics-out", dest="metrics_out", help="Write prometheus textfile metrics")
    bench.add_argument("--template", help="Custom Jinja2 template for the report")
    bench.set_defaults(**{k: v for k, v in defaults.items() if k in ("imem_kb", "dmem_kb", "max_cycles",
                                                                       "sp_init", "jobs")})
    if "fetch" in defaults:
        bench.set_defaults(fetch=_csv_list(defaults["fetch"]))
    if "bpred" in defaults:
        bench.set_defaults(bpred=_csv_list(defaults["bpred"]))

    gen = sub.add_parser("gen", help="Generate a stress microbenchmark")
    gen.add_argument("kind", choices=sorted(GENERATORS))
    gen.add_argument("--seed", type=int, default=1, help="Random seed")
    gen.add_argument("--size", type=int, help="Iterations, or blocks for rand")
    gen.add_argument("--out", help="Output image path (default: <kind>.<format>)")
    gen.add_argument("--format", choices=["bin", "hex"], default="bin")
    gen.set_defaults(**{k: v for k, v in defaults.items() if k == "seed"})
    return parser


def _given(args: argparse.Namespace, *keys: str) -> Dict[str, Any]:
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def _status_line(payload: Dict[str, Any]) -> None:
    print(" ".join(f"{k}={v}" for k, v in payload.items()), file=sys.stderr)


def cmd_run(args: argparse.Namespace) -> int:
    config = build_model(RunConfig, {
        "program": args.program,
        **_given(args, "format", "engine", "fetch", "bpred", "imem_kb", "dmem_kb", "max_cycles",
                 "log", "stats", "sp_init"),
        "trace": args.trace,
    })
    if config.trace:
        logging.getLogger("rvsim.trace").setLevel(logging.DEBUG)
    image = load_image(config.program, config.format)
    outcome = execute(image, config.engine, config.core_config(), console=getattr(sys.stdout, "buffer", None))
    sys.stdout.flush()

    if config.log:
        write_log(outcome.commits, config.log)
    if config.stats:
        row = outcome.stats.csv_row(config.label, image.source)
        if config.stats == "-":
            writer = csv.writer(sys.stdout, lineterminator="\n")
            writer.writerows([CSV_HEADER, row])
        else:
            with open(config.stats, "w", newline="") as f:
                csv.writer(f, lineterminator="\n").writerows([CSV_HEADER, row])

    status = outcome.status
    line = {
        "status": status.status.value,
        "code": status.error.error_code if status.error else (status.code if status.code is not None else 0),
        "cycles": outcome.stats.cycles,
        "instructions": outcome.stats.instructions,
    }
    if not status.ok:
        line["message"] = json.dumps(status.reason)
    _status_line(line)
    return status.exit_code


def cmd_diff(args: argparse.Namespace) -> int:
    for path in (args.log_a, args.log_b):
        try:
            open(path).close()
        except OSError:
            raise ConfigError(f"file not found: {path}", "E_FILE_NOT_FOUND", {"path": path})
    result = diff_files(args.log_a, args.log_b)
    print(result.report(args.log_a, args.log_b))
    return EXIT_OK if result.identical else EXIT_MISMATCH


def cmd_bench(args: argparse.Namespace) -> int:
    overrides = _given(args, "fetch", "bpred", "imem_kb", "dmem_kb", "max_cycles", "sp_init")
    if args.matrix:
        matrix = BenchMatrix.from_yaml(args.matrix, **overrides)
    else:
        matrix = build_model(BenchMatrix, overrides)
    programs = discover_programs(args.suite)
    monitor = BenchMonitor()
    report = run_bench(programs, matrix, jobs=args.jobs, monitor=monitor)

    if args.stats == "-":
        sys.stdout.write(report.csv_text())
    elif args.stats:
        report.write_csv(args.stats)
    sys.stdout.write(render_report(report, args.template))
    if args.metrics_out:
        monitor.write_textfile(args.metrics_out)
    logger.info(f"bench summary: {json.dumps(monitor.summary())}")
    return EXIT_OK if report.ok else EXIT_FAULT


def cmd_gen(args: argparse.Namespace) -> int:
    program = generate(args.kind, seed=args.seed, size=args.size)
    out = args.out or f"{args.kind}.{args.format}"
    image_path, manifest_path = write_program(program, out, args.format)
    print(f"{image_path} {manifest_path}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "diff": cmd_diff, "bench": cmd_bench, "gen": cmd_gen}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the rvsim command line."""
    try:
        defaults = env_defaults()
    except ConfigError as e:
        _status_line({"status": "usage", "code": e.error_code, "message": json.dumps(e.message)})
        return EXIT_USAGE
    parser = build_parser(defaults)
    args = parser.parse_args(argv)

    if args.debug:
        logging.getLogger("rvsim").setLevel(logging.DEBUG)

    try:
        return COMMANDS[args.command](args)
    except USAGE_ERRORS as e:
        report_error(ErrorReport(e, args.command, getattr(args, "program", "") or ""), logger)
        _status_line({"status": "usage", "code": e.error_code, "message": json.dumps(e.message)})
        return EXIT_USAGE
    except ValidationError as e:
        _status_line({"status": "usage", "code": "E_CONFIG", "message": json.dumps(str(e))})
        return EXIT_USAGE
    except SimError as e:
        report_error(ErrorReport(e, args.command, getattr(args, "program", "") or ""), logger)
        _status_line({"status": "error", "code": e.error_code, "message": json.dumps(e.message)})
        return EXIT_FAULT


if __name__ == "__main__":
    sys.exit(main())
