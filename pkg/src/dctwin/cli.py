"""Command-line entry point.

Subcommands: ``run`` (simulate an episode with a named controller),
``compare`` (reduction table across report files), ``hotspots`` (temperature
grid at an operating point), ``validate`` (config check).  Exit codes:
0 success, 2 validation error, 3 I/O error, 4 usage error.
"""

from __future__ import annotations

import argparse
import sys

from . import harness
from .config import ConfigError, parse_config, validate_config
from .env import EnvError
from .traces import TraceError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_USAGE = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; route through our usage exit code instead.
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="dctwin", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="simulate one episode and write a report")
    run.add_argument("--config", help="config JSON path (defaults apply if omitted)")
    run.add_argument("--weather", required=True, help="weather trace CSV")
    run.add_argument("--ci", required=True, help="carbon intensity trace CSV")
    run.add_argument("--workload", required=True, help="workload trace CSV")
    run.add_argument("--controller", default="fixed",
                     help="fixed | greedy | hillclimb | exhaustive")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--horizon", type=int, default=None,
                     help="episode steps (default: full overlapping window)")
    run.add_argument("--out", default=None, help="report path (default: stdout)")
    run.add_argument("--format", default="json", choices=("json", "csv"))
    run.add_argument("--per-step", action="store_true",
                     help="also write a per-step series CSV next to the report")

    cmp_p = sub.add_parser("compare", help="reduction table across report files")
    cmp_p.add_argument("reports", nargs="+", help="report JSON files (>= 2)")
    cmp_p.add_argument("--reference", type=int, default=0,
                       help="index of the reference report (default 0)")
    cmp_p.add_argument("--out", default=None)
    cmp_p.add_argument("--format", default="csv", choices=("json", "csv"))

    hot = sub.add_parser("hotspots", help="temperature grid at one operating point")
    hot.add_argument("--config", help="config JSON path")
    hot.add_argument("--setpoint", type=float, default=None,
                     help="supply setpoint degC (default: config setpoint_ref)")
    hot.add_argument("--utilization", type=float, default=0.5)
    hot.add_argument("--format", default="json", choices=("json", "csv"))
    hot.add_argument("--out", required=True)

    val = sub.add_parser("validate", help="parse and validate a config file")
    val.add_argument("--config", required=True)
    return parser


def _cmd_run(args) -> int:
    report, steps = harness.run_episode(
        args.config, args.weather, args.ci, args.workload,
        controller_name=args.controller, seed=args.seed, horizon=args.horizon,
        collect_steps=args.per_step,
    )
    if args.out is None:
        sys.stdout.write(harness.report_to_json(report))
    else:
        harness.emit_report(report, args.format, args.out, steps=steps)
    return EXIT_OK


def _cmd_compare(args) -> int:
    if len(args.reports) < 2:
        raise UsageError("compare needs at least 2 report files")
    reports = []
    for path in args.reports:
        with open(path) as fh:
            reports.append(harness.report_from_json(fh.read()))
    rows = harness.compare(reports, args.reference)
    text = (harness.comparison_to_json(rows) if args.format == "json"
            else harness.comparison_to_csv(rows))
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return EXIT_OK


def _cmd_hotspots(args) -> int:
    harness.emit_hotspots(args.config, args.setpoint, args.utilization,
                          args.format, args.out)
    return EXIT_OK


def _cmd_validate(args) -> int:
    with open(args.config) as fh:
        cfg = parse_config(fh.read())
    report = validate_config(cfg)
    for issue in report.issues:
        print(f"{issue.severity}: {issue.path}: {issue.message}")
    if report.ok:
        print("ok")
        return EXIT_OK
    return EXIT_VALIDATION


_COMMANDS = {
    "run": _cmd_run,
    "compare": _cmd_compare,
    "hotspots": _cmd_hotspots,
    "validate": _cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # unknown controller / bad format names are usage problems; model and
        # file-content problems are validation failures
        if isinstance(exc, (ConfigError, TraceError, EnvError)):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
