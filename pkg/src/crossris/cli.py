"""Command-line entry point: ``crossris run | sweep | trace``.

Exit codes: 0 success, 1 configuration error, 2 runtime failure (including
trials that raised; their rows are still written and listed in failures.csv).
"""
from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from .baselines import SCHEMES
from .config import ConfigError, SystemConfig
from .harness import AXES, Experiment, load_config, run_experiment, write_results

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, config_required: bool) -> None:
    p.add_argument("--config", required=config_required, help="JSON config file")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per axis value")
    p.add_argument("--seed", type=int, help="master seed (overrides system.solver.seed)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--workers", type=int, help="worker processes")
    p.add_argument("--timing", action="store_true", help="fill the ms column (output no longer reproducible)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="crossris", description="two-band RIS relay simulator")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run the experiment described by a config file")
    _common(run, config_required=True)

    sweep = sub.add_parser("sweep", help="sweep one parameter over a linear grid")
    _common(sweep, config_required=False)
    sweep.add_argument("--axis", required=True, choices=AXES)
    sweep.add_argument("--from", dest="start", type=float, required=True)
    sweep.add_argument("--to", dest="stop", type=float, required=True)
    sweep.add_argument("--steps", type=int, required=True)
    sweep.add_argument("--schemes", help="comma-separated scheme ids")

    trace = sub.add_parser("trace", help="write the per-iteration objective of one scheme")
    _common(trace, config_required=False)
    trace.add_argument("--scheme", required=True, choices=SCHEMES)
    return parser


def _experiment(args) -> tuple[SystemConfig, Experiment]:
    if args.config:
        config, exp = load_config(args.config)
    else:
        config, exp = SystemConfig(), Experiment()
    changes = {}
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.out is not None:
        changes["out"] = args.out
    if args.workers is not None:
        changes["workers"] = args.workers
    if args.verb == "sweep":
        if args.steps < 1:
            raise ConfigError("steps", "must be >= 1")
        values = np.linspace(args.start, args.stop, args.steps) if args.steps > 1 else np.array([args.start])
        if args.axis == "N":
            values = np.round(values)
        changes.update(axis=args.axis, values=tuple(sorted(float(v) for v in values)))
        if args.schemes:
            changes["schemes"] = tuple(s.strip() for s in args.schemes.split(","))
    elif args.verb == "trace":
        changes.update(schemes=(args.scheme,), trials=1)
    return config, dataclasses.replace(exp, **changes)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config, exp = _experiment(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        rows, failures = run_experiment(config, exp, seed=args.seed, timing=args.timing)
        if args.verb == "trace":
            paths = [p for p in write_results(rows, exp.out, failures) if p.name.startswith("trace_")]
        else:
            paths = write_results(rows, exp.out, failures)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for p in paths:
        print(p)
    if failures:
        print(f"{len(failures)} scheme run(s) failed; see failures.csv", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
