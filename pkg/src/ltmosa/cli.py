"""Command line entry point: ``run`` an experiment grid or ``report`` on a bundle."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .api_model import ServiceDescriptionError
from .experiment import ExperimentPlan, PartialResults, render_report, resolve_scenario, run_experiment
from .harness.simulated import ScenarioError
from .search import ConfigError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARTIAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ltmosa", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an (algorithm x seed) grid against one SUT")
    run.add_argument("--scenario", required=True,
                     help="scenario JSON, live-adapter config JSON, or a built-in scenario name")
    run.add_argument("--algorithms", default="lt-mosa,mosa,mio", help="comma-separated subset of mio,mosa,lt-mosa")
    run.add_argument("--reps", type=int, default=20, help="repetitions per algorithm")
    run.add_argument("--budget-evals", type=int, default=20_000, help="test evaluations per run")
    run.add_argument("--seed", type=int, default=7, help="seed of the first repetition")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--jobs", type=int, default=1, help="runs executed in parallel")
    run.add_argument("--dump-linkage-tree", action="store_true", help="store every trained linkage tree")

    report = sub.add_parser("report", help="print tables for a finished bundle")
    report.add_argument("bundle")
    return parser


def _cmd_run(args) -> int:
    plan = ExperimentPlan(
        scenario=resolve_scenario(args.scenario),
        out=args.out,
        algorithms=tuple(a.strip() for a in args.algorithms.split(",") if a.strip()),
        repetitions=args.reps,
        budget_evaluations=args.budget_evals,
        seed_base=args.seed,
        jobs=args.jobs,
        dump_linkage_tree=args.dump_linkage_tree,
    )
    run_experiment(plan)
    print(render_report(args.out), end="")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            return _cmd_run(args)
        print(render_report(args.bundle), end="")
        return EXIT_OK
    except (ConfigError, ScenarioError, ServiceDescriptionError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PartialResults as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
