"""Command line entry point: ``swarm-alloc {generate,run,report,scale}``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .baselines import DEFAULT_ENUMERATION_BUDGET
from .domain import load_scenario, save_scenario
from .harness import parse_methods, read_records, run_experiment, run_scale_suite, scale_specs, scenario_label, write_records
from .scenario import ScenarioSpec, generate_scenario
from .scoring import DEFAULT_BOUNDS, DEFAULT_WEIGHTS, load_config
from .stats import report


def _add_allocator_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file overriding weights and normalisation bounds")
    p.add_argument("--max-rounds", type=int, default=None, help="CBBA round cap (default |MS|*|RA| + 1)")
    p.add_argument("--enumeration-budget", type=int, default=DEFAULT_ENUMERATION_BUDGET,
                   help="candidate ceiling for the exhaustive search")
    p.add_argument("--no-timing", action="store_true",
                   help="leave elapsed_seconds empty so output is byte-reproducible")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swarm-alloc", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="draw a random scenario")
    gen.add_argument("--apps", type=int, required=True)
    gen.add_argument("--caps", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--cloud-fraction", type=float, default=0.5)
    gen.add_argument("-o", "--output", required=True)

    run = sub.add_parser("run", help="allocate a scenario's applications in sequence")
    run.add_argument("--scenario", required=True)
    run.add_argument("--methods", default="centralised,first-fit,cbba")
    run.add_argument("--repetitions", type=int, default=5)
    run.add_argument("--repeat-capacities", action="store_true", help="redraw capacities for each repetition")
    run.add_argument("--fixed-applications", action="store_true",
                     help="reuse the scenario's applications in every repetition")
    run.add_argument("--time-budget", type=float, default=None, help="per-application seconds before a method is dropped")
    run.add_argument("--trace", help="write every CBBA message as JSON lines to this file")
    run.add_argument("--out", required=True)
    _add_allocator_options(run)

    rep = sub.add_parser("report", help="summarise records into plot-ready tables and KS tests")
    rep.add_argument("--records", nargs="+", required=True,
                     help="one or more records CSVs; each file stem becomes a scenario label")
    rep.add_argument("--out", required=True)

    scale = sub.add_parser("scale", help="run the five large-scale scenario shapes")
    scale.add_argument("--factor", type=float, default=1.0, help="multiply application and capacity counts")
    scale.add_argument("--seed", type=int, default=0)
    scale.add_argument("--methods", default="first-fit,cbba")
    scale.add_argument("--repetitions", type=int, default=5)
    scale.add_argument("--cloud-fraction", type=float, default=0.5)
    scale.add_argument("--time-budget", type=float, default=60.0)
    scale.add_argument("--out", required=True, help="directory for one records CSV per scenario")
    _add_allocator_options(scale)
    return parser


def _weights_and_bounds(args):
    if args.config:
        return load_config(args.config)
    return DEFAULT_WEIGHTS, DEFAULT_BOUNDS


def cmd_generate(args) -> int:
    spec = ScenarioSpec(args.apps, args.caps, args.seed, args.cloud_fraction)
    save_scenario(generate_scenario(spec), args.output)
    return 0


def cmd_run(args) -> int:
    w, nb = _weights_and_bounds(args)
    scenario = load_scenario(args.scenario)
    options = dict(
        redraw_applications=not args.fixed_applications,
        redraw_capacities=args.repeat_capacities,
        max_rounds=args.max_rounds,
        enumeration_budget=args.enumeration_budget,
        timing=not args.no_timing,
        time_budget=args.time_budget,
    )
    methods = parse_methods(args.methods)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as trace:
            records = run_experiment(scenario, methods, w, nb, args.repetitions, trace=trace, **options)
    else:
        records = run_experiment(scenario, methods, w, nb, args.repetitions, **options)
    write_records(records, args.out)
    return 0


def cmd_report(args) -> int:
    records = []
    for path in args.records:
        label = Path(path).stem if len(args.records) > 1 else ""
        records.extend(read_records(path, label))
    report(records, args.out)
    return 0


def cmd_scale(args) -> int:
    w, nb = _weights_and_bounds(args)
    specs = scale_specs(args.factor, args.seed, args.repetitions, args.cloud_fraction)
    records = run_scale_suite(specs, parse_methods(args.methods), args.time_budget, w, nb,
                              max_rounds=args.max_rounds, enumeration_budget=args.enumeration_budget,
                              timing=not args.no_timing)
    os.makedirs(args.out, exist_ok=True)
    for i, spec in enumerate(specs, 1):
        label = scenario_label(spec, i)
        write_records([r for r in records if r.scenario == label], os.path.join(args.out, f"{label}.csv"))
    return 0


COMMANDS = {"generate": cmd_generate, "run": cmd_run, "report": cmd_report, "scale": cmd_scale}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (OSError, ValueError) as exc:
        print(f"swarm-alloc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
