"""Command line entry point.

Exit codes: 0 success, 1 usage or input error, 2 infeasible instance or
oracle size guard violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import reference
from .bench.churn import churn_trace
from .bench.generate import ROUTINGS, GenSpec, GenerationError, generate
from .bench.suite import ALGORITHMS, check_algorithms, run_dynamic, run_suite, validate_solution
from .dynamics import EventError, read_trace, write_trace
from .fairshare import InfeasibleAllocation
from .jfsrd import Solution
from .netmodel import InstanceError, dump_instance, load_instance

EXIT_USAGE = 1
EXIT_INFEASIBLE = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def solution_to_dict(solution: Solution, algorithm: str) -> dict:
    flows = []
    for fid in sorted(solution.statuses):
        rate = solution.statuses[fid]
        flows.append({
            "id": fid,
            "controlled": rate is not None,
            "rate": solution.allocation.rates[fid],
            "bottleneck": solution.allocation.bottleneck.get(fid),
        })
    return {
        "algorithm": algorithm,
        "controlled": solution.controlled,
        "unsatisfied": solution.unsatisfied_count,
        "controlled_ids": solution.controlled_ids,
        "unsatisfied_ids": sorted(solution.unsatisfied),
        "flows": flows,
    }


def _add_gen_args(p):
    p.add_argument("--topology", default="claranet",
                   help="claranet, columbus, small, or a .graphml/.json file")
    p.add_argument("--flows", type=int, default=60)
    p.add_argument("--load", type=float, default=0.75)
    p.add_argument("--routing", choices=ROUTINGS, default="shortest")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--demand-low", type=float, default=1.0)
    p.add_argument("--demand-high", type=float, default=10.0)


def _spec(args) -> GenSpec:
    return GenSpec(topology=args.topology, flows=args.flows, load=args.load,
                   demand_low=args.demand_low, demand_high=args.demand_high,
                   routing=args.routing, seed=args.seed)


def _read_instance(args):
    if args.instance:
        data = Path(args.instance).read_bytes() if args.instance != "-" else sys.stdin.buffer.read()
        return load_instance(data)
    return generate(_spec(args))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ratectl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="emit a generated instance as JSON")
    _add_gen_args(p)
    p.add_argument("-o", "--output")

    helps = {"solve": "solve one instance; Solution JSON on stdout",
             "oracle": "exact minimum control set for a small instance"}
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("instance", nargs="?", help="instance JSON file ('-' for stdin)")
        _add_gen_args(p)
        if name == "solve":
            p.add_argument("--algorithm", choices=sorted(ALGORITHMS), default="jfsrd")
        p.add_argument("--delta", type=float, help="oracle rate grid step")

    p = sub.add_parser("suite", help="run algorithms over seeded samples")
    _add_gen_args(p)
    p.add_argument("--algorithms", default="jfsrd,fs-only,baseline,pure-tcp")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-timing", action="store_true", help="write 0 in the millis column")
    p.add_argument("--summary", help="write the JSON summary here instead of stderr")

    p = sub.add_parser("dynamic", help="replay an event trace")
    p.add_argument("instance", nargs="?", help="instance JSON file")
    _add_gen_args(p)
    p.add_argument("--trace", help="JSON Lines event trace; generated when omitted")
    p.add_argument("--events", type=int, default=200, help="length of a generated trace")
    p.add_argument("--cadence", type=int, default=25, help="events between full recomputes (0: never)")
    p.add_argument("--emit-trace", help="also write the replayed trace here")
    return parser


def _cmd_gen(args):
    text = dump_instance(generate(_spec(args)), indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_solve(args, algorithm):
    instance = _read_instance(args)
    if algorithm == "oracle":
        solution = reference.exact_oracle(instance, args.delta)
    else:
        solution = ALGORITHMS[algorithm](instance)
    validate_solution(instance, solution)
    json.dump(solution_to_dict(solution, algorithm), sys.stdout, indent=2)
    sys.stdout.write("\n")


def _cmd_suite(args):
    algorithms = check_algorithms(a for a in args.algorithms.split(",") if a)
    if "oracle" in algorithms:
        probe = generate(_spec(args).for_sample(0))
        guard = (len(probe.flows) > reference.MAX_ORACLE_FLOWS
                 or len(probe.links) > reference.MAX_ORACLE_LINKS)
        if guard:
            raise reference.GuardError("oracle requested beyond its size guard")
    report = run_suite(_spec(args), algorithms, args.samples, args.workers,
                       timing=not args.no_timing)
    sys.stdout.write(report.to_csv())
    summary = report.summary_json() + "\n"
    if args.summary:
        Path(args.summary).write_text(summary)
    else:
        sys.stderr.write(summary)


def _cmd_dynamic(args):
    instance = _read_instance(args)
    if args.trace:
        with open(args.trace) as fh:
            trace = list(read_trace(fh))
    else:
        trace = churn_trace(instance, args.events, args.seed)
    if args.emit_trace:
        Path(args.emit_trace).write_text(write_trace(trace))
    report = run_dynamic(instance, trace, args.cadence or None)
    json.dump(report.to_dict(), sys.stdout, indent=1)
    sys.stdout.write("\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            _cmd_gen(args)
        elif args.command in ("solve", "oracle"):
            _cmd_solve(args, getattr(args, "algorithm", "oracle"))
        elif args.command == "suite":
            _cmd_suite(args)
        else:
            _cmd_dynamic(args)
    except (reference.GuardError, reference.InfeasibleInstance, InfeasibleAllocation) as exc:
        print(f"ratectl: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InstanceError, EventError, GenerationError, ValueError, OSError) as exc:
        print(f"ratectl: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
