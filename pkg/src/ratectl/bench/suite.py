"""Experiment orchestration: static algorithm suites and dynamic replays."""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from statistics import fmean
from typing import Callable, Iterable, Optional, Sequence

from .. import jfsrd, reference
from ..dynamics import DynamicState, Event, apply_event, periodic_recompute
from ..fairshare import check_maxmin, unsatisfied_flows
from ..jfsrd import Solution
from ..netmodel import EPS, Instance
from .generate import GenSpec, generate

CSV_COLUMNS = ("sample", "algorithm", "controlled", "unsatisfied", "millis")


def _fs_only(instance: Instance) -> Solution:
    return jfsrd.selection_solution(instance, jfsrd.flow_selection(instance))


ALGORITHMS: dict[str, Callable[[Instance], Solution]] = {
    "jfsrd": jfsrd.solve,
    "fs-only": _fs_only,
    "baseline": reference.baseline,
    "pure-tcp": reference.pure_tcp,
    "oracle": reference.exact_oracle,
}


class SolutionError(AssertionError):
    pass


def validate_solution(instance: Instance, solution: Solution) -> None:
    """Raise :class:`SolutionError` unless ``solution`` is internally sound."""
    fm = instance.flow_map
    if set(solution.statuses) != set(fm):
        raise SolutionError("statuses do not cover exactly the instance flows")
    for fid, rate in solution.statuses.items():
        if rate is not None and rate < fm[fid].demand - EPS:
            raise SolutionError(f"flow {fid} controlled below its demand")
    if not check_maxmin(instance, solution.statuses, solution.allocation):
        raise SolutionError("allocation is not max-min fair")
    if unsatisfied_flows(instance, solution.allocation) != set(solution.unsatisfied):
        raise SolutionError("unsatisfied set does not match the allocation")


@dataclass
class Row:
    sample: int
    algorithm: str
    controlled: int
    unsatisfied: int
    millis: float
    flows: int = 0


@dataclass
class RunReport:
    rows: list[Row] = field(default_factory=list)

    def algorithms(self) -> list[str]:
        seen: list[str] = []
        for r in self.rows:
            if r.algorithm not in seen:
                seen.append(r.algorithm)
        return seen

    def summary(self) -> dict:
        out = {}
        for name in self.algorithms():
            rows = [r for r in self.rows if r.algorithm == name]
            out[name] = {
                "samples": len(rows),
                "mean_controlled": fmean(r.controlled for r in rows),
                "mean_unsatisfied": fmean(r.unsatisfied for r in rows),
                "mean_unsatisfied_fraction": fmean(
                    r.unsatisfied / r.flows if r.flows else 0.0 for r in rows
                ),
                "mean_millis": fmean(r.millis for r in rows),
            }
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow([r.sample, r.algorithm, r.controlled, r.unsatisfied, f"{r.millis:.3f}"])
        return buf.getvalue()

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


def evaluate(instance: Instance, algorithms: Sequence[str], sample: int = 0,
             timing: bool = True) -> list[Row]:
    rows = []
    for name in algorithms:
        start = time.perf_counter()
        sol = ALGORITHMS[name](instance)
        millis = (time.perf_counter() - start) * 1e3 if timing else 0.0
        validate_solution(instance, sol)
        rows.append(Row(sample, name, sol.controlled, sol.unsatisfied_count, millis,
                        len(instance.flows)))
    return rows


def _sample_rows(args) -> list[Row]:
    spec, algorithms, index, timing = args
    return evaluate(generate(spec.for_sample(index)), algorithms, index, timing)


def check_algorithms(algorithms: Iterable[str]) -> list[str]:
    names = list(algorithms)
    unknown = [a for a in names if a not in ALGORITHMS]
    if unknown:
        raise ValueError(f"unknown algorithm(s) {unknown}; choose from {sorted(ALGORITHMS)}")
    return names


def run_suite(spec: GenSpec, algorithms: Sequence[str], samples: int,
              workers: int = 1, timing: bool = True) -> RunReport:
    """Generate ``samples`` seeded instances and run each algorithm on them."""
    algorithms = check_algorithms(algorithms)
    jobs = [(spec, algorithms, i, timing) for i in range(samples)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            chunks = list(pool.map(_sample_rows, jobs))
    else:
        chunks = [_sample_rows(job) for job in jobs]
    return RunReport([row for chunk in chunks for row in chunk])


# -- dynamic replay -----------------------------------------------------------

@dataclass
class EventRow:
    t: int
    kind: str
    action: str
    controlled: int
    unsatisfied: int
    flows: int


@dataclass
class DynamicReport:
    initial_controlled: int
    initial_unsatisfied: int
    events: list[EventRow] = field(default_factory=list)
    # (event index, controlled before, controlled after) per periodic recompute
    recomputes: list[tuple[int, int, int]] = field(default_factory=list)

    @property
    def final_controlled(self) -> int:
        return self.events[-1].controlled if self.events else self.initial_controlled

    @property
    def rd_runs(self) -> int:
        return sum(1 for e in self.events if e.action == "rd")

    def to_dict(self) -> dict:
        return {
            "initial": {"controlled": self.initial_controlled,
                        "unsatisfied": self.initial_unsatisfied},
            "events": [asdict(e) for e in self.events],
            "recomputes": [
                {"t": t, "incremental": before, "recomputed": after}
                for t, before, after in self.recomputes
            ],
            "final_controlled": self.final_controlled,
            "rd_runs": self.rd_runs,
        }


_KIND = {"Join": "join", "Leave": "leave", "DemandIncrease": "inc", "DemandDecrease": "dec"}


def run_dynamic(instance: Instance, trace: Iterable[Event],
                cadence: Optional[int] = 25) -> DynamicReport:
    """Replay ``trace`` through the dynamic engine, recomputing every ``cadence`` events."""
    state = DynamicState.start(instance)
    report = DynamicReport(state.solution.controlled, state.solution.unsatisfied_count)
    for event in trace:
        state, action = apply_event(state, event)
        if state.bootstrapped and state.solution.unsatisfied:
            raise SolutionError(f"event {event.t} left unsatisfied flows")
        if cadence and state.bootstrapped and state.events_since_recompute >= cadence:
            before = state.solution.controlled
            state = periodic_recompute(state)
            report.recomputes.append((event.t, before, state.solution.controlled))
        report.events.append(EventRow(event.t, _KIND[type(event).__name__], action,
                                      state.solution.controlled,
                                      state.solution.unsatisfied_count,
                                      len(state.instance.flows)))
    return report
