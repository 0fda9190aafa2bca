"""Local updates of a solution while flows join, leave or change demand.

The engine stays passive until plain TCP first fails a demand, then runs a
full solve. Afterwards each event is handled locally by marking flows
temporarily controlled and re-running rate determination against the flow
selection recorded at the last full solve. Whenever a local update cannot
restore feasibility the engine falls back to a full solve, so a
bootstrapped state never carries unsatisfied flows.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Optional, Union

from .fairshare import InfeasibleAllocation
from .jfsrd import SelectionResult, Solution, make_solution, rate_determination, solve_detailed
from .netmodel import EPS, Flow, Instance, InstanceError, Statuses


class EventError(ValueError):
    pass


@dataclass(frozen=True)
class Join:
    flow: Flow
    t: int = 0


@dataclass(frozen=True)
class Leave:
    flow_id: int
    t: int = 0


@dataclass(frozen=True)
class DemandIncrease:
    flow_id: int
    demand: float
    t: int = 0


@dataclass(frozen=True)
class DemandDecrease:
    flow_id: int
    demand: float
    t: int = 0


Event = Union[Join, Leave, DemandIncrease, DemandDecrease]

# Actions reported by apply_event.
NONE = "none"
BOOTSTRAP = "bootstrap"
RD = "rd"
RECOMPUTE = "recompute"


@dataclass(frozen=True)
class DynamicState:
    instance: Instance
    solution: Solution
    bootstrapped: bool = False
    events_since_recompute: int = 0
    # Flow selection of the last full solve, extended with flows marked
    # temporarily controlled since then.
    selection: SelectionResult = field(default_factory=lambda: SelectionResult({}))
    temporary: frozenset[int] = frozenset()

    @classmethod
    def start(cls, instance: Instance) -> "DynamicState":
        sol = make_solution(instance, {})
        state = cls(instance, sol)
        if sol.unsatisfied:
            state = _full_solve(state, instance)
        return state


def _full_solve(state: DynamicState, instance: Instance) -> DynamicState:
    selection, sol = solve_detailed(instance)
    return replace(
        state,
        instance=instance,
        solution=sol,
        bootstrapped=True,
        events_since_recompute=0,
        selection=selection,
        temporary=frozenset(),
    )


def _check_headroom(instance: Instance, flow: Flow):
    for lid in flow.path:
        if lid not in instance.topology.link_map:
            raise EventError(f"unknown link {lid} in flow {flow.id}")
        if instance.demand_sum(lid) > instance.capacity(lid) + EPS:
            raise EventError(f"demand of flow {flow.id} overloads link {lid}")


def _updated_instance(instance: Instance, event: Event) -> Instance:
    fm = instance.flow_map
    if isinstance(event, Join):
        if event.flow.id in fm:
            raise EventError(f"flow {event.flow.id} already present")
        if not event.flow.demand > 0 or not event.flow.priority > 0:
            raise EventError(f"flow {event.flow.id} needs positive demand and priority")
        new = instance.with_flows(instance.flows + (event.flow,))
        _check_flow_path(new, event.flow)
        _check_headroom(new, event.flow)
        return new
    if event.flow_id not in fm:
        raise EventError(f"unknown flow {event.flow_id}")
    if isinstance(event, Leave):
        return instance.with_flows(f for f in instance.flows if f.id != event.flow_id)
    old = fm[event.flow_id]
    if isinstance(event, DemandIncrease) and not event.demand > old.demand:
        raise EventError(f"increase for flow {old.id} does not raise its demand")
    if isinstance(event, DemandDecrease) and not 0 < event.demand < old.demand:
        raise EventError(f"decrease for flow {old.id} does not lower its demand")
    changed = replace(old, demand=event.demand)
    new = instance.with_flows(changed if f.id == old.id else f for f in instance.flows)
    if isinstance(event, DemandIncrease):
        _check_headroom(new, changed)
    return new


def _check_flow_path(instance: Instance, flow: Flow):
    links = instance.topology.link_map
    if not flow.path or len(set(flow.path)) != len(flow.path):
        raise EventError(f"flow {flow.id} needs a nonempty simple path")
    for lid in flow.path:
        if lid not in links:
            raise EventError(f"unknown link {lid} in flow {flow.id}")
    for a, b in zip(flow.path, flow.path[1:]):
        if links[a].dst != links[b].src:
            raise EventError(f"broken path in flow {flow.id}")


def _local_rd(state: DynamicState, instance: Instance, statuses: Statuses,
              temporary: set[int]) -> DynamicState:
    selection = SelectionResult(statuses, state.selection.selected)
    try:
        sol = rate_determination(instance, selection, temporary)
    except InfeasibleAllocation:
        sol = None
    if sol is None or sol.unsatisfied:
        return _full_solve(state, instance)
    return replace(state, instance=instance, solution=sol, temporary=frozenset(temporary))


def _traced_back(state: DynamicState, instance: Instance) -> Statuses:
    """Statuses recorded after flow selection, lifted to current demands."""
    fm = instance.flow_map
    out: Statuses = {}
    for f in instance.flows:
        rate = state.selection.statuses.get(f.id)
        out[f.id] = None if rate is None else max(rate, f.demand)
    return out


def apply_event(state: DynamicState, event: Event) -> tuple[DynamicState, str]:
    instance = _updated_instance(state.instance, event)
    counted = replace(state, events_since_recompute=state.events_since_recompute + 1)

    if not state.bootstrapped:
        sol = make_solution(instance, {})
        if not sol.unsatisfied:
            return replace(counted, instance=instance, solution=sol), NONE
        return _full_solve(counted, instance), BOOTSTRAP

    current = state.solution.statuses
    if isinstance(event, DemandDecrease):
        return replace(counted, instance=instance, solution=_resolved(instance, current)), NONE

    if isinstance(event, DemandIncrease):
        if state.solution.allocation.rates[event.flow_id] >= event.demand - EPS:
            return replace(counted, instance=instance, solution=_resolved(instance, current)), NONE
        statuses = _traced_back(state, instance)
        statuses[event.flow_id] = max(statuses[event.flow_id] or 0.0, event.demand)
        temporary = (set(state.temporary) | {event.flow_id}) & set(statuses)
        return _finish(counted, instance, statuses, temporary)

    if isinstance(event, Join):
        statuses = _traced_back(state, instance)
        statuses[event.flow.id] = event.flow.demand
        temporary = (set(state.temporary) | {event.flow.id}) & set(statuses)
        return _finish(counted, instance, statuses, temporary)

    # Leave
    statuses = {fid: r for fid, r in current.items() if fid != event.flow_id}
    try:
        sol = make_solution(instance, statuses)
    except InfeasibleAllocation:
        sol = None
    temporary = set(state.temporary) - {event.flow_id}
    if sol is not None and not sol.unsatisfied:
        return replace(counted, instance=instance, solution=sol,
                       temporary=frozenset(temporary)), NONE
    fm = instance.flow_map
    lost = sol.unsatisfied if sol is not None else frozenset()
    for fid in lost:
        statuses[fid] = fm[fid].demand
    return _finish(counted, instance, statuses, temporary | set(lost))


def _resolved(instance: Instance, statuses: Statuses) -> Solution:
    # Same statuses and rates; only the satisfaction bookkeeping changes.
    return make_solution(instance, statuses)


def _finish(state, instance, statuses, temporary):
    # Record the marked flows as part of the selection so later trace-backs
    # keep them controlled until rate determination releases them.
    recorded = {fid: r for fid, r in state.selection.statuses.items() if fid in instance.flow_map}
    for fid in temporary:
        recorded[fid] = statuses[fid]
    state = replace(state, selection=SelectionResult(recorded, state.selection.selected))
    new = _local_rd(state, instance, statuses, temporary)
    return new, (RECOMPUTE if new.events_since_recompute == 0 else RD)


def periodic_recompute(state: DynamicState) -> DynamicState:
    if not state.instance.flows and not state.bootstrapped:
        return replace(state, solution=make_solution(state.instance, {}), events_since_recompute=0)
    return _full_solve(state, state.instance)


# -- JSON Lines trace format -------------------------------------------------

def event_to_dict(event: Event) -> dict:
    if isinstance(event, Join):
        f = event.flow
        return {"t": event.t, "kind": "join",
                "flow": {"id": f.id, "path": list(f.path), "demand": f.demand, "priority": f.priority}}
    kind = {Leave: "leave", DemandIncrease: "inc", DemandDecrease: "dec"}[type(event)]
    out = {"t": event.t, "kind": kind, "id": event.flow_id}
    if not isinstance(event, Leave):
        out["demand"] = event.demand
    return out


def event_from_dict(obj: dict) -> Event:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise EventError("event must be an object with a 'kind'")
    kind, t = obj["kind"], obj.get("t", 0)
    allowed = {"join": {"t", "kind", "flow"}, "leave": {"t", "kind", "id"},
               "inc": {"t", "kind", "id", "demand"}, "dec": {"t", "kind", "id", "demand"}}
    if kind not in allowed:
        raise EventError(f"unknown event kind {kind!r}")
    unknown = set(obj) - allowed[kind]
    missing = allowed[kind] - {"t"} - set(obj)
    if unknown or missing:
        raise EventError(f"{kind} event: unknown {sorted(unknown)} missing {sorted(missing)}")
    try:
        if kind == "join":
            raw = obj["flow"]
            return Join(Flow(int(raw["id"]), tuple(int(x) for x in raw["path"]),
                             float(raw["demand"]), float(raw.get("priority", 1.0))), t)
        if kind == "leave":
            return Leave(int(obj["id"]), t)
        cls = DemandIncrease if kind == "inc" else DemandDecrease
        return cls(int(obj["id"]), float(obj["demand"]), t)
    except (KeyError, TypeError, ValueError) as exc:
        raise EventError(f"malformed {kind} event: {exc}") from exc


def read_trace(lines: Iterable[str]) -> Iterator[Event]:
    for no, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            yield event_from_dict(json.loads(line))
        except (json.JSONDecodeError, EventError) as exc:
            raise EventError(f"trace line {no}: {exc}") from exc


def write_trace(events: Iterable[Event]) -> str:
    return "".join(json.dumps(event_to_dict(e)) + "\n" for e in events)
