"""Random, always-valid event traces for the dynamic engine."""

from __future__ import annotations

import random

from ..dynamics import DemandDecrease, DemandIncrease, Event, Join, Leave, _updated_instance
from ..netmodel import Flow, Instance
from .generate import route
from .topologies import to_digraph

KINDS = ("join", "leave", "inc", "dec")


def churn_trace(instance: Instance, events: int, seed: int = 0,
                weights=(0.3, 0.2, 0.3, 0.2)) -> list[Event]:
    """Draw ``events`` valid events, tracking the evolving instance.

    Joins and increases never push a link past its capacity; leaves keep at
    least one flow alive.
    """
    rng = random.Random(seed)
    g = to_digraph(instance.topology)
    nodes = list(instance.topology.nodes)
    demands = [f.demand for f in instance.flows] or [1.0]
    lo, hi = min(demands), max(demands)
    next_id = max((f.id for f in instance.flows), default=-1) + 1
    current = instance
    trace: list[Event] = []

    def headroom(path):
        return min(current.capacity(l) - current.demand_sum(l) for l in path)

    while len(trace) < events:
        kind = rng.choices(KINDS, weights)[0]
        t = len(trace)
        event = None
        if kind == "join" and len(nodes) > 1:
            src, dst = rng.sample(nodes, 2)
            try:
                path = route(g, src, dst)
            except Exception:
                continue
            room = headroom(path)
            demand = min(rng.uniform(lo, hi), room * 0.9)
            if demand > lo * 0.05:
                event = Join(Flow(next_id, tuple(path), demand), t)
                next_id += 1
        elif kind == "leave" and len(current.flows) > 1:
            event = Leave(rng.choice(current.flows).id, t)
        elif kind in ("inc", "dec") and current.flows:
            f = rng.choice(current.flows)
            if kind == "inc":
                room = headroom(f.path)
                new = f.demand + min(f.demand * rng.uniform(0.1, 0.5), room * 0.9)
                if new > f.demand * (1 + 1e-6):
                    event = DemandIncrease(f.id, new, t)
            else:
                event = DemandDecrease(f.id, f.demand * rng.uniform(0.5, 0.9), t)
        if event is not None:
            current = _updated_instance(current, event)
            trace.append(event)
    return trace
