"""Seeded random instance generation.

Capacities follow a headroom rule: every used link gets 1.25 times the sum
of the demands routed over it. Links nobody uses get a floor capacity.
Load is ``sum(demand * hops) / sum(capacity)``; since used links always
sit at 0.8, the target load is reached by rescaling demands against the
floor capacities of unused links, and is clamped when unreachable.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

import networkx as nx

from ..netmodel import Flow, Instance, Link, Topology
from .topologies import load_topology, to_digraph

HEADROOM = 1.25
MAX_CAPACITY = 1e6
ROUTINGS = ("shortest", "default-path")


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GenSpec:
    topology: str = "claranet"
    flows: int = 60
    load: float = 0.75
    demand_low: float = 1.0
    demand_high: float = 10.0
    routing: str = "shortest"
    seed: int = 0
    floor_capacity: float = 10.0
    max_retries: int = 100

    def __post_init__(self):
        if self.flows < 0:
            raise ValueError("flow count must be >= 0")
        if not 0 < self.load <= 1:
            raise ValueError("load must be in (0, 1]")
        if not 0 < self.demand_low <= self.demand_high:
            raise ValueError("need 0 < demand_low <= demand_high")
        if self.routing not in ROUTINGS:
            raise ValueError(f"routing must be one of {ROUTINGS}")

    def for_sample(self, index: int) -> "GenSpec":
        return replace(self, seed=self.seed * 1_000_003 + index)


def _root(g: nx.DiGraph):
    # Highest total degree, smallest label on ties.
    return min(g.nodes, key=lambda n: (-g.degree(n), str(n)))


def _loop_erase(walk: list) -> list:
    out: list = []
    pos: dict = {}
    for node in walk:
        if node in pos:
            cut = pos[node]
            for dropped in out[cut + 1:]:
                del pos[dropped]
            out = out[: cut + 1]
        else:
            pos[node] = len(out)
            out.append(node)
    return out


def route(g: nx.DiGraph, src, dst, routing: str = "shortest", root=None) -> list[int]:
    """Link ids of a route from ``src`` to ``dst``.

    ``default-path`` sends traffic through ``root`` first, approximating
    default-path-based aggregation schemes that detour via a central switch.
    """
    if routing == "shortest" or root in (None, src, dst):
        nodes = nx.shortest_path(g, src, dst)
    else:
        walk = nx.shortest_path(g, src, root) + nx.shortest_path(g, root, dst)[1:]
        hops = list(zip(walk, walk[1:]))
        # A hairpin through the root is fine; only a reused link is not.
        nodes = walk if len(set(hops)) == len(hops) else _loop_erase(walk)
    return [g.edges[a, b]["id"] for a, b in zip(nodes, nodes[1:])]


def network_load(instance: Instance) -> float:
    total = sum(l.capacity for l in instance.links)
    carried = sum(f.demand * len(f.path) for f in instance.flows)
    return carried / total if total else 0.0


def with_headroom_capacities(topology: Topology, flows: list[Flow], floor: float) -> Topology:
    sums = {l.id: 0.0 for l in topology.links}
    for f in flows:
        for lid in f.path:
            sums[lid] += f.demand
    links = tuple(
        Link(l.id, l.src, l.dst, HEADROOM * sums[l.id] if sums[l.id] > 0 else floor)
        for l in topology.links
    )
    return Topology(topology.nodes, links)


def generate(spec: GenSpec, topology: Topology | None = None) -> Instance:
    rng = random.Random(spec.seed)
    topo = topology if topology is not None else load_topology(spec.topology)
    g = to_digraph(topo)
    root = _root(g) if spec.routing == "default-path" else None
    nodes = list(topo.nodes)
    if spec.flows and len(nodes) < 2:
        raise GenerationError("need at least two nodes to place flows")

    raw: list[tuple[list[int], float]] = []
    for _ in range(spec.flows):
        for _attempt in range(spec.max_retries):
            src, dst = rng.sample(nodes, 2)
            try:
                path = route(g, src, dst, spec.routing, root)
            except nx.NetworkXNoPath:
                continue
            break
        else:
            raise GenerationError(f"no routable pair after {spec.max_retries} retries")
        raw.append((path, rng.uniform(spec.demand_low, spec.demand_high)))

    used = {lid for path, _ in raw for lid in path}
    empty = len(topo.links) - len(used)
    carried = sum(d * len(p) for p, d in raw)
    scale = 1.0
    # load = s*H / (1.25*s*H + floor*k)  =>  s = L*floor*k / (H*(1 - 1.25*L))
    if carried > 0 and empty > 0 and HEADROOM * spec.load < 1:
        scale = spec.load * spec.floor_capacity * empty / (carried * (1 - HEADROOM * spec.load))
    flows = [Flow(i, tuple(p), d * scale) for i, (p, d) in enumerate(raw)]

    inst = Instance(with_headroom_capacities(topo, flows, spec.floor_capacity), tuple(flows))
    peak = max((l.capacity for l in inst.links), default=0.0)
    if peak > MAX_CAPACITY:
        shrink = MAX_CAPACITY / peak
        flows = [replace(f, demand=f.demand * shrink) for f in flows]
        inst = Instance(
            with_headroom_capacities(topo, flows, spec.floor_capacity * shrink), tuple(flows)
        )
    return inst
