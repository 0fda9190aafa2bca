"""Built-in topologies and a GraphML (Topology Zoo) importer.

The built-ins are synthetic directed graphs sized like the Claranet
(15 nodes, 18 links) and Columbus (70 nodes, 85 links) networks: a
directed ring plus chords, so every node pair is reachable.
"""

from __future__ import annotations

from pathlib import Path

import networkx as nx

from ..netmodel import Link, Topology, read_instance

PLACEHOLDER_CAPACITY = 1.0


def ring_with_chords(n: int, chords: list[tuple[int, int]]) -> Topology:
    arcs = [(i, (i + 1) % n) for i in range(n)]
    for a, b in chords:
        if (a, b) in arcs or a == b:
            raise ValueError(f"bad chord {a}->{b}")
        arcs.append((a, b))
    links = tuple(Link(i, a, b, PLACEHOLDER_CAPACITY) for i, (a, b) in enumerate(arcs))
    return Topology(tuple(range(n)), links)


def claranet_scale() -> Topology:
    return ring_with_chords(15, [(0, 5), (5, 10), (10, 0)])


def columbus_scale() -> Topology:
    chords = [(k * 19 % 70, (k * 19 + 31) % 70) for k in range(15)]
    return ring_with_chords(70, chords)


def small() -> Topology:
    """5 nodes, 8 links; fits the exhaustive oracle's size guard."""
    return ring_with_chords(5, [(0, 2), (2, 4), (3, 1)])


BUILTIN = {
    "claranet": claranet_scale,
    "columbus": columbus_scale,
    "small": small,
}


def read_graphml(path, capacity: float = PLACEHOLDER_CAPACITY) -> Topology:
    """Import node/edge lists; undirected edges become two opposite links."""
    g = nx.read_graphml(path)
    nodes = [str(n) for n in g.nodes]
    arcs: list[tuple[str, str]] = []
    seen = set()
    for u, v in g.edges():
        u, v = str(u), str(v)
        if u == v:
            continue
        pairs = [(u, v)] if g.is_directed() else [(u, v), (v, u)]
        for pair in pairs:
            if pair not in seen:
                seen.add(pair)
                arcs.append(pair)
    links = tuple(Link(i, a, b, capacity) for i, (a, b) in enumerate(arcs))
    return Topology(tuple(nodes), links)


def load_topology(source: str) -> Topology:
    if source in BUILTIN:
        return BUILTIN[source]()
    path = Path(source)
    if path.suffix.lower() == ".graphml":
        return read_graphml(path)
    if path.suffix.lower() == ".json":
        return read_instance(path).topology
    raise ValueError(f"unknown topology {source!r} (builtin: {', '.join(BUILTIN)})")


def to_digraph(topology: Topology) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(topology.nodes)
    for link in topology.links:
        g.add_edge(link.src, link.dst, id=link.id)
    return g
