"""Network and flow data model, validation and JSON (de)serialization.

An :class:`Instance` is a directed, capacitated topology plus a list of
single-path flows. Paths are stored as lists of link ids. Everything here
is immutable once built, so instances can be shared freely.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Mapping, Optional

# Global absolute tolerance for rate/capacity comparisons.
EPS = 1e-9

# Flow id -> controlled rate, or None when the flow is left to TCP.
Statuses = dict[int, Optional[float]]

NodeId = Hashable


class InstanceError(ValueError):
    """Raised when an instance cannot be parsed or fails validation."""

    def __init__(self, message: str, violations: Optional[list[str]] = None):
        super().__init__(message)
        self.violations = violations or []


@dataclass(frozen=True)
class Link:
    id: int
    src: NodeId
    dst: NodeId
    capacity: float


@dataclass(frozen=True)
class Topology:
    nodes: tuple
    links: tuple[Link, ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "links", tuple(self.links))

    @cached_property
    def link_map(self) -> dict[int, Link]:
        return {link.id: link for link in self.links}


@dataclass(frozen=True)
class Flow:
    id: int
    path: tuple[int, ...]
    demand: float
    priority: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(self.path))


@dataclass(frozen=True)
class Instance:
    topology: Topology
    flows: tuple[Flow, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "flows", tuple(self.flows))

    @property
    def links(self) -> tuple[Link, ...]:
        return self.topology.links

    @cached_property
    def flow_map(self) -> dict[int, Flow]:
        return {f.id: f for f in self.flows}

    @cached_property
    def link_flows(self) -> dict[int, tuple[int, ...]]:
        """Link id -> ids of flows routed over it, in flow order."""
        index: dict[int, list[int]] = {link.id: [] for link in self.links}
        for f in self.flows:
            for lid in f.path:
                index.setdefault(lid, []).append(f.id)
        return {lid: tuple(ids) for lid, ids in index.items()}

    def capacity(self, link_id: int) -> float:
        return self.topology.link_map[link_id].capacity

    def demand_sum(self, link_id: int) -> float:
        fm = self.flow_map
        return sum(fm[fid].demand for fid in self.link_flows[link_id])

    def with_flows(self, flows: Iterable[Flow]) -> "Instance":
        return Instance(self.topology, tuple(flows))


def flows_on_link(instance: Instance, link: int) -> set[int]:
    """Return the ids of the flows whose path contains ``link``."""
    if link not in instance.topology.link_map:
        raise KeyError(f"unknown link {link}")
    return set(instance.link_flows[link])


def validate_instance(instance: Instance) -> list[str]:
    """Collect every violated model invariant; an empty list means valid."""
    violations: list[str] = []
    nodes = set(instance.topology.nodes)
    if len(nodes) != len(instance.topology.nodes):
        violations.append("duplicate node identifiers")

    links: dict[int, Link] = {}
    pairs: set = set()
    for link in instance.topology.links:
        if link.id in links:
            violations.append(f"duplicate link id {link.id}")
        links[link.id] = link
        for end in (link.src, link.dst):
            if end not in nodes:
                violations.append(f"link {link.id} references unknown node {end!r}")
        if (link.src, link.dst) in pairs:
            violations.append(f"parallel link {link.id} from {link.src!r} to {link.dst!r}")
        pairs.add((link.src, link.dst))
        if not link.capacity > 0:
            violations.append(f"nonpositive capacity on link {link.id}")

    seen: set[int] = set()
    for f in instance.flows:
        if f.id in seen:
            violations.append(f"duplicate flow id {f.id}")
        seen.add(f.id)
        if not f.path:
            violations.append(f"empty path in flow {f.id}")
        if not f.demand > 0:
            violations.append(f"nonpositive demand in flow {f.id}")
        if not f.priority > 0:
            violations.append(f"nonpositive priority in flow {f.id}")
        if len(set(f.path)) != len(f.path):
            violations.append(f"repeated link in flow {f.id}")
        known = True
        for lid in f.path:
            if lid not in links:
                violations.append(f"unknown link {lid} in flow {f.id}")
                known = False
        if known:
            for a, b in zip(f.path, f.path[1:]):
                if links[a].dst != links[b].src:
                    violations.append(f"broken path in flow {f.id} between links {a} and {b}")
    return violations


def check_instance(instance: Instance) -> Instance:
    violations = validate_instance(instance)
    if violations:
        raise InstanceError("invalid instance: " + "; ".join(violations), violations)
    return instance


# -- JSON format ------------------------------------------------------------

_TOP_KEYS = {"nodes", "links", "flows"}
_LINK_KEYS = {"id", "src", "dst", "capacity"}
_FLOW_KEYS = {"id", "path", "demand", "priority"}


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _integer(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceError(f"{where}: expected an integer, got {value!r}")
    return value


def _check_keys(obj, allowed: set[str], required: set[str], where: str):
    if not isinstance(obj, dict):
        raise InstanceError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise InstanceError(f"{where}: unknown field(s) {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise InstanceError(f"{where}: missing field(s) {sorted(missing)}")


def _node(value, where: str):
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise InstanceError(f"{where}: node ids must be strings or integers")
    return value


def instance_from_dict(data: Mapping) -> Instance:
    _check_keys(data, _TOP_KEYS, {"nodes", "links"}, "instance")
    if not isinstance(data["nodes"], list):
        raise InstanceError("nodes: expected a list")
    nodes = [_node(n, f"nodes[{i}]") for i, n in enumerate(data["nodes"])]
    links = []
    for i, raw in enumerate(data["links"]):
        where = f"links[{i}]"
        _check_keys(raw, _LINK_KEYS, _LINK_KEYS, where)
        links.append(
            Link(
                id=_integer(raw["id"], f"{where}.id"),
                src=_node(raw["src"], f"{where}.src"),
                dst=_node(raw["dst"], f"{where}.dst"),
                capacity=_number(raw["capacity"], f"{where}.capacity"),
            )
        )
    flows = []
    for i, raw in enumerate(data.get("flows", [])):
        where = f"flows[{i}]"
        _check_keys(raw, _FLOW_KEYS, {"id", "path", "demand"}, where)
        if not isinstance(raw["path"], list):
            raise InstanceError(f"{where}.path: expected a list of link ids")
        flows.append(
            Flow(
                id=_integer(raw["id"], f"{where}.id"),
                path=tuple(_integer(x, f"{where}.path") for x in raw["path"]),
                demand=_number(raw["demand"], f"{where}.demand"),
                priority=_number(raw.get("priority", 1.0), f"{where}.priority"),
            )
        )
    return Instance(Topology(tuple(nodes), tuple(links)), tuple(flows))


def load_instance(data: bytes | str) -> Instance:
    """Parse and validate a JSON instance document."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise InstanceError(
            f"invalid JSON at line {exc.lineno} column {exc.colno} (byte offset {exc.pos}): {exc.msg}"
        ) from exc
    return check_instance(instance_from_dict(raw))


def instance_to_dict(instance: Instance) -> dict:
    return {
        "nodes": list(instance.topology.nodes),
        "links": [
            {"id": l.id, "src": l.src, "dst": l.dst, "capacity": l.capacity}
            for l in instance.topology.links
        ],
        "flows": [
            {"id": f.id, "path": list(f.path), "demand": f.demand, "priority": f.priority}
            for f in instance.flows
        ],
    }


def dump_instance(instance: Instance, indent: Optional[int] = None) -> str:
    return json.dumps(instance_to_dict(instance), indent=indent)


def read_instance(path) -> Instance:
    with open(path, "rb") as fh:
        return load_instance(fh.read())
