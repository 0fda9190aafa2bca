"""Joint flow selection and rate determination.

Two phases pick a small set of flows to pin:

* Flow selection builds, per link, candidate configurations around each
  target rate and keeps the most profitable one per link, visiting links
  in decreasing correlation order. A flow is controlled when any selected
  configuration controls it.
* Rate determination revisits the links in the same order and tries to
  release flows that are controlled only because of *other* links
  (temporarily controlled flows), by raising the rates of the remaining
  controlled flows on the link into spare capacity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from .fairshare import Allocation, allocate, unsatisfied_flows
from .netmodel import EPS, Instance, Statuses


@dataclass(frozen=True)
class LinkConfiguration:
    link: int
    target_rate: float
    # flow id -> (controlled?, rate)
    assignment: dict[int, tuple[bool, float]]

    @property
    def controlled(self) -> frozenset[int]:
        return frozenset(fid for fid, (ctl, _) in self.assignment.items() if ctl)

    @property
    def uncontrolled(self) -> frozenset[int]:
        return frozenset(fid for fid, (ctl, _) in self.assignment.items() if not ctl)


@dataclass(frozen=True)
class Solution:
    statuses: Statuses
    allocation: Allocation
    unsatisfied: frozenset[int]

    @property
    def controlled(self) -> int:
        return sum(1 for r in self.statuses.values() if r is not None)

    @property
    def controlled_ids(self) -> list[int]:
        return sorted(fid for fid, r in self.statuses.items() if r is not None)

    @property
    def unsatisfied_count(self) -> int:
        return len(self.unsatisfied)


@dataclass(frozen=True)
class SelectionResult:
    statuses: Statuses
    selected: dict[int, LinkConfiguration] = field(default_factory=dict)


def make_solution(instance: Instance, statuses: Mapping[int, Optional[float]]) -> Solution:
    full = {f.id: statuses.get(f.id) for f in instance.flows}
    alloc = allocate(instance, full)
    return Solution(full, alloc, frozenset(unsatisfied_flows(instance, alloc)))


def _require_link(instance: Instance, link: int):
    if link not in instance.topology.link_map:
        raise KeyError(f"unknown link {link}")


def candidate_configurations(instance: Instance, link: int) -> list[LinkConfiguration]:
    _require_link(instance, link)
    fm = instance.flow_map
    flows = [fm[fid] for fid in instance.link_flows[link]]
    if not flows:
        return []
    budget = instance.capacity(link) - sum(f.demand for f in flows)
    # Smallest gap first: descending demand, ids break ties.
    by_gap = sorted(flows, key=lambda f: (-f.demand, f.id))
    configs = []
    for target in sorted({f.demand for f in flows}):
        assignment: dict[int, tuple[bool, float]] = {}
        spent = 0.0
        room = True
        for f in by_gap:
            if f.demand > target:
                assignment[f.id] = (True, f.demand)
                continue
            cost = target - f.demand
            if room and spent + cost <= budget + EPS:
                spent += cost
                assignment[f.id] = (False, target)
            else:
                room = False
                assignment[f.id] = (True, f.demand)
        configs.append(LinkConfiguration(link, target, assignment))
    return configs


def correlation(instance: Instance, link: int) -> int:
    """Number of flows off ``link`` that share some link with a flow on it."""
    _require_link(instance, link)
    fm = instance.flow_map
    here = set(instance.link_flows[link])
    touched: set[int] = set()
    for fid in here:
        for lid in fm[fid].path:
            touched.update(instance.link_flows[lid])
    return len(touched - here)


def configuration_profit(config: LinkConfiguration, peers: Iterable[LinkConfiguration]) -> Fraction:
    elsewhere: set[int] = set()
    for peer in peers:
        if peer.link != config.link:
            elsewhere |= peer.controlled
    return _profit(config, elsewhere)


def _profit(config: LinkConfiguration, elsewhere: set[int]) -> Fraction:
    ctl = config.controlled
    if not ctl:
        return Fraction(1)
    return Fraction(len(ctl & elsewhere), len(ctl))


def link_order(instance: Instance) -> list[int]:
    """Links carrying flows, highest correlation first, then by id."""
    loaded = [lid for lid, fids in instance.link_flows.items() if fids]
    return sorted(loaded, key=lambda lid: (-correlation(instance, lid), lid))


def flow_selection(instance: Instance) -> SelectionResult:
    order = link_order(instance)
    candidates = {lid: candidate_configurations(instance, lid) for lid in order}

    # For each flow, the links having at least one candidate that controls it.
    controlling: dict[int, set[int]] = {}
    for lid, configs in candidates.items():
        for cfg in configs:
            for fid in cfg.controlled:
                controlling.setdefault(fid, set()).add(lid)

    selected: dict[int, LinkConfiguration] = {}
    for lid in order:
        elsewhere = {fid for fid, links in controlling.items() if links - {lid}}
        selected[lid] = min(
            candidates[lid],
            key=lambda c: (-_profit(c, elsewhere), len(c.controlled), c.target_rate),
        )

    statuses: Statuses = {f.id: None for f in instance.flows}
    for cfg in selected.values():
        for fid, (ctl, rate) in cfg.assignment.items():
            if ctl:
                prev = statuses[fid]
                statuses[fid] = rate if prev is None else max(prev, rate)
    return SelectionResult(statuses, selected)


def _fill(instance: Instance, rates: dict[int, float], risers: list[int],
          residual: dict[int, float], link: int):
    """Raise ``risers`` into spare capacity, proportionally to priority.

    All risers rise together; a riser stops once any link on its path is
    exhausted, and filling ends when ``link`` itself is exhausted.
    """
    fm = instance.flow_map

    def open_path(fid):
        return all(residual[l] > EPS for l in fm[fid].path)

    active = [fid for fid in risers if open_path(fid)]
    while active and residual[link] > EPS:
        weight: dict[int, float] = {}
        for fid in active:
            for l in fm[fid].path:
                weight[l] = weight.get(l, 0.0) + fm[fid].priority
        step = min(residual[l] / w for l, w in weight.items())
        for fid in active:
            inc = step * fm[fid].priority
            rates[fid] += inc
        for l, w in weight.items():
            residual[l] -= step * w
            if residual[l] <= EPS:
                residual[l] = 0.0
        active = [fid for fid in active if open_path(fid)]


def rate_determination(
    instance: Instance,
    selection: SelectionResult,
    temporary: Iterable[int] = (),
) -> Solution:
    """Release temporarily controlled flows where the network allows it.

    ``temporary`` names extra flows to treat as temporarily controlled on
    every link they cross (used by the dynamic update engine).
    """
    fm = instance.flow_map
    statuses: Statuses = {f.id: selection.statuses.get(f.id) for f in instance.flows}
    extra = set(temporary) & set(fm)

    for lid in link_order(instance):
        cfg = selection.selected.get(lid)
        tc = []
        for fid in instance.link_flows[lid]:
            if statuses[fid] is None:
                continue
            in_cfg = cfg is not None and fid in cfg.assignment
            if (in_cfg and not cfg.assignment[fid][0]) or fid in extra:
                tc.append(fid)
        if not tc:
            continue

        alloc = allocate(instance, statuses)
        residual = {l.id: l.capacity for l in instance.links}
        for fid, r in alloc.rates.items():
            for l in fm[fid].path:
                residual[l] -= r
        risers = [fid for fid in instance.link_flows[lid]
                  if statuses[fid] is not None and fid not in tc]
        rates = {fid: statuses[fid] for fid in risers}
        _fill(instance, rates, risers, residual, lid)
        statuses.update(rates)

        trial = dict(statuses)
        for fid in tc:
            trial[fid] = None
        if not unsatisfied_flows(instance, allocate(instance, trial)):
            statuses = trial
    return make_solution(instance, statuses)


def selection_solution(instance: Instance, selection: SelectionResult) -> Solution:
    return make_solution(instance, selection.statuses)


def solve_detailed(instance: Instance) -> tuple[SelectionResult, Solution]:
    selection = flow_selection(instance)
    return selection, rate_determination(instance, selection)


def solve(instance: Instance) -> Solution:
    return solve_detailed(instance)[1]
