"""Comparison algorithms: plain TCP, smallest-id baseline, exhaustive oracle."""

from __future__ import annotations

import itertools
from typing import Optional

from .fairshare import InfeasibleAllocation, allocate, unsatisfied_flows
from .jfsrd import Solution, make_solution
from .netmodel import EPS, Instance, Statuses

MAX_ORACLE_FLOWS = 12
MAX_ORACLE_LINKS = 10


class GuardError(ValueError):
    """Instance too large for exhaustive search."""


class InfeasibleInstance(ValueError):
    pass


def pure_tcp(instance: Instance) -> Solution:
    return make_solution(instance, {})


def baseline(instance: Instance) -> Solution:
    """Control flows in ascending id order until TCP satisfies the rest."""
    order = sorted(f.id for f in instance.flows)
    statuses: Statuses = {}
    fm = instance.flow_map
    for k in range(len(order) + 1):
        if k:
            statuses[order[k - 1]] = fm[order[k - 1]].demand
        try:
            sol = make_solution(instance, statuses)
        except InfeasibleAllocation:
            continue
        if not sol.unsatisfied:
            return sol
    raise InfeasibleInstance("controlling every flow at its demand is infeasible")


def _symmetry_classes(instance: Instance) -> list[list[int]]:
    """Group interchangeable flows (same path, demand and priority)."""
    classes: dict[tuple, list[int]] = {}
    for f in sorted(instance.flows, key=lambda f: f.id):
        classes.setdefault((f.path, f.demand, f.priority), []).append(f.id)
    return sorted(classes.values())


def _subsets(classes: list[list[int]], size: int):
    """Controlled sets of ``size`` flows, one representative per class multiset."""

    def rec(i, left):
        if left == 0:
            yield []
            return
        if i == len(classes):
            return
        for take in range(min(left, len(classes[i])), -1, -1):
            for rest in rec(i + 1, left - take):
                yield classes[i][:take] + rest

    results = [sorted(s) for s in rec(0, size)]
    return sorted(results)


def _feasible_rates(instance: Instance, subset: list[int], delta: float) -> Optional[Statuses]:
    """Search grid rates ``demand + k*delta`` for ``subset``; first hit wins.

    Partial vectors are pruned when the pinned rates plus the demands of all
    still-unpinned flows no longer fit on some link, since every flow needs
    at least its demand in any feasible answer.
    """
    fm = instance.flow_map
    slack = {l.id: l.capacity - instance.demand_sum(l.id) for l in instance.links}
    if any(s < -EPS for s in slack.values()):
        return None
    has_unc = {
        l.id: any(fid not in subset for fid in instance.link_flows[l.id]) for l in instance.links
    }
    # Rates only matter on links that also carry uncontrolled traffic.
    free = [fid for fid in subset if any(has_unc[l] for l in fm[fid].path)]
    statuses: Statuses = {fid: fm[fid].demand for fid in subset}

    def ok(st):
        try:
            alloc = allocate(instance, st)
        except InfeasibleAllocation:
            return False
        return not unsatisfied_flows(instance, alloc)

    def rec(i):
        if i == len(free):
            return ok(statuses)
        fid = free[i]
        d = fm[fid].demand
        k = 0
        while True:
            extra = k * delta
            if any(slack[l] < extra - EPS for l in fm[fid].path):
                return False
            statuses[fid] = d + extra
            for l in fm[fid].path:
                slack[l] -= extra
            found = rec(i + 1)
            for l in fm[fid].path:
                slack[l] += extra
            if found:
                return True
            statuses[fid] = d
            k += 1

    return dict(statuses) if rec(0) else None


def exact_oracle(instance: Instance, delta: Optional[float] = None) -> Solution:
    """Minimum controlled set by exhaustive search over a rate grid.

    ``delta`` defaults to a quarter of the smallest demand. Optimal among
    rate vectors on the grid only.
    """
    if len(instance.flows) > MAX_ORACLE_FLOWS or len(instance.links) > MAX_ORACLE_LINKS:
        raise GuardError(
            f"oracle limited to {MAX_ORACLE_FLOWS} flows and {MAX_ORACLE_LINKS} links, "
            f"got {len(instance.flows)} flows and {len(instance.links)} links"
        )
    if not instance.flows:
        return make_solution(instance, {})
    if delta is None:
        delta = min(f.demand for f in instance.flows) / 4
    if not delta > 0:
        raise ValueError("delta must be positive")

    classes = _symmetry_classes(instance)
    for size in range(len(instance.flows) + 1):
        for subset in _subsets(classes, size):
            statuses = _feasible_rates(instance, subset, delta)
            if statuses is not None:
                return make_solution(instance, statuses)
    raise InfeasibleInstance("no controlled set satisfies every flow")
