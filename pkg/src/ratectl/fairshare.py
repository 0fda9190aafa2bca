"""Steady-state TCP sharing model.

Controlled flows consume exactly their pinned rate. The remaining capacity
is split among uncontrolled flows by progressive filling, which yields the
unique max-min fair allocation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from .netmodel import EPS, Instance, Statuses


class InfeasibleAllocation(ValueError):
    """Controlled rates alone overload a link."""

    def __init__(self, link: int, excess: float):
        super().__init__(f"controlled rates overload link {link} by {excess:.6g}")
        self.link = link
        self.excess = excess


@dataclass(frozen=True)
class Allocation:
    rates: dict[int, float]
    # Only uncontrolled flows have a bottleneck.
    bottleneck: dict[int, int]

    def link_load(self, instance: Instance) -> dict[int, float]:
        load = {link.id: 0.0 for link in instance.links}
        for f in instance.flows:
            r = self.rates[f.id]
            for lid in f.path:
                load[lid] += r
        return load


def _status(statuses: Mapping[int, Optional[float]], fid: int) -> Optional[float]:
    return statuses.get(fid)


def allocate(instance: Instance, statuses: Mapping[int, Optional[float]]) -> Allocation:
    """Max-min fair allocation of residual capacity among uncontrolled flows.

    Flows missing from ``statuses`` are treated as uncontrolled. Raises
    :class:`InfeasibleAllocation` when controlled rates do not fit.
    """
    residual = {link.id: link.capacity for link in instance.links}
    rates: dict[int, float] = {}
    active: dict[int, tuple[int, ...]] = {}
    for f in instance.flows:
        rate = _status(statuses, f.id)
        if rate is None:
            active[f.id] = f.path
            continue
        rates[f.id] = rate
        for lid in f.path:
            residual[lid] -= rate
    for lid in sorted(residual):
        if residual[lid] < -EPS:
            raise InfeasibleAllocation(lid, -residual[lid])
        residual[lid] = max(residual[lid], 0.0)

    count = {lid: 0 for lid in residual}
    on_link: dict[int, set[int]] = {lid: set() for lid in residual}
    for fid, path in active.items():
        for lid in path:
            count[lid] += 1
            on_link[lid].add(fid)

    bottleneck: dict[int, int] = {}
    while active:
        shares = {lid: residual[lid] / n for lid, n in count.items() if n}
        level = min(shares.values())
        # Links tied with the minimum freeze together; tolerance keeps the
        # leftover residual on each of them below EPS.
        tight = sorted(lid for lid, s in shares.items() if s - level <= EPS / count[lid])
        frozen: dict[int, int] = {}
        for lid in tight:
            for fid in on_link[lid]:
                frozen.setdefault(fid, lid)
        for fid, lid in frozen.items():
            rates[fid] = level
            bottleneck[fid] = lid
            for l in active.pop(fid):
                residual[l] = max(residual[l] - level, 0.0)
                count[l] -= 1
                on_link[l].discard(fid)
    return Allocation(rates, bottleneck)


def unsatisfied_flows(instance: Instance, allocation: Allocation) -> set[int]:
    return {f.id for f in instance.flows if allocation.rates[f.id] < f.demand - EPS}


def check_maxmin(
    instance: Instance,
    statuses: Mapping[int, Optional[float]],
    allocation: Allocation,
    eps: float = EPS,
) -> bool:
    """Check the bottleneck characterization of max-min fairness.

    Independent of :func:`allocate`: capacities must hold, controlled flows
    carry their pinned rate, and every uncontrolled flow crosses a saturated
    link on which no other uncontrolled flow gets more.
    """
    rates = allocation.rates
    if any(f.id not in rates or rates[f.id] < -eps for f in instance.flows):
        return False
    load = {link.id: 0.0 for link in instance.links}
    for f in instance.flows:
        for lid in f.path:
            load[lid] += rates[f.id]
    for link in instance.links:
        if load[link.id] > link.capacity + eps:
            return False

    unc_max: dict[int, float] = {}
    for f in instance.flows:
        fixed = statuses.get(f.id)
        if fixed is not None:
            if abs(rates[f.id] - fixed) > eps:
                return False
            continue
        for lid in f.path:
            unc_max[lid] = max(unc_max.get(lid, 0.0), rates[f.id])

    for f in instance.flows:
        if statuses.get(f.id) is not None:
            continue
        r = rates[f.id]
        if not any(
            instance.capacity(lid) - load[lid] <= eps and r >= unc_max[lid] - eps
            for lid in f.path
        ):
            return False
    return True
