import random

import numpy as np
import pytest
from scipy.optimize import linprog

from ratectl.netmodel import Flow, Instance, Link, Topology


def chain(capacities, flows):
    """Instance on a directed chain n0 -> n1 -> ...; link i joins n_i to n_(i+1).

    ``flows`` holds (path, demand) or (path, demand, priority) tuples; ids follow order.
    """
    nodes = tuple(f"n{i}" for i in range(len(capacities) + 1))
    links = tuple(Link(i, f"n{i}", f"n{i + 1}", c) for i, c in enumerate(capacities))
    fl = tuple(Flow(i, tuple(spec[0]), *spec[1:]) for i, spec in enumerate(flows))
    return Instance(Topology(nodes, links), fl)


def shared_core_instance(demands=(2.5, 2.5, 7.5)):
    """Three flows meeting on link 6->7 (capacity 12.9), private access links."""
    links = [
        Link(0, 1, 6, 10.0), Link(1, 2, 6, 10.0), Link(2, 3, 6, 10.0),
        Link(3, 6, 7, 12.9),
        Link(4, 7, 4, 10.0), Link(5, 7, 5, 10.0), Link(6, 7, 8, 10.0),
    ]
    flows = [Flow(i, (i, 3, 4 + i), d) for i, d in enumerate(demands)]
    return Instance(Topology((1, 2, 3, 4, 5, 6, 7, 8), tuple(links)), tuple(flows))


def random_instance(rng: random.Random, n_links=None, n_flows=None, controlled_frac=0.0):
    """Random chain instance plus random feasible controlled rates."""
    n_links = n_links or rng.randint(1, 5)
    n_flows = n_flows if n_flows is not None else rng.randint(1, 7)
    flows = []
    for _ in range(n_flows):
        a = rng.randrange(n_links)
        b = rng.randrange(a, n_links)
        flows.append((tuple(range(a, b + 1)), round(rng.uniform(0.5, 5), 3)))
    caps = [round(rng.uniform(1, 20), 3) for _ in range(n_links)]
    inst = chain(caps, flows)
    statuses = {}
    residual = dict(enumerate(caps))
    for f in inst.flows:
        if rng.random() < controlled_frac:
            room = min(residual[l] for l in f.path)
            rate = round(rng.uniform(0, room), 6)
            statuses[f.id] = rate
            for l in f.path:
                residual[l] -= rate
    return inst, statuses


def lp_maxmin(instance, statuses):
    """Lexicographic max-min by repeated linear programs (scipy.optimize.linprog).

    Raise the common floor of the free flows as far as possible, then freeze
    every free flow that cannot individually exceed that floor; repeat.
    """
    flows = list(instance.flows)
    idx = {f.id: i for i, f in enumerate(flows)}
    n = len(flows)
    a_ub = np.zeros((len(instance.links), n))
    for j, link in enumerate(instance.links):
        for fid in instance.link_flows[link.id]:
            a_ub[j, idx[fid]] = 1
    b_ub = np.array([l.capacity for l in instance.links])
    pinned = {f.id: statuses[f.id] for f in flows if statuses.get(f.id) is not None}
    free = {f.id for f in flows} - set(pinned)

    def bounds(level):
        out = []
        for f in flows:
            v = pinned.get(f.id)
            out.append((v, v) if v is not None else (level, None))
        return out

    while free:
        # maximize t subject to x_f >= t for free flows
        c = np.zeros(n + 1)
        c[n] = -1
        rows = [np.append(r, 0) for r in a_ub]
        rhs = list(b_ub)
        for fid in free:
            row = np.zeros(n + 1)
            row[idx[fid]] = -1
            row[n] = 1
            rows.append(row)
            rhs.append(0.0)
        res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs),
                      bounds=bounds(0) + [(0, None)], method="highs")
        assert res.success
        level = -res.fun
        stuck = set()
        for fid in sorted(free):
            c1 = np.zeros(n)
            c1[idx[fid]] = -1
            r1 = linprog(c1, A_ub=a_ub, b_ub=b_ub, bounds=bounds(level), method="highs")
            assert r1.success
            if -r1.fun <= level + 1e-7:
                stuck.add(fid)
        for fid in stuck:
            pinned[fid] = level
        free -= stuck
    return pinned


@pytest.fixture
def shared_core():
    return shared_core_instance()
