import itertools
import random

import pytest

from ratectl import jfsrd
from ratectl.bench.generate import GenSpec, generate
from ratectl.fairshare import InfeasibleAllocation
from ratectl.jfsrd import make_solution
from ratectl.reference import GuardError, baseline, exact_oracle, pure_tcp

from conftest import chain, shared_core_instance


def test_pure_tcp_shared_core(shared_core):
    sol = pure_tcp(shared_core)
    assert sol.controlled == 0
    assert all(r == pytest.approx(4.3) for r in sol.allocation.rates.values())
    assert sol.unsatisfied == {2}


def test_pure_tcp_satisfied_when_demands_fit_fair_share():
    inst = chain([10, 10], [((0, 1), 3.0), ((0,), 4.0), ((1,), 5.0)])
    assert pure_tcp(inst).unsatisfied_count == 0


def test_baseline_zero_when_tcp_suffices():
    assert baseline(shared_core_instance((2.0, 2.0, 2.0))).controlled == 0


def test_baseline_shared_core_wastes_controls(shared_core):
    # prefix {0} leaves 5.2 for flow 2 (< 7.5); {0, 1} leaves 7.9
    sol = baseline(shared_core)
    assert sol.controlled_ids == [0, 1]
    assert sol.statuses[0] == 2.5 and sol.statuses[1] == 2.5
    assert jfsrd.solve(shared_core).controlled == 1


def test_oracle_zero_when_tcp_suffices():
    assert exact_oracle(shared_core_instance((2.0, 2.0, 2.0))).controlled == 0


def test_oracle_shared_core(shared_core):
    sol = exact_oracle(shared_core)
    assert sol.controlled == 1
    assert not sol.unsatisfied


def grid_instance():
    return chain([4, 10, 6.5], [((0, 1), 3.0), ((1, 2), 4.0), ((0, 1, 2), 1.0), ((1, 2), 1.0)])


def test_oracle_needs_rate_above_demand():
    inst = grid_instance()
    # No single flow works when pinned at its demand.
    for fid in range(4):
        assert make_solution(inst, {fid: inst.flow_map[fid].demand}).unsatisfied
    sol = exact_oracle(inst, delta=0.5)
    assert sol.controlled_ids == [1]
    assert sol.statuses[1] == pytest.approx(4.5)
    assert not sol.unsatisfied


def brute_force(instance, delta):
    """Plain enumeration, no pruning: every subset and every grid vector."""
    fm = instance.flow_map
    ids = sorted(fm)
    for k in range(len(ids) + 1):
        for subset in itertools.combinations(ids, k):
            grids = []
            for fid in subset:
                cap = min(instance.capacity(l) for l in fm[fid].path)
                steps = int((cap - fm[fid].demand) / delta + 1e-9)
                grids.append([fm[fid].demand + i * delta for i in range(steps + 1)])
            for rates in itertools.product(*grids):
                try:
                    sol = make_solution(instance, dict(zip(subset, rates)))
                except InfeasibleAllocation:
                    continue
                if not sol.unsatisfied:
                    return k
    raise AssertionError("no feasible subset")


def test_oracle_matches_unpruned_enumeration():
    rng = random.Random(8)
    checked = 0
    while checked < 25:
        n_links = rng.randint(1, 3)
        flows = []
        for _ in range(rng.randint(2, 4)):
            a = rng.randrange(n_links)
            b = rng.randrange(a, n_links)
            flows.append((tuple(range(a, b + 1)), float(rng.choice([1, 2, 3]))))
        probe = chain([1.0] * n_links, flows)
        caps = [max(probe.demand_sum(l), 1.0) + rng.choice([0, 0.5, 1, 2]) for l in range(n_links)]
        inst = chain(caps, flows)
        assert exact_oracle(inst, 0.5).controlled == brute_force(inst, 0.5)
        checked += 1


def test_oracle_symmetric_flows():
    # Four identical heavy flows plus identical light ones.
    flows = [((0,), 1.0)] * 3 + [((0, 1), 4.0)] * 2
    inst = chain([13.0, 20.0], flows)
    assert exact_oracle(inst).controlled == brute_force(inst, 0.25)


def test_oracle_size_guard():
    inst = generate(GenSpec(flows=20, seed=1))
    with pytest.raises(GuardError):
        exact_oracle(inst)


@pytest.mark.parametrize("seed", range(12))
def test_ordering_of_reference_counts(seed):
    inst = generate(GenSpec(topology="small", flows=5 + seed % 4, seed=seed))
    oracle = exact_oracle(inst)
    base = baseline(inst)
    heuristic = jfsrd.solve(inst)
    assert oracle.controlled <= base.controlled <= len(inst.flows)
    assert heuristic.controlled >= oracle.controlled
    assert not base.unsatisfied and not oracle.unsatisfied
