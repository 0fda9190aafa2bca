import json
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from ratectl.netmodel import (Flow, Instance, InstanceError, Link, Topology, dump_instance,
                              flows_on_link, load_instance, validate_instance)

from conftest import chain

DOCS = Path(__file__).resolve().parents[1] / "docs"


def minimal():
    return Instance(Topology(("a", "b"), (Link(0, "a", "b", 5.0),)), (Flow(0, (0,), 1.0),))


def test_minimal_instance_is_valid():
    assert validate_instance(minimal()) == []


def test_unknown_link_reported():
    inst = Instance(minimal().topology, (Flow(0, (99,), 1.0),))
    assert "unknown link 99 in flow 0" in validate_instance(inst)


def test_nonpositive_capacity_reported():
    inst = Instance(Topology(("a", "b"), (Link(0, "a", "b", 0.0),)), ())
    assert any("nonpositive capacity" in v for v in validate_instance(inst))


@pytest.mark.parametrize(
    "flows, needle",
    [
        ((Flow(0, (), 1.0),), "empty path"),
        ((Flow(0, (0,), 0.0),), "nonpositive demand"),
        ((Flow(0, (0,), 1.0, priority=0.0),), "nonpositive priority"),
        ((Flow(0, (0,), 1.0), Flow(0, (0,), 2.0)), "duplicate flow id 0"),
        ((Flow(0, (1, 0), 1.0),), "broken path"),
        ((Flow(0, (0, 1, 0), 1.0),), "repeated link"),
    ],
)
def test_flow_invariants(flows, needle):
    topo = Topology(("a", "b", "c"), (Link(0, "a", "b", 5.0), Link(1, "b", "c", 5.0)))
    assert any(needle in v for v in validate_instance(Instance(topo, flows)))


def test_topology_invariants():
    topo = Topology(("a", "b"), (Link(0, "a", "b", 1.0), Link(1, "a", "b", 1.0), Link(2, "a", "z", 1.0)))
    report = validate_instance(Instance(topo, ()))
    assert any("parallel link 1" in v for v in report)
    assert any("unknown node 'z'" in v for v in report)


def test_load_canonical_example():
    inst = load_instance((DOCS / "claranet_60.json").read_bytes())
    assert len(inst.topology.nodes) == 15
    assert len(inst.links) == 18
    assert len(inst.flows) == 60


def test_load_empty_flow_list():
    doc = {"nodes": ["a", "b"], "links": [{"id": 0, "src": "a", "dst": "b", "capacity": 3}], "flows": []}
    inst = load_instance(json.dumps(doc))
    assert inst.flows == ()


def test_truncated_json_names_offset():
    text = dump_instance(minimal())[:-7]
    with pytest.raises(InstanceError, match=r"byte offset \d+"):
        load_instance(text.encode())


def test_unknown_fields_rejected():
    doc = json.loads(dump_instance(minimal()))
    doc["links"][0]["colour"] = "red"
    with pytest.raises(InstanceError, match="unknown field"):
        load_instance(json.dumps(doc))


def test_invalid_instance_lists_violations():
    doc = json.loads(dump_instance(minimal()))
    doc["flows"][0]["path"] = [99]
    with pytest.raises(InstanceError) as info:
        load_instance(json.dumps(doc))
    assert info.value.violations == ["unknown link 99 in flow 0"]


def test_priority_defaults_to_one():
    doc = json.loads(dump_instance(minimal()))
    del doc["flows"][0]["priority"]
    assert load_instance(json.dumps(doc)).flows[0].priority == 1.0


def test_flows_on_link():
    inst = chain([5, 5, 5], [((0, 1), 1.0), ((1,), 1.0)])
    assert flows_on_link(inst, 1) == {0, 1}
    assert flows_on_link(inst, 0) == {0}
    assert flows_on_link(inst, 2) == set()
    with pytest.raises(KeyError):
        flows_on_link(inst, 7)


@st.composite
def instances(draw):
    n = draw(st.integers(1, 5))
    caps = draw(st.lists(st.floats(0.1, 1e3), min_size=n, max_size=n))
    flows = []
    for _ in range(draw(st.integers(0, 6))):
        a = draw(st.integers(0, n - 1))
        b = draw(st.integers(a, n - 1))
        flows.append((tuple(range(a, b + 1)), draw(st.floats(0.01, 100)),
                      draw(st.floats(0.1, 10))))
    return chain(caps, flows)


@settings(max_examples=60, deadline=None)
@given(instances())
def test_round_trip(inst):
    assert load_instance(dump_instance(inst)) == inst


@settings(max_examples=60, deadline=None)
@given(instances())
def test_link_membership_totals(inst):
    assert sum(len(flows_on_link(inst, l.id)) for l in inst.links) == sum(len(f.path) for f in inst.flows)
