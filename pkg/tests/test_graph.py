"""Property graph store: operations and invariants."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from attackgraph.graph import (
    AmbiguousMatchError,
    GraphError,
    PropertyGraph,
    UnknownNodeError,
)


def test_create_node_is_matchable_by_label():
    g = PropertyGraph()
    node_id = g.create_node(
        {"ClinicTopology"},
        {"name": "Workstation 1", "subnet": "subnet 1", "floor": "floor 1"},
    )
    found = g.match_nodes({"ClinicTopology"})
    assert [n.id for n in found] == [node_id]
    assert found[0].attrs["subnet"] == "subnet 1"


def test_create_node_allows_empty_attrs():
    g = PropertyGraph()
    node_id = g.create_node({"X"})
    assert g.node(node_id).attrs == {}


def test_create_never_deduplicates():
    g = PropertyGraph()
    a = g.create_node({"X"}, {"name": "n"})
    b = g.create_node({"X"}, {"name": "n"})
    assert a != b


def test_create_requires_a_label():
    g = PropertyGraph()
    with pytest.raises(GraphError):
        g.create_node(set())


def test_merge_node_idempotent():
    g = PropertyGraph()
    first, created_first = g.merge_node({"Condition"}, {"name": "User/SuperUser(Database)"})
    second, created_second = g.merge_node({"Condition"}, {"name": "User/SuperUser(Database)"})
    assert (created_first, created_second) == (True, False)
    assert first == second


def test_merge_node_finds_created_node():
    g = PropertyGraph()
    node_id = g.create_node({"X", "Y"}, {"name": "n"})
    merged, created = g.merge_node({"X"}, {"name": "n"})
    assert (merged, created) == (node_id, False)


def test_merge_node_ambiguous_match_is_an_error():
    g = PropertyGraph()
    g.create_node({"X"}, {"name": "n"})
    g.create_node({"X"}, {"name": "n"})
    with pytest.raises(AmbiguousMatchError):
        g.merge_node({"X"}, {"name": "n"})


def test_add_and_remove_label():
    g = PropertyGraph()
    node_id = g.create_node({"ClinicTopology"}, {"name": "Workstation 1"})
    g.add_label(node_id, "EndDevice")
    assert g.match_nodes({"ClinicTopology", "EndDevice"})
    g.remove_label(node_id, "EndDevice")
    assert not g.match_nodes({"ClinicTopology", "EndDevice"})
    # removing an absent label is a quiet no-op
    g.remove_label(node_id, "EndDevice")


def test_label_ops_require_existing_node():
    g = PropertyGraph()
    with pytest.raises(UnknownNodeError):
        g.add_label(99, "X")
    with pytest.raises(UnknownNodeError):
        g.detach_delete(99)


def test_merge_edge_idempotent_on_full_key():
    g = PropertyGraph()
    a = g.create_node({"X"})
    b = g.create_node({"X"})
    first, created_first = g.merge_edge(a, b, "REACHES")
    second, created_second = g.merge_edge(a, b, "REACHES")
    assert first == second
    assert (created_first, created_second) == (True, False)
    # different attrs make a different edge, as do different directions
    g.merge_edge(a, b, "CONNECTS_TO", {"via": "TCP"})
    g.merge_edge(b, a, "CONNECTS_TO", {"via": "TCP"})
    assert len(list(g.edges())) == 3


def test_detach_delete_removes_incident_edges():
    g = PropertyGraph()
    exploit = g.create_node({"Exploit"}, {"name": "e"})
    c1 = g.create_node({"Condition"}, {"name": "c1"})
    c2 = g.create_node({"Condition"}, {"name": "c2"})
    post = g.create_node({"Condition"}, {"name": "post"})
    g.merge_edge(c1, exploit, "EXPLOITS")
    g.merge_edge(c2, exploit, "EXPLOITS")
    g.merge_edge(exploit, post, "LEADS")
    assert g.detach_delete(exploit) == 3
    assert not list(g.edges())
    # no dangling endpoints anywhere
    for edge in g.edges():
        assert g.has_node(edge.src) and g.has_node(edge.dst)


def test_detach_delete_isolated_node():
    g = PropertyGraph()
    a = g.create_node({"X"})
    b = g.create_node({"X"})
    c = g.create_node({"X"})
    g.merge_edge(b, c, "E")
    assert g.detach_delete(a) == 0
    assert len(list(g.edges())) == 1


def test_match_nodes_attribute_filters():
    g = PropertyGraph()
    g.create_node({"T", "EndDevice"}, {"name": "a", "floor": "floor 1"})
    g.create_node({"T", "EndDevice"}, {"name": "b", "floor": "floor 2"})
    g.create_node({"T", "Router"}, {"name": "r"})
    names = {n.name for n in g.match_nodes({"T", "EndDevice"}, {"floor": "floor 1"})}
    assert names == {"a"}
    assert len(g.match_nodes()) == 3


def test_match_list_attribute_by_containment():
    g = PropertyGraph()
    g.create_node({"D"}, {"name": "w", "accessibility": ["IP", "FTP"]})
    assert g.match_nodes({"D"}, {"accessibility": "FTP"})
    assert not g.match_nodes({"D"}, {"accessibility": "SSH"})
    # a list filter needs exact equality
    assert g.match_nodes({"D"}, {"accessibility": ["IP", "FTP"]})
    assert not g.match_nodes({"D"}, {"accessibility": ["FTP", "IP"]})


def test_path_exists_chain_and_attr_predicate():
    g = PropertyGraph()
    w1 = g.create_node({"D"}, {"name": "w1"})
    r1 = g.create_node({"D"}, {"name": "r1"})
    r2 = g.create_node({"D"}, {"name": "r2"})
    g.merge_edge(w1, r1, "CONNECTS_TO", {"via": "TCP"})
    g.merge_edge(r1, r2, "CONNECTS_TO", {"via": "TCP"})
    assert g.path_exists(w1, r2, {"CONNECTS_TO"}, {"via": "TCP"})
    assert not g.path_exists(w1, r2, {"CONNECTS_TO"}, {"via": "Bluetooth"})
    assert not g.path_exists(r2, w1, {"CONNECTS_TO"}, {"via": "TCP"})


def test_path_exists_needs_at_least_one_edge():
    g = PropertyGraph()
    a = g.create_node({"D"})
    assert not g.path_exists(a, a, {"E"})
    g.merge_edge(a, a, "E")
    assert g.path_exists(a, a, {"E"})


def test_path_exists_terminates_on_cycles():
    g = PropertyGraph()
    ids = [g.create_node({"D"}) for _ in range(4)]
    for i in range(4):
        g.merge_edge(ids[i], ids[(i + 1) % 4], "E")
    lonely = g.create_node({"D"})
    assert g.path_exists(ids[0], ids[3], {"E"})
    assert not g.path_exists(ids[0], lonely, {"E"})


def test_path_exists_max_hops():
    g = PropertyGraph()
    a, b, c = (g.create_node({"D"}) for _ in range(3))
    g.merge_edge(a, b, "E")
    g.merge_edge(b, c, "E")
    assert g.path_exists(a, c, {"E"}, max_hops=2)
    assert not g.path_exists(a, c, {"E"}, max_hops=1)


def test_path_exists_bounded_takes_cheapest_route():
    # a->b directly and a->c->b; the long route must not shadow the short one
    g = PropertyGraph()
    a, b, c, d = (g.create_node({"D"}) for _ in range(4))
    g.merge_edge(a, c, "E")
    g.merge_edge(c, b, "E")
    g.merge_edge(a, b, "E")
    g.merge_edge(b, d, "E")
    assert g.path_exists(a, d, {"E"}, max_hops=2)


def test_visit_counter_monotone():
    g = PropertyGraph()
    before = g.visits
    a = g.create_node({"D"}, {"name": "a"})
    assert g.visits > before
    before = g.visits
    g.match_nodes({"D"})
    assert g.visits > before
    before = g.visits
    g.node(a)
    assert g.visits > before


label_sets = st.sets(st.sampled_from(["A", "B", "C", "D"]), min_size=1, max_size=3)
attr_maps = st.dictionaries(
    st.sampled_from(["name", "kind", "floor"]),
    st.text(alphabet="xyz123", min_size=1, max_size=4),
    min_size=1,
    max_size=3,
)


@settings(max_examples=60, deadline=None)
@given(labels=label_sets, attrs=attr_maps)
def test_merge_node_twice_equals_once(labels, attrs):
    once = PropertyGraph()
    once.merge_node(labels, attrs)
    twice = PropertyGraph()
    twice.merge_node(labels, attrs)
    twice.merge_node(labels, attrs)
    assert len(list(twice.nodes())) == len(list(once.nodes())) == 1


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_filter_monotonicity(data):
    g = PropertyGraph()
    for _ in range(data.draw(st.integers(1, 8))):
        g.create_node(data.draw(label_sets), data.draw(attr_maps))
    l1 = data.draw(label_sets)
    l2 = data.draw(label_sets)
    narrow = {n.id for n in g.match_nodes(l1 | l2)}
    wide = {n.id for n in g.match_nodes(l1)}
    assert narrow <= wide


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_no_dangling_edges_after_deletes(data):
    g = PropertyGraph()
    ids = [g.create_node({"D"}, {"name": str(i)}) for i in range(6)]
    for _ in range(data.draw(st.integers(0, 12))):
        src = data.draw(st.sampled_from(ids))
        dst = data.draw(st.sampled_from(ids))
        g.merge_edge(src, dst, data.draw(st.sampled_from(["E", "F"])))
    alive = list(ids)
    for _ in range(data.draw(st.integers(0, 5))):
        victim = data.draw(st.sampled_from(ids))
        if victim in alive:
            g.detach_delete(victim)
            alive.remove(victim)
    for edge in g.edges():
        assert g.has_node(edge.src) and g.has_node(edge.dst)
