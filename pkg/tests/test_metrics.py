"""Path metrics: enumeration, counting, histogram, shortest path."""

import random

import pytest

from attackgraph import (
    PropertyGraph,
    canonical_form,
    count_attack_paths,
    enumerate_attack_paths,
    path_length_histogram,
    shortest_attack_path,
)
from attackgraph.attackgen import CONDITION, EXPLOIT, EXPLOITS, LEADS

from .conftest import ATTACK_LABELS, run_floor_merge
from .oracles import all_simple_paths


def test_clinic_count_and_histogram(clinic_graph):
    assert count_attack_paths(clinic_graph, "Attacker Machine", "Database",
                              ["ClinicAttackGraph"]) == 2
    assert path_length_histogram(clinic_graph, "Attacker Machine", "Database",
                                 ["ClinicAttackGraph"]) == {6: 2}


def test_clinic_paths_are_the_two_published_chains(clinic_graph):
    paths = enumerate_attack_paths(clinic_graph, "Attacker Machine", "Database",
                                   ["ClinicAttackGraph"])
    assert [p.names for p in paths] == [
        [
            "User/SuperUser(Attacker Machine)",
            "CVE-2017-6753(Attacker Machine, Workstation 1)",
            "User/SuperUser(Workstation 1)",
            "CVE-2021-41635(Workstation 1, Workstation 2)",
            "User/SuperUser(Workstation 2)",
            "CVE-2009-2446(Workstation 2, Database)",
            "User/SuperUser(Database)",
        ],
        [
            "User/SuperUser(Attacker Machine)",
            "CVE-2017-6753(Attacker Machine, Workstation 1)",
            "User/SuperUser(Workstation 1)",
            "CVE-2022-30318(Workstation 1, Workstation 3)",
            "User/SuperUser(Workstation 3)",
            "CVE-2009-2446(Workstation 3, Database)",
            "User/SuperUser(Database)",
        ],
    ]


def test_patient_single_path(patient_graph):
    paths = enumerate_attack_paths(patient_graph, "Smart Phone", "Smart Watch",
                                   ["PatientAttackGraph"])
    assert len(paths) == 1
    assert paths[0].names == [
        "User/SuperUser(Smart Phone)",
        "CVE-2017-1000251(Smart Phone, Smart Watch)",
        "User/SuperUser(Smart Watch)",
    ]
    assert paths[0].length == 2


def test_floor1_merged_metrics(base_graph):
    run_floor_merge(base_graph, "floor 1")
    assert count_attack_paths(base_graph, "Smart Phone", "Database", ATTACK_LABELS) == 8
    assert path_length_histogram(base_graph, "Smart Phone", "Database",
                                 ATTACK_LABELS) == {6: 2, 8: 4, 10: 2}
    length, path = shortest_attack_path(base_graph, "Smart Phone", "Database", ATTACK_LABELS)
    assert length == 6
    assert path.names[0] == "User/SuperUser(Smart Phone)"
    assert path.names[-1] == "User/SuperUser(Database)"


def test_floor2_merged_metrics(base_graph):
    run_floor_merge(base_graph, "floor 2")
    assert count_attack_paths(base_graph, "Smart Phone", "Database", ATTACK_LABELS) == 2
    length, _ = shortest_attack_path(base_graph, "Smart Phone", "Database", ATTACK_LABELS)
    assert length == 4


def test_floor3_no_paths(base_graph):
    run_floor_merge(base_graph, "floor 3")
    assert count_attack_paths(base_graph, "Smart Phone", "Database", ATTACK_LABELS) == 0
    assert shortest_attack_path(base_graph, "Smart Phone", "Database", ATTACK_LABELS) is None
    assert path_length_histogram(base_graph, "Smart Phone", "Database", ATTACK_LABELS) == {}


def test_start_equals_end_yields_nothing(clinic_graph):
    assert enumerate_attack_paths(clinic_graph, "Database", "Database",
                                  ["ClinicAttackGraph"]) == []


def test_absent_anchor_yields_nothing(clinic_graph):
    # the kiosk never gets attacked from the internet side in the pruned view;
    # a device with no privilege condition under the label has no paths
    assert enumerate_attack_paths(clinic_graph, "Ghost Device", "Database",
                                  ["ClinicAttackGraph"]) == []


def test_label_scope_is_respected(base_graph):
    run_floor_merge(base_graph, "floor 1")
    # confined to the patient graph there is no route into the clinic
    assert count_attack_paths(base_graph, "Smart Phone", "Database",
                              ["PatientAttackGraph"]) == 0
    # the start anchor lives outside the clinic label, so nothing is found
    assert count_attack_paths(base_graph, "Smart Phone", "Database",
                              ["ClinicAttackGraph"]) == 0


def test_metric_consistency(base_graph):
    run_floor_merge(base_graph, "floor 1")
    paths = enumerate_attack_paths(base_graph, "Smart Phone", "Database", ATTACK_LABELS)
    histogram = path_length_histogram(base_graph, "Smart Phone", "Database", ATTACK_LABELS)
    count = count_attack_paths(base_graph, "Smart Phone", "Database", ATTACK_LABELS)
    assert count == len(paths) == sum(histogram.values())
    shortest = shortest_attack_path(base_graph, "Smart Phone", "Database", ATTACK_LABELS)
    assert shortest[0] == min(p.length for p in paths)
    assert all(p.length % 2 == 0 for p in paths)


def test_paths_alternate_condition_exploit(base_graph):
    run_floor_merge(base_graph, "floor 1")
    for path in enumerate_attack_paths(base_graph, "Smart Phone", "Database", ATTACK_LABELS):
        for i, node_id in enumerate(path.node_ids):
            labels = base_graph.node(node_id).labels
            assert (CONDITION in labels) if i % 2 == 0 else (EXPLOIT in labels)


def test_metrics_leave_graph_unchanged(base_graph):
    run_floor_merge(base_graph, "floor 1")
    before = canonical_form(base_graph)
    enumerate_attack_paths(base_graph, "Smart Phone", "Database", ATTACK_LABELS)
    shortest_attack_path(base_graph, "Smart Phone", "Database", ATTACK_LABELS)
    path_length_histogram(base_graph, "Smart Phone", "Database", ATTACK_LABELS)
    assert canonical_form(base_graph) == before


def random_attack_shaped_graph(rng: random.Random):
    """A small condition/exploit layered digraph plus its raw adjacency."""
    g = PropertyGraph()
    conditions = [g.create_node({CONDITION, "L"}, {"name": f"c{i}"}) for i in range(6)]
    exploits = [g.create_node({EXPLOIT, "L"}, {"name": f"e{i}"}) for i in range(6)]
    adjacency = {}
    for exploit in exploits:
        feeders = rng.sample(conditions, rng.randint(1, 2))
        target = rng.choice(conditions)
        for feeder in feeders:
            g.merge_edge(feeder, exploit, EXPLOITS)
            adjacency.setdefault(feeder, set()).add(exploit)
        g.merge_edge(exploit, target, LEADS)
        adjacency.setdefault(exploit, set()).add(target)
    return g, adjacency, conditions


@pytest.mark.parametrize("seed", range(15))
def test_enumeration_matches_dfs_oracle(seed):
    rng = random.Random(4000 + seed)
    g, adjacency, conditions = random_attack_shaped_graph(rng)
    start, goal = conditions[0], conditions[1]
    g.node(start).attrs["name"] = "User/SuperUser(S)"
    g.node(goal).attrs["name"] = "User/SuperUser(T)"
    got = [p.node_ids for p in enumerate_attack_paths(g, "S", "T", ["L"])]
    want = all_simple_paths(adjacency, start, goal)
    assert sorted(map(tuple, got)) == sorted(map(tuple, want))
