"""Shared fixtures: the clinic/patient scenario pair and derived graphs."""

from __future__ import annotations

import importlib.resources

import pytest

from attackgraph import (
    GenerationParams,
    PropertyGraph,
    compute_full,
    compute_incremental,
    generate,
    load_scenario,
    merge_attack_graphs,
    merge_topologies,
    parse_scenario,
)

ATTACK_LABELS = ["PatientAttackGraph", "ClinicAttackGraph", "MergedAttackGraphs"]


def scenario_text(name: str) -> str:
    path = importlib.resources.files("attackgraph") / "scenarios" / f"{name}.yaml"
    return path.read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def clinic_doc():
    return parse_scenario(scenario_text("clinic"))


@pytest.fixture(scope="session")
def patient_doc():
    return parse_scenario(scenario_text("patient"))


def build_topology_graph(*docs) -> PropertyGraph:
    g = PropertyGraph()
    for doc in docs:
        load_scenario(doc, g)
    return g


def build_base_graph(clinic_doc, patient_doc) -> PropertyGraph:
    """Both topologies, reachability, and both standalone attack graphs."""
    g = build_topology_graph(clinic_doc, patient_doc)
    compute_full(g, ["ClinicTopology"])
    compute_full(g, ["PatientTopology"])
    generate(g, GenerationParams("ClinicTopology", "ClinicAttackGraph"))
    generate(g, GenerationParams("PatientTopology", "PatientAttackGraph"))
    return g


def run_floor_merge(g: PropertyGraph, floor: str, targets=(("ClinicTopology", "ClinicAttackGraph"),)):
    """Merge the patient into the clinic at one floor and update the graphs."""
    session = merge_topologies(g, "PatientTopology", "ClinicTopology", {"floor": floor})
    report = compute_incremental(g, session.session_id)
    for target_topology, target_label in targets:
        merge_attack_graphs(g, session, target_topology, target_label)
    return session, report


@pytest.fixture()
def clinic_graph(clinic_doc):
    g = build_topology_graph(clinic_doc)
    compute_full(g, ["ClinicTopology"])
    generate(g, GenerationParams("ClinicTopology", "ClinicAttackGraph"))
    return g


@pytest.fixture()
def patient_graph(patient_doc):
    g = build_topology_graph(patient_doc)
    compute_full(g, ["PatientTopology"])
    generate(g, GenerationParams("PatientTopology", "PatientAttackGraph"))
    return g


@pytest.fixture()
def base_graph(clinic_doc, patient_doc):
    return build_base_graph(clinic_doc, patient_doc)
