"""Dynamic topology, reachability and attack graphs for IoT networks."""

from .graph import (
    AmbiguousMatchError,
    Edge,
    GraphError,
    Node,
    PropertyGraph,
    UnknownNodeError,
)
from .scenario import (
    DeviceSpec,
    FirewallRuleSpec,
    LinkSpec,
    ScenarioDoc,
    ScenarioError,
    VulnerabilitySpec,
    expand_firewall_rules,
    load_scenario,
    load_scenario_file,
    parse_scenario,
)
from .reachability import (
    ReachabilityError,
    ReachabilityReport,
    UnknownGenerationError,
    compute_full,
    compute_incremental,
    generation_edge_type,
    reaches,
)
from .attackgen import (
    AttackGraphStats,
    GenerationParams,
    exploit_name,
    generate,
    privilege_condition,
    protocol_condition,
    prune_cycles,
    remove_orphan_conditions,
)
from .dynamics import (
    DynamicsError,
    MergeSession,
    SessionError,
    UnknownTopologyError,
    active_sessions,
    demerge_attack_graphs,
    demerge_topology,
    get_session,
    merge_attack_graphs,
    merge_topologies,
)
from .metrics import (
    AttackPath,
    count_attack_paths,
    enumerate_attack_paths,
    path_length_histogram,
    shortest_attack_path,
)
from .archive import canonical_form, load_graph, loads, save_graph
from .dotexport import export_dot

__version__ = "0.1.0"

__all__ = [
    "AmbiguousMatchError",
    "AttackGraphStats",
    "AttackPath",
    "DeviceSpec",
    "DynamicsError",
    "Edge",
    "FirewallRuleSpec",
    "GenerationParams",
    "GraphError",
    "LinkSpec",
    "MergeSession",
    "Node",
    "PropertyGraph",
    "ReachabilityError",
    "ReachabilityReport",
    "ScenarioDoc",
    "ScenarioError",
    "SessionError",
    "UnknownGenerationError",
    "UnknownNodeError",
    "UnknownTopologyError",
    "active_sessions",
    "canonical_form",
    "compute_full",
    "compute_incremental",
    "count_attack_paths",
    "demerge_attack_graphs",
    "demerge_topology",
    "enumerate_attack_paths",
    "expand_firewall_rules",
    "exploit_name",
    "export_dot",
    "generate",
    "generation_edge_type",
    "get_session",
    "load_graph",
    "load_scenario",
    "load_scenario_file",
    "loads",
    "merge_attack_graphs",
    "merge_topologies",
    "parse_scenario",
    "path_length_histogram",
    "privilege_condition",
    "protocol_condition",
    "prune_cycles",
    "reaches",
    "remove_orphan_conditions",
    "save_graph",
    "shortest_attack_path",
    "VulnerabilitySpec",
]
