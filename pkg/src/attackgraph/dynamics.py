"""System join and leave: merging and demerging topologies and attack graphs.

A merge session connects two topologies with generation-tagged
NEW{k}_CONNECTS_TO edges (TCP towards the other side's routers for
IP-capable devices, Bluetooth between Bluetooth-capable devices within the
vicinity filter).  The session is recorded as a node in the graph itself, so
a saved workspace round-trips open sessions.  Demerging deletes exactly the
session's edges and labels, restoring the pre-merge graphs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

from .attackgen import (
    MERGED_ATTACK_LABEL,
    AttackGraphStats,
    GenerationParams,
    generate,
)
from .graph import PropertyGraph, attr_matches
from .reachability import REACHES, generation_edge_type

MERGED_TOPOLOGY_LABEL = "MergedTopologies"
SESSION_LABEL = "MergeSession"


class DynamicsError(Exception):
    pass


class UnknownTopologyError(DynamicsError):
    pass


class SessionError(DynamicsError):
    """The referenced merge session is unknown or already demerged."""


@dataclass
class MergeSession:
    session_id: int
    edge_type: str
    topologies: tuple
    vicinity: dict = field(default_factory=dict)
    created_edges: int = 0
    # every device touched by this session's cross edges; MergedTopologies
    # labels are reference-counted across active sessions through these lists
    labelled_nodes: list = field(default_factory=list)


def _bluetooth_capable(node) -> bool:
    return attr_matches(node.attrs.get("accessibility"), "Bluetooth")


def _ip_capable(node) -> bool:
    return attr_matches(node.attrs.get("accessibility"), "IP")


def _next_session_id(g: PropertyGraph) -> int:
    ids = [int(n.attrs["sessionId"]) for n in g.match_nodes({SESSION_LABEL})]
    return max(ids, default=0) + 1


def _encode_vicinity(vicinity: Mapping) -> list:
    return [f"{k}={v}" for k, v in sorted(vicinity.items())]


def _decode_vicinity(encoded: list) -> dict:
    return dict(item.split("=", 1) for item in encoded)


def _session_node(g: PropertyGraph, session_id: int):
    return g.find_node({SESSION_LABEL}, {"sessionId": str(session_id)})


def get_session(g: PropertyGraph, session_id: int) -> MergeSession:
    node = _session_node(g, session_id)
    if node is None:
        raise SessionError(f"merge session {session_id} is unknown or already demerged")
    return MergeSession(
        session_id=session_id,
        edge_type=node.attrs["edgeType"],
        topologies=tuple(node.attrs["topologies"]),
        vicinity=_decode_vicinity(node.attrs.get("vicinity") or []),
        created_edges=int(node.attrs["createdEdges"]),
        labelled_nodes=list(node.attrs.get("labelledNodes") or []),
    )


def active_sessions(g: PropertyGraph) -> list:
    ids = sorted(int(n.attrs["sessionId"]) for n in g.match_nodes({SESSION_LABEL}))
    return [get_session(g, i) for i in ids]


def merge_topologies(g: PropertyGraph, topo_a: str, topo_b: str,
                     vicinity: Optional[Mapping] = None) -> MergeSession:
    """Connect two topologies with a fresh generation of cross edges.

    TCP edges pair each IP-capable end device with every router of the other
    topology; Bluetooth edges pair Bluetooth-capable end devices across the
    topologies where the topo_b side matches the vicinity filter.  All
    touched devices gain the MergedTopologies label.
    """
    if topo_a == topo_b:
        raise DynamicsError("cannot merge a topology with itself")
    for topo in (topo_a, topo_b):
        if not g.match_nodes({topo}):
            raise UnknownTopologyError(f"no nodes carry topology label {topo!r}")
    vicinity = dict(vicinity or {})
    session_id = _next_session_id(g)
    edge_type = generation_edge_type(session_id)

    created = 0
    labelled: list = []

    def connect(a_id: int, b_id: int, via: str) -> None:
        nonlocal created
        for src, dst in ((a_id, b_id), (b_id, a_id)):
            _, was_new = g.merge_edge(src, dst, edge_type, {"via": via})
            created += int(was_new)
        for node_id in (a_id, b_id):
            node = g.node(node_id)
            if node.name not in labelled:
                labelled.append(node.name)
            if MERGED_TOPOLOGY_LABEL not in node.labels:
                g.add_label(node_id, MERGED_TOPOLOGY_LABEL)

    for side, other in ((topo_a, topo_b), (topo_b, topo_a)):
        ip_devices = [n for n in g.match_nodes({"EndDevice", side}) if _ip_capable(n)]
        routers = g.match_nodes({"Router", other})
        for dev in ip_devices:
            for router in routers:
                connect(dev.id, router.id, "TCP")

    bt_a = [n for n in g.match_nodes({"EndDevice", topo_a}) if _bluetooth_capable(n)]
    bt_b = [n for n in g.match_nodes({"EndDevice", topo_b}, vicinity) if _bluetooth_capable(n)]
    for dev_a in bt_a:
        for dev_b in bt_b:
            connect(dev_a.id, dev_b.id, "Bluetooth")

    g.create_node(
        {SESSION_LABEL},
        {
            "name": f"merge-session-{session_id}",
            "sessionId": str(session_id),
            "edgeType": edge_type,
            "topologies": [topo_a, topo_b],
            "vicinity": _encode_vicinity(vicinity),
            "createdEdges": str(created),
            "labelledNodes": labelled,
        },
    )
    return MergeSession(session_id, edge_type, (topo_a, topo_b), vicinity, created, labelled)


def merge_attack_graphs(g: PropertyGraph, session: Union[MergeSession, int],
                        target_topology: str, target_attack_label: str) -> AttackGraphStats:
    """Re-run attack graph generation for one target after a merge.

    Existing nodes are reused and keep their labels; everything newly created
    additionally carries MergedAttackGraphs so it can be demerged wholesale.
    Requires the session's incremental reachability to have run first.
    """
    session_id = session.session_id if isinstance(session, MergeSession) else session
    node = _session_node(g, session_id)
    if node is None:
        raise SessionError(f"merge session {session_id} is unknown or already demerged")
    if node.attrs.get("reachabilityUpdated") != "true":
        raise SessionError(
            f"merge session {session_id} has no incremental reachability yet"
        )
    params = GenerationParams(target_topology, target_attack_label, merged=True)
    return generate(g, params)


def demerge_topology(g: PropertyGraph, session: Union[MergeSession, int]) -> int:
    """Undo one merge session exactly.

    Deletes the session's NEW{k}_CONNECTS_TO edges and the REACHES edges its
    incremental computation tagged, removes MergedTopologies labels that no
    other active session still claims, and drops the session record.
    Returns the number of edges removed.
    """
    session_id = session.session_id if isinstance(session, MergeSession) else session
    node = _session_node(g, session_id)
    if node is None:
        raise SessionError(f"merge session {session_id} is unknown or already demerged")
    record = get_session(g, session_id)

    removed = 0
    for edge in list(g.edges_of_type(record.edge_type)):
        g.delete_edge(edge.id)
        removed += 1
    tag = str(session_id)
    for edge in list(g.edges_of_type(REACHES)):
        if edge.attrs.get("generation") == tag:
            g.delete_edge(edge.id)
            removed += 1

    still_claimed = set()
    for other in active_sessions(g):
        if other.session_id != session_id:
            still_claimed.update(other.labelled_nodes)
    for name in record.labelled_nodes:
        if name in still_claimed:
            continue
        device = g.find_node({MERGED_TOPOLOGY_LABEL}, {"name": name})
        if device is not None:
            g.remove_label(device.id, MERGED_TOPOLOGY_LABEL)

    g.detach_delete(node.id)
    return removed


def demerge_attack_graphs(g: PropertyGraph, topology_filter: Optional[str] = None) -> int:
    """Detach-delete merged attack graph nodes, restoring the originals.

    With a topology filter only that topology's merged nodes are removed.
    Returns the number of nodes deleted.
    """
    labels = {MERGED_ATTACK_LABEL}
    if topology_filter:
        labels.add(topology_filter)
    nodes = g.match_nodes(labels)
    for node in nodes:
        g.detach_delete(node.id)
    return len(nodes)
