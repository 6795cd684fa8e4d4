"""Exploit dependency attack graph generation and pruning.

The attack graph lives in the same property graph as the topology it was
derived from, under its own label.  Condition nodes are privileges held on a
device ("User/SuperUser(X)") or protocol capabilities between a device pair
("FTP(A, B)"); Exploit nodes name a CVE exploited from one device against
another.  EXPLOITS edges run conditions -> exploit, a LEADS edge runs
exploit -> granted privilege.

Generation iterates to a fixpoint: every newly granted privilege can enable
further exploits.  Cycle pruning and orphan-condition cleanup are separate,
explicitly invoked steps; merged-graph analyses rely on the unpruned graph.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .graph import Node, PropertyGraph

log = logging.getLogger(__name__)

EXPLOITS = "EXPLOITS"
LEADS = "LEADS"
CONDITION = "Condition"
EXPLOIT = "Exploit"
MERGED_ATTACK_LABEL = "MergedAttackGraphs"

PRIVILEGE_TOKENS = ("User", "SuperUser")


@dataclass
class GenerationParams:
    target_topology: str
    attack_graph_label: str
    merged: bool = False


@dataclass
class AttackGraphStats:
    conditions_created: int = 0
    exploits_created: int = 0
    edges_created: int = 0
    iterations: int = 0

    @property
    def nodes_created(self) -> int:
        return self.conditions_created + self.exploits_created


def privilege_condition(device_name: str) -> str:
    return f"User/SuperUser({device_name})"


def protocol_condition(protocol: str, src: str, dst: str) -> str:
    return f"{protocol}({src}, {dst})"


def exploit_name(cve: str, src: str, dst: str) -> str:
    return f"{cve}({src}, {dst})"


def _split_preconditions(pre: list) -> list:
    """Protocol entries of a precondition list (privilege tokens filtered out)."""
    return [p for p in pre if p not in PRIVILEGE_TOKENS]


def _is_privileged(g: PropertyGraph, device_name: str) -> bool:
    return g.find_node({CONDITION}, {"name": privilege_condition(device_name)}) is not None


class _Builder:
    """Tracks created counts while merging nodes/edges under run labels."""

    def __init__(self, g: PropertyGraph, params: GenerationParams):
        self.g = g
        self.params = params
        self.stats = AttackGraphStats()

    def _extra_labels(self):
        labels = [self.params.attack_graph_label]
        if self.params.merged:
            labels.append(MERGED_ATTACK_LABEL)
        return labels

    def merge_condition(self, name: str) -> int:
        node_id, created = self.g.merge_node({CONDITION}, {"name": name})
        if created:
            for label in self._extra_labels():
                self.g.add_label(node_id, label)
            self.stats.conditions_created += 1
        return node_id

    def merge_exploit(self, name: str) -> int:
        node_id, created = self.g.merge_node({EXPLOIT}, {"name": name})
        if created:
            for label in self._extra_labels():
                self.g.add_label(node_id, label)
            self.stats.exploits_created += 1
        return node_id

    def merge_edge(self, src: int, dst: int, edge_type: str) -> None:
        _, created = self.g.merge_edge(src, dst, edge_type)
        if created:
            self.stats.edges_created += 1


def generate(g: PropertyGraph, params: GenerationParams) -> AttackGraphStats:
    """Build the attack graph for one target topology.

    Privilege conditions are seeded from target-topology devices whose
    `privilege` attribute marks the attacker's foothold.  Each round then
    considers every device the attacker holds a privilege condition on
    (whatever attack graph that condition belongs to), every reachable
    target-topology device, and every vulnerability there whose protocol
    preconditions all appear in the attacking device's accessibility list.
    Rounds repeat until nothing new is created.
    """
    build = _Builder(g, params)
    targets = g.match_nodes({"EndDevice", params.target_topology})
    if not any(g.in_edges(t.id, ["REACHES"]) or g.out_edges(t.id, ["REACHES"]) for t in targets):
        log.warning("no REACHES edges touch %s; attack graph will be empty",
                    params.target_topology)

    for device in targets:
        if device.attrs.get("privilege") in PRIVILEGE_TOKENS:
            build.merge_condition(privilege_condition(device.name))

    while True:
        created_before = (build.stats.conditions_created,
                          build.stats.exploits_created,
                          build.stats.edges_created)
        _sweep(g, build, targets)
        if created_before == (build.stats.conditions_created,
                              build.stats.exploits_created,
                              build.stats.edges_created):
            break
        build.stats.iterations += 1
    return build.stats


def _sweep(g: PropertyGraph, build: _Builder, targets: list) -> None:
    sources = [n for n in g.match_nodes({"EndDevice"}) if _is_privileged(g, n.name)]
    for n in sources:
        accessibility = n.attrs.get("accessibility") or []
        for m in targets:
            if m.id == n.id or not g.has_edge(n.id, m.id, "REACHES"):
                continue
            for has_edge in g.out_edges(m.id, ["HAS"]):
                vul = g.node(has_edge.dst)
                protocols = _split_preconditions(vul.attrs.get("preConditions") or [])
                if not all(p in accessibility for p in protocols):
                    continue
                _materialise_exploit(build, n, m, vul, protocols)


def _materialise_exploit(build: _Builder, n: Node, m: Node, vul: Node, protocols: list) -> None:
    source_priv = build.merge_condition(privilege_condition(n.name))
    pre_ids = [build.merge_condition(protocol_condition(p, n.name, m.name)) for p in protocols]
    exploit_id = build.merge_exploit(exploit_name(vul.name, n.name, m.name))
    build.merge_edge(source_priv, exploit_id, EXPLOITS)
    for pre_id in pre_ids:
        build.merge_edge(pre_id, exploit_id, EXPLOITS)
    # every post-condition is a privilege outcome on the attacked device
    for _ in vul.attrs.get("postConditions") or []:
        post_id = build.merge_condition(privilege_condition(m.name))
        build.merge_edge(exploit_id, post_id, LEADS)


def _attack_nodes(g: PropertyGraph, label: str) -> list:
    return g.match_nodes({label})


def _attack_out(g: PropertyGraph, node_id: int, members: set) -> list:
    return [e for e in g.out_edges(node_id, [EXPLOITS, LEADS]) if e.dst in members]


def _shortest_return_path(g: PropertyGraph, start: int, goal: int, members: set) -> Optional[list]:
    """BFS path start -> ... -> goal inside the attack graph, as node ids."""
    parents = {start: None}
    queue = deque([start])
    while queue:
        here = queue.popleft()
        if here == goal:
            path = [here]
            while parents[here] is not None:
                here = parents[here]
                path.append(here)
            return list(reversed(path))
        for edge in _attack_out(g, here, members):
            if edge.dst not in parents:
                parents[edge.dst] = here
                queue.append(edge.dst)
    return None


def prune_cycles(g: PropertyGraph, attack_graph_label: str) -> int:
    """Remove exploit nodes sitting on directed cycles until none remain.

    Each round locates an edge whose endpoints admit a return path, takes the
    shortest such cycle, and detach-deletes the exploit nodes on it.
    """
    removed = 0
    while True:
        members = {n.id for n in _attack_nodes(g, attack_graph_label)}
        cycle = _find_cycle(g, members)
        if cycle is None:
            return removed
        exploits = [nid for nid in cycle if EXPLOIT in g.node(nid).labels]
        if not exploits:
            raise RuntimeError("attack graph cycle without exploit nodes")
        for node_id in exploits:
            g.detach_delete(node_id)
            removed += 1


def _find_cycle(g: PropertyGraph, members: set) -> Optional[list]:
    # the cycle is the closing edge m1 -> edge.dst plus the return path, so
    # its edge count equals len(back); ties keep the first find (name order)
    by_name = sorted(members, key=lambda nid: g.node(nid).name)
    best: Optional[list] = None
    for m1 in by_name:
        for edge in _attack_out(g, m1, members):
            back = _shortest_return_path(g, edge.dst, m1, members)
            if back is not None and (best is None or len(back) < len(best)):
                best = back
    return best


def remove_orphan_conditions(g: PropertyGraph, attack_graph_label: str) -> int:
    """Delete condition nodes of the attack graph left with no edge at all."""
    removed = 0
    for node in _attack_nodes(g, attack_graph_label):
        if CONDITION in node.labels and g.degree(node.id) == 0:
            g.detach_delete(node.id)
            removed += 1
    return removed
