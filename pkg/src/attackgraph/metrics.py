"""Path-based risk metrics over attack graphs.

All metrics are anchored at the privilege conditions of a start and an end
device and consider simple directed paths through nodes carrying at least
one of the requested attack graph labels.  Read-only: nothing here mutates
the graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .attackgen import CONDITION, EXPLOITS, LEADS, privilege_condition
from .graph import PropertyGraph


@dataclass
class AttackPath:
    node_ids: list
    names: list

    @property
    def length(self) -> int:
        return len(self.node_ids) - 1


def _anchors(g: PropertyGraph, device: str, labels: set) -> list:
    wanted = privilege_condition(device)
    return [
        n.id for n in g.match_nodes({CONDITION}, {"name": wanted})
        if labels & n.labels
    ]


def enumerate_attack_paths(g: PropertyGraph, start_device: str, end_device: str,
                           labels: Iterable[str]) -> list:
    """All simple directed paths between the two privilege conditions.

    A node is traversable when it carries any of the given labels; paths are
    returned sorted by their node-name sequence.
    """
    labels = set(labels)
    starts = _anchors(g, start_device, labels)
    ends = set(_anchors(g, end_device, labels))
    paths: list = []
    for start in starts:
        if start in ends:
            continue  # a path needs at least one edge
        _dfs(g, start, ends, labels, [start], {start}, paths)
    paths.sort(key=lambda p: p.names)
    return paths


def _dfs(g: PropertyGraph, here: int, ends: set, labels: set,
         trail: list, on_trail: set, paths: list) -> None:
    for edge in g.out_edges(here, [EXPLOITS, LEADS]):
        nxt = edge.dst
        if nxt in on_trail:
            continue
        node = g.node(nxt)
        if not (labels & node.labels):
            continue
        trail.append(nxt)
        on_trail.add(nxt)
        if nxt in ends:
            paths.append(AttackPath(list(trail), [g.node(n).name for n in trail]))
        else:
            _dfs(g, nxt, ends, labels, trail, on_trail, paths)
        trail.pop()
        on_trail.discard(nxt)


def count_attack_paths(g: PropertyGraph, start_device: str, end_device: str,
                       labels: Iterable[str]) -> int:
    return len(enumerate_attack_paths(g, start_device, end_device, labels))


def path_length_histogram(g: PropertyGraph, start_device: str, end_device: str,
                          labels: Iterable[str]) -> dict:
    """Map from path length (edge count) to the number of paths of that length."""
    histogram: dict = {}
    for path in enumerate_attack_paths(g, start_device, end_device, labels):
        histogram[path.length] = histogram.get(path.length, 0) + 1
    return dict(sorted(histogram.items()))


def shortest_attack_path(g: PropertyGraph, start_device: str, end_device: str,
                         labels: Iterable[str]) -> Optional[tuple]:
    """(length, path) for a minimum-edge path, or None when disconnected.

    Ties break towards the lexicographically smallest node-name sequence,
    which the sorted enumeration provides.
    """
    paths = enumerate_attack_paths(g, start_device, end_device, labels)
    if not paths:
        return None
    best = min(paths, key=lambda p: (p.length, p.names))
    return best.length, best
