"""In-process labelled property graph.

Nodes carry a set of text labels and a map of attributes whose values are
either a single string or an ordered list of strings.  Directed edges carry a
type and their own attribute map.  Every read that examines a node or
traverses an edge bumps a visit counter, which stands in for storage-engine
cost when comparing full and incremental computations.

The graph is a single-writer structure: concurrent readers may share a
snapshot, mutation requires exclusive access.  There is no internal locking.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Union

AttrValue = Union[str, list]


class GraphError(Exception):
    """Base error for graph operations."""


class UnknownNodeError(GraphError):
    """Raised when an operation references a node id that does not exist."""


class AmbiguousMatchError(GraphError):
    """Raised when merge_node finds more than one matching node."""


@dataclass
class Node:
    id: int
    labels: set = field(default_factory=set)
    attrs: dict = field(default_factory=dict)

    @property
    def name(self) -> str:
        """The `name` attribute, or an empty string when unset."""
        value = self.attrs.get("name", "")
        return value if isinstance(value, str) else ""


@dataclass
class Edge:
    id: int
    src: int
    dst: int
    edge_type: str
    attrs: dict = field(default_factory=dict)


def attr_matches(value: Optional[AttrValue], wanted: AttrValue) -> bool:
    """Filter semantics for attribute values.

    A string filter matches an equal string, or a list that contains it.
    A list filter matches only an equal list.  A missing attribute never
    matches.
    """
    if value is None:
        return False
    if isinstance(wanted, list):
        return isinstance(value, list) and value == wanted
    if isinstance(value, list):
        return wanted in value
    return value == wanted


def attrs_match(attrs: Mapping, wanted: Mapping) -> bool:
    return all(attr_matches(attrs.get(k), v) for k, v in wanted.items())


class PropertyGraph:
    """Labelled nodes, typed directed edges, and visit-count instrumentation."""

    def __init__(self) -> None:
        self._nodes: dict[int, Node] = {}
        self._edges: dict[int, Edge] = {}
        self._out: dict[int, dict[str, list[int]]] = {}
        self._in: dict[int, dict[str, list[int]]] = {}
        self._label_index: dict[str, set[int]] = {}
        self._type_index: dict[str, list[int]] = {}
        self._next_node_id = 1
        self._next_edge_id = 1
        self.visits = 0

    # -- bookkeeping -------------------------------------------------------

    def _visit(self, n: int = 1) -> None:
        self.visits += n

    def _require(self, node_id: int) -> Node:
        node = self._nodes.get(node_id)
        if node is None:
            raise UnknownNodeError(f"no node with id {node_id}")
        return node

    def _index_label(self, node_id: int, label: str) -> None:
        self._label_index.setdefault(label, set()).add(node_id)

    def _unindex_label(self, node_id: int, label: str) -> None:
        ids = self._label_index.get(label)
        if ids is not None:
            ids.discard(node_id)
            if not ids:
                del self._label_index[label]

    # -- node operations ---------------------------------------------------

    def create_node(self, labels: Iterable[str], attrs: Optional[Mapping] = None) -> int:
        """Create a fresh node; never reuses ids, never deduplicates."""
        labels = set(labels)
        if not labels:
            raise GraphError("a node needs at least one label")
        node_id = self._next_node_id
        self._next_node_id += 1
        self._nodes[node_id] = Node(node_id, labels, dict(attrs or {}))
        self._out[node_id] = {}
        self._in[node_id] = {}
        for label in labels:
            self._index_label(node_id, label)
        self._visit()
        return node_id

    def merge_node(self, labels: Iterable[str], key_attrs: Mapping) -> tuple[int, bool]:
        """Return the node matching all labels and key attributes, creating it
        if absent.  More than one match is an error."""
        labels = set(labels)
        if not key_attrs:
            raise GraphError("merge_node needs at least one key attribute")
        matches = self.match_nodes(labels, key_attrs)
        if len(matches) > 1:
            raise AmbiguousMatchError(
                f"merge on {sorted(labels)} {dict(key_attrs)} matched {len(matches)} nodes"
            )
        if matches:
            return matches[0].id, False
        return self.create_node(labels, key_attrs), True

    def add_label(self, node_id: int, label: str) -> None:
        node = self._require(node_id)
        self._visit()
        if label not in node.labels:
            node.labels.add(label)
            self._index_label(node_id, label)

    def remove_label(self, node_id: int, label: str) -> None:
        node = self._require(node_id)
        self._visit()
        if label in node.labels:
            node.labels.discard(label)
            self._unindex_label(node_id, label)

    def detach_delete(self, node_id: int) -> int:
        """Delete a node together with all incident edges.

        Plain deletion of a connected node is deliberately not offered.
        Returns the number of edges removed.
        """
        node = self._require(node_id)
        incident = [e for adj in self._out[node_id].values() for e in adj]
        incident += [e for adj in self._in[node_id].values() for e in adj]
        removed = 0
        for edge_id in set(incident):
            self._delete_edge(edge_id)
            removed += 1
        for label in set(node.labels):
            self._unindex_label(node_id, label)
        del self._nodes[node_id]
        del self._out[node_id]
        del self._in[node_id]
        self._visit()
        return removed

    def node(self, node_id: int) -> Node:
        """Look up one node; counts a visit."""
        node = self._require(node_id)
        self._visit()
        return node

    def has_node(self, node_id: int) -> bool:
        return node_id in self._nodes

    def nodes(self) -> Iterator[Node]:
        return iter(self._nodes.values())

    def match_nodes(self, labels: Iterable[str] = (), attr_filter: Optional[Mapping] = None) -> list[Node]:
        """All nodes carrying every label and matching every filter entry.

        Each candidate examined counts one visit.  Candidates come from the
        smallest label index involved, or all nodes when no label is given.
        """
        labels = set(labels)
        attr_filter = attr_filter or {}
        if labels:
            buckets = [self._label_index.get(label, set()) for label in labels]
            candidates = sorted(set.intersection(*buckets)) if all(buckets) else []
        else:
            candidates = sorted(self._nodes)
        found = []
        for node_id in candidates:
            self._visit()
            node = self._nodes[node_id]
            if labels <= node.labels and attrs_match(node.attrs, attr_filter):
                found.append(node)
        return found

    def find_node(self, labels: Iterable[str] = (), attr_filter: Optional[Mapping] = None) -> Optional[Node]:
        """First match_nodes result, or None."""
        matches = self.match_nodes(labels, attr_filter)
        return matches[0] if matches else None

    # -- edge operations ---------------------------------------------------

    def merge_edge(self, src: int, dst: int, edge_type: str, attrs: Optional[Mapping] = None) -> tuple[int, bool]:
        """Idempotent edge creation keyed on (src, dst, type, full attr map)."""
        self._require(src)
        self._require(dst)
        attrs = dict(attrs or {})
        for edge_id in self._out[src].get(edge_type, []):
            self._visit()
            if self._edges[edge_id].dst == dst and self._edges[edge_id].attrs == attrs:
                return edge_id, False
        edge_id = self._next_edge_id
        self._next_edge_id += 1
        self._edges[edge_id] = Edge(edge_id, src, dst, edge_type, attrs)
        self._out[src].setdefault(edge_type, []).append(edge_id)
        self._in[dst].setdefault(edge_type, []).append(edge_id)
        self._type_index.setdefault(edge_type, []).append(edge_id)
        self._visit()
        return edge_id, True

    def _delete_edge(self, edge_id: int) -> None:
        edge = self._edges.pop(edge_id)
        self._out[edge.src][edge.edge_type].remove(edge_id)
        if not self._out[edge.src][edge.edge_type]:
            del self._out[edge.src][edge.edge_type]
        self._in[edge.dst][edge.edge_type].remove(edge_id)
        if not self._in[edge.dst][edge.edge_type]:
            del self._in[edge.dst][edge.edge_type]
        self._type_index[edge.edge_type].remove(edge_id)
        if not self._type_index[edge.edge_type]:
            del self._type_index[edge.edge_type]
        self._visit()

    def delete_edge(self, edge_id: int) -> None:
        if edge_id not in self._edges:
            raise GraphError(f"no edge with id {edge_id}")
        self._delete_edge(edge_id)

    def edge(self, edge_id: int) -> Edge:
        if edge_id not in self._edges:
            raise GraphError(f"no edge with id {edge_id}")
        return self._edges[edge_id]

    def edges(self) -> Iterator[Edge]:
        return iter(self._edges.values())

    def edge_types(self) -> set:
        return set(self._type_index)

    def edges_of_type(self, edge_type: str) -> list[Edge]:
        """All edges of one type, in creation order; one visit per edge."""
        found = [self._edges[e] for e in self._type_index.get(edge_type, [])]
        self._visit(len(found))
        return found

    def out_edges(self, node_id: int, edge_types: Optional[Iterable[str]] = None) -> list[Edge]:
        """Outgoing edges, optionally restricted by type; one visit per edge."""
        self._require(node_id)
        return self._adjacent(self._out, node_id, edge_types)

    def in_edges(self, node_id: int, edge_types: Optional[Iterable[str]] = None) -> list[Edge]:
        """Incoming edges, optionally restricted by type; one visit per edge."""
        self._require(node_id)
        return self._adjacent(self._in, node_id, edge_types)

    def _adjacent(self, index, node_id, edge_types) -> list[Edge]:
        adj = index[node_id]
        if edge_types is None:
            wanted = sorted(adj)
        else:
            wanted = sorted(t for t in edge_types if t in adj)
        found = [self._edges[e] for t in wanted for e in adj[t]]
        self._visit(len(found))
        return found

    def degree(self, node_id: int) -> int:
        self._require(node_id)
        out_deg = sum(len(v) for v in self._out[node_id].values())
        in_deg = sum(len(v) for v in self._in[node_id].values())
        return out_deg + in_deg

    def has_edge(self, src: int, dst: int, edge_type: str, attr_predicate: Optional[Mapping] = None) -> bool:
        """True iff a src->dst edge of the given type matches the predicate.

        Counts one visit per candidate edge examined.
        """
        self._require(src)
        self._require(dst)
        for edge_id in self._out[src].get(edge_type, []):
            self._visit()
            edge = self._edges[edge_id]
            if edge.dst == dst and attrs_match(edge.attrs, attr_predicate or {}):
                return True
        return False

    def path_exists(
        self,
        src: int,
        dst: int,
        edge_types: Iterable[str],
        attr_predicate: Optional[Mapping] = None,
        max_hops: Optional[int] = None,
    ) -> bool:
        """Directed path of at least one edge, every edge of an allowed type
        and matching the predicate.

        Depth-first with a visited set, so cycles terminate; a path back to
        the start node counts (src == dst requires a genuine cycle, never
        zero hops).  A hop bound switches to breadth-first order so that a
        node reached cheaply is never shadowed by an earlier deeper visit.
        """
        self._require(src)
        self._require(dst)
        edge_types = set(edge_types)
        attr_predicate = attr_predicate or {}
        frontier = [(src, 0)]
        expanded = set()
        while frontier:
            here, hops = frontier.pop() if max_hops is None else frontier.pop(0)
            if here in expanded:
                continue
            expanded.add(here)
            self._visit()
            if max_hops is not None and hops >= max_hops:
                continue
            for edge_type in sorted(t for t in edge_types if t in self._out[here]):
                for edge_id in self._out[here][edge_type]:
                    self._visit()
                    edge = self._edges[edge_id]
                    if not attrs_match(edge.attrs, attr_predicate):
                        continue
                    if edge.dst == dst:
                        return True
                    if edge.dst not in expanded:
                        frontier.append((edge.dst, hops + 1))
        return False
