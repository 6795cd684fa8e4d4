"""Canonical text serialization of property graphs.

The archive renumbers nodes in a canonical order (name, labels, attributes)
and sorts edge records, so isomorphic graphs with identical names serialize
to identical bytes.  The visit counter is runtime instrumentation and is not
stored.  Format: one header line, then one JSON record per line, nodes
before edges.
"""

from __future__ import annotations

import json
import os

from .graph import PropertyGraph

HEADER = "ATTACKGRAPH-ARCHIVE 1"


class ArchiveError(Exception):
    pass


def _dump(value) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _node_key(node) -> tuple:
    return (node.name, sorted(node.labels), _dump(node.attrs))


def canonical_form(g: PropertyGraph) -> str:
    """Deterministic text rendering; equal strings mean isomorphic graphs
    (for graphs whose nodes are distinguishable by name/labels/attributes)."""
    ordered = sorted(g.nodes(), key=_node_key)
    renumber = {node.id: i + 1 for i, node in enumerate(ordered)}
    lines = [HEADER]
    for i, node in enumerate(ordered):
        lines.append("N " + _dump({
            "id": i + 1,
            "labels": sorted(node.labels),
            "attrs": node.attrs,
        }))
    edge_records = sorted(
        (renumber[e.src], renumber[e.dst], e.edge_type, _dump(e.attrs))
        for e in g.edges()
    )
    for src, dst, edge_type, attrs in edge_records:
        lines.append("E " + _dump({"src": src, "dst": dst, "type": edge_type,
                                   "attrs": json.loads(attrs)}))
    return "\n".join(lines) + "\n"


def dumps(g: PropertyGraph) -> str:
    return canonical_form(g)


def loads(text: str) -> PropertyGraph:
    lines = text.splitlines()
    if not lines or lines[0] != HEADER:
        raise ArchiveError("not a graph archive (bad or missing header)")
    g = PropertyGraph()
    id_map: dict = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        kind, _, payload = line.partition(" ")
        try:
            record = json.loads(payload)
        except json.JSONDecodeError as exc:
            raise ArchiveError(f"line {lineno}: bad record: {exc}") from exc
        if kind == "N":
            id_map[record["id"]] = g.create_node(set(record["labels"]), record["attrs"])
        elif kind == "E":
            g.merge_edge(id_map[record["src"]], id_map[record["dst"]],
                         record["type"], record["attrs"])
        else:
            raise ArchiveError(f"line {lineno}: unknown record kind {kind!r}")
    g.visits = 0
    return g


def save_graph(g: PropertyGraph, path) -> None:
    # write-then-rename keeps the previous archive intact on failure
    text = canonical_form(g)
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as handle:
        handle.write(text)
    os.replace(tmp, path)


def load_graph(path) -> PropertyGraph:
    with open(path, "r", encoding="utf-8") as handle:
        return loads(handle.read())
