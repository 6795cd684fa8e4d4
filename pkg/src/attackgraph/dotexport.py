"""Graphviz DOT rendering of graph selections.

Node identity in the DOT output is the node name; shapes and colours follow
the node's category.  Output ordering is canonical (nodes by name and
labels, edges by endpoint names and type), so renders are byte-stable.
"""

from __future__ import annotations

from typing import Iterable

from .graph import PropertyGraph

# category -> (shape, fillcolor); first match in this order wins
_NODE_STYLES = (
    ("Condition", ("ellipse", "pink")),
    ("Exploit", ("box", "sandybrown")),
    ("Router", ("diamond", "lightblue")),
    ("Firewall", ("note", "khaki")),
    ("Vulnerability", ("hexagon", "lightcoral")),
    ("Internet", ("box", "lightgrey")),
    ("EndDevice", ("box", "lightgreen")),
)


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _style(labels: set) -> tuple:
    for label, style in _NODE_STYLES:
        if label in labels:
            return style
    return "ellipse", "white"


def export_dot(g: PropertyGraph, selection: Iterable[str] = ()) -> str:
    """Render the nodes carrying any selection label (or the whole graph when
    the selection is empty) plus the edges between them."""
    selection = set(selection)
    if selection:
        chosen = [n for n in g.nodes() if selection & n.labels]
    else:
        chosen = list(g.nodes())
    chosen.sort(key=lambda n: (n.name, sorted(n.labels)))
    ids = {n.id for n in chosen}

    lines = ["digraph attackgraph {"]
    for node in chosen:
        shape, color = _style(node.labels)
        lines.append(
            f"  {_quote(node.name)} [shape={shape}, style=filled, fillcolor={color}];"
        )
    edge_lines = []
    for edge in g.edges():
        if edge.src not in ids or edge.dst not in ids:
            continue
        label = edge.edge_type
        via = edge.attrs.get("via")
        if isinstance(via, str):
            label += f" via={via}"
        edge_lines.append(
            f"  {_quote(g.node(edge.src).name)} -> {_quote(g.node(edge.dst).name)}"
            f" [label={_quote(label)}];"
        )
    lines.extend(sorted(edge_lines))
    lines.append("}")
    return "\n".join(lines) + "\n"
