"""DOT export for graph visualization; parallel edges stay separate lines."""

from __future__ import annotations

from pathlib import Path

from pagegraph.errors import ValidationError
from pagegraph.model import PageGraph
from pagegraph.storage.serial import atomic_write_text

LABEL_MODES = ("summary", "id")


def _quote(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return f'"{escaped}"'


def _truncate(text: str, limit: int) -> str:
    if limit > 0 and len(text) > limit:
        return text[: max(limit - 3, 1)] + "..."
    return text


def export_dot(graph: PageGraph, path: str | Path, label_mode: str = "summary",
               max_label_chars: int = 40) -> None:
    """Write a deterministic DOT digraph: nodes by id, edges by insertion order."""
    if label_mode not in LABEL_MODES:
        raise ValidationError(f"unknown label mode {label_mode!r}")
    lines = ["digraph pagegraph {", "  rankdir=LR;"]
    for node_id in sorted(graph.nodes):
        node = graph.nodes[node_id]
        label = node_id if label_mode == "id" else _truncate(node.summary, max_label_chars)
        lines.append(f"  {_quote(node_id)} [label={_quote(label)}];")
    for edge in sorted(graph.edges.values(), key=lambda e: e.order_index):
        label = _truncate(edge.task, max_label_chars)
        lines.append(
            f"  {_quote(edge.src)} -> {_quote(edge.dst)} [label={_quote(label)}];"
        )
    lines.append("}")
    atomic_write_text(path, "\n".join(lines) + "\n")
