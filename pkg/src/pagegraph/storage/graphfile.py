"""Graph persistence: canonical JSON with an embedded binary embedding section.

The text body stays reviewable; embeddings are base64 of little-endian float32
values in node order (nodes sorted by id). Loading then saving an untouched
file reproduces it byte for byte.
"""

from __future__ import annotations

import base64
from pathlib import Path

import numpy as np

from pagegraph.errors import FormatError, MigrationError, ValidationError
from pagegraph.model import GRAPH_SCHEMA_VERSION, PageEdge, PageGraph, PageNode
from pagegraph.storage.serial import atomic_write_text, canonical_dumps, load_json

GRAPH_FORMAT = "pagegraph-graph"


def save_graph(graph: PageGraph, path: str | Path) -> None:
    graph.validate()
    node_ids = sorted(graph.nodes)
    nodes = [
        {
            "node_id": node_id,
            "summary": graph.nodes[node_id].summary,
            "image_locator": graph.nodes[node_id].image_locator,
        }
        for node_id in node_ids
    ]
    edges = [
        {
            "edge_id": edge_id,
            "src": graph.edges[edge_id].src,
            "dst": graph.edges[edge_id].dst,
            "action_queue": list(graph.edges[edge_id].action_queue),
            "task": graph.edges[edge_id].task,
            "order_index": graph.edges[edge_id].order_index,
        }
        for edge_id in sorted(graph.edges)
    ]
    dim = graph.embedding_dim
    blob = None
    if dim is not None:
        rows = []
        for node_id in node_ids:
            embedding = graph.nodes[node_id].embedding
            if embedding is None:
                raise ValidationError(
                    f"node {node_id!r} lacks an embedding while others carry one"
                )
            rows.append(np.asarray(embedding, dtype="<f4"))
        blob = base64.b64encode(np.concatenate(rows).tobytes()).decode("ascii")
    document = {
        "format": GRAPH_FORMAT,
        "schema_version": graph.schema_version,
        "scenario": graph.scenario,
        "embedding_dim": dim,
        "embedder_id": graph.meta.get("embedder_id", ""),
        "meta": {k: v for k, v in graph.meta.items() if k != "embedder_id"},
        "nodes": nodes,
        "edges": edges,
        "embeddings": blob,
    }
    atomic_write_text(path, canonical_dumps(document))


def load_graph(path: str | Path) -> PageGraph:
    document = load_json(path)
    if not isinstance(document, dict) or document.get("format") != GRAPH_FORMAT:
        raise FormatError("not a graph file", path=str(path))
    version = document.get("schema_version")
    if version != GRAPH_SCHEMA_VERSION:
        raise MigrationError(str(path), version, GRAPH_SCHEMA_VERSION)
    meta = dict(document.get("meta", {}))
    embedder_id = document.get("embedder_id", "")
    if embedder_id:
        meta["embedder_id"] = embedder_id
    graph = PageGraph(scenario=document.get("scenario", ""), schema_version=version, meta=meta)
    dim = document.get("embedding_dim")
    vectors: dict[str, tuple[float, ...]] = {}
    node_objs = document.get("nodes", [])
    if dim is not None:
        blob = document.get("embeddings")
        if blob is None:
            raise FormatError("embedding_dim set but no embeddings section", path=str(path))
        values = np.frombuffer(base64.b64decode(blob), dtype="<f4")
        if values.size != dim * len(node_objs):
            raise FormatError(
                f"embedding blob holds {values.size} floats, expected {dim * len(node_objs)}",
                path=str(path),
            )
        for position, node_obj in enumerate(node_objs):
            row = values[position * dim:(position + 1) * dim]
            vectors[node_obj["node_id"]] = tuple(float(v) for v in row)
    try:
        for node_obj in node_objs:
            graph.add_node(PageNode(
                node_id=node_obj["node_id"],
                summary=node_obj["summary"],
                image_locator=node_obj["image_locator"],
                embedding=vectors.get(node_obj["node_id"]),
            ))
        for edge_obj in document.get("edges", []):
            graph.insert_edge(PageEdge(
                edge_id=edge_obj["edge_id"],
                src=edge_obj["src"],
                dst=edge_obj["dst"],
                action_queue=tuple(edge_obj["action_queue"]),
                task=edge_obj["task"],
                order_index=edge_obj["order_index"],
            ))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed graph record: {exc}", path=str(path)) from exc
    except ValidationError as exc:
        raise FormatError(str(exc), path=str(path)) from exc
    graph.validate()
    return graph
