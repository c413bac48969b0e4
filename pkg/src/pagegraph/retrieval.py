"""Guideline retrieval: screen summary -> similar nodes -> bounded BFS -> guidelines.

Retrieval is read-only over the graph. A guideline pairs one edge's action
queue with the tasks collected by an edge-rooted breadth-first search of
bounded depth: layer 1 is the edge itself, layer j+1 holds the outgoing edges
of layer j's destination nodes, and every edge is explored at most once.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from pagegraph.embedding import Embedder, EmbeddingVector, VectorIndex
from pagegraph.errors import ValidationError
from pagegraph.model import Guideline, PageGraph, ScreenRef
from pagegraph.oracle.client import OracleClient

NO_GUIDELINES_SENTINEL = "No guidelines available."

_BLOCK = re.compile(r"^\s*\d+\.\s+Perform: (?P<queue>.*) — can lead to accomplishing: (?P<tasks>.*)$")

K_MAX_BY_PLATFORM = {"mobile": 20, "web": 10}


@dataclass(frozen=True)
class RetrievalConfig:
    """Caps for the retrieval pipeline; defaults follow the mobile profile."""

    k_max_guidelines: int = 20
    n_nodes: int = 4
    l_bfs_layers: int = 3

    def __post_init__(self) -> None:
        if self.k_max_guidelines <= 0 or self.n_nodes <= 0 or self.l_bfs_layers <= 0:
            raise ValidationError("retrieval parameters must be positive")

    @staticmethod
    def defaults(platform: str) -> "RetrievalConfig":
        if platform not in K_MAX_BY_PLATFORM:
            raise ValidationError(f"unknown platform {platform!r}; expected mobile or web")
        return RetrievalConfig(k_max_guidelines=K_MAX_BY_PLATFORM[platform])


def bfs_tasks(graph: PageGraph, start_edge: str, layers: int) -> list[str]:
    """Tasks of all edges within ``layers`` of the start edge, in BFS order.

    Order is layer-major, then parent-edge order within a layer, then
    out-adjacency order; tasks are de-duplicated keeping first occurrence.
    """
    if start_edge not in graph.edges:
        raise ValidationError(f"unknown edge {start_edge!r}")
    if layers <= 0:
        raise ValidationError("layers must be positive")
    explored = {start_edge}
    ordered = [start_edge]
    frontier = [start_edge]
    for _ in range(layers - 1):
        next_frontier: list[str] = []
        for edge_id in frontier:
            dst = graph.edges[edge_id].dst
            for out_id in graph.out_adjacency[dst]:
                if out_id not in explored:
                    explored.add(out_id)
                    ordered.append(out_id)
                    next_frontier.append(out_id)
        if not next_frontier:
            break
        frontier = next_frontier
    tasks: list[str] = []
    seen: set[str] = set()
    for edge_id in ordered:
        task = graph.edges[edge_id].task
        if task not in seen:
            seen.add(task)
            tasks.append(task)
    return tasks


def node_index(graph: PageGraph, embedder_dim: int | None = None) -> VectorIndex:
    """Build the summary index from embeddings cached on the graph's nodes."""
    dim = graph.embedding_dim if graph.embedding_dim is not None else embedder_dim
    if dim is None:
        raise ValidationError("graph carries no embeddings and no dimension was given")
    index = VectorIndex(dim)
    for node in graph.nodes.values():
        if node.embedding is None:
            raise ValidationError(f"node {node.node_id!r} has no embedding")
        index.add(node.node_id, EmbeddingVector(node.embedding))
    return index


class GuidelineRetriever:
    """Reusable retriever holding the node index for one graph snapshot.

    ``oracle`` may be None when only :meth:`retrieve_for_summary` is used.
    """

    def __init__(self, graph: PageGraph, embedder: Embedder,
                 oracle: OracleClient | None, cfg: RetrievalConfig):
        self.graph = graph
        self.embedder = embedder
        self.oracle = oracle
        self.cfg = cfg
        self.index = node_index(graph, embedder.dim) if graph.nodes else None

    def retrieve(self, screen: ScreenRef) -> list[Guideline]:
        """Guidelines for the current screen; empty when the graph offers none."""
        if not self.graph.nodes:
            return []
        if self.oracle is None:
            raise ValidationError("screen retrieval needs an oracle for the summary")
        summary = self.oracle.summarize_screen(screen)
        return self.retrieve_for_summary(summary)

    def retrieve_for_summary(self, summary: str) -> list[Guideline]:
        if not self.graph.nodes or self.index is None:
            return []
        query = self.embedder.embed(summary)
        if query.dim != self.index.dim:
            raise ValidationError(
                f"embedder dim {query.dim} does not match graph dim {self.index.dim}"
            )
        hits = self.index.top_k(query, self.cfg.n_nodes)
        candidates = []
        for node_id, score in hits:
            for edge in self.graph.out_edges(node_id):
                candidates.append((-score, edge.order_index, node_id, edge))
        candidates.sort(key=lambda item: (item[0], item[1]))
        guidelines = []
        for neg_score, _, node_id, edge in candidates[: self.cfg.k_max_guidelines]:
            tasks = bfs_tasks(self.graph, edge.edge_id, self.cfg.l_bfs_layers)
            guidelines.append(Guideline(
                action_queue=edge.action_queue,
                achievable_tasks=tuple(tasks),
                source_node=node_id,
                similarity_score=-neg_score,
            ))
        return guidelines


def retrieve_guidelines(graph: PageGraph, screen: ScreenRef, embedder: Embedder,
                        oracle: OracleClient, cfg: RetrievalConfig) -> list[Guideline]:
    """One-shot retrieval; builds a throwaway index, so prefer the class for loops."""
    return GuidelineRetriever(graph, embedder, oracle, cfg).retrieve(screen)


def render_guidelines(guidelines: list[Guideline]) -> str:
    """Deterministic text rendering injected into planning and decision prompts."""
    if not guidelines:
        return NO_GUIDELINES_SENTINEL
    blocks = []
    for number, guideline in enumerate(guidelines, start=1):
        queue = "; ".join(guideline.action_queue)
        tasks = "; ".join(guideline.achievable_tasks)
        blocks.append(f"{number}. Perform: {queue} — can lead to accomplishing: {tasks}")
    return "\n".join(blocks)


def parse_rendered_guidelines(text: str) -> list[tuple[tuple[str, ...], tuple[str, ...]]]:
    """Inverse of :func:`render_guidelines`, used by scripted policies and tests."""
    if text.strip() == NO_GUIDELINES_SENTINEL:
        return []
    parsed = []
    for line in text.splitlines():
        match = _BLOCK.match(line)
        if match is None:
            continue
        queue = tuple(part for part in match.group("queue").split("; ") if part)
        tasks = tuple(part for part in match.group("tasks").split("; ") if part)
        if queue and tasks:
            parsed.append((queue, tasks))
    return parsed
