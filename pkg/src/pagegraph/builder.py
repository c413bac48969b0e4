"""Episode-to-graph construction: jump determination, node similarity, graph update.

For each episode the builder walks the image sequence, summarizes each action,
asks the jump judge whether it left the page, and merges consecutive in-page
action summaries into one pending queue. On a jump it resolves the after-image
to a node (reusing an existing node when the dual similarity check says same
page) and inserts one edge carrying the queue and the episode's task. The
queue is cleared on every edge insertion, and a trailing queue without an
observed jump is discarded.
"""

from __future__ import annotations

import copy
import logging
import math
import random
from dataclasses import dataclass, fields

from pagegraph.embedding import Embedder, EmbeddingVector, VectorIndex
from pagegraph.errors import OracleError, ValidationError
from pagegraph.model import Episode, PageGraph, PageNode, ScreenRef
from pagegraph.oracle.client import OracleClient

logger = logging.getLogger(__name__)

SKIP_POLICIES = ("tuple", "episode")
CONSTRUCTION_TOP_N = 4


@dataclass
class BuildReport:
    """Counters for one construction run; merge adds runs together."""

    episodes_processed: int = 0
    images_seen: int = 0
    nodes_created: int = 0
    nodes_reused: int = 0
    edges_created: int = 0
    tuples_skipped_in_page: int = 0
    oracle_errors: int = 0

    def merge(self, other: "BuildReport") -> None:
        for item in fields(self):
            setattr(self, item.name, getattr(self, item.name) + getattr(other, item.name))

    def as_dict(self) -> dict[str, int]:
        return {item.name: getattr(self, item.name) for item in fields(self)}


class GraphBuilder:
    """Single writer for one graph; keeps the summary index in step with the nodes."""

    def __init__(self, graph: PageGraph, oracle: OracleClient, embedder: Embedder,
                 top_n: int = CONSTRUCTION_TOP_N, skip_policy: str = "tuple"):
        if skip_policy not in SKIP_POLICIES:
            raise ValidationError(f"unknown skip policy {skip_policy!r}")
        if top_n <= 0:
            raise ValidationError("top_n must be positive")
        self.graph = graph
        self.oracle = oracle
        self.embedder = embedder
        self.top_n = top_n
        self.skip_policy = skip_policy
        self.index = self._build_index()

    def _build_index(self) -> VectorIndex:
        index = VectorIndex(self.embedder.dim)
        for node in self.graph.nodes.values():
            if node.embedding is not None:
                index.add(node.node_id, EmbeddingVector(node.embedding))
        return index

    def resolve_node(self, image: ScreenRef) -> tuple[str, bool]:
        """Map an image to a node, creating one unless the similarity check reuses.

        Dual-level check: the summary embedding retrieves the top candidates,
        the model selects the most similar one, and a final image-level
        comparison decides reuse versus creation.
        """
        summary = self.oracle.summarize_page(image)
        embedding = self.embedder.embed(summary)
        if not self.graph.nodes:
            return self._create_node(summary, image, embedding), True
        hits = self.index.top_k(embedding, self.top_n)
        candidate_ids = [node_id for node_id, _ in hits]
        candidate_summaries = [self.graph.nodes[node_id].summary for node_id in candidate_ids]
        selected = self.oracle.select_most_similar(image, candidate_summaries)
        chosen = self.graph.nodes[candidate_ids[selected - 1]]
        chosen_image = ScreenRef(locator=chosen.image_locator, scenario=image.scenario)
        if self.oracle.judge_dissimilar(image, chosen_image):
            return self._create_node(summary, image, embedding), True
        return chosen.node_id, False

    def _create_node(self, summary: str, image: ScreenRef,
                     embedding: EmbeddingVector) -> str:
        node = PageNode(
            node_id=self.graph.new_node_id(),
            summary=summary,
            image_locator=image.locator,
            embedding=embedding.values,
        )
        self.graph.add_node(node)
        self.index.add(node.node_id, embedding)
        return node.node_id

    def ingest_episode(self, episode: Episode) -> BuildReport:
        """Ingest one episode; returns this episode's counter delta.

        Under skip policy ``tuple`` an oracle failure drops the failing tuple
        and continues; under ``episode`` the graph and index are rolled back
        to their state before this episode.
        """
        report = BuildReport(episodes_processed=1)
        images = episode.screens
        report.images_seen = len(images)
        snapshot = None
        if self.skip_policy == "episode":
            snapshot = (copy.deepcopy(self.graph.nodes), copy.deepcopy(self.graph.edges),
                        copy.deepcopy(self.graph.out_adjacency),
                        self.graph._next_node, self.graph._next_edge)
        pending: list[str] = []
        anchor: str | None = None
        for position, image in enumerate(images):
            try:
                if position >= 1:
                    action = episode.steps[position - 1].action
                    summary = self.oracle.summarize_action(images[position - 1], action)
                    pending.append(summary)
                    if not self.oracle.judge_jump(images[position - 1], image, summary):
                        report.tuples_skipped_in_page += 1
                        continue
                node_id, created = self.resolve_node(image)
            except OracleError as exc:
                report.oracle_errors += 1
                logger.warning("oracle error episode=%s image=%s policy=%s error=%s",
                               episode.episode_id, image.locator, self.skip_policy, exc)
                if self.skip_policy == "episode":
                    assert snapshot is not None
                    self._restore(snapshot)
                    return BuildReport(episodes_processed=1, images_seen=len(images),
                                       oracle_errors=1)
                continue
            if created:
                report.nodes_created += 1
            else:
                report.nodes_reused += 1
            if position >= 1:
                if anchor is not None:
                    self.graph.add_edge(anchor, node_id, tuple(pending), episode.task)
                    report.edges_created += 1
                pending.clear()
            anchor = node_id
        # A residual queue has no observed jump, so it produces no edge.
        logger.info("ingested episode=%s images=%d nodes_created=%d nodes_reused=%d "
                    "edges_created=%d in_page=%d errors=%d",
                    episode.episode_id, report.images_seen, report.nodes_created,
                    report.nodes_reused, report.edges_created,
                    report.tuples_skipped_in_page, report.oracle_errors)
        return report

    def _restore(self, snapshot: tuple) -> None:
        nodes, edges, adjacency, next_node, next_edge = snapshot
        self.graph.nodes = nodes
        self.graph.edges = edges
        self.graph.out_adjacency = adjacency
        self.graph._next_node = next_node
        self.graph._next_edge = next_edge
        self.index = self._build_index()

    def ingest_corpus(self, episodes: list[Episode], sample_fraction: float = 1.0,
                      seed: int = 0) -> BuildReport:
        """Deterministically sample then ingest; returns the aggregated report."""
        if not episodes:
            raise ValidationError("corpus is empty")
        if not 0.0 < sample_fraction <= 1.0:
            raise ValidationError("sample_fraction must be in (0, 1]")
        chosen = sample_indices(len(episodes), sample_fraction, seed)
        total = BuildReport()
        for position in chosen:
            total.merge(self.ingest_episode(episodes[position]))
        logger.info("corpus done episodes=%d/%d nodes=%d edges=%d",
                    len(chosen), len(episodes), len(self.graph.nodes), len(self.graph.edges))
        return total


def sample_indices(count: int, fraction: float, seed: int) -> list[int]:
    """Choose ceil(fraction * count) indices reproducibly; returned in corpus order.

    Uses only Random.random(), whose sequence is stable across Python versions
    for a fixed seed.
    """
    take = math.ceil(fraction * count)
    rng = random.Random(seed)
    keys = [(rng.random(), position) for position in range(count)]
    keys.sort()
    return sorted(position for _, position in keys[:take])
