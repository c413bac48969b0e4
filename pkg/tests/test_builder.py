import pytest

from pagegraph.builder import GraphBuilder, sample_indices
from pagegraph.embedding import HashingEmbedder
from pagegraph.errors import OracleUnavailableError, ValidationError
from pagegraph.model import Episode, EpisodeStep, PageGraph, action_tuples
from pagegraph.oracle import OracleClient
from pagegraph.storage import save_graph
from pagegraph.world import ScriptedBackend, demo_world, generate_episodes, random_world
from pagegraph.world.generate import trail_cover_episodes


def fresh_builder(world, skip_policy="tuple"):
    oracle = OracleClient(ScriptedBackend(world), retries=0)
    graph = PageGraph(scenario=world.scenario)
    return GraphBuilder(graph, oracle, HashingEmbedder(), skip_policy=skip_policy), graph


class FlakyBackend:
    """Fails specific roles on chosen call numbers, else defers to the wrapped backend."""

    def __init__(self, inner, fail_role, fail_on_calls):
        self.inner = inner
        self.fail_role = fail_role
        self.fail_on_calls = set(fail_on_calls)
        self.count = 0

    def complete(self, request):
        if request.role_name == self.fail_role:
            self.count += 1
            if self.count in self.fail_on_calls:
                raise OracleUnavailableError("injected failure")
        return self.inner.complete(request)


class TestResolveNode:
    def test_empty_graph_bootstraps(self, world):
        builder, graph = fresh_builder(world)
        node_id, created = builder.resolve_node(world.screen("launcher", {}))
        assert created is True
        assert len(graph.nodes) == 1
        assert graph.nodes[node_id].summary == world.page("launcher").summary

    def test_known_page_reused(self, world):
        builder, graph = fresh_builder(world)
        first, _ = builder.resolve_node(world.screen("launcher", {}))
        second, created = builder.resolve_node(world.screen("launcher", {"order": "1"}))
        assert created is False
        assert first == second
        assert len(graph.nodes) == 1

    def test_unseen_page_creates(self, world):
        builder, graph = fresh_builder(world)
        for name in ("launcher", "search", "cart"):
            builder.resolve_node(world.screen(name, {}))
        before = len(graph.nodes)
        _, created = builder.resolve_node(world.screen("settings", {}))
        assert created is True
        assert len(graph.nodes) == before + 1


class TestIngestEpisode:
    def test_in_page_then_jump_merges_into_one_edge(self, world):
        builder, graph = fresh_builder(world)
        episode = generate_episodes(world, tasks=["search for headphones"])[0]
        report = builder.ingest_episode(episode)
        # launcher -> search, then (type + tap) merged into search -> results.
        assert report.edges_created == 2
        merged = [e for e in graph.edges.values() if len(e.action_queue) == 2]
        assert len(merged) == 1
        assert merged[0].task == "search for headphones"
        assert merged[0].action_queue[0].startswith("type 'headphones'")

    def test_trailing_in_page_actions_make_no_edge(self, world):
        builder, graph = fresh_builder(world)
        episode = generate_episodes(world, tasks=["add the first result to the cart"])[0]
        builder.ingest_episode(episode)
        # Path is launcher -> search -> results -> detail; the trailing
        # add-to-cart stays in-page and the completion step adds nothing.
        assert len(graph.edges) == 3
        assert all(e.dst != e.src for e in graph.edges.values())

    def test_single_image_episode(self, world):
        builder, graph = fresh_builder(world)
        screen = world.screen("launcher", {})
        episode = Episode(episode_id="one", task="t",
                          steps=(EpisodeStep(screen, TapFirst(world)),))
        builder.ingest_episode(episode)
        assert len(graph.nodes) == 1
        assert len(graph.edges) == 0

    def test_revisit_reuses_node_with_higher_in_degree(self, world):
        builder, graph = fresh_builder(world)
        episode = generate_episodes(world, tasks=["return home after placing an order"])[0]
        builder.ingest_episode(episode)
        launcher_nodes = [
            n for n in graph.nodes.values()
            if world.parse_locator(n.image_locator)[0].name == "launcher"
        ]
        assert len(launcher_nodes) == 1
        in_degree = sum(1 for e in graph.edges.values()
                        if e.dst == launcher_nodes[0].node_id)
        assert in_degree >= 1
        starts = sum(1 for e in graph.edges.values()
                     if e.src == launcher_nodes[0].node_id)
        assert starts >= 1

    def test_every_edge_queue_ends_with_jump_action(self, world, gold_episodes):
        builder, graph = fresh_builder(world)
        for episode in gold_episodes:
            builder.ingest_episode(episode)
        for edge in graph.edges.values():
            src_page = world.parse_locator(graph.nodes[edge.src].image_locator)[0]
            last = edge.action_queue[-1]
            widget = next(
                (w for w in src_page.widgets
                 if f"the {w.label} {w.kind_word}" in last), None,
            )
            assert widget is not None and widget.target is not None

    def test_double_ingestion_doubles_edges(self, world, gold_episodes):
        builder, graph = fresh_builder(world)
        for episode in gold_episodes:
            builder.ingest_episode(episode)
        nodes_once, edges_once = set(graph.nodes), len(graph.edges)
        for episode in gold_episodes:
            builder.ingest_episode(episode)
        assert set(graph.nodes) == nodes_once
        assert len(graph.edges) == 2 * edges_once


def TapFirst(world):
    widget = world.page("launcher").widgets[0]
    from pagegraph.model import Tap

    return Tap(widget.x, widget.y)


class TestConservation:
    def test_edge_action_conservation(self, world, gold_episodes, cover_episodes):
        builder, graph = fresh_builder(world)
        total_tuples = 0
        trailing_dropped = 0
        for episode in list(gold_episodes) + list(cover_episodes):
            tuples = action_tuples(episode)
            total_tuples += len(tuples)
            # Tail tuples that stay in-page never reach an edge.
            count = 0
            for before, action, after in reversed(tuples):
                if world.parse_locator(before.locator)[0].name == \
                        world.parse_locator(after.locator)[0].name:
                    count += 1
                else:
                    break
            trailing_dropped += count
            builder.ingest_episode(episode)
        queued = sum(len(e.action_queue) for e in graph.edges.values())
        assert queued + trailing_dropped == total_tuples


class TestSkipPolicies:
    def _flaky_builder(self, world, skip_policy, fail_role, fail_on_calls):
        backend = FlakyBackend(ScriptedBackend(world), fail_role, fail_on_calls)
        oracle = OracleClient(backend, retries=0)
        graph = PageGraph(scenario=world.scenario)
        return GraphBuilder(graph, oracle, HashingEmbedder(), skip_policy=skip_policy), graph

    def test_tuple_policy_drops_and_continues(self, world):
        # Gold route: launcher -> search (type, submit) -> results -> detail.
        # Jump judgements run on calls 1 (to search), 2 (typing, in-page),
        # 3 (to results), 4 (to detail); injecting a failure on call 3 drops
        # that jump while keeping the anchor and the pending queue.
        episode = generate_episodes(world, tasks=["open the first search result"])[0]
        builder, graph = self._flaky_builder(world, "tuple", "jump_judge", {3})
        report = builder.ingest_episode(episode)
        assert report.oracle_errors == 1
        assert report.edges_created == 2
        pages = {
            world.parse_locator(n.image_locator)[0].name for n in graph.nodes.values()
        }
        assert pages == {"launcher", "search", "detail"}  # results was the dropped jump
        bridging = max(graph.edges.values(), key=lambda e: len(e.action_queue))
        src = world.parse_locator(graph.nodes[bridging.src].image_locator)[0].name
        dst = world.parse_locator(graph.nodes[bridging.dst].image_locator)[0].name
        assert (src, dst) == ("search", "detail")
        assert len(bridging.action_queue) == 3

    def test_episode_policy_rolls_back_byte_identically(self, world, tmp_path,
                                                        gold_episodes):
        builder, graph = self._flaky_builder(world, "episode", "page_summary", {5})
        clean = gold_episodes[0]
        builder.ingest_episode(clean)
        save_graph(graph, tmp_path / "before.json")
        failing = generate_episodes(world, tasks=["place an order for the first result"])[0]
        report = builder.ingest_episode(failing)
        assert report.oracle_errors == 1
        assert report.edges_created == 0
        save_graph(graph, tmp_path / "after.json")
        assert (tmp_path / "before.json").read_bytes() == (tmp_path / "after.json").read_bytes()

    def test_unknown_policy_rejected(self, world):
        oracle = OracleClient(ScriptedBackend(world), retries=0)
        with pytest.raises(ValidationError):
            GraphBuilder(PageGraph(), oracle, HashingEmbedder(), skip_policy="panic")


class TestIngestCorpus:
    def test_fraction_one_ingests_all(self, world, gold_episodes):
        builder, _ = fresh_builder(world)
        report = builder.ingest_corpus(list(gold_episodes), sample_fraction=1.0, seed=0)
        assert report.episodes_processed == len(gold_episodes)

    def test_sampling_is_deterministic(self):
        first = sample_indices(230, 0.1, seed=42)
        second = sample_indices(230, 0.1, seed=42)
        assert first == second
        assert len(first) == 23
        assert first == sorted(first)
        assert sample_indices(230, 0.1, seed=43) != first

    def test_six_page_world_node_count(self):
        world = random_world(num_pages=6, num_transitions=9, seed=11)
        oracle = OracleClient(ScriptedBackend(world), retries=0)
        graph = PageGraph(scenario="six")
        builder = GraphBuilder(graph, oracle, HashingEmbedder())
        builder.ingest_corpus(trail_cover_episodes(world))
        visited = set()
        for episode in trail_cover_episodes(world):
            for screen in episode.screens:
                visited.add(world.parse_locator(screen.locator)[0].name)
        assert len(graph.nodes) == len(visited) == 6

    def test_empty_corpus_rejected(self, world):
        builder, _ = fresh_builder(world)
        with pytest.raises(ValidationError):
            builder.ingest_corpus([])

    def test_bad_fraction_rejected(self, world, gold_episodes):
        builder, _ = fresh_builder(world)
        with pytest.raises(ValidationError):
            builder.ingest_corpus(list(gold_episodes), sample_fraction=0.0)
        with pytest.raises(ValidationError):
            builder.ingest_corpus(list(gold_episodes), sample_fraction=1.5)

    def test_report_invariant_resolutions(self, world, gold_episodes):
        builder, _ = fresh_builder(world)
        report = builder.ingest_corpus(list(gold_episodes))
        jumps = 0
        for episode in gold_episodes:
            for before, action, after in action_tuples(episode):
                if world.parse_locator(before.locator)[0].name != \
                        world.parse_locator(after.locator)[0].name:
                    jumps += 1
        first_images = len(gold_episodes)
        assert report.nodes_created + report.nodes_reused == jumps + first_images
