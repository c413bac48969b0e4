import json

import pytest

from pagegraph.errors import FormatError, MigrationError, ValidationError
from pagegraph.model import (
    AgentTranscript,
    ClickElement,
    Episode,
    EpisodeStep,
    Guideline,
    PageEdge,
    PageGraph,
    PageNode,
    PressKey,
    ScreenRef,
    SelectOption,
    StatusComplete,
    Swipe,
    Tap,
    TranscriptStep,
    TypeInElement,
    TypeText,
)
from pagegraph.storage import (
    export_dot,
    import_benchmark,
    load_episodes,
    load_graph,
    load_predictions,
    load_transcript,
    load_world,
    save_episodes,
    save_graph,
    save_predictions,
    save_rejects,
    save_transcript,
    save_world,
)
from pagegraph.storage.serial import canonical_dumps
from pagegraph.world import demo_world


def small_graph(with_embeddings=True):
    from pagegraph.embedding import EmbeddingVector
    import numpy as np

    graph = PageGraph(scenario="unit", meta={"embedder_id": "test-embedder"})
    # Embeddings persist as float32, so in-memory values are float32-rounded,
    # exactly as the builder produces them.
    dim_vec = EmbeddingVector.from_array(np.array([0.6, 0.8])).values if with_embeddings else None
    other = EmbeddingVector.from_array(np.array([1.0, 0.0])).values if with_embeddings else None
    graph.add_node(PageNode("n0001", "first page", "img/a.png", embedding=dim_vec))
    graph.add_node(PageNode("n0002", "second page", "img/b.png", embedding=other))
    graph.add_edge("n0001", "n0002", ("tap the link button",), "reach b")
    graph.add_edge("n0001", "n0002", ("tap the other button",), "reach b again")
    return graph


class TestGraphFile:
    def test_save_load_save_byte_identity(self, tmp_path):
        graph = small_graph()
        first = tmp_path / "one.json"
        second = tmp_path / "two.json"
        save_graph(graph, first)
        loaded = load_graph(first)
        save_graph(loaded, second)
        assert first.read_bytes() == second.read_bytes()

    def test_embeddings_survive_round_trip(self, tmp_path):
        graph = small_graph()
        save_graph(graph, tmp_path / "g.json")
        loaded = load_graph(tmp_path / "g.json")
        assert loaded.nodes["n0001"].embedding == graph.nodes["n0001"].embedding
        assert loaded.meta.get("embedder_id") == "test-embedder"

    def test_graph_without_embeddings(self, tmp_path):
        graph = small_graph(with_embeddings=False)
        save_graph(graph, tmp_path / "g.json")
        loaded = load_graph(tmp_path / "g.json")
        assert loaded.embedding_dim is None
        assert len(loaded.edges) == 2

    def test_dangling_edge_names_the_edge(self, tmp_path):
        graph = small_graph()
        path = tmp_path / "g.json"
        save_graph(graph, path)
        document = json.loads(path.read_text())
        document["edges"][0]["src"] = "n9999"
        path.write_text(canonical_dumps(document))
        with pytest.raises(ValidationError) as err:
            load_graph(path)
        assert "e0001" in str(err.value)

    def test_version_mismatch(self, tmp_path):
        graph = small_graph()
        path = tmp_path / "g.json"
        save_graph(graph, path)
        document = json.loads(path.read_text())
        document["schema_version"] = 99
        path.write_text(canonical_dumps(document))
        with pytest.raises(MigrationError) as err:
            load_graph(path)
        assert "99" in str(err.value) and "1" in str(err.value)

    def test_corrupt_json_reports_location(self, tmp_path):
        path = tmp_path / "g.json"
        path.write_text('{"format": "pagegraph-graph",\n  broken')
        with pytest.raises(FormatError) as err:
            load_graph(path)
        assert err.value.line is not None

    def test_counters_continue_after_load(self, tmp_path):
        graph = small_graph()
        save_graph(graph, tmp_path / "g.json")
        loaded = load_graph(tmp_path / "g.json")
        assert loaded.new_node_id() == "n0003"
        edge = loaded.add_edge("n0001", "n0002", ("x",), "t")
        assert edge.edge_id == "e0003"
        assert edge.order_index == 2


class TestEpisodeFile:
    def _episodes(self):
        return [
            Episode(
                episode_id="e1", task="task one",
                steps=(
                    EpisodeStep(ScreenRef("shots/1.png", 1080, 1920, "General"),
                                Tap(0.25, 0.5)),
                    EpisodeStep(ScreenRef("shots/2.png", 1080, 1920, "General"),
                                TypeText("hello")),
                ),
                final_screen=ScreenRef("shots/3.png", 1080, 1920, "General"),
            ),
            Episode(
                episode_id="e2", task="task two",
                steps=(EpisodeStep(ScreenRef("shots/4.png"), StatusComplete()),),
            ),
        ]

    def test_round_trip(self, tmp_path):
        path = tmp_path / "episodes.jsonl"
        save_episodes(self._episodes(), path, benchmark="aitw")
        benchmark, loaded = load_episodes(path)
        assert benchmark == "aitw"
        assert loaded == self._episodes()

    def test_byte_identity(self, tmp_path):
        one, two = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        save_episodes(self._episodes(), one, benchmark="aitw")
        benchmark, loaded = load_episodes(one)
        save_episodes(loaded, two, benchmark=benchmark)
        assert one.read_bytes() == two.read_bytes()

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"format": "something-else"}\n')
        with pytest.raises(FormatError):
            load_episodes(path)

    def test_bad_record_reports_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        save_episodes(self._episodes()[:1], path)
        path.write_text(path.read_text() + "{not json}\n")
        with pytest.raises(FormatError) as err:
            load_episodes(path)
        assert err.value.line == 3


class TestWorldFile:
    def test_round_trip(self, tmp_path):
        world = demo_world()
        path = tmp_path / "world.json"
        save_world(world, path)
        loaded = load_world(path)
        assert loaded == world

    def test_byte_identity(self, tmp_path):
        world = demo_world()
        one, two = tmp_path / "a.json", tmp_path / "b.json"
        save_world(world, one)
        save_world(load_world(one), two)
        assert one.read_bytes() == two.read_bytes()


class TestTranscriptFile:
    def _transcript(self):
        guideline = Guideline(("tap the Search app button",),
                              ("open the search page",), "n0001", 0.875)
        return AgentTranscript(
            goal="open the search page",
            global_plan="Goal: open the search page\n1. Tap the Search app button.",
            steps=(
                TranscriptStep(
                    screen=ScreenRef("world://page/launcher/state/abc"),
                    observation="Home screen.",
                    subtask_plan="Goal: open the search page",
                    action=Tap(0.2, 0.3),
                    rationale="ACTION: TAP 0.2000 0.3000",
                    guidelines_used=(guideline,),
                ),
                TranscriptStep(
                    screen=ScreenRef("world://page/search/state/abc"),
                    observation="Search page.",
                    subtask_plan="Goal: open the search page",
                    action=StatusComplete(),
                    rationale="ACTION: COMPLETE",
                ),
            ),
            terminated_by="complete",
            meta={"command": "run"},
        )

    def test_round_trip(self, tmp_path):
        path = tmp_path / "t.json"
        save_transcript(self._transcript(), path)
        assert load_transcript(path) == self._transcript()

    def test_byte_identity(self, tmp_path):
        one, two = tmp_path / "a.json", tmp_path / "b.json"
        save_transcript(self._transcript(), one)
        save_transcript(load_transcript(one), two)
        assert one.read_bytes() == two.read_bytes()


class TestPredictions:
    def test_round_trip(self, tmp_path):
        rows = [
            ("e1", 0, Tap(0.25, 0.5)),
            ("e1", 1, TypeText("hello world")),
            ("e2", 0, StatusComplete()),
        ]
        path = tmp_path / "pred.jsonl"
        save_predictions(rows, path)
        assert load_predictions(path) == rows


class TestDotExport:
    def test_two_node_single_edge(self, tmp_path):
        graph = PageGraph()
        graph.add_node(PageNode("n0001", "page one", "img/a.png"))
        graph.add_node(PageNode("n0002", "page two", "img/b.png"))
        graph.add_edge("n0001", "n0002", ("tap",), "task")
        path = tmp_path / "g.dot"
        export_dot(graph, path)
        text = path.read_text()
        assert text.count("->") == 1
        assert text.startswith("digraph")

    def test_in_degree_two_gives_two_lines(self, world, scripted_oracle, embedder,
                                           tmp_path):
        from pagegraph.builder import GraphBuilder
        from pagegraph.world import generate_episodes

        graph = PageGraph(scenario="demo")
        builder = GraphBuilder(graph, scripted_oracle, embedder)
        episode = generate_episodes(world, tasks=["return home after placing an order"])[0]
        builder.ingest_episode(episode)
        launcher = next(
            n.node_id for n in graph.nodes.values()
            if world.parse_locator(n.image_locator)[0].name == "launcher"
        )
        path = tmp_path / "g.dot"
        export_dot(graph, path)
        arrows_into = [
            line for line in path.read_text().splitlines()
            if f'-> "{launcher}"' in line
        ]
        assert len(arrows_into) == 1  # confirmation -> launcher
        arrows_out = [
            line for line in path.read_text().splitlines()
            if line.strip().startswith(f'"{launcher}" ->')
        ]
        assert len(arrows_out) == 1  # launcher -> cart

    def test_parallel_edges_preserved(self, tmp_path):
        graph = small_graph(with_embeddings=False)
        path = tmp_path / "g.dot"
        export_dot(graph, path)
        assert path.read_text().count('"n0001" -> "n0002"') == 2

    def test_empty_graph_valid(self, tmp_path):
        path = tmp_path / "empty.dot"
        export_dot(PageGraph(), path)
        text = path.read_text()
        assert text.startswith("digraph") and text.rstrip().endswith("}")

    def test_label_truncation_and_escaping(self, tmp_path):
        graph = PageGraph()
        graph.add_node(PageNode("n0001", 'page with "quotes" and a very long tail ' * 3,
                                "img/a.png"))
        path = tmp_path / "g.dot"
        export_dot(graph, path, max_label_chars=20)
        line = next(l for l in path.read_text().splitlines() if "n0001" in l)
        assert '\\"' in line
        assert "..." in line

    def test_id_label_mode(self, tmp_path):
        graph = small_graph(with_embeddings=False)
        path = tmp_path / "g.dot"
        export_dot(graph, path, label_mode="id")
        assert 'label="n0001"' in path.read_text()

    def test_deterministic_output(self, tmp_path):
        graph = small_graph(with_embeddings=False)
        one, two = tmp_path / "a.dot", tmp_path / "b.dot"
        export_dot(graph, one)
        export_dot(graph, two)
        assert one.read_bytes() == two.read_bytes()


class TestAdapters:
    def test_generic_two_episodes(self, tmp_path):
        from pagegraph.storage.serial import episode_to_obj

        episodes = [
            Episode(episode_id="g1", task="t1",
                    steps=(EpisodeStep(ScreenRef("a.png"), Tap(0.1, 0.2)),)),
            Episode(episode_id="g2", task="t2",
                    steps=(EpisodeStep(ScreenRef("b.png"), Swipe("up")),)),
        ]
        source = tmp_path / "src.json"
        source.write_text(json.dumps({
            "episodes": [episode_to_obj(e) for e in episodes],
        }))
        imported, rejects = import_benchmark("generic", source)
        assert imported == episodes
        assert rejects == []

    def test_aitw_action_mapping(self, tmp_path):
        source = tmp_path / "aitw.json"
        source.write_text(json.dumps([{
            "episode_id": "ep-7",
            "goal": "open the mail app",
            "steps": [
                {"screenshot": "s0.png", "action_type": "DUAL_POINT",
                 "touch_yx": [0.5, 0.3], "lift_yx": [0.51, 0.31]},
                {"screenshot": "s1.png", "action_type": "DUAL_POINT",
                 "touch_yx": [0.8, 0.5], "lift_yx": [0.2, 0.5]},
                {"screenshot": "s2.png", "action_type": "TYPE", "typed_text": "inbox"},
                {"screenshot": "s3.png", "action_type": "PRESS_HOME"},
                {"screenshot": "s4.png", "action_type": "STATUS_TASK_COMPLETE"},
            ],
        }]))
        episodes, rejects = import_benchmark("aitw", source, scenario="General")
        assert rejects == []
        actions = [step.action for step in episodes[0].steps]
        assert actions[0] == Tap(0.3, 0.5)  # (y, x) order flipped into (x, y)
        assert actions[1] == Swipe("up")
        assert actions[2] == TypeText("inbox")
        assert actions[3] == PressKey("home")
        assert actions[4] == StatusComplete()
        assert episodes[0].steps[0].screen.scenario == "General"

    def test_mind2web_select_mapping(self, tmp_path):
        source = tmp_path / "m2w.json"
        source.write_text(json.dumps([{
            "annotation_id": "ann-1",
            "confirmed_task": "book a flight",
            "actions": [
                {"action_uid": "a1", "screenshot": "w0.png",
                 "operation": {"op": "CLICK", "value": ""},
                 "pos_candidates": [{"backend_node_id": 101,
                                     "bbox": [0.1, 0.2, 0.3, 0.4]}]},
                {"action_uid": "a2", "screenshot": "w1.png",
                 "operation": {"op": "SELECT", "value": "2 adults"},
                 "pos_candidates": [{"backend_node_id": 102}]},
                {"action_uid": "a3", "screenshot": "w2.png",
                 "operation": {"op": "TYPE", "value": "NYC"},
                 "pos_candidates": [{"backend_node_id": 103}]},
            ],
        }]))
        episodes, rejects = import_benchmark("mind2web", source)
        assert rejects == []
        actions = [step.action for step in episodes[0].steps]
        assert actions[0] == ClickElement("101", bbox=actions[0].bbox)
        assert actions[0].bbox is not None
        assert actions[1] == SelectOption("102", "2 adults")
        assert actions[2] == TypeInElement("103", "NYC")

    def test_odyssey_mapping(self, tmp_path):
        source = tmp_path / "ody.json"
        source.write_text(json.dumps([{
            "episode_id": "od-1",
            "task": "share a photo",
            "steps": [
                {"screenshot": "o0.png", "action": "CLICK", "info": [0.4, 0.6]},
                {"screenshot": "o1.png", "action": "SCROLL", "info": "down"},
                {"screenshot": "o2.png", "action": "TEXT", "info": "beach"},
                {"screenshot": "o3.png", "action": "BACK"},
                {"screenshot": "o4.png", "action": "COMPLETE"},
            ],
        }]))
        episodes, rejects = import_benchmark("odyssey", source)
        assert rejects == []
        actions = [step.action for step in episodes[0].steps]
        assert actions[0] == Tap(0.4, 0.6)
        assert actions[1] == Swipe("down")
        assert actions[2] == TypeText("beach")
        assert actions[3] == PressKey("back")
        assert actions[4] == StatusComplete()

    def test_missing_screenshot_rejected_with_reason(self, tmp_path):
        source = tmp_path / "aitw.json"
        source.write_text(json.dumps([
            {"episode_id": "good", "goal": "g",
             "steps": [{"screenshot": "s.png", "action_type": "PRESS_BACK"}]},
            {"episode_id": "broken", "goal": "g",
             "steps": [{"action_type": "PRESS_BACK"}]},
        ]))
        episodes, rejects = import_benchmark("aitw", source)
        assert [e.episode_id for e in episodes] == ["good"]
        assert len(rejects) == 1
        assert rejects[0]["record_id"] == "broken"
        assert "screenshot" in rejects[0]["reason"]

    def test_unsupported_action_rejected(self, tmp_path):
        source = tmp_path / "ody.json"
        source.write_text(json.dumps([{
            "episode_id": "od-2", "task": "t",
            "steps": [{"screenshot": "o.png", "action": "LONG_PRESS", "info": [0.1, 0.1]}],
        }]))
        episodes, rejects = import_benchmark("odyssey", source)
        assert episodes == []
        assert "LONG_PRESS" in rejects[0]["reason"]

    def test_unknown_adapter(self, tmp_path):
        source = tmp_path / "x.json"
        source.write_text("[]")
        with pytest.raises(ValidationError):
            import_benchmark("webarena", source)

    def test_rejects_file(self, tmp_path):
        path = tmp_path / "rejects.jsonl"
        save_rejects([{"record_id": "r1", "reason": "broken"}], path)
        assert json.loads(path.read_text().splitlines()[0])["record_id"] == "r1"
