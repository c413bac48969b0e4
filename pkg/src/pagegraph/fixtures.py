"""Golden fixture registry: producers, checksums, and drift checking.

Every checked-in golden file is regenerable by a scripted, offline producer.
``regenerate`` rebuilds fixtures into a directory and reports drift against
the manifest; CI verifies checksums and zero drift on a clean tree.

Run ``python -m pagegraph.fixtures <dir> --write`` to (re)generate a fixture
directory including its manifest.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from pagegraph.agent import AgentConfig, AgentRunner
from pagegraph.builder import GraphBuilder
from pagegraph.embedding import HashingEmbedder
from pagegraph.errors import FormatError
from pagegraph.model import PageGraph
from pagegraph.oracle import OracleClient, RecordingBackend
from pagegraph.storage import export_dot, save_episodes, save_graph, save_world
from pagegraph.storage.serial import atomic_write_text, canonical_dumps
from pagegraph.world import (
    ScriptedBackend,
    WorldEnvironment,
    demo_world,
    generate_episodes,
    true_page_graph,
)

MANIFEST_NAME = "manifest.json"
MANIFEST_FORMAT = "pagegraph-fixtures/1"


@dataclass(frozen=True)
class FixtureSpec:
    fixture_id: str
    file_name: str
    purpose: str
    command: str
    producer: Callable[[Path], None]


def _produce_world(path: Path) -> None:
    save_world(demo_world(), path)


def _produce_episodes(path: Path) -> None:
    save_episodes(generate_episodes(demo_world()), path, benchmark="demo")


def _produce_true_dot(path: Path) -> None:
    export_dot(true_page_graph(demo_world()), path)


def _build_demo_graph() -> PageGraph:
    world = demo_world()
    oracle = OracleClient(ScriptedBackend(world), retries=0)
    embedder = HashingEmbedder()
    graph = PageGraph(scenario="demo", meta={"embedder_id": embedder.embedder_id})
    GraphBuilder(graph, oracle, embedder).ingest_corpus(generate_episodes(world))
    return graph


def _produce_graph(path: Path) -> None:
    save_graph(_build_demo_graph(), path)


def _produce_replay_cache(path: Path) -> None:
    """Record every scripted exchange of a canonical build + run + eval flow."""
    if path.exists():
        path.unlink()
    world = demo_world()
    backend = RecordingBackend(ScriptedBackend(world), path, clock=lambda: 0.0)
    oracle = OracleClient(backend, retries=0)
    embedder = HashingEmbedder()
    episodes = generate_episodes(world)
    graph = PageGraph(scenario="demo", meta={"embedder_id": embedder.embedder_id})
    GraphBuilder(graph, oracle, embedder).ingest_corpus(episodes)
    runner = AgentRunner(oracle, embedder, graph, AgentConfig())
    runner.run_task(WorldEnvironment(world), "turn on wifi")
    for episode in episodes:
        for step_index in range(len(episode.steps)):
            runner.run_step_prediction(episode, step_index)


FIXTURES: tuple[FixtureSpec, ...] = (
    FixtureSpec(
        fixture_id="demo-world",
        file_name="demo_world.json",
        purpose="the canonical 8-page world definition",
        command="python -m pagegraph.fixtures <dir> --only demo-world --write",
        producer=_produce_world,
    ),
    FixtureSpec(
        fixture_id="demo-episodes",
        file_name="demo_episodes.jsonl",
        purpose="gold task episodes generated from the demo world",
        command="python -m pagegraph.fixtures <dir> --only demo-episodes --write",
        producer=_produce_episodes,
    ),
    FixtureSpec(
        fixture_id="demo-true-graph-dot",
        file_name="demo_true_graph.dot",
        purpose="DOT export of the demo world's reference page graph",
        command="python -m pagegraph.fixtures <dir> --only demo-true-graph-dot --write",
        producer=_produce_true_dot,
    ),
    FixtureSpec(
        fixture_id="demo-task-graph",
        file_name="demo_task_graph.json",
        purpose="page graph built from the gold episodes with the scripted oracle",
        command="python -m pagegraph.fixtures <dir> --only demo-task-graph --write",
        producer=_produce_graph,
    ),
    FixtureSpec(
        fixture_id="demo-replay-cache",
        file_name="demo_replay_cache.jsonl",
        purpose="recorded scripted-oracle exchanges covering build, run, and eval",
        command="python -m pagegraph.fixtures <dir> --only demo-replay-cache --write",
        producer=_produce_replay_cache,
    ),
)


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(root: Path) -> None:
    entries = []
    for spec in FIXTURES:
        target = root / spec.file_name
        entries.append({
            "id": spec.fixture_id,
            "file": spec.file_name,
            "purpose": spec.purpose,
            "command": spec.command,
            "sha256": sha256_file(target),
        })
    atomic_write_text(root / MANIFEST_NAME, canonical_dumps({
        "format": MANIFEST_FORMAT,
        "fixtures": entries,
    }))


def load_manifest(root: Path) -> dict:
    document = json.loads((root / MANIFEST_NAME).read_text(encoding="utf-8"))
    if document.get("format") != MANIFEST_FORMAT:
        raise FormatError("not a fixture manifest", path=str(root / MANIFEST_NAME))
    return document


def verify_checksums(root: Path) -> list[str]:
    """Fixture ids whose on-disk bytes do not match the manifest."""
    manifest = load_manifest(root)
    drifted = []
    for entry in manifest["fixtures"]:
        target = root / entry["file"]
        if not target.exists() or sha256_file(target) != entry["sha256"]:
            drifted.append(entry["id"])
    return drifted


def regenerate(root: Path, write: bool = False,
               only: str | None = None) -> list[str]:
    """Re-run all producers; returns ids whose output differs from disk.

    With ``write`` the regenerated bytes (and a refreshed manifest) replace
    the originals; without it the comparison leaves the tree untouched.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    drifted = []
    for spec in FIXTURES:
        if only is not None and spec.fixture_id != only:
            continue
        target = root / spec.file_name
        fresh = root / (spec.file_name + ".regen")
        if fresh.exists():
            fresh.unlink()
        spec.producer(fresh)
        changed = not target.exists() or target.read_bytes() != fresh.read_bytes()
        if changed:
            drifted.append(spec.fixture_id)
        if write:
            fresh.replace(target)
        else:
            fresh.unlink()
    if write and only is None:
        write_manifest(root)
    return drifted


def main(argv: list[str] | None = None) -> int:
    import argparse

    parser = argparse.ArgumentParser(description="regenerate golden fixtures")
    parser.add_argument("root", help="fixture directory")
    parser.add_argument("--write", action="store_true", help="replace drifted files")
    parser.add_argument("--only", help="restrict to one fixture id")
    args = parser.parse_args(argv)
    drifted = regenerate(Path(args.root), write=args.write, only=args.only)
    if drifted:
        print(f"{len(drifted)} drifted fixtures: {', '.join(drifted)}")
        return 0 if args.write else 1
    print("0 drifted fixtures")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
