"""Durable formats: graph store, episode files, DOT export, transcripts, worlds."""

from pagegraph.storage.dot import export_dot
from pagegraph.storage.episodes import (
    ADAPTERS,
    import_benchmark,
    load_episodes,
    save_episodes,
    save_rejects,
)
from pagegraph.storage.graphfile import load_graph, save_graph
from pagegraph.storage.serial import atomic_write_text, canonical_dumps, compact_dumps
from pagegraph.storage.transcripts import (
    load_predictions,
    load_transcript,
    load_world,
    save_predictions,
    save_transcript,
    save_world,
)

__all__ = [
    "ADAPTERS",
    "atomic_write_text",
    "canonical_dumps",
    "compact_dumps",
    "export_dot",
    "import_benchmark",
    "load_episodes",
    "load_graph",
    "load_predictions",
    "load_transcript",
    "load_world",
    "save_episodes",
    "save_graph",
    "save_predictions",
    "save_rejects",
    "save_transcript",
    "save_world",
]
