"""Transcript and world persistence, plus the prediction line format."""

from __future__ import annotations

import json
from pathlib import Path

from pagegraph.errors import FormatError
from pagegraph.model import Action, AgentTranscript
from pagegraph.oracle.parsing import format_action_line, parse_action_line
from pagegraph.storage.serial import (
    atomic_write_text,
    canonical_dumps,
    compact_dumps,
    load_json,
    transcript_from_obj,
    transcript_to_obj,
    world_from_obj,
    world_to_obj,
)
from pagegraph.world.spec import WorldSpec

TRANSCRIPT_FORMAT = "pagegraph-transcript"
PREDICTIONS_HEADER_FORMAT = "pagegraph-predictions/1"


def save_transcript(transcript: AgentTranscript, path: str | Path) -> None:
    document = {"format": TRANSCRIPT_FORMAT, "schema_version": 1}
    document.update(transcript_to_obj(transcript))
    atomic_write_text(path, canonical_dumps(document))


def load_transcript(path: str | Path) -> AgentTranscript:
    document = load_json(path)
    if not isinstance(document, dict) or document.get("format") != TRANSCRIPT_FORMAT:
        raise FormatError("not a transcript file", path=str(path))
    return transcript_from_obj(document)


def save_world(world: WorldSpec, path: str | Path) -> None:
    atomic_write_text(path, canonical_dumps(world_to_obj(world)))


def load_world(path: str | Path) -> WorldSpec:
    document = load_json(path)
    if not isinstance(document, dict) or document.get("format") != "pagegraph-world":
        raise FormatError("not a world file", path=str(path))
    return world_from_obj(document)


def save_predictions(rows: list[tuple[str, int, Action]], path: str | Path) -> None:
    """One record per line: episode id, step index, action in the wire grammar."""
    lines = [compact_dumps({"format": PREDICTIONS_HEADER_FORMAT})]
    lines.extend(
        compact_dumps({
            "episode_id": episode_id,
            "step": step_index,
            "action": format_action_line(action),
        })
        for episode_id, step_index, action in rows
    )
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_predictions(path: str | Path) -> list[tuple[str, int, Action]]:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise FormatError("empty predictions file", path=str(path), line=1)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise FormatError(f"bad header: {exc.msg}", path=str(path), line=1) from exc
    if not isinstance(header, dict) or header.get("format") != PREDICTIONS_HEADER_FORMAT:
        raise FormatError("not a predictions file", path=str(path), line=1)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            rows.append((record["episode_id"], int(record["step"]),
                         parse_action_line(record["action"])))
        except Exception as exc:
            raise FormatError(f"bad prediction record: {exc}", path=str(path), line=lineno) from exc
    return rows
