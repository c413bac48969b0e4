"""Episode files and benchmark import adapters.

An episode file is line-delimited: a versioned JSON header line carrying the
source benchmark tag, then one canonical JSON episode per line. Screen
locators are stored as given (normally relative to a corpus root) so files
stay relocatable.

Adapters map benchmark-shaped records into the unified action space. Records
that cannot be mapped are collected as rejects with a reason, never silently
dropped. Expected source shapes (JSON):

* ``generic``  -- ``{"benchmark": tag, "episodes": [<episode object>, ...]}``
  using this package's episode serialization.
* ``aitw``     -- list of ``{"episode_id", "goal", "steps": [{"screenshot",
  "action_type", "touch_yx", "lift_yx", "typed_text"}]}`` with normalized
  (y, x) points and action types DUAL_POINT / TYPE / PRESS_BACK / PRESS_HOME /
  PRESS_ENTER / STATUS_TASK_COMPLETE / STATUS_TASK_IMPOSSIBLE.
* ``mind2web`` -- list of ``{"annotation_id", "confirmed_task", "actions":
  [{"action_uid", "screenshot", "operation": {"op", "value"},
  "pos_candidates": [{"backend_node_id", "bbox"}]}]}`` with op CLICK / TYPE /
  SELECT and an optional normalized ``[left, top, right, bottom]`` bbox.
* ``odyssey``  -- list of ``{"episode_id", "task", "steps": [{"screenshot",
  "action", "info"}]}`` with action CLICK (info ``[x, y]`` normalized),
  SCROLL (info direction), TEXT (info string), HOME / BACK / ENTER, and
  COMPLETE / IMPOSSIBLE.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from pagegraph.errors import FormatError, ValidationError
from pagegraph.model import (
    Action,
    ClickElement,
    Episode,
    EpisodeStep,
    PressKey,
    Rect,
    ScreenRef,
    SelectOption,
    StatusComplete,
    StatusImpossible,
    Swipe,
    Tap,
    TypeInElement,
    TypeText,
)
from pagegraph.storage.serial import (
    atomic_write_text,
    compact_dumps,
    episode_from_obj,
    episode_to_obj,
    load_json,
)

EPISODES_HEADER_FORMAT = "pagegraph-episodes/1"

ADAPTERS = ("generic", "aitw", "mind2web", "odyssey")

# A dual-point gesture with touch and lift closer than this is a tap.
_DUAL_POINT_TAP_RADIUS = 0.04


def save_episodes(episodes: list[Episode], path: str | Path, benchmark: str = "generic") -> None:
    lines = [compact_dumps({"format": EPISODES_HEADER_FORMAT, "benchmark": benchmark})]
    lines.extend(compact_dumps(episode_to_obj(episode)) for episode in episodes)
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_episodes(path: str | Path) -> tuple[str, list[Episode]]:
    """Returns (benchmark tag, episodes)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty episode file", path=str(path), line=1)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise FormatError(f"bad header: {exc.msg}", path=str(path), line=1) from exc
    if not isinstance(header, dict) or header.get("format") != EPISODES_HEADER_FORMAT:
        raise FormatError(f"unsupported episode format {header!r}", path=str(path), line=1)
    episodes = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            episodes.append(episode_from_obj(json.loads(line)))
        except (json.JSONDecodeError, ValidationError) as exc:
            raise FormatError(f"bad episode record: {exc}", path=str(path), line=lineno) from exc
    return header.get("benchmark", ""), episodes


# -- adapters ------------------------------------------------------------------


def import_benchmark(adapter: str, source_path: str | Path,
                     scenario: str = "") -> tuple[list[Episode], list[dict]]:
    """Map benchmark records into episodes; returns (episodes, rejects)."""
    if adapter not in ADAPTERS:
        raise ValidationError(f"unknown adapter {adapter!r}; expected one of {ADAPTERS}")
    source = load_json(source_path)
    mapper = {
        "generic": _import_generic,
        "aitw": _import_aitw,
        "mind2web": _import_mind2web,
        "odyssey": _import_odyssey,
    }[adapter]
    return mapper(source, scenario)


def _reject(rejects: list[dict], record_id: str, reason: str) -> None:
    rejects.append({"record_id": record_id, "reason": reason})


def _import_generic(source, scenario: str) -> tuple[list[Episode], list[dict]]:
    if not isinstance(source, dict) or "episodes" not in source:
        raise FormatError("generic source must be an object with an 'episodes' array")
    episodes, rejects = [], []
    for position, obj in enumerate(source["episodes"]):
        try:
            episodes.append(episode_from_obj(obj))
        except ValidationError as exc:
            _reject(rejects, str(obj.get("episode_id", position)), str(exc))
    return episodes, rejects


def _screen(record: dict, scenario: str, record_id: str, key: str = "screenshot") -> ScreenRef:
    locator = record.get(key)
    if not locator:
        raise ValidationError(f"record {record_id!r}: step missing screenshot")
    return ScreenRef(locator=locator, scenario=scenario)


def _aitw_action(step: dict) -> Action:
    kind = step.get("action_type")
    if kind == "DUAL_POINT":
        touch = step.get("touch_yx")
        lift = step.get("lift_yx")
        if not touch or not lift:
            raise ValidationError("DUAL_POINT without touch/lift points")
        ty, tx = float(touch[0]), float(touch[1])
        ly, lx = float(lift[0]), float(lift[1])
        if math.dist((tx, ty), (lx, ly)) <= _DUAL_POINT_TAP_RADIUS:
            return Tap(tx, ty)
        dx, dy = lx - tx, ly - ty
        if abs(dy) >= abs(dx):
            return Swipe("up" if dy < 0 else "down")
        return Swipe("left" if dx < 0 else "right")
    if kind == "TYPE":
        return TypeText(step.get("typed_text", ""))
    if kind == "PRESS_BACK":
        return PressKey("back")
    if kind == "PRESS_HOME":
        return PressKey("home")
    if kind == "PRESS_ENTER":
        return PressKey("enter")
    if kind == "STATUS_TASK_COMPLETE":
        return StatusComplete()
    if kind == "STATUS_TASK_IMPOSSIBLE":
        return StatusImpossible()
    raise ValidationError(f"unsupported action_type {kind!r}")


def _import_aitw(source, scenario: str) -> tuple[list[Episode], list[dict]]:
    if not isinstance(source, list):
        raise FormatError("aitw source must be a list of episode records")
    episodes, rejects = [], []
    for position, record in enumerate(source):
        record_id = str(record.get("episode_id", position))
        try:
            steps = tuple(
                EpisodeStep(_screen(step, scenario, record_id), _aitw_action(step))
                for step in record.get("steps", [])
            )
            episodes.append(Episode(
                episode_id=record_id, task=record["goal"], steps=steps,
            ))
        except (ValidationError, KeyError, TypeError, ValueError) as exc:
            _reject(rejects, record_id, str(exc))
    return episodes, rejects


def _mind2web_action(action: dict) -> Action:
    operation = action.get("operation") or {}
    op = operation.get("op")
    candidates = action.get("pos_candidates") or []
    if not candidates:
        raise ValidationError("action without positive element candidates")
    element = candidates[0]
    element_id = str(element.get("backend_node_id", ""))
    if not element_id:
        raise ValidationError("element candidate without backend_node_id")
    bbox_values = element.get("bbox")
    bbox = Rect(*[float(v) for v in bbox_values]) if bbox_values else None
    if op == "CLICK":
        return ClickElement(element_id, bbox)
    if op == "SELECT":
        return SelectOption(element_id, operation.get("value", ""))
    if op == "TYPE":
        return TypeInElement(element_id, operation.get("value", ""))
    raise ValidationError(f"unsupported operation {op!r}")


def _import_mind2web(source, scenario: str) -> tuple[list[Episode], list[dict]]:
    if not isinstance(source, list):
        raise FormatError("mind2web source must be a list of annotation records")
    episodes, rejects = [], []
    for position, record in enumerate(source):
        record_id = str(record.get("annotation_id", position))
        try:
            steps = tuple(
                EpisodeStep(_screen(action, scenario, record_id), _mind2web_action(action))
                for action in record.get("actions", [])
            )
            episodes.append(Episode(
                episode_id=record_id, task=record["confirmed_task"], steps=steps,
            ))
        except (ValidationError, KeyError, TypeError, ValueError) as exc:
            _reject(rejects, record_id, str(exc))
    return episodes, rejects


def _odyssey_action(step: dict) -> Action:
    kind = step.get("action")
    info = step.get("info")
    if kind == "CLICK":
        if not isinstance(info, (list, tuple)) or len(info) != 2:
            raise ValidationError("CLICK without an [x, y] point")
        return Tap(float(info[0]), float(info[1]))
    if kind == "SCROLL":
        return Swipe(str(info).lower())
    if kind == "TEXT":
        return TypeText(str(info) if info is not None else "")
    if kind == "HOME":
        return PressKey("home")
    if kind == "BACK":
        return PressKey("back")
    if kind == "ENTER":
        return PressKey("enter")
    if kind == "COMPLETE":
        return StatusComplete()
    if kind == "IMPOSSIBLE":
        return StatusImpossible()
    raise ValidationError(f"unsupported action {kind!r}")


def _import_odyssey(source, scenario: str) -> tuple[list[Episode], list[dict]]:
    if not isinstance(source, list):
        raise FormatError("odyssey source must be a list of episode records")
    episodes, rejects = [], []
    for position, record in enumerate(source):
        record_id = str(record.get("episode_id", position))
        try:
            steps = tuple(
                EpisodeStep(_screen(step, scenario, record_id), _odyssey_action(step))
                for step in record.get("steps", [])
            )
            episodes.append(Episode(
                episode_id=record_id, task=record["task"], steps=steps,
            ))
        except (ValidationError, KeyError, TypeError, ValueError) as exc:
            _reject(rejects, record_id, str(exc))
    return episodes, rejects


def save_rejects(rejects: list[dict], path: str | Path) -> None:
    lines = [compact_dumps(record) for record in rejects]
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))
