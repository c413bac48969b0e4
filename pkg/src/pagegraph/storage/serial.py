"""Canonical JSON serialization shared by every persisted artifact.

One writer produces byte-stable output (sorted keys, fixed separators,
trailing newline) and files are written atomically via a same-directory
temporary file, so concurrent readers never observe partial writes.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any

from pagegraph.errors import FormatError, ValidationError
from pagegraph.model import (
    Action,
    AgentTranscript,
    ClickElement,
    Episode,
    EpisodeStep,
    Guideline,
    OpenApp,
    PressKey,
    Rect,
    ScreenRef,
    SelectOption,
    StatusComplete,
    StatusImpossible,
    Swipe,
    Tap,
    TranscriptStep,
    TypeInElement,
    TypeText,
)
from pagegraph.world.spec import Page, TaskSpec, Widget, WorldSpec


def canonical_dumps(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def compact_dumps(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    descriptor, temp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(descriptor, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(temp_name, path)
    except BaseException:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise


def load_json(path: str | Path) -> Any:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg}", path=str(path), line=exc.lineno) from exc


# -- actions -------------------------------------------------------------------

def action_to_obj(action: Action) -> dict:
    if isinstance(action, Tap):
        return {"kind": "tap", "x": action.x, "y": action.y}
    if isinstance(action, Swipe):
        return {"kind": "swipe", "direction": action.direction}
    if isinstance(action, TypeText):
        return {"kind": "type_text", "text": action.text}
    if isinstance(action, PressKey):
        return {"kind": "press_key", "key": action.key}
    if isinstance(action, ClickElement):
        return {"kind": "click_element", "element_id": action.element_id,
                "bbox": rect_to_obj(action.bbox) if action.bbox else None}
    if isinstance(action, SelectOption):
        return {"kind": "select_option", "element_id": action.element_id,
                "value": action.value}
    if isinstance(action, TypeInElement):
        return {"kind": "type_in_element", "element_id": action.element_id,
                "text": action.text}
    if isinstance(action, OpenApp):
        return {"kind": "open_app", "name": action.name}
    if isinstance(action, StatusComplete):
        return {"kind": "status_complete"}
    if isinstance(action, StatusImpossible):
        return {"kind": "status_impossible"}
    raise ValidationError(f"unknown action {action!r}")


def action_from_obj(obj: dict) -> Action:
    kind = obj.get("kind")
    try:
        if kind == "tap":
            return Tap(obj["x"], obj["y"])
        if kind == "swipe":
            return Swipe(obj["direction"])
        if kind == "type_text":
            return TypeText(obj["text"])
        if kind == "press_key":
            return PressKey(obj["key"])
        if kind == "click_element":
            bbox = obj.get("bbox")
            return ClickElement(obj["element_id"], rect_from_obj(bbox) if bbox else None)
        if kind == "select_option":
            return SelectOption(obj["element_id"], obj["value"])
        if kind == "type_in_element":
            return TypeInElement(obj["element_id"], obj["text"])
        if kind == "open_app":
            return OpenApp(obj["name"])
        if kind == "status_complete":
            return StatusComplete()
        if kind == "status_impossible":
            return StatusImpossible()
    except KeyError as exc:
        raise ValidationError(f"action object missing field {exc}") from exc
    raise ValidationError(f"unknown action kind {kind!r}")


def rect_to_obj(rect: Rect) -> dict:
    return {"left": rect.left, "top": rect.top, "right": rect.right, "bottom": rect.bottom}


def rect_from_obj(obj: dict) -> Rect:
    return Rect(obj["left"], obj["top"], obj["right"], obj["bottom"])


# -- screens and episodes -------------------------------------------------------

def screen_to_obj(screen: ScreenRef) -> dict:
    return {
        "locator": screen.locator,
        "width_px": screen.width_px,
        "height_px": screen.height_px,
        "scenario": screen.scenario,
    }


def screen_from_obj(obj: dict) -> ScreenRef:
    return ScreenRef(
        locator=obj["locator"],
        width_px=obj.get("width_px"),
        height_px=obj.get("height_px"),
        scenario=obj.get("scenario", ""),
    )


def episode_to_obj(episode: Episode) -> dict:
    return {
        "episode_id": episode.episode_id,
        "task": episode.task,
        "steps": [
            {"screen": screen_to_obj(step.screen), "action": action_to_obj(step.action)}
            for step in episode.steps
        ],
        "final_screen": screen_to_obj(episode.final_screen) if episode.final_screen else None,
    }


def episode_from_obj(obj: dict) -> Episode:
    try:
        steps = tuple(
            EpisodeStep(screen_from_obj(step["screen"]), action_from_obj(step["action"]))
            for step in obj["steps"]
        )
        final = obj.get("final_screen")
        return Episode(
            episode_id=obj["episode_id"],
            task=obj["task"],
            steps=steps,
            final_screen=screen_from_obj(final) if final else None,
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed episode object: {exc}") from exc


# -- guidelines and transcripts ---------------------------------------------------

def guideline_to_obj(guideline: Guideline) -> dict:
    return {
        "action_queue": list(guideline.action_queue),
        "achievable_tasks": list(guideline.achievable_tasks),
        "source_node": guideline.source_node,
        "similarity_score": guideline.similarity_score,
    }


def guideline_from_obj(obj: dict) -> Guideline:
    return Guideline(
        action_queue=tuple(obj["action_queue"]),
        achievable_tasks=tuple(obj["achievable_tasks"]),
        source_node=obj["source_node"],
        similarity_score=obj["similarity_score"],
    )


def transcript_to_obj(transcript: AgentTranscript) -> dict:
    return {
        "goal": transcript.goal,
        "global_plan": transcript.global_plan,
        "terminated_by": transcript.terminated_by,
        "meta": transcript.meta,
        "steps": [
            {
                "screen": screen_to_obj(step.screen),
                "observation": step.observation,
                "subtask_plan": step.subtask_plan,
                "action": action_to_obj(step.action),
                "rationale": step.rationale,
                "guidelines_used": [guideline_to_obj(g) for g in step.guidelines_used],
            }
            for step in transcript.steps
        ],
    }


def transcript_from_obj(obj: dict) -> AgentTranscript:
    try:
        steps = tuple(
            TranscriptStep(
                screen=screen_from_obj(step["screen"]),
                observation=step["observation"],
                subtask_plan=step["subtask_plan"],
                action=action_from_obj(step["action"]),
                rationale=step["rationale"],
                guidelines_used=tuple(guideline_from_obj(g) for g in step["guidelines_used"]),
            )
            for step in obj["steps"]
        )
        return AgentTranscript(
            goal=obj["goal"],
            global_plan=obj["global_plan"],
            steps=steps,
            terminated_by=obj["terminated_by"],
            meta=obj.get("meta", {}),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed transcript object: {exc}") from exc


# -- worlds ----------------------------------------------------------------------

def world_to_obj(world: WorldSpec) -> dict:
    return {
        "format": "pagegraph-world",
        "schema_version": world.schema_version,
        "scenario": world.scenario,
        "start_page": world.start_page,
        "pages": [
            {
                "name": page.name,
                "title": page.title,
                "summary": page.summary,
                "widgets": [
                    {
                        "widget_id": w.widget_id,
                        "label": w.label,
                        "kind": w.kind,
                        "x": w.x,
                        "y": w.y,
                        "target": w.target,
                        "effect": [list(pair) for pair in w.effect],
                        "precondition": [list(pair) for pair in w.precondition],
                        "field_name": w.field_name,
                        "text": w.text,
                    }
                    for w in page.widgets
                ],
            }
            for page in world.pages
        ],
        "tasks": [
            {
                "name": task.name,
                "goal_page": task.goal_page,
                "goal_state": [list(pair) for pair in task.goal_state],
            }
            for task in world.tasks
        ],
    }


def world_from_obj(obj: dict) -> WorldSpec:
    try:
        pages = tuple(
            Page(
                name=page["name"],
                title=page["title"],
                summary=page["summary"],
                widgets=tuple(
                    Widget(
                        widget_id=w["widget_id"],
                        label=w["label"],
                        kind=w["kind"],
                        x=w["x"],
                        y=w["y"],
                        target=w.get("target"),
                        effect=tuple(tuple(pair) for pair in w.get("effect", [])),
                        precondition=tuple(tuple(pair) for pair in w.get("precondition", [])),
                        field_name=w.get("field_name"),
                        text=w.get("text", ""),
                    )
                    for w in page["widgets"]
                ),
            )
            for page in obj["pages"]
        )
        tasks = tuple(
            TaskSpec(
                name=task["name"],
                goal_page=task.get("goal_page"),
                goal_state=tuple(tuple(pair) for pair in task.get("goal_state", [])),
            )
            for task in obj.get("tasks", [])
        )
        return WorldSpec(
            scenario=obj["scenario"],
            start_page=obj["start_page"],
            pages=pages,
            tasks=tasks,
            schema_version=obj.get("schema_version", 1),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed world object: {exc}") from exc
