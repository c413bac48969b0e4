"""Scripted oracle backend: answers every model role from world ground truth.

Responses are raw strings in the same wire formats a remote model would
produce, so they exercise the full parsing path. All answers are pure
functions of the world spec and the request inputs.
"""

from __future__ import annotations

import re

from pagegraph.errors import OracleUnavailableError, ValidationError
from pagegraph.model import (
    Action,
    ClickElement,
    OpenApp,
    PressKey,
    StatusComplete,
    StatusImpossible,
    Swipe,
    Tap,
    TypeText,
)
from pagegraph.oracle.parsing import format_action_line
from pagegraph.oracle.parts import OracleRequest
from pagegraph.retrieval import parse_rendered_guidelines
from pagegraph.world.spec import Page, State, TaskSpec, Widget, WorldSpec

_QUOTED = re.compile(r"'([^']*)'")
_GOAL_LINE = re.compile(r"^Goal: (?P<goal>.+)$", re.MULTILINE)


def summarize_world_action(world: WorldSpec, page: Page, action: Action) -> str:
    """Ground-truth action summary phrased against on-screen content."""
    if isinstance(action, Tap):
        widget = world.resolve_tap(page, action.x, action.y)
        if widget is None:
            return f"tap an empty spot on the {page.title} page"
        return f"tap the {widget.label} {widget.kind_word}"
    if isinstance(action, TypeText):
        widget = world.resolve_widget(page, action)
        if widget is None:
            return f"type '{action.text}'"
        return f"type '{action.text}' into the {widget.label} {widget.kind_word}"
    if isinstance(action, ClickElement):
        widget = world.resolve_widget(page, action)
        if widget is None:
            return f"click the {action.element_id} element"
        return f"tap the {widget.label} {widget.kind_word}"
    if isinstance(action, PressKey):
        return f"press the {action.key} key"
    if isinstance(action, Swipe):
        return f"swipe {action.direction} on the {page.title} page"
    if isinstance(action, OpenApp):
        return f"open the {action.name} app"
    if isinstance(action, StatusComplete):
        return "mark the task complete"
    if isinstance(action, StatusImpossible):
        return "mark the task impossible"
    raise ValidationError(f"unknown action {action!r}")


class ScriptedBackend:
    """Answers oracle requests from the world's transition table and planner.

    Decision policy: complete when the goal predicate holds; otherwise follow
    the first retrieved guideline whose achievable tasks include the goal and
    whose first unexecuted step applies to the current page; otherwise take
    the planner's shortest-route step. Without guidelines it falls back to a
    deterministic left-to-right sweep of the page's widgets.
    """

    def __init__(self, world: WorldSpec, enumerate_states: bool = True):
        self.world = world
        if enumerate_states:
            # Register every canonically reachable state digest, so locators
            # minted by another process (episode files) still resolve.
            world.enumerate_reachable()

    def complete(self, request: OracleRequest) -> str:
        handler = getattr(self, f"_{request.role_name}", None)
        if handler is None:
            raise OracleUnavailableError(f"scripted backend has no role {request.role_name!r}")
        return handler(request.fields)

    # -- construction roles ------------------------------------------------

    def _action_summary(self, fields: dict) -> str:
        page, _ = self.world.parse_locator(fields["locator"])
        return summarize_world_action(self.world, page, fields["action"])

    def _jump_judge(self, fields: dict) -> str:
        before, _ = self.world.parse_locator(fields["before"])
        after, _ = self.world.parse_locator(fields["after"])
        return "Yes" if before.name != after.name else "No"

    def _page_summary(self, fields: dict) -> str:
        page, _ = self.world.parse_locator(fields["locator"])
        return page.summary

    def _index_select(self, fields: dict) -> str:
        page, _ = self.world.parse_locator(fields["locator"])
        for number, candidate in enumerate(fields["candidates"], start=1):
            if candidate == page.summary:
                return str(number)
        return "1"

    def _dissimilar_judge(self, fields: dict) -> str:
        a, _ = self.world.parse_locator(fields["a"])
        b, _ = self.world.parse_locator(fields["b"])
        return "Yes" if a.name != b.name else "No"

    # -- agent roles ---------------------------------------------------------

    def _screen_summary(self, fields: dict) -> str:
        page, _ = self.world.parse_locator(fields["locator"])
        return page.summary

    def _task(self, goal: str) -> TaskSpec:
        try:
            return self.world.task(goal)
        except ValidationError as exc:
            raise OracleUnavailableError(
                f"scripted backend only knows world tasks; got goal {goal!r}"
            ) from exc

    def _global_plan(self, fields: dict) -> str:
        page, state = self.world.parse_locator(fields["locator"])
        goal = fields["goal"]
        task = self._task(goal)
        lines = [f"Goal: {goal}"]
        route = self.world.plan_route(page.name, state, task)
        if route is None:
            lines.append("1. Report the task as impossible.")
        elif not route:
            lines.append("1. Confirm the task is complete.")
        else:
            current_page, current_state = page.name, dict(state)
            for number, move in enumerate(route, start=1):
                summary = summarize_world_action(
                    self.world, self.world.page(current_page), move
                )
                lines.append(f"{number}. {summary.capitalize()}.")
                current_page, current_state, _ = self.world.apply_action(
                    current_page, current_state, move
                )
        return "\n".join(lines)

    def _observe(self, fields: dict) -> str:
        page, state = self.world.parse_locator(fields["locator"])
        labels = ", ".join(w.label for w in page.widgets) or "none"
        pairs = ", ".join(f"{k}={v}" for k, v in sorted(state.items())) or "initial"
        return f"{page.summary} Interactive widgets: {labels}. Current state: {pairs}."

    def _extract_goal(self, text: str) -> str:
        match = _GOAL_LINE.search(text)
        if match is None:
            raise OracleUnavailableError("scripted backend found no goal line upstream")
        return match.group("goal").strip()

    def _subtask_plan(self, fields: dict) -> str:
        page, state = self.world.parse_locator(fields["locator"])
        goal = self._extract_goal(fields["global_plan"])
        task = self._task(goal)
        action = self.world.plan_next_action(page.name, state, task)
        if action is None:
            step = "declare the task impossible"
        elif isinstance(action, StatusComplete):
            step = "confirm the task is complete"
        else:
            step = summarize_world_action(self.world, page, action)
        return (
            f"Goal: {goal}\n"
            f"Current sub-task: {step}.\n"
            f"Candidate actions:\n- {step}"
        )

    def _decide(self, fields: dict) -> str:
        page, state = self.world.parse_locator(fields["locator"])
        goal = self._extract_goal(fields["subtask_plan"])
        task = self._task(goal)
        if self.world.goal_satisfied(page.name, state, task):
            return format_action_line(StatusComplete()) + "\nThe goal state is reached."
        guidelines = parse_rendered_guidelines(fields["guidelines"])
        if guidelines:
            followed = self._follow_guidelines(page, state, goal, guidelines)
            if followed is not None:
                action, source = followed
                return format_action_line(action) + f"\nFollowing the guideline: {source}."
            action = self.world.plan_next_action(page.name, state, task)
            if action is None:
                return format_action_line(StatusImpossible()) + "\nNo route reaches the goal."
            return format_action_line(action) + "\nTaking the shortest route toward the goal."
        action = self._fallback_action(page, state)
        return format_action_line(action) + "\nNo guidance; sweeping widgets left to right."

    # -- decision policy helpers ----------------------------------------------

    def _follow_guidelines(self, page: Page, state: State, goal: str,
                           guidelines: list[tuple[tuple[str, ...], tuple[str, ...]]]
                           ) -> tuple[Action, str] | None:
        for queue, tasks in guidelines:
            if goal not in tasks:
                continue
            step_action = self._first_open_step(page, state, queue)
            if step_action is not None:
                action, summary = step_action
                return action, summary
        return None

    def _first_open_step(self, page: Page, state: State, queue: tuple[str, ...]
                         ) -> tuple[Action, str] | None:
        for summary in queue:
            widget = self._widget_from_summary(page, summary)
            if widget is None:
                return None
            if self._step_executed(widget, summary, state):
                continue
            return self._step_action(widget, summary), summary
        return None

    def _widget_from_summary(self, page: Page, summary: str) -> Widget | None:
        for widget in page.widgets:
            if f"the {widget.label} {widget.kind_word}" in summary:
                return widget
        return None

    @staticmethod
    def _quoted_text(summary: str, default: str) -> str:
        match = _QUOTED.search(summary)
        return match.group(1) if match is not None else default

    def _step_executed(self, widget: Widget, summary: str, state: State) -> bool:
        if widget.kind == "field":
            assert widget.field_name is not None
            return state.get(widget.field_name) == self._quoted_text(summary, widget.text)
        if widget.target is None and widget.effect:
            return all(state.get(k) == v for k, v in widget.effect)
        return False

    def _step_action(self, widget: Widget, summary: str) -> Action:
        if widget.kind == "field":
            return TypeText(self._quoted_text(summary, widget.text))
        return Tap(widget.x, widget.y)

    def _fallback_action(self, page: Page, state: State) -> Action:
        """Leftmost widget whose interaction would change the page or the state."""
        for widget in page.widgets:
            if widget.kind == "field":
                assert widget.field_name is not None
                if state.get(widget.field_name) != widget.text:
                    return TypeText(widget.text)
            elif widget.target is not None:
                if all(state.get(k) == v for k, v in widget.precondition):
                    return Tap(widget.x, widget.y)
            elif widget.effect and not all(state.get(k) == v for k, v in widget.effect):
                return Tap(widget.x, widget.y)
        if page.widgets:
            first = page.widgets[0]
            return first.action()
        return PressKey("back")
