"""Deterministic GUI micro-world: pages, widgets, transitions, and tasks.

Screens are symbolic ``world://`` URIs, never rendered bitmaps, so the whole
test path stays hermetic. The world's transition table is the ground truth
that the scripted oracle answers from.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections import deque
from dataclasses import dataclass, field

from pagegraph.errors import ValidationError
from pagegraph.model import (
    Action,
    ClickElement,
    ScreenRef,
    StatusComplete,
    StatusImpossible,
    Tap,
    TypeText,
)

WIDGET_KINDS = frozenset({"button", "field", "list-item"})
_KIND_WORD = {"button": "button", "field": "field", "list-item": "item"}

# Tap resolution: a tap lands on the nearest widget within this normalized radius.
TAP_RADIUS = 0.1

State = dict[str, str]
StatePairs = tuple[tuple[str, str], ...]


def state_pairs(state: State) -> StatePairs:
    return tuple(sorted(state.items()))


def state_digest(state: State) -> str:
    payload = json.dumps(dict(sorted(state.items())), separators=(",", ":"), sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


@dataclass(frozen=True)
class Widget:
    """One interactive element; either an in-page control or a page link.

    Fields (``kind="field"``) type ``text`` into the state key ``field_name``.
    Widgets with a ``target`` jump there when ``precondition`` is satisfied;
    ``effect`` entries are merged into the state whenever the widget fires.
    """

    widget_id: str
    label: str
    kind: str
    x: float
    y: float
    target: str | None = None
    effect: StatePairs = ()
    precondition: StatePairs = ()
    field_name: str | None = None
    text: str = ""

    def __post_init__(self) -> None:
        if self.kind not in WIDGET_KINDS:
            raise ValidationError(f"widget {self.widget_id!r}: unknown kind {self.kind!r}")
        if not 0.0 <= self.x <= 1.0 or not 0.0 <= self.y <= 1.0:
            raise ValidationError(f"widget {self.widget_id!r}: coordinates must be in [0, 1]")
        if self.kind == "field" and not self.field_name:
            raise ValidationError(f"field widget {self.widget_id!r} needs a field_name")
        if self.kind == "field" and self.target is not None:
            raise ValidationError(f"field widget {self.widget_id!r} cannot be a page link")

    @property
    def kind_word(self) -> str:
        return _KIND_WORD[self.kind]

    def action(self) -> Action:
        """The canonical action that interacts with this widget."""
        if self.kind == "field":
            return TypeText(self.text)
        return Tap(self.x, self.y)

    def action_summary(self) -> str:
        """Canonical natural-language summary of interacting with this widget."""
        if self.kind == "field":
            return f"type '{self.text}' into the {self.label} {self.kind_word}"
        return f"tap the {self.label} {self.kind_word}"


@dataclass(frozen=True)
class Page:
    name: str
    title: str
    summary: str
    widgets: tuple[Widget, ...]

    def __post_init__(self) -> None:
        if not self.summary:
            raise ValidationError(f"page {self.name!r} needs a summary")
        seen = set()
        for widget in self.widgets:
            if widget.widget_id in seen:
                raise ValidationError(f"page {self.name!r}: duplicate widget {widget.widget_id!r}")
            seen.add(widget.widget_id)


@dataclass(frozen=True)
class TaskSpec:
    """A navigation task: its goal is a target page plus required state entries."""

    name: str
    goal_page: str | None = None
    goal_state: StatePairs = ()

    def __post_init__(self) -> None:
        if not self.name:
            raise ValidationError("task name must be non-empty")
        if self.goal_page is None and not self.goal_state:
            raise ValidationError(f"task {self.name!r} has an empty goal")


@dataclass(frozen=True)
class WorldSpec:
    """Immutable world definition plus a registry of minted state digests."""

    scenario: str
    start_page: str
    pages: tuple[Page, ...]
    tasks: tuple[TaskSpec, ...] = ()
    schema_version: int = 1
    _state_registry: dict[str, State] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        names = [page.name for page in self.pages]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate page names in world")
        by_name = {page.name: page for page in self.pages}
        if self.start_page not in by_name:
            raise ValidationError(f"start page {self.start_page!r} does not exist")
        for page in self.pages:
            for widget in page.widgets:
                if widget.target is not None and widget.target not in by_name:
                    raise ValidationError(
                        f"widget {widget.widget_id!r} targets unknown page {widget.target!r}"
                    )
                if widget.target == page.name:
                    raise ValidationError(
                        f"widget {widget.widget_id!r} on {page.name!r} may not self-loop"
                    )
        task_names = [task.name for task in self.tasks]
        if len(set(task_names)) != len(task_names):
            raise ValidationError("duplicate task names in world")
        for task in self.tasks:
            if task.goal_page is not None and task.goal_page not in by_name:
                raise ValidationError(f"task {task.name!r} targets unknown page")
        self._state_registry[state_digest({})] = {}

    def page(self, name: str) -> Page:
        for page in self.pages:
            if page.name == name:
                return page
        raise ValidationError(f"unknown page {name!r}")

    def task(self, name: str) -> TaskSpec:
        for task in self.tasks:
            if task.name == name:
                return task
        raise ValidationError(f"unknown task {name!r}")

    def transitions(self) -> list[tuple[Page, Widget]]:
        """All page links in page order then widget order."""
        return [
            (page, widget)
            for page in self.pages
            for widget in page.widgets
            if widget.target is not None
        ]

    # -- screens ---------------------------------------------------------

    def screen(self, page_name: str, state: State) -> ScreenRef:
        self.page(page_name)
        digest = state_digest(state)
        self._state_registry.setdefault(digest, dict(state))
        return ScreenRef(
            locator=f"world://page/{page_name}/state/{digest}", scenario=self.scenario
        )

    def parse_locator(self, locator: str) -> tuple[Page, State]:
        parts = locator.split("/")
        if len(parts) != 6 or parts[0] != "world:" or parts[2] != "page" or parts[4] != "state":
            raise ValidationError(f"not a world locator: {locator!r}")
        page = self.page(parts[3])
        state = self._state_registry.get(parts[5])
        if state is None:
            raise ValidationError(f"unknown state digest in locator {locator!r}")
        return page, dict(state)

    # -- dynamics --------------------------------------------------------

    def resolve_tap(self, page: Page, x: float, y: float) -> Widget | None:
        best: Widget | None = None
        best_distance = TAP_RADIUS
        for widget in page.widgets:
            distance = math.dist((widget.x, widget.y), (x, y))
            if distance <= best_distance and (best is None or distance < best_distance):
                best, best_distance = widget, distance
        return best

    def resolve_widget(self, page: Page, action: Action) -> Widget | None:
        """The widget an action interacts with on this page, if any."""
        if isinstance(action, Tap):
            return self.resolve_tap(page, action.x, action.y)
        if isinstance(action, TypeText):
            for widget in page.widgets:
                if widget.kind == "field":
                    return widget
            return None
        if isinstance(action, ClickElement):
            for widget in page.widgets:
                if widget.widget_id == action.element_id:
                    return widget
            return None
        return None

    def apply_action(self, page_name: str, state: State, action: Action
                     ) -> tuple[str, State, bool]:
        """Apply one action; returns (page, state, jumped). Unbound actions are no-ops."""
        if isinstance(action, (StatusComplete, StatusImpossible)):
            raise ValidationError("status actions are terminal; the environment handles them")
        page = self.page(page_name)
        widget = self.resolve_widget(page, action)
        if widget is None:
            return page_name, dict(state), False
        new_state = dict(state)
        if isinstance(action, TypeText):
            assert widget.field_name is not None
            if action.text:
                new_state[widget.field_name] = action.text
            else:
                new_state.pop(widget.field_name, None)
            return page_name, new_state, False
        if widget.kind == "field":
            # Tapping a field only focuses it.
            return page_name, new_state, False
        if widget.target is not None:
            if all(new_state.get(k) == v for k, v in widget.precondition):
                new_state.update(widget.effect)
                return widget.target, new_state, True
            return page_name, new_state, False
        new_state.update(widget.effect)
        return page_name, new_state, False

    def goal_satisfied(self, page_name: str, state: State, task: TaskSpec) -> bool:
        if task.goal_page is not None and page_name != task.goal_page:
            return False
        return all(state.get(k) == v for k, v in task.goal_state)

    # -- planning --------------------------------------------------------

    def _moves(self, page: Page) -> list[Action]:
        return [widget.action() for widget in page.widgets]

    def plan_route(self, page_name: str, state: State, task: TaskSpec,
                   limit: int = 100_000) -> list[Action] | None:
        """Shortest action sequence to the task goal, or None when unreachable.

        Deterministic: breadth-first over (page, state) with moves tried in
        widget order, so equal-length routes resolve to the first in order.
        """
        start = (page_name, state_pairs(state))
        if self.goal_satisfied(page_name, state, task):
            return []
        visited = {start}
        queue: deque[tuple[str, StatePairs, tuple[Action, ...]]] = deque(
            [(page_name, state_pairs(state), ())]
        )
        expansions = 0
        while queue:
            current_page, pairs, route = queue.popleft()
            expansions += 1
            if expansions > limit:
                raise ValidationError("state-space search limit exceeded")
            current_state = dict(pairs)
            for move in self._moves(self.page(current_page)):
                next_page, next_state, _ = self.apply_action(current_page, current_state, move)
                key = (next_page, state_pairs(next_state))
                if key in visited:
                    continue
                visited.add(key)
                next_route = route + (move,)
                if self.goal_satisfied(next_page, next_state, task):
                    return list(next_route)
                queue.append((next_page, state_pairs(next_state), next_route))
        return None

    def plan_next_action(self, page_name: str, state: State, task: TaskSpec) -> Action | None:
        """Next canonical action toward the goal; StatusComplete when already there."""
        if self.goal_satisfied(page_name, state, task):
            return StatusComplete()
        route = self.plan_route(page_name, state, task)
        if route is None:
            return None
        return route[0]

    def enumerate_reachable(self, cap: int = 100_000) -> list[tuple[str, State]]:
        """All (page, state) pairs reachable from the start via canonical moves.

        Registers every reachable state digest, so locators minted by another
        process resolve after loading the world.
        """
        start = (self.start_page, state_pairs({}))
        visited = {start}
        queue = deque([start])
        result = []
        while queue:
            page_name, pairs = queue.popleft()
            state = dict(pairs)
            self._state_registry.setdefault(state_digest(state), dict(state))
            result.append((page_name, state))
            if len(visited) > cap:
                raise ValidationError("reachable state space exceeds cap")
            for move in self._moves(self.page(page_name)):
                next_page, next_state, _ = self.apply_action(page_name, state, move)
                key = (next_page, state_pairs(next_state))
                if key not in visited:
                    visited.add(key)
                    queue.append(key)
        return result
