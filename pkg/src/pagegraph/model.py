"""Domain types shared by graph construction, retrieval, the agent loop, and evaluation.

All types here are immutable values except :class:`PageGraph`, whose mutation
is confined to the builder (single writer).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from pagegraph.errors import ValidationError

SWIPE_DIRECTIONS = frozenset({"up", "down", "left", "right"})
PRESS_KEYS = frozenset({"back", "home", "enter"})

TERMINATED_COMPLETE = "complete"
TERMINATED_STEP_BUDGET = "step_budget"
TERMINATED_ERROR = "error"


def _check_unit(value: float, name: str) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"{name} must be in [0, 1], got {value!r}")


@dataclass(frozen=True)
class ScreenRef:
    """Reference to a screenshot by locator; pixel data is never held in memory."""

    locator: str
    width_px: int | None = None
    height_px: int | None = None
    scenario: str = ""

    def __post_init__(self) -> None:
        if not self.locator:
            raise ValidationError("ScreenRef.locator must be non-empty")
        for dim, name in ((self.width_px, "width_px"), (self.height_px, "height_px")):
            if dim is not None and dim <= 0:
                raise ValidationError(f"ScreenRef.{name} must be positive, got {dim}")


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle with corners normalized to [0, 1]."""

    left: float
    top: float
    right: float
    bottom: float

    def __post_init__(self) -> None:
        for value, name in (
            (self.left, "left"), (self.top, "top"),
            (self.right, "right"), (self.bottom, "bottom"),
        ):
            _check_unit(value, f"Rect.{name}")
        if self.left > self.right or self.top > self.bottom:
            raise ValidationError(f"Rect corners out of order: {self}")

    def contains(self, x: float, y: float) -> bool:
        return self.left <= x <= self.right and self.top <= y <= self.bottom


@dataclass(frozen=True)
class Tap:
    """Tap at a point, coordinates normalized to [0, 1]."""

    x: float
    y: float
    kind = "tap"

    def __post_init__(self) -> None:
        _check_unit(self.x, "Tap.x")
        _check_unit(self.y, "Tap.y")


@dataclass(frozen=True)
class Swipe:
    direction: str
    kind = "swipe"

    def __post_init__(self) -> None:
        if self.direction not in SWIPE_DIRECTIONS:
            raise ValidationError(f"Swipe.direction must be one of {sorted(SWIPE_DIRECTIONS)}")


@dataclass(frozen=True)
class TypeText:
    """Type text into the focused field; empty text means clear the field."""

    text: str
    kind = "type_text"


@dataclass(frozen=True)
class PressKey:
    key: str
    kind = "press_key"

    def __post_init__(self) -> None:
        if self.key not in PRESS_KEYS:
            raise ValidationError(f"PressKey.key must be one of {sorted(PRESS_KEYS)}")


@dataclass(frozen=True)
class ClickElement:
    element_id: str
    bbox: Rect | None = None
    kind = "click_element"

    def __post_init__(self) -> None:
        if not self.element_id:
            raise ValidationError("ClickElement.element_id must be non-empty")


@dataclass(frozen=True)
class SelectOption:
    element_id: str
    value: str
    kind = "select_option"

    def __post_init__(self) -> None:
        if not self.element_id:
            raise ValidationError("SelectOption.element_id must be non-empty")


@dataclass(frozen=True)
class TypeInElement:
    """Type into a named element; empty text means clear the field."""

    element_id: str
    text: str
    kind = "type_in_element"

    def __post_init__(self) -> None:
        if not self.element_id:
            raise ValidationError("TypeInElement.element_id must be non-empty")


@dataclass(frozen=True)
class OpenApp:
    name: str
    kind = "open_app"

    def __post_init__(self) -> None:
        if not self.name:
            raise ValidationError("OpenApp.name must be non-empty")


@dataclass(frozen=True)
class StatusComplete:
    kind = "status_complete"


@dataclass(frozen=True)
class StatusImpossible:
    kind = "status_impossible"


Action = Union[
    Tap, Swipe, TypeText, PressKey,
    ClickElement, SelectOption, TypeInElement, OpenApp,
    StatusComplete, StatusImpossible,
]

MOBILE_ACTION_KINDS = frozenset({
    "tap", "swipe", "type_text", "press_key", "open_app",
    "status_complete", "status_impossible",
})

STATUS_ACTION_KINDS = frozenset({"status_complete", "status_impossible"})


def describe_action(action: Action) -> str:
    """Deterministic one-line textual form of an action, used in history rendering."""
    if isinstance(action, Tap):
        return f"tap at ({action.x:.3f}, {action.y:.3f})"
    if isinstance(action, Swipe):
        return f"swipe {action.direction}"
    if isinstance(action, TypeText):
        return f"type {action.text!r}" if action.text else "clear the field"
    if isinstance(action, PressKey):
        return f"press the {action.key} key"
    if isinstance(action, ClickElement):
        return f"click element {action.element_id}"
    if isinstance(action, SelectOption):
        return f"select {action.value!r} in element {action.element_id}"
    if isinstance(action, TypeInElement):
        return f"type {action.text!r} into element {action.element_id}"
    if isinstance(action, OpenApp):
        return f"open the {action.name} app"
    if isinstance(action, StatusComplete):
        return "mark the task complete"
    if isinstance(action, StatusImpossible):
        return "mark the task impossible"
    raise ValidationError(f"unknown action {action!r}")


@dataclass(frozen=True)
class EpisodeStep:
    screen: ScreenRef
    action: Action


@dataclass(frozen=True)
class Episode:
    """One recorded multi-step GUI task execution.

    Consecutive steps imply the action-tuple stream: the screen of step i+1
    (or ``final_screen`` for the last step) is the after-image of step i.
    """

    episode_id: str
    task: str
    steps: tuple[EpisodeStep, ...]
    final_screen: ScreenRef | None = None

    def __post_init__(self) -> None:
        if not self.episode_id:
            raise ValidationError("Episode.episode_id must be non-empty")
        if not self.steps:
            raise ValidationError(f"episode {self.episode_id!r} has no steps")

    @property
    def screens(self) -> tuple[ScreenRef, ...]:
        """All screens in order, including the final screen when present."""
        screens = tuple(step.screen for step in self.steps)
        if self.final_screen is not None:
            screens += (self.final_screen,)
        return screens


def action_tuples(episode: Episode) -> list[tuple[ScreenRef, Action, ScreenRef]]:
    """Unroll an episode into (before, action, after) tuples.

    Returns ``len(steps)`` tuples when the episode carries a final screen,
    otherwise ``len(steps) - 1``: the last step has no observed after-image
    and is excluded.
    """
    screens = episode.screens
    return [
        (episode.steps[i].screen, episode.steps[i].action, screens[i + 1])
        for i in range(len(screens) - 1)
    ]


@dataclass(frozen=True)
class PageNode:
    """A unique page: summary text plus the locator of the image that created it."""

    node_id: str
    summary: str
    image_locator: str
    embedding: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if not self.node_id:
            raise ValidationError("PageNode.node_id must be non-empty")
        if not self.summary:
            raise ValidationError(f"node {self.node_id!r} has an empty summary")
        if not self.image_locator:
            raise ValidationError(f"node {self.node_id!r} has an empty image locator")


@dataclass(frozen=True)
class PageEdge:
    """A transition: the action summaries that caused it plus the originating task."""

    edge_id: str
    src: str
    dst: str
    action_queue: tuple[str, ...]
    task: str
    order_index: int

    def __post_init__(self) -> None:
        if not self.edge_id:
            raise ValidationError("PageEdge.edge_id must be non-empty")
        if not self.action_queue:
            raise ValidationError(f"edge {self.edge_id!r} has an empty action queue")
        if self.order_index < 0:
            raise ValidationError(f"edge {self.edge_id!r} has a negative order index")


GRAPH_SCHEMA_VERSION = 1


class PageGraph:
    """Directed multigraph of unique pages; parallel edges and self-loops permitted.

    Nodes and edges are immutable; the graph container itself is mutated only
    by the builder. ``meta`` holds provenance passed through save/load verbatim.
    """

    def __init__(self, scenario: str = "", schema_version: int = GRAPH_SCHEMA_VERSION,
                 meta: dict | None = None):
        self.scenario = scenario
        self.schema_version = schema_version
        self.meta: dict = meta if meta is not None else {}
        self.nodes: dict[str, PageNode] = {}
        self.edges: dict[str, PageEdge] = {}
        self.out_adjacency: dict[str, list[str]] = {}
        self._next_node = 1
        self._next_edge = 1

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def embedding_dim(self) -> int | None:
        for node in self.nodes.values():
            if node.embedding is not None:
                return len(node.embedding)
        return None

    def new_node_id(self) -> str:
        node_id = f"n{self._next_node:04d}"
        self._next_node += 1
        return node_id

    def add_node(self, node: PageNode) -> None:
        if node.node_id in self.nodes:
            raise ValidationError(f"duplicate node id {node.node_id!r}")
        dim = self.embedding_dim
        if node.embedding is not None and dim is not None and len(node.embedding) != dim:
            raise ValidationError(
                f"node {node.node_id!r} embedding dim {len(node.embedding)} != graph dim {dim}"
            )
        self.nodes[node.node_id] = node
        self.out_adjacency[node.node_id] = []
        self._bump_counter(node.node_id)

    def next_order_index(self) -> int:
        return len(self.edges)

    def add_edge(self, src: str, dst: str, action_queue: tuple[str, ...], task: str) -> PageEdge:
        if src not in self.nodes:
            raise ValidationError(f"edge source {src!r} not in graph")
        if dst not in self.nodes:
            raise ValidationError(f"edge destination {dst!r} not in graph")
        edge = PageEdge(
            edge_id=f"e{self._next_edge:04d}",
            src=src,
            dst=dst,
            action_queue=action_queue,
            task=task,
            order_index=self.next_order_index(),
        )
        self._next_edge += 1
        self.edges[edge.edge_id] = edge
        self.out_adjacency[src].append(edge.edge_id)
        return edge

    def insert_edge(self, edge: PageEdge) -> None:
        """Insert an already-built edge (load path); keeps adjacency in order_index order."""
        if edge.edge_id in self.edges:
            raise ValidationError(f"duplicate edge id {edge.edge_id!r}")
        if edge.src not in self.nodes:
            raise ValidationError(f"edge {edge.edge_id!r} has dangling src {edge.src!r}")
        if edge.dst not in self.nodes:
            raise ValidationError(f"edge {edge.edge_id!r} has dangling dst {edge.dst!r}")
        self.edges[edge.edge_id] = edge
        adjacency = self.out_adjacency[edge.src]
        adjacency.append(edge.edge_id)
        adjacency.sort(key=lambda eid: self.edges[eid].order_index)
        self._bump_counter(edge.edge_id)

    def out_edges(self, node_id: str) -> list[PageEdge]:
        if node_id not in self.nodes:
            raise ValidationError(f"unknown node {node_id!r}")
        return [self.edges[eid] for eid in self.out_adjacency[node_id]]

    def _bump_counter(self, ident: str) -> None:
        prefix, digits = ident[0], ident[1:]
        if not digits.isdigit():
            return
        value = int(digits) + 1
        if prefix == "n":
            self._next_node = max(self._next_node, value)
        elif prefix == "e":
            self._next_edge = max(self._next_edge, value)

    def validate(self) -> None:
        """Check structural invariants; raises ValidationError naming the offender."""
        for edge in self.edges.values():
            if edge.src not in self.nodes:
                raise ValidationError(f"edge {edge.edge_id!r} has dangling src {edge.src!r}")
            if edge.dst not in self.nodes:
                raise ValidationError(f"edge {edge.edge_id!r} has dangling dst {edge.dst!r}")
        adjacency_total = sum(len(eids) for eids in self.out_adjacency.values())
        if adjacency_total != len(self.edges):
            raise ValidationError(
                f"adjacency lists hold {adjacency_total} edges, graph has {len(self.edges)}"
            )
        for node_id, eids in self.out_adjacency.items():
            for eid in eids:
                if self.edges[eid].src != node_id:
                    raise ValidationError(f"edge {eid!r} filed under wrong node {node_id!r}")
        indices = sorted(edge.order_index for edge in self.edges.values())
        if indices != list(range(len(indices))):
            raise ValidationError("edge order indices are not the contiguous range 0..N-1")
        dims = {len(n.embedding) for n in self.nodes.values() if n.embedding is not None}
        if len(dims) > 1:
            raise ValidationError(f"mixed embedding dimensions in graph: {sorted(dims)}")


@dataclass(frozen=True)
class Guideline:
    """One retrieved hint: perform this action queue to work toward these tasks."""

    action_queue: tuple[str, ...]
    achievable_tasks: tuple[str, ...]
    source_node: str
    similarity_score: float

    def __post_init__(self) -> None:
        if not self.action_queue:
            raise ValidationError("Guideline.action_queue must be non-empty")
        if not self.achievable_tasks:
            raise ValidationError("Guideline.achievable_tasks must be non-empty")
        if self.similarity_score != self.similarity_score or self.similarity_score in (
            float("inf"), float("-inf"),
        ):
            raise ValidationError("Guideline.similarity_score must be finite")


@dataclass(frozen=True)
class TranscriptStep:
    screen: ScreenRef
    observation: str
    subtask_plan: str
    action: Action
    rationale: str
    guidelines_used: tuple[Guideline, ...] = ()


@dataclass(frozen=True)
class AgentTranscript:
    """Per-step record of one agent run; ``terminated_by`` names the exit cause."""

    goal: str
    global_plan: str
    steps: tuple[TranscriptStep, ...]
    terminated_by: str
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.terminated_by not in (
            TERMINATED_COMPLETE, TERMINATED_STEP_BUDGET, TERMINATED_ERROR,
        ):
            raise ValidationError(f"unknown termination cause {self.terminated_by!r}")
        final_complete = bool(self.steps) and isinstance(self.steps[-1].action, StatusComplete)
        if (self.terminated_by == TERMINATED_COMPLETE) != final_complete:
            raise ValidationError(
                "terminated_by=complete must coincide with a final StatusComplete decision"
            )
