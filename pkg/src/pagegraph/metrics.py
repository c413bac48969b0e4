"""Stepwise benchmark metrics and graph/corpus statistics.

Mobile steps score with an action-matching rule (type equality plus
coordinate/direction/text tolerance); web steps score with element accuracy,
token-level operation F1, and step success rate. All metric functions are
pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from pagegraph.builder import BuildReport
from pagegraph.errors import ValidationError
from pagegraph.model import (
    Action,
    ClickElement,
    OpenApp,
    PageGraph,
    PressKey,
    Rect,
    SelectOption,
    StatusComplete,
    StatusImpossible,
    Swipe,
    Tap,
    TypeInElement,
    TypeText,
)

TAP_MATCH_THRESHOLD = 0.14


@dataclass(frozen=True)
class StepRecord:
    """One evaluated step: gold action, predicted action, and gold element data."""

    gold: Action
    predicted: Action
    scenario: str = ""
    gold_elements: tuple[str, ...] = ()
    gold_bbox: Rect | None = None
    width_px: int | None = None
    height_px: int | None = None


@dataclass(frozen=True)
class MetricSlice:
    """Metric values over one group of steps; web and mobile fill different fields."""

    count: int
    action_match_rate: float | None = None
    ele_acc: float | None = None
    op_f1: float | None = None
    step_sr: float | None = None

    def as_dict(self) -> dict:
        out: dict = {"count": self.count}
        for name in ("action_match_rate", "ele_acc", "op_f1", "step_sr"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out


@dataclass(frozen=True)
class MetricReport:
    kind: str
    per_scenario: tuple[tuple[str, MetricSlice], ...]
    overall: MetricSlice

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "per_scenario": {name: s.as_dict() for name, s in self.per_scenario},
            "overall": self.overall.as_dict(),
        }


def _text_equal(a: str, b: str) -> bool:
    return a.strip().lower() == b.strip().lower()


def match_mobile_action(gold: Action, predicted: Action,
                        tap_threshold: float = TAP_MATCH_THRESHOLD,
                        gold_bbox: Rect | None = None) -> bool:
    """Mobile action-matching rule; incomparable variants simply do not match.

    Taps match inside the gold element's box when one is provided, otherwise
    within ``tap_threshold`` normalized Euclidean distance of the gold point.
    """
    if type(gold) is not type(predicted):
        return False
    if isinstance(gold, Tap):
        assert isinstance(predicted, Tap)
        if gold_bbox is not None:
            return gold_bbox.contains(predicted.x, predicted.y)
        return math.dist((gold.x, gold.y), (predicted.x, predicted.y)) <= tap_threshold
    if isinstance(gold, Swipe):
        assert isinstance(predicted, Swipe)
        return gold.direction == predicted.direction
    if isinstance(gold, TypeText):
        assert isinstance(predicted, TypeText)
        return _text_equal(gold.text, predicted.text)
    if isinstance(gold, PressKey):
        assert isinstance(predicted, PressKey)
        return gold.key == predicted.key
    if isinstance(gold, OpenApp):
        assert isinstance(predicted, OpenApp)
        return _text_equal(gold.name, predicted.name)
    if isinstance(gold, (StatusComplete, StatusImpossible)):
        return True
    return False


def op_f1(gold_operation: str, predicted_operation: str) -> float:
    """Token-set F1 over whitespace tokens, case-insensitive."""
    gold_tokens = set(gold_operation.lower().split())
    predicted_tokens = set(predicted_operation.lower().split())
    if not gold_tokens and not predicted_tokens:
        return 1.0
    if not gold_tokens or not predicted_tokens:
        return 0.0
    common = len(gold_tokens & predicted_tokens)
    if common == 0:
        return 0.0
    precision = common / len(predicted_tokens)
    recall = common / len(gold_tokens)
    return 2.0 * precision * recall / (precision + recall)


def operation_string(action: Action) -> str:
    """Canonical ``<VERB> <value tokens...>`` form used by the web metrics."""
    if isinstance(action, ClickElement):
        return "CLICK"
    if isinstance(action, SelectOption):
        return f"SELECT {action.value}"
    if isinstance(action, TypeInElement):
        return f"TYPE {action.text}"
    if isinstance(action, StatusComplete):
        return "COMPLETE"
    if isinstance(action, StatusImpossible):
        return "IMPOSSIBLE"
    if isinstance(action, Tap):
        return "TAP"
    if isinstance(action, Swipe):
        return f"SWIPE {action.direction}"
    if isinstance(action, TypeText):
        return f"TYPE {action.text}"
    if isinstance(action, PressKey):
        return f"PRESS {action.key}"
    if isinstance(action, OpenApp):
        return f"OPEN_APP {action.name}"
    raise ValidationError(f"unknown action {action!r}")


def _element_id(action: Action) -> str | None:
    if isinstance(action, (ClickElement, SelectOption, TypeInElement)):
        return action.element_id
    return None


def mobile_step_metrics(records: list[StepRecord],
                        tap_threshold: float = TAP_MATCH_THRESHOLD) -> MetricSlice:
    if not records:
        raise ValidationError("metrics over an empty record list are undefined")
    matches = sum(
        1 for record in records
        if match_mobile_action(record.gold, record.predicted,
                               tap_threshold=tap_threshold, gold_bbox=record.gold_bbox)
    )
    return MetricSlice(count=len(records), action_match_rate=matches / len(records))


def web_step_metrics(records: list[StepRecord],
                     select_click_equivalence: bool = False) -> MetricSlice:
    """Element accuracy, mean operation F1, and step success rate.

    A step succeeds when the predicted element is among the gold's acceptable
    elements and the operation strings match exactly (case-insensitive).
    ``select_click_equivalence`` accepts a SELECT prediction on the right
    element when the gold is the click encoding of the same interaction.
    """
    if not records:
        raise ValidationError("metrics over an empty record list are undefined")
    element_hits = 0
    f1_total = 0.0
    step_successes = 0
    for record in records:
        gold_element = _element_id(record.gold)
        if gold_element is None and not record.gold_elements:
            raise ValidationError(
                f"web record with gold {record.gold!r} carries no element information"
            )
        acceptable = set(record.gold_elements) if record.gold_elements else {gold_element}
        element_hit = _element_id(record.predicted) in acceptable
        gold_op = operation_string(record.gold)
        predicted_op = operation_string(record.predicted)
        if (select_click_equivalence and element_hit
                and isinstance(record.gold, ClickElement)
                and isinstance(record.predicted, SelectOption)):
            predicted_op = gold_op
        if element_hit:
            element_hits += 1
        f1_total += op_f1(gold_op, predicted_op)
        if element_hit and " ".join(gold_op.lower().split()) == " ".join(predicted_op.lower().split()):
            step_successes += 1
    count = len(records)
    return MetricSlice(
        count=count,
        ele_acc=element_hits / count,
        op_f1=f1_total / count,
        step_sr=step_successes / count,
    )


def build_metric_report(records: list[StepRecord], kind: str,
                        tap_threshold: float = TAP_MATCH_THRESHOLD,
                        select_click_equivalence: bool = False) -> MetricReport:
    """Per-scenario slices plus an overall slice, scenario order = first appearance."""
    if kind not in ("mobile", "web"):
        raise ValidationError(f"unknown metric kind {kind!r}")
    scenarios: list[str] = []
    grouped: dict[str, list[StepRecord]] = {}
    for record in records:
        name = record.scenario or "default"
        if name not in grouped:
            grouped[name] = []
            scenarios.append(name)
        grouped[name].append(record)

    def compute(group: list[StepRecord]) -> MetricSlice:
        if kind == "mobile":
            return mobile_step_metrics(group, tap_threshold=tap_threshold)
        return web_step_metrics(group, select_click_equivalence=select_click_equivalence)

    per_scenario = tuple((name, compute(grouped[name])) for name in scenarios)
    return MetricReport(kind=kind, per_scenario=per_scenario, overall=compute(records))


# -- graph statistics ---------------------------------------------------------


@dataclass(frozen=True)
class StatsRow:
    scenario: str
    episodes: int
    images: int
    nodes: int
    edges: int


def graph_stats(graph: PageGraph, report: BuildReport) -> list[StatsRow]:
    """Statistics of one built graph and its ingestion counters."""
    if not graph.nodes and report.episodes_processed == 0:
        return []
    return [StatsRow(
        scenario=graph.scenario or "default",
        episodes=report.episodes_processed,
        images=report.images_seen,
        nodes=len(graph.nodes),
        edges=len(graph.edges),
    )]


def total_row(rows: list[StatsRow]) -> StatsRow:
    return StatsRow(
        scenario="Total",
        episodes=sum(r.episodes for r in rows),
        images=sum(r.images for r in rows),
        nodes=sum(r.nodes for r in rows),
        edges=sum(r.edges for r in rows),
    )


def render_stats_table(rows: list[StatsRow], include_total: bool = True) -> str:
    """Aligned text table with a trailing total row."""
    all_rows = list(rows)
    if include_total:
        all_rows.append(total_row(rows))
    header = ("Scenario", "#Episodes", "#Images", "#Nodes", "#Edges")
    cells = [header] + [
        (r.scenario, str(r.episodes), str(r.images), str(r.nodes), str(r.edges))
        for r in all_rows
    ]
    widths = [max(len(row[col]) for row in cells) for col in range(len(header))]
    lines = []
    for number, row in enumerate(cells):
        padded = [row[0].ljust(widths[0])] + [
            row[col].rjust(widths[col]) for col in range(1, len(header))
        ]
        lines.append("  ".join(padded).rstrip())
        if number == 0:
            lines.append("-" * len(lines[0]))
    return "\n".join(lines)
