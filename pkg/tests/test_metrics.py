import math
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pagegraph.builder import BuildReport
from pagegraph.errors import ValidationError
from pagegraph.metrics import (
    StatsRow,
    StepRecord,
    build_metric_report,
    graph_stats,
    match_mobile_action,
    mobile_step_metrics,
    op_f1,
    operation_string,
    render_stats_table,
    total_row,
    web_step_metrics,
)
from pagegraph.model import (
    ClickElement,
    OpenApp,
    PageGraph,
    PressKey,
    Rect,
    SelectOption,
    StatusComplete,
    Swipe,
    Tap,
    TypeInElement,
    TypeText,
)


class TestMobileMatching:
    def test_tap_within_threshold(self):
        # Euclidean distance sqrt(0.05^2 + 0.05^2) ~= 0.0707 <= 0.14.
        gold, predicted = Tap(0.50, 0.50), Tap(0.55, 0.55)
        assert math.isclose(math.dist((0.5, 0.5), (0.55, 0.55)), 0.0707, abs_tol=1e-4)
        assert match_mobile_action(gold, predicted) is True

    def test_tap_beyond_threshold(self):
        assert match_mobile_action(Tap(0.5, 0.5), Tap(0.7, 0.7)) is False

    def test_zero_threshold_requires_exact_point(self):
        assert match_mobile_action(Tap(0.5, 0.5), Tap(0.5, 0.5), tap_threshold=0.0)
        assert not match_mobile_action(Tap(0.5, 0.5), Tap(0.500001, 0.5),
                                       tap_threshold=0.0)

    def test_bbox_overrides_distance(self):
        bbox = Rect(0.0, 0.0, 0.2, 0.2)
        assert match_mobile_action(Tap(0.9, 0.9), Tap(0.1, 0.1), gold_bbox=bbox)
        assert not match_mobile_action(Tap(0.1, 0.1), Tap(0.12, 0.3), gold_bbox=bbox)

    def test_type_text_case_insensitive_trimmed(self):
        assert match_mobile_action(TypeText("Hello"), TypeText("hello"))
        assert match_mobile_action(TypeText(" hello "), TypeText("hello"))
        assert not match_mobile_action(TypeText("hello"), TypeText("hullo"))

    def test_variant_mismatch_is_false_not_error(self):
        assert match_mobile_action(Swipe("up"), Tap(0.5, 0.5)) is False
        assert match_mobile_action(ClickElement("x"), Tap(0.5, 0.5)) is False

    def test_swipe_and_key_and_status(self):
        assert match_mobile_action(Swipe("up"), Swipe("up"))
        assert not match_mobile_action(Swipe("up"), Swipe("down"))
        assert match_mobile_action(PressKey("back"), PressKey("back"))
        assert not match_mobile_action(PressKey("back"), PressKey("home"))
        assert match_mobile_action(StatusComplete(), StatusComplete())
        assert match_mobile_action(OpenApp("Maps"), OpenApp("maps"))


class TestOpF1:
    def test_partial_overlap(self):
        assert op_f1("CLICK submit", "CLICK button submit") == pytest.approx(0.8)

    def test_identical(self):
        assert op_f1("TYPE hello world", "TYPE hello world") == 1.0

    def test_disjoint(self):
        assert op_f1("CLICK a", "TYPE b") == 0.0

    def test_empty_rules(self):
        assert op_f1("", "") == 1.0
        assert op_f1("CLICK", "") == 0.0
        assert op_f1("", "CLICK") == 0.0

    @given(st.text(alphabet="abc XYZ", max_size=20), st.text(alphabet="abc XYZ", max_size=20))
    @settings(max_examples=200, deadline=None)
    def test_symmetric_and_bounded(self, a, b):
        forward, backward = op_f1(a, b), op_f1(b, a)
        assert forward == backward
        assert 0.0 <= forward <= 1.0

    @given(st.lists(st.sampled_from(["click", "type", "ok", "go"]), max_size=5))
    @settings(max_examples=100, deadline=None)
    def test_one_iff_same_token_set(self, tokens):
        text = " ".join(tokens)
        shuffled = " ".join(reversed(tokens))
        assert op_f1(text, shuffled) == 1.0


class TestOperationString:
    def test_web_kinds(self):
        assert operation_string(ClickElement("node-1")) == "CLICK"
        assert operation_string(SelectOption("node-2", "red")) == "SELECT red"
        assert operation_string(TypeInElement("node-3", "york")) == "TYPE york"


class TestWebStepMetrics:
    def _fixture(self):
        # Four steps: three element hits, two of those also operation-exact.
        return [
            StepRecord(gold=ClickElement("a"), predicted=ClickElement("a")),        # hit+op
            StepRecord(gold=TypeInElement("b", "york"),
                       predicted=TypeInElement("b", "york")),                       # hit+op
            StepRecord(gold=SelectOption("c", "red"),
                       predicted=SelectOption("c", "blue")),                        # hit only
            StepRecord(gold=ClickElement("d"), predicted=ClickElement("zzz")),      # miss
        ]

    def test_hand_counted_fixture(self):
        result = web_step_metrics(self._fixture())
        assert result.ele_acc == pytest.approx(0.75)
        assert result.step_sr == pytest.approx(0.5)

    def test_all_correct(self):
        records = [
            StepRecord(gold=ClickElement("a"), predicted=ClickElement("a")),
            StepRecord(gold=TypeInElement("b", "x"), predicted=TypeInElement("b", "x")),
        ]
        result = web_step_metrics(records)
        assert (result.ele_acc, result.op_f1, result.step_sr) == (1.0, 1.0, 1.0)

    def test_empty_records_error(self):
        with pytest.raises(ValidationError):
            web_step_metrics([])

    def test_missing_element_is_record_error(self):
        with pytest.raises(ValidationError):
            web_step_metrics([StepRecord(gold=Tap(0.5, 0.5), predicted=ClickElement("a"))])

    def test_gold_element_candidates_accepted(self):
        record = StepRecord(gold=ClickElement("a"), predicted=ClickElement("alt"),
                            gold_elements=("a", "alt"))
        assert web_step_metrics([record]).ele_acc == 1.0

    def test_step_sr_never_exceeds_ele_acc(self):
        result = web_step_metrics(self._fixture())
        assert result.step_sr <= result.ele_acc

    def test_select_click_equivalence_flag(self):
        record = StepRecord(gold=ClickElement("a"), predicted=SelectOption("a", "red"))
        strict = web_step_metrics([record])
        lenient = web_step_metrics([record], select_click_equivalence=True)
        assert strict.step_sr == 0.0
        assert lenient.step_sr == 1.0
        assert lenient.op_f1 > strict.op_f1


class TestMobileStepMetrics:
    def test_rate(self):
        records = [
            StepRecord(gold=Tap(0.5, 0.5), predicted=Tap(0.55, 0.55)),
            StepRecord(gold=Swipe("up"), predicted=Swipe("down")),
        ]
        assert mobile_step_metrics(records).action_match_rate == pytest.approx(0.5)

    def test_report_grouping(self):
        records = [
            StepRecord(gold=Swipe("up"), predicted=Swipe("up"), scenario="General"),
            StepRecord(gold=Swipe("up"), predicted=Swipe("down"), scenario="Install"),
        ]
        report = build_metric_report(records, kind="mobile")
        assert [name for name, _ in report.per_scenario] == ["General", "Install"]
        assert report.overall.action_match_rate == pytest.approx(0.5)

    def test_pure_function(self):
        records = [StepRecord(gold=Swipe("up"), predicted=Swipe("up"))]
        assert mobile_step_metrics(records) == mobile_step_metrics(records)


class TestGraphStats:
    def test_benchmark_style_formatting_fixture(self):
        # Formatting fixture with supplied values, total row included: the
        # source table's own episode total (231) does not equal its column
        # sum (233), so the total row is supplied data here, not recomputed.
        rows = [
            StatsRow("General", 43, 341, 132, 168),
            StatsRow("Install", 55, 538, 208, 286),
            StatsRow("G.Apps", 24, 198, 67, 93),
            StatsRow("Single", 55, 194, 92, 70),
            StatsRow("WebShop.", 56, 712, 201, 323),
            StatsRow("Total", 231, 1983, 700, 940),
        ]
        table = render_stats_table(rows, include_total=False)
        general = next(line for line in table.splitlines() if line.startswith("General"))
        assert re.split(r"\s+", general.strip()) == ["General", "43", "341", "132", "168"]
        total = next(line for line in table.splitlines() if line.startswith("Total"))
        assert re.split(r"\s+", total.strip()) == ["Total", "231", "1983", "700", "940"]

    def test_total_row_recomputes_column_sums(self):
        rows = [
            StatsRow("General", 43, 341, 132, 168),
            StatsRow("Install", 55, 538, 208, 286),
            StatsRow("G.Apps", 24, 198, 67, 93),
            StatsRow("Single", 55, 194, 92, 70),
            StatsRow("WebShop.", 56, 712, 201, 323),
        ]
        totals = total_row(rows)
        # Images, nodes, and edges agree with the published totals; episodes
        # sum to 233 because the published 231 is inconsistent with its rows.
        assert (totals.images, totals.nodes, totals.edges) == (1983, 700, 940)
        assert totals.episodes == 233

    def test_empty_graph_zero_rows(self):
        rows = graph_stats(PageGraph(), BuildReport())
        assert rows == []
        totals = total_row(rows)
        assert (totals.episodes, totals.images, totals.nodes, totals.edges) == (0, 0, 0, 0)

    def test_demo_world_counts(self, cover_graph, world, cover_episodes):
        report = BuildReport(
            episodes_processed=len(cover_episodes),
            images_seen=sum(len(e.screens) for e in cover_episodes),
        )
        rows = graph_stats(cover_graph, report)
        assert len(rows) == 1
        assert rows[0].nodes == 8
        assert rows[0].scenario == "demo"
