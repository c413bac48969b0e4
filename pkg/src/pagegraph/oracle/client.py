"""Typed client over the model backends: one method per model role.

Every method renders its role template, issues the request through the
configured backend with up to ``retries`` extra attempts, parses the raw
response, and enforces the role's output contract. With ``retries=0`` exactly
one attempt is made.
"""

from __future__ import annotations

import logging
from collections import Counter
from typing import Callable, TypeVar

from pagegraph.errors import OracleError, OracleParseError, ValidationError
from pagegraph.model import Action, ScreenRef, describe_action
from pagegraph.oracle.backends import Backend
from pagegraph.oracle.parsing import has_numbered_item, parse_action_line, parse_index, parse_yes_no
from pagegraph.oracle.parts import IMAGE, TEXT, OracleExchange, OracleRequest, Part
from pagegraph.oracle.templates import PromptTemplate, load_templates

logger = logging.getLogger(__name__)

T = TypeVar("T")


def _nonempty(text: str) -> str:
    stripped = text.strip()
    if not stripped:
        raise OracleParseError("empty response")
    return stripped


class OracleClient:
    """Issues role-typed requests and returns parsed values.

    ``call_counts`` tallies invocations per role; ``trace`` (when enabled)
    collects every successful exchange for inspection in tests.
    """

    def __init__(self, backend: Backend,
                 templates: dict[str, PromptTemplate] | None = None,
                 retries: int = 2, trace: bool = False):
        if retries < 0:
            raise ValidationError("retries must be >= 0")
        self.backend = backend
        self.templates = templates if templates is not None else load_templates()
        self.retries = retries
        self.call_counts: Counter[str] = Counter()
        self.trace: list[OracleExchange] | None = [] if trace else None

    def _exchange(self, request: OracleRequest, parse: Callable[[str], T]) -> T:
        self.call_counts[request.role_name] += 1
        last_error: OracleError | None = None
        for attempt in range(self.retries + 1):
            try:
                raw = self.backend.complete(request)
                parsed = parse(raw)
            except OracleError as exc:
                last_error = exc
                if attempt < self.retries:
                    logger.debug("retrying %s after %s (attempt %d)",
                                 request.role_name, exc, attempt + 1)
                continue
            if self.trace is not None:
                self.trace.append(OracleExchange(
                    role_name=request.role_name, inputs=request.parts,
                    raw_response=raw, parsed=parsed, request_hash=request.hash,
                ))
            return parsed
        assert last_error is not None
        raise last_error

    def summarize_action(self, before: ScreenRef, action: Action) -> str:
        rendered = self.templates["action_summary"].render(action=describe_action(action))
        request = OracleRequest(
            "action_summary",
            (Part(IMAGE, before.locator), Part(TEXT, rendered)),
            fields={"locator": before.locator, "action": action},
        )
        return self._exchange(request, _nonempty)

    def judge_jump(self, before: ScreenRef, after: ScreenRef, action_summary: str) -> bool:
        rendered = self.templates["jump_judge"].render(action_summary=action_summary)
        request = OracleRequest(
            "jump_judge",
            (Part(IMAGE, before.locator), Part(IMAGE, after.locator), Part(TEXT, rendered)),
            fields={"before": before.locator, "after": after.locator,
                    "action_summary": action_summary},
        )
        return self._exchange(request, parse_yes_no)

    def summarize_page(self, page: ScreenRef) -> str:
        request = OracleRequest(
            "page_summary",
            (Part(IMAGE, page.locator), Part(TEXT, self.templates["page_summary"].render())),
            fields={"locator": page.locator},
        )
        return self._exchange(request, _nonempty)

    def select_most_similar(self, page: ScreenRef, candidates: list[str]) -> int:
        if not candidates:
            raise ValidationError("select_most_similar needs at least one candidate")
        numbered = "\n".join(f"{i}. {text}" for i, text in enumerate(candidates, start=1))
        rendered = self.templates["index_select"].render(candidates=numbered)
        request = OracleRequest(
            "index_select",
            (Part(IMAGE, page.locator), Part(TEXT, rendered)),
            fields={"locator": page.locator, "candidates": list(candidates)},
        )
        return self._exchange(request, lambda raw: parse_index(raw, len(candidates)))

    def judge_dissimilar(self, a: ScreenRef, b: ScreenRef) -> bool:
        request = OracleRequest(
            "dissimilar_judge",
            (Part(IMAGE, a.locator), Part(IMAGE, b.locator),
             Part(TEXT, self.templates["dissimilar_judge"].render())),
            fields={"a": a.locator, "b": b.locator},
        )
        return self._exchange(request, parse_yes_no)

    def summarize_screen(self, screen: ScreenRef) -> str:
        request = OracleRequest(
            "screen_summary",
            (Part(IMAGE, screen.locator), Part(TEXT, self.templates["screen_summary"].render())),
            fields={"locator": screen.locator},
        )
        return self._exchange(request, _nonempty)

    def global_plan(self, screen: ScreenRef, goal: str) -> str:
        if not goal:
            raise ValidationError("goal must be non-empty")
        rendered = self.templates["global_plan"].render(goal=goal)
        request = OracleRequest(
            "global_plan",
            (Part(IMAGE, screen.locator), Part(TEXT, rendered)),
            fields={"locator": screen.locator, "goal": goal},
        )

        def parse(raw: str) -> str:
            text = _nonempty(raw)
            if not has_numbered_item(text):
                raise OracleParseError("global plan has no numbered sub-task")
            return text

        return self._exchange(request, parse)

    def observe(self, screen: ScreenRef, goal: str, history: str) -> str:
        rendered = self.templates["observe"].render(goal=goal, history=history)
        request = OracleRequest(
            "observe",
            (Part(IMAGE, screen.locator), Part(TEXT, rendered)),
            fields={"locator": screen.locator, "goal": goal, "history": history},
        )
        return self._exchange(request, _nonempty)

    def plan_subtask(self, screen: ScreenRef, observation: str, global_plan: str,
                     guidelines: str, history: str) -> str:
        rendered = self.templates["subtask_plan"].render(
            observation=observation, global_plan=global_plan,
            guidelines=guidelines, history=history,
        )
        request = OracleRequest(
            "subtask_plan",
            (Part(IMAGE, screen.locator), Part(TEXT, rendered)),
            fields={"locator": screen.locator, "observation": observation,
                    "global_plan": global_plan, "guidelines": guidelines,
                    "history": history},
        )
        return self._exchange(request, _nonempty)

    def decide(self, screen: ScreenRef, observation: str, subtask_plan: str,
               guidelines: str, history: str) -> tuple[Action, str]:
        rendered = self.templates["decide"].render(
            observation=observation, subtask_plan=subtask_plan,
            guidelines=guidelines, history=history,
        )
        request = OracleRequest(
            "decide",
            (Part(IMAGE, screen.locator), Part(TEXT, rendered)),
            fields={"locator": screen.locator, "observation": observation,
                    "subtask_plan": subtask_plan, "guidelines": guidelines,
                    "history": history},
        )
        return self._exchange(request, lambda raw: (parse_action_line(raw), raw.strip()))
