"""Four-role agent loop: plan globally once, then observe / plan sub-task / decide.

The loop runs against any :class:`Environment` until the decider reports
completion, the step budget runs out, or an oracle/environment fault ends the
run. A terminal environment outcome without completion (an exhausted replayer
or an impossible verdict) counts as budget exhaustion, not an error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

from pagegraph.embedding import Embedder
from pagegraph.errors import OracleError, ValidationError
from pagegraph.model import (
    Action,
    AgentTranscript,
    Episode,
    PageGraph,
    ScreenRef,
    StatusComplete,
    TERMINATED_COMPLETE,
    TERMINATED_ERROR,
    TERMINATED_STEP_BUDGET,
    TranscriptStep,
    describe_action,
)
from pagegraph.oracle.client import OracleClient
from pagegraph.retrieval import GuidelineRetriever, RetrievalConfig, render_guidelines

GUIDELINE_MODES = ("per_step", "once", "disabled")

NO_HISTORY = "No previous actions."
_DIGEST_CHARS = 100


class Environment(Protocol):
    """A GUI the agent can act on; ``apply`` returns None once the run is over."""

    def current_screen(self) -> ScreenRef: ...

    def apply(self, action: Action) -> ScreenRef | None: ...


@dataclass(frozen=True)
class AgentConfig:
    max_steps: int = 15
    history_window: int = 5
    guideline_mode: str = "per_step"
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)

    def __post_init__(self) -> None:
        if self.max_steps < 1:
            raise ValidationError("max_steps must be at least 1")
        if self.history_window < 0:
            raise ValidationError("history_window must be non-negative")
        if self.guideline_mode not in GUIDELINE_MODES:
            raise ValidationError(f"unknown guideline mode {self.guideline_mode!r}")


@dataclass(frozen=True)
class HistoryEntry:
    action_summary: str
    observation_digest: str


def _digest(text: str) -> str:
    first_line = text.splitlines()[0] if text.splitlines() else ""
    return first_line[:_DIGEST_CHARS]


def render_history(entries: list[HistoryEntry], window: int) -> str:
    """Render the last ``window`` steps (all when 0), one numbered line each."""
    if not entries:
        return NO_HISTORY
    selected = entries if window == 0 else entries[-window:]
    start = len(entries) - len(selected) + 1
    return "\n".join(
        f"step {start + offset}: {entry.action_summary} — {entry.observation_digest}"
        for offset, entry in enumerate(selected)
    )


class AgentRunner:
    """Binds the oracle, embedder, graph, and config for repeated runs."""

    def __init__(self, oracle: OracleClient, embedder: Embedder, graph: PageGraph,
                 cfg: AgentConfig):
        self.oracle = oracle
        self.embedder = embedder
        self.graph = graph
        self.cfg = cfg
        self._retriever = (
            GuidelineRetriever(graph, embedder, oracle, cfg.retrieval)
            if cfg.guideline_mode != "disabled" else None
        )

    def _guidelines(self, screen: ScreenRef):
        if self._retriever is None:
            return []
        return self._retriever.retrieve(screen)

    def run_task(self, env: Environment, goal: str) -> AgentTranscript:
        """Run the loop until completion, budget, or fault; never raises for those."""
        if not goal:
            raise ValidationError("goal must be non-empty")
        steps: list[TranscriptStep] = []
        entries: list[HistoryEntry] = []
        terminated = TERMINATED_STEP_BUDGET
        global_plan = ""
        try:
            screen = env.current_screen()
            global_plan = self.oracle.global_plan(screen, goal)
            once_guidelines = (
                self._guidelines(screen) if self.cfg.guideline_mode == "once" else None
            )
            while len(steps) < self.cfg.max_steps:
                screen = env.current_screen()
                if self.cfg.guideline_mode == "per_step":
                    guidelines = self._guidelines(screen)
                elif self.cfg.guideline_mode == "once":
                    guidelines = once_guidelines or []
                else:
                    guidelines = []
                rendered_guidelines = render_guidelines(guidelines)
                history = render_history(entries, self.cfg.history_window)
                observation = self.oracle.observe(screen, goal, history)
                subtask = self.oracle.plan_subtask(
                    screen, observation, global_plan, rendered_guidelines, history
                )
                action, rationale = self.oracle.decide(
                    screen, observation, subtask, rendered_guidelines, history
                )
                steps.append(TranscriptStep(
                    screen=screen, observation=observation, subtask_plan=subtask,
                    action=action, rationale=rationale, guidelines_used=tuple(guidelines),
                ))
                entries.append(HistoryEntry(describe_action(action), _digest(observation)))
                outcome = env.apply(action)
                if isinstance(action, StatusComplete):
                    terminated = TERMINATED_COMPLETE
                    break
                if outcome is None:
                    break
        except (OracleError, ValidationError):
            terminated = TERMINATED_ERROR
            if steps and isinstance(steps[-1].action, StatusComplete):
                terminated = TERMINATED_COMPLETE
        return AgentTranscript(
            goal=goal, global_plan=global_plan, steps=tuple(steps), terminated_by=terminated,
        )

    def run_step_prediction(self, gold_episode: Episode, step_index: int) -> Action:
        """Teacher-forced prediction: gold history in, one observe/plan/decide out.

        The global plan is computed from the episode's first screen, matching
        its placement before the loop; nothing later than ``step_index`` is
        ever referenced.
        """
        if not 0 <= step_index < len(gold_episode.steps):
            raise ValidationError(f"step index {step_index} out of range")
        goal = gold_episode.task
        initial = gold_episode.steps[0].screen
        global_plan = self.oracle.global_plan(initial, goal)
        entries = [
            HistoryEntry(describe_action(gold_episode.steps[i].action),
                         gold_episode.steps[i].screen.locator)
            for i in range(step_index)
        ]
        screen = gold_episode.steps[step_index].screen
        if self.cfg.guideline_mode == "per_step":
            guidelines = self._guidelines(screen)
        elif self.cfg.guideline_mode == "once":
            guidelines = self._guidelines(initial)
        else:
            guidelines = []
        rendered_guidelines = render_guidelines(guidelines)
        history = render_history(entries, self.cfg.history_window)
        observation = self.oracle.observe(screen, goal, history)
        subtask = self.oracle.plan_subtask(
            screen, observation, global_plan, rendered_guidelines, history
        )
        action, _ = self.oracle.decide(
            screen, observation, subtask, rendered_guidelines, history
        )
        return action
