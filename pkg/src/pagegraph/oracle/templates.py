"""Prompt templates: one editable text file per model role.

Templates use ``{placeholder}`` substitution. Defaults ship as package data
and any role can be overridden by dropping ``<role>.txt`` into a directory
passed at load time, so prompt text is swappable without code changes.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from pagegraph.errors import ValidationError
from pagegraph.oracle.parts import ROLE_NAMES

# Placeholders each role's renderer substitutes; loading fails if a template
# is missing one of these.
ROLE_PLACEHOLDERS: dict[str, tuple[str, ...]] = {
    "action_summary": ("action",),
    "jump_judge": ("action_summary",),
    "page_summary": (),
    "index_select": ("candidates",),
    "dissimilar_judge": (),
    "screen_summary": (),
    "global_plan": ("goal",),
    "observe": ("goal", "history"),
    "subtask_plan": ("observation", "global_plan", "guidelines", "history"),
    "decide": ("observation", "subtask_plan", "guidelines", "history"),
}


@dataclass(frozen=True)
class PromptTemplate:
    role_name: str
    template_text: str

    def __post_init__(self) -> None:
        if self.role_name not in ROLE_PLACEHOLDERS:
            raise ValidationError(f"unknown role {self.role_name!r}")
        present = {
            name for _, name, _, _ in string.Formatter().parse(self.template_text)
            if name is not None
        }
        required = set(ROLE_PLACEHOLDERS[self.role_name])
        missing = required - present
        if missing:
            raise ValidationError(
                f"template for {self.role_name!r} is missing placeholders: {sorted(missing)}"
            )
        unknown = present - required
        if unknown:
            raise ValidationError(
                f"template for {self.role_name!r} has unknown placeholders: {sorted(unknown)}"
            )

    def render(self, **values: str) -> str:
        return self.template_text.format(**values)


def load_templates(directory: str | Path | None = None) -> dict[str, PromptTemplate]:
    """Load all role templates, preferring files in ``directory`` over defaults."""
    templates: dict[str, PromptTemplate] = {}
    for role in ROLE_NAMES:
        text = None
        if directory is not None:
            candidate = Path(directory) / f"{role}.txt"
            if candidate.is_file():
                text = candidate.read_text(encoding="utf-8")
        if text is None:
            text = resources.files("pagegraph").joinpath(f"prompts/{role}.txt").read_text(
                encoding="utf-8"
            )
        templates[role] = PromptTemplate(role, text)
    return templates
