"""Request/response plumbing for model calls: parts, canonicalization, hashing."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any

IMAGE = "image"
TEXT = "text"

ROLE_NAMES = (
    "action_summary",
    "jump_judge",
    "page_summary",
    "index_select",
    "dissimilar_judge",
    "screen_summary",
    "global_plan",
    "observe",
    "subtask_plan",
    "decide",
)


@dataclass(frozen=True)
class Part:
    """One request input: an image locator or a block of text."""

    kind: str
    value: str

    def canonical(self) -> str:
        # Text is whitespace-normalized so that formatting-only differences in
        # placeholder values cannot split the cache; locators are opaque.
        if self.kind == TEXT:
            return " ".join(self.value.split())
        return self.value


def canonical_parts(parts: tuple[Part, ...]) -> str:
    return json.dumps(
        [[p.kind, p.canonical()] for p in parts],
        ensure_ascii=False, separators=(",", ":"),
    )


def inputs_digest(parts: tuple[Part, ...]) -> str:
    return hashlib.sha256(canonical_parts(parts).encode("utf-8")).hexdigest()


def request_hash(role_name: str, parts: tuple[Part, ...]) -> str:
    payload = json.dumps(
        {"role": role_name, "parts": json.loads(canonical_parts(parts))},
        ensure_ascii=False, separators=(",", ":"), sort_keys=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class OracleRequest:
    """A fully rendered request for one role.

    ``parts`` is the transport/cache view (what remote backends send and what
    the hash covers); ``fields`` carries the same inputs in structured form
    for backends that answer from ground truth instead of pixels.
    """

    role_name: str
    parts: tuple[Part, ...]
    fields: dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def hash(self) -> str:
        return request_hash(self.role_name, self.parts)


@dataclass(frozen=True)
class OracleExchange:
    """One completed request/response pair, hashable for record/replay."""

    role_name: str
    inputs: tuple[Part, ...]
    raw_response: str
    parsed: Any
    request_hash: str
