"""Response parsing: yes/no verdicts, index selection, and the action wire grammar.

The decision wire format is a single line ``ACTION: <VERB> <args>``, tolerant
of surrounding prose. Verbs mirror the action variants one to one.
"""

from __future__ import annotations

import re

from pagegraph.errors import OracleParseError, ValidationError
from pagegraph.model import (
    Action,
    ClickElement,
    OpenApp,
    PressKey,
    SelectOption,
    StatusComplete,
    StatusImpossible,
    Swipe,
    Tap,
    TypeInElement,
    TypeText,
)

_ALPHA_RUN = re.compile(r"[A-Za-z]+")
_INT_RUN = re.compile(r"\d+")
_NUMBERED_LINE = re.compile(r"^\s*\d+[.)]\s*\S", re.MULTILINE)
_ACTION_PREFIX = re.compile(r"^\s*ACTION:\s*", re.IGNORECASE)


def parse_yes_no(text: str) -> bool:
    """Map the first alphabetic token to a boolean; anything else is a parse failure."""
    match = _ALPHA_RUN.search(text)
    if match is None:
        raise OracleParseError(f"no yes/no verdict in response: {text!r}")
    token = match.group(0).lower()
    if token == "yes":
        return True
    if token == "no":
        return False
    raise OracleParseError(f"expected yes/no, got {token!r}")


def parse_index(text: str, count: int) -> int:
    """Extract a 1-based index and range-check it against the candidate count."""
    match = _INT_RUN.search(text)
    if match is None:
        raise OracleParseError(f"no index in response: {text!r}")
    value = int(match.group(0))
    if not 1 <= value <= count:
        raise OracleParseError(f"index {value} out of range [1, {count}]")
    return value


def has_numbered_item(text: str) -> bool:
    return _NUMBERED_LINE.search(text) is not None


def format_action_line(action: Action) -> str:
    """Canonical wire line for an action; the inverse of :func:`parse_action_line`."""
    if isinstance(action, Tap):
        return f"ACTION: TAP {action.x:.4f} {action.y:.4f}"
    if isinstance(action, Swipe):
        return f"ACTION: SWIPE {action.direction}"
    if isinstance(action, TypeText):
        return f"ACTION: TYPE {action.text}" if action.text else "ACTION: TYPE"
    if isinstance(action, PressKey):
        return f"ACTION: PRESS {action.key}"
    if isinstance(action, ClickElement):
        return f"ACTION: CLICK {action.element_id}"
    if isinstance(action, SelectOption):
        return f"ACTION: SELECT {action.element_id} {action.value}"
    if isinstance(action, TypeInElement):
        text = action.text
        return f"ACTION: TYPE_IN {action.element_id} {text}" if text else f"ACTION: TYPE_IN {action.element_id}"
    if isinstance(action, OpenApp):
        return f"ACTION: OPEN_APP {action.name}"
    if isinstance(action, StatusComplete):
        return "ACTION: COMPLETE"
    if isinstance(action, StatusImpossible):
        return "ACTION: IMPOSSIBLE"
    raise ValidationError(f"unknown action {action!r}")


def _split_verb(rest: str) -> tuple[str, str]:
    if " " in rest:
        verb, args = rest.split(" ", 1)
    else:
        verb, args = rest, ""
    return verb.upper(), args


def _first_token(args: str, verb: str) -> tuple[str, str]:
    args = args.lstrip()
    if not args:
        raise OracleParseError(f"{verb} needs an argument")
    if " " in args:
        head, tail = args.split(" ", 1)
    else:
        head, tail = args, ""
    return head, tail


def parse_action_line(text: str) -> Action:
    """Parse the first ``ACTION:`` line found anywhere in the response text."""
    for line in text.splitlines():
        match = _ACTION_PREFIX.match(line)
        if match is None:
            continue
        rest = line[match.end():].rstrip()
        verb, args = _split_verb(rest)
        try:
            return _parse_verb(verb, args)
        except ValidationError as exc:
            raise OracleParseError(f"invalid action arguments: {exc}") from exc
    raise OracleParseError(f"no ACTION line in response: {text!r}")


def _parse_verb(verb: str, args: str) -> Action:
    if verb == "TAP":
        tokens = args.split()
        if len(tokens) != 2:
            raise OracleParseError(f"TAP needs two coordinates, got {args!r}")
        try:
            x, y = float(tokens[0]), float(tokens[1])
        except ValueError as exc:
            raise OracleParseError(f"TAP coordinates not numeric: {args!r}") from exc
        return Tap(x, y)
    if verb == "SWIPE":
        return Swipe(args.strip().lower())
    if verb == "TYPE":
        return TypeText(args)
    if verb == "PRESS":
        return PressKey(args.strip().lower())
    if verb == "CLICK":
        element_id, _ = _first_token(args, "CLICK")
        return ClickElement(element_id)
    if verb == "SELECT":
        element_id, value = _first_token(args, "SELECT")
        return SelectOption(element_id, value)
    if verb == "TYPE_IN":
        element_id, text = _first_token(args, "TYPE_IN")
        return TypeInElement(element_id, text)
    if verb == "OPEN_APP":
        if not args.strip():
            raise OracleParseError("OPEN_APP needs an app name")
        return OpenApp(args.strip())
    if verb == "COMPLETE":
        return StatusComplete()
    if verb == "IMPOSSIBLE":
        return StatusImpossible()
    raise OracleParseError(f"unknown action verb {verb!r}")
