"""Pluggable model interface: typed roles, prompt templates, and backends."""

from pagegraph.oracle.backends import (
    REPLAY_HEADER,
    Backend,
    RecordingBackend,
    RemoteBackend,
    ReplayBackend,
    load_replay_cache,
)
from pagegraph.oracle.client import OracleClient
from pagegraph.oracle.parsing import format_action_line, parse_action_line
from pagegraph.oracle.parts import (
    IMAGE,
    ROLE_NAMES,
    TEXT,
    OracleExchange,
    OracleRequest,
    Part,
    request_hash,
)
from pagegraph.oracle.templates import ROLE_PLACEHOLDERS, PromptTemplate, load_templates

__all__ = [
    "Backend",
    "IMAGE",
    "OracleClient",
    "OracleExchange",
    "OracleRequest",
    "Part",
    "PromptTemplate",
    "REPLAY_HEADER",
    "ROLE_NAMES",
    "ROLE_PLACEHOLDERS",
    "RecordingBackend",
    "RemoteBackend",
    "ReplayBackend",
    "TEXT",
    "format_action_line",
    "load_replay_cache",
    "load_templates",
    "parse_action_line",
    "request_hash",
]
