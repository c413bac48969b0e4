"""Run configuration: TOML file, flag overrides, and component factories.

Precedence is flags over file over built-in defaults. The fully resolved
configuration is echoed into every output artifact for provenance. The remote
API key is only ever read from the environment variable named here.
"""

from __future__ import annotations

import copy
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from pagegraph.agent import AgentConfig
from pagegraph.embedding import Embedder, HashingEmbedder, RemoteEmbedder
from pagegraph.errors import ValidationError
from pagegraph.oracle.backends import Backend, RecordingBackend, RemoteBackend, ReplayBackend
from pagegraph.oracle.client import OracleClient
from pagegraph.oracle.templates import load_templates
from pagegraph.retrieval import K_MAX_BY_PLATFORM, RetrievalConfig

DEFAULT_CONFIG: dict[str, dict[str, Any]] = {
    "oracle": {
        "backend": "scripted",
        "endpoint": "",
        "model": "",
        "api_key_env": "PAGEGRAPH_API_KEY",
        "timeout_s": 60.0,
        "retries": 2,
        "image_mode": "locator",
        "replay_cache": "",
        "record": False,
        "record_clock": "wall",
        "templates_dir": "",
    },
    "embedder": {
        "backend": "hashing",
        "dim": 256,
        "ngram": 3,
        "endpoint": "",
        "model": "",
        "api_key_env": "PAGEGRAPH_API_KEY",
        "timeout_s": 30.0,
        "retries": 2,
    },
    "retrieval": {
        "platform": "mobile",
        "k": 0,
        "n": 4,
        "l": 3,
    },
    "agent": {
        "max_steps": 15,
        "history_window": 5,
        "guideline_mode": "per_step",
    },
    "paths": {
        "graph": "",
        "corpus_root": "",
        "world": "",
        "replay_cache": "",
    },
    "logging": {
        "level": "INFO",
    },
}


def load_config(path: str | Path | None = None) -> dict:
    """Defaults merged with a TOML file; unknown sections or keys are rejected."""
    config = copy.deepcopy(DEFAULT_CONFIG)
    if path is None:
        return config
    with open(path, "rb") as handle:
        try:
            document = tomllib.load(handle)
        except tomllib.TOMLDecodeError as exc:
            raise ValidationError(f"invalid config file {path}: {exc}") from exc
    for section, values in document.items():
        if section not in config:
            raise ValidationError(f"unknown config section {section!r}")
        if not isinstance(values, dict):
            raise ValidationError(f"config section {section!r} must be a table")
        for key, value in values.items():
            if key not in config[section]:
                raise ValidationError(f"unknown config key {section}.{key}")
            config[section][key] = value
    return config


def parse_override(text: str) -> tuple[str, str, Any]:
    """Parse one ``section.key=value`` override; values coerce to the default's type."""
    if "=" not in text:
        raise ValidationError(f"override {text!r} must look like section.key=value")
    dotted, raw = text.split("=", 1)
    if dotted.count(".") != 1:
        raise ValidationError(f"override key {dotted!r} must look like section.key")
    section, key = dotted.split(".")
    if section not in DEFAULT_CONFIG or key not in DEFAULT_CONFIG[section]:
        raise ValidationError(f"unknown config key {dotted!r}")
    default = DEFAULT_CONFIG[section][key]
    try:
        if isinstance(default, bool):
            if raw.lower() not in ("true", "false"):
                raise ValueError(raw)
            value: Any = raw.lower() == "true"
        elif isinstance(default, int):
            value = int(raw)
        elif isinstance(default, float):
            value = float(raw)
        else:
            value = raw
    except ValueError as exc:
        raise ValidationError(f"cannot parse override {text!r}: {exc}") from exc
    return section, key, value


def apply_overrides(config: dict, overrides: list[str]) -> dict:
    for text in overrides:
        section, key, value = parse_override(text)
        config[section][key] = value
    return config


def retrieval_config(config: dict) -> RetrievalConfig:
    section = config["retrieval"]
    platform = section["platform"]
    if platform not in K_MAX_BY_PLATFORM:
        raise ValidationError(f"unknown retrieval platform {platform!r}")
    k = section["k"] or K_MAX_BY_PLATFORM[platform]
    return RetrievalConfig(k_max_guidelines=k, n_nodes=section["n"], l_bfs_layers=section["l"])


def agent_config(config: dict) -> AgentConfig:
    section = config["agent"]
    return AgentConfig(
        max_steps=section["max_steps"],
        history_window=section["history_window"],
        guideline_mode=section["guideline_mode"],
        retrieval=retrieval_config(config),
    )


def build_embedder(config: dict) -> Embedder:
    section = config["embedder"]
    if section["backend"] == "hashing":
        return HashingEmbedder(dim=section["dim"], ngram=section["ngram"])
    if section["backend"] == "remote":
        if not section["endpoint"]:
            raise ValidationError("embedder.endpoint is required for the remote backend")
        return RemoteEmbedder(
            endpoint=section["endpoint"], model=section["model"], dim=section["dim"],
            api_key_env=section["api_key_env"], timeout_s=section["timeout_s"],
            retries=section["retries"],
        )
    raise ValidationError(f"unknown embedder backend {section['backend']!r}")


def build_backend(config: dict, world=None) -> Backend:
    """Instantiate the oracle backend; ``world`` backs the scripted choice."""
    section = config["oracle"]
    name = section["backend"]
    backend: Backend
    if name == "scripted":
        if world is None:
            raise ValidationError("the scripted backend needs paths.world")
        from pagegraph.world.scripted import ScriptedBackend

        backend = ScriptedBackend(world)
    elif name == "remote":
        if not section["endpoint"]:
            raise ValidationError("oracle.endpoint is required for the remote backend")
        backend = RemoteBackend(
            endpoint=section["endpoint"], model=section["model"],
            api_key_env=section["api_key_env"], timeout_s=section["timeout_s"],
            image_mode=section["image_mode"],
        )
    elif name == "replay":
        cache = section["replay_cache"] or config["paths"]["replay_cache"]
        if not cache:
            raise ValidationError("oracle.replay_cache is required for the replay backend")
        backend = ReplayBackend(cache)
    else:
        raise ValidationError(f"unknown oracle backend {name!r}")
    if section["record"]:
        cache = section["replay_cache"] or config["paths"]["replay_cache"]
        if not cache:
            raise ValidationError("recording needs oracle.replay_cache")
        clock = (lambda: 0.0) if section["record_clock"] == "fixed" else None
        if clock is None:
            backend = RecordingBackend(backend, cache)
        else:
            backend = RecordingBackend(backend, cache, clock=clock)
    return backend


def build_oracle(config: dict, world=None, trace: bool = False) -> OracleClient:
    section = config["oracle"]
    templates_dir = section["templates_dir"] or None
    return OracleClient(
        build_backend(config, world=world),
        templates=load_templates(templates_dir),
        retries=section["retries"],
        trace=trace,
    )
