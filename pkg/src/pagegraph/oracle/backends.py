"""Oracle backends: remote HTTP, replay-from-cache, and a recording wrapper.

The replay cache is an append-only text file: one versioned header line, then
one JSON record per exchange. Replay never touches the network.
"""

from __future__ import annotations

import base64
import json
import os
import threading
import time
from pathlib import Path
from typing import Callable, Protocol

import requests

from pagegraph.errors import FormatError, OracleParseError, OracleUnavailableError
from pagegraph.oracle.parts import IMAGE, OracleRequest, inputs_digest

REPLAY_HEADER = "pagegraph-replay/1"

_MIME_BY_SUFFIX = {".png": "image/png", ".jpg": "image/jpeg", ".jpeg": "image/jpeg",
                   ".webp": "image/webp", ".gif": "image/gif"}


class Backend(Protocol):
    """Produces one raw text response per request; retry policy lives in the client."""

    def complete(self, request: OracleRequest) -> str: ...


class RemoteBackend:
    """Chat-completions-style HTTP backend.

    Images are attached either by passing the locator through as a URL
    (``image_mode="locator"``) or by embedding file bytes as a base64 data URL
    (``image_mode="base64"``). The API key comes from the environment variable
    named in the config and is never accepted as a literal.
    """

    def __init__(self, endpoint: str, model: str,
                 api_key_env: str = "PAGEGRAPH_API_KEY",
                 timeout_s: float = 60.0, image_mode: str = "locator"):
        if image_mode not in ("locator", "base64"):
            raise ValueError(f"unknown image_mode {image_mode!r}")
        self.endpoint = endpoint
        self.model = model
        self.api_key_env = api_key_env
        self.timeout_s = timeout_s
        self.image_mode = image_mode

    def _image_url(self, locator: str) -> str:
        if self.image_mode == "locator":
            return locator
        path = Path(locator)
        try:
            payload = base64.b64encode(path.read_bytes()).decode("ascii")
        except OSError as exc:
            raise OracleUnavailableError(f"cannot read image {locator!r}: {exc}") from exc
        mime = _MIME_BY_SUFFIX.get(path.suffix.lower(), "image/png")
        return f"data:{mime};base64,{payload}"

    def complete(self, request: OracleRequest) -> str:
        content = []
        for part in request.parts:
            if part.kind == IMAGE:
                content.append({"type": "image_url", "image_url": {"url": self._image_url(part.value)}})
            else:
                content.append({"type": "text", "text": part.value})
        body = {"model": self.model, "messages": [{"role": "user", "content": content}]}
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.api_key_env)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        try:
            response = requests.post(self.endpoint, json=body, headers=headers,
                                     timeout=self.timeout_s)
            response.raise_for_status()
            payload = response.json()
        except requests.RequestException as exc:
            raise OracleUnavailableError(f"model request failed: {exc}") from exc
        except ValueError as exc:
            raise OracleParseError(f"model response is not JSON: {exc}") from exc
        try:
            return payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise OracleParseError(f"malformed model response: {payload!r}") from exc


def load_replay_cache(path: str | Path) -> dict[str, str]:
    """Read a replay cache file into a hash -> response map.

    Exact duplicate records are tolerated; conflicting responses for one hash
    are a corruption error.
    """
    cache: dict[str, str] = {}
    path = Path(path)
    with path.open("r", encoding="utf-8") as handle:
        header = handle.readline().rstrip("\n")
        if header != REPLAY_HEADER:
            raise FormatError(f"bad replay header {header!r}", path=str(path), line=1)
        for lineno, line in enumerate(handle, start=2):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                key = record["request_hash"]
                response = record["response"]
            except (ValueError, KeyError, TypeError) as exc:
                raise FormatError(f"bad replay record: {exc}", path=str(path), line=lineno) from exc
            if key in cache and cache[key] != response:
                raise FormatError(
                    f"conflicting responses recorded for {key[:12]}...",
                    path=str(path), line=lineno,
                )
            cache.setdefault(key, response)
    return cache


class ReplayBackend:
    """Serves recorded responses by request hash; a miss is a hard failure."""

    def __init__(self, path: str | Path):
        self.path = str(path)
        self._cache = load_replay_cache(path)

    def __len__(self) -> int:
        return len(self._cache)

    def complete(self, request: OracleRequest) -> str:
        key = request.hash
        try:
            return self._cache[key]
        except KeyError:
            raise OracleUnavailableError(
                f"replay miss for {request.role_name} ({key[:12]}...) in {self.path}"
            ) from None


class RecordingBackend:
    """Wraps another backend and appends every exchange to a replay cache file.

    Single writer: appends are serialized by a lock. ``clock`` is injectable
    so fixture caches can be regenerated byte-identically.
    """

    def __init__(self, inner: Backend, path: str | Path,
                 clock: Callable[[], float] = time.time):
        self.inner = inner
        self.path = Path(path)
        self.clock = clock
        self._lock = threading.Lock()
        if not self.path.exists():
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text(REPLAY_HEADER + "\n", encoding="utf-8")

    def complete(self, request: OracleRequest) -> str:
        response = self.inner.complete(request)
        record = {
            "request_hash": request.hash,
            "role": request.role_name,
            "inputs_digest": inputs_digest(request.parts),
            "response": response,
            "ts": self.clock(),
        }
        line = json.dumps(record, ensure_ascii=False, sort_keys=True)
        with self._lock:
            with self.path.open("a", encoding="utf-8") as handle:
                handle.write(line + "\n")
        return response
