"""Text embedding backends and an exact top-k cosine index over node summaries.

Search is exact brute force: graphs here stay in the hundreds of nodes, so
correctness and reproducibility win over approximate indexing.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from typing import Protocol

import numpy as np
import requests

from pagegraph.errors import FormatError, OracleUnavailableError, ValidationError

_FNV_OFFSET = 0x811C9DC5
_FNV_PRIME = 0x01000193
_INDEX_MAGIC = b"PGVI"
_INDEX_VERSION = 1


@dataclass(frozen=True)
class EmbeddingVector:
    """Fixed-length real vector; values are float32-representable."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise ValidationError("EmbeddingVector must not be empty")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("EmbeddingVector entries must be finite")

    @property
    def dim(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float32)

    @staticmethod
    def from_array(values: np.ndarray) -> "EmbeddingVector":
        return EmbeddingVector(tuple(float(v) for v in np.asarray(values, dtype=np.float32)))


def _normalized(values: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(values.astype(np.float64)))
    if norm == 0.0:
        raise ValidationError("zero vector cannot be normalized")
    return (values.astype(np.float64) / norm).astype(np.float32)


class Embedder(Protocol):
    """Any text-to-vector backend; embeddings must be deterministic per backend."""

    @property
    def dim(self) -> int: ...

    @property
    def embedder_id(self) -> str: ...

    def embed(self, text: str) -> EmbeddingVector: ...


def fnv1a32(data: bytes) -> int:
    """32-bit FNV-1a hash."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & 0xFFFFFFFF
    return h


class HashingEmbedder:
    """Deterministic character n-gram feature-hashing embedder.

    Each n-gram is hashed with 32-bit FNV-1a; the bucket is the hash modulo
    the dimension and the contribution's sign follows the hash's parity
    (+1 even, -1 odd). The result is L2-normalized. Fully offline, so tests
    and fixtures never need a network.
    """

    def __init__(self, dim: int = 256, ngram: int = 3):
        if dim <= 0 or ngram <= 0:
            raise ValidationError("dim and ngram must be positive")
        self._dim = dim
        self._ngram = ngram

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def embedder_id(self) -> str:
        return f"fnv1a-{self._ngram}gram-{self._dim}"

    def embed(self, text: str) -> EmbeddingVector:
        if not text:
            raise ValidationError("cannot embed empty text")
        n = self._ngram
        grams = [text[i:i + n] for i in range(len(text) - n + 1)] if len(text) >= n else [text]
        acc = np.zeros(self._dim, dtype=np.float64)
        for gram in grams:
            h = fnv1a32(gram.encode("utf-8"))
            acc[h % self._dim] += 1.0 if h % 2 == 0 else -1.0
        return EmbeddingVector.from_array(_normalized(acc))


class RemoteEmbedder:
    """Embeddings over HTTP; speaks a commodity JSON embeddings protocol.

    The API key is read from the environment variable named in the config,
    never passed as a literal.
    """

    def __init__(self, endpoint: str, model: str, dim: int,
                 api_key_env: str = "PAGEGRAPH_API_KEY",
                 timeout_s: float = 30.0, retries: int = 2):
        self.endpoint = endpoint
        self.model = model
        self._dim = dim
        self.api_key_env = api_key_env
        self.timeout_s = timeout_s
        self.retries = retries

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def embedder_id(self) -> str:
        return f"remote-{self.model}-{self._dim}"

    def embed(self, text: str) -> EmbeddingVector:
        if not text:
            raise ValidationError("cannot embed empty text")
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.api_key_env)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        payload = {"model": self.model, "input": [text]}
        last_error: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                response = requests.post(
                    self.endpoint, json=payload, headers=headers, timeout=self.timeout_s
                )
                response.raise_for_status()
                values = response.json()["data"][0]["embedding"]
                if len(values) != self._dim:
                    raise OracleUnavailableError(
                        f"backend returned dim {len(values)}, declared {self._dim}"
                    )
                return EmbeddingVector.from_array(_normalized(np.asarray(values)))
            except OracleUnavailableError:
                raise
            except (requests.RequestException, KeyError, IndexError, ValueError) as exc:
                last_error = exc
        raise OracleUnavailableError(f"embedding request failed: {last_error}") from last_error


class VectorIndex:
    """Exact cosine-similarity index; entries keep insertion order for tie-breaks."""

    def __init__(self, dim: int):
        if dim <= 0:
            raise ValidationError("index dim must be positive")
        self.dim = dim
        self.ids: list[str] = []
        self._rows: list[np.ndarray] = []
        self._matrix: np.ndarray | None = None
        self._id_set: set[str] = set()

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, entry_id: str) -> bool:
        return entry_id in self._id_set

    def add(self, entry_id: str, vector: EmbeddingVector) -> None:
        if entry_id in self._id_set:
            raise ValidationError(f"duplicate index id {entry_id!r}")
        if vector.dim != self.dim:
            raise ValidationError(f"vector dim {vector.dim} != index dim {self.dim}")
        self._rows.append(_normalized(vector.as_array()))
        self.ids.append(entry_id)
        self._id_set.add(entry_id)
        self._matrix = None

    def unit_vector(self, position: int) -> EmbeddingVector:
        return EmbeddingVector.from_array(self._rows[position])

    def _stacked(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = np.vstack(self._rows) if self._rows else np.zeros((0, self.dim), np.float32)
        return self._matrix

    def top_k(self, query: EmbeddingVector, k: int) -> list[tuple[str, float]]:
        """Top-k entries by cosine score, descending; ties keep insertion order."""
        if k <= 0:
            raise ValidationError("k must be positive")
        if query.dim != self.dim:
            raise ValidationError(f"query dim {query.dim} != index dim {self.dim}")
        if not self.ids:
            return []
        unit_query = _normalized(query.as_array())
        scores = self._stacked() @ unit_query
        order = np.argsort(-scores, kind="stable")[:k]
        return [(self.ids[i], float(np.clip(scores[i], -1.0, 1.0))) for i in order]

    def to_bytes(self) -> bytes:
        """Canonical binary form: ids as length-prefixed UTF-8, vectors as LE float32."""
        out = [_INDEX_MAGIC, struct.pack("<HII", _INDEX_VERSION, self.dim, len(self.ids))]
        for entry_id, row in zip(self.ids, self._rows):
            encoded = entry_id.encode("utf-8")
            out.append(struct.pack("<I", len(encoded)))
            out.append(encoded)
            out.append(row.astype("<f4").tobytes())
        return b"".join(out)

    @staticmethod
    def from_bytes(data: bytes) -> "VectorIndex":
        if data[:4] != _INDEX_MAGIC:
            raise FormatError("not a vector index blob")
        version, dim, count = struct.unpack_from("<HII", data, 4)
        if version != _INDEX_VERSION:
            raise FormatError(f"unsupported index version {version}")
        index = VectorIndex(dim)
        offset = 4 + struct.calcsize("<HII")
        for _ in range(count):
            (id_len,) = struct.unpack_from("<I", data, offset)
            offset += 4
            entry_id = data[offset:offset + id_len].decode("utf-8")
            offset += id_len
            row = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).copy()
            offset += dim * 4
            index.ids.append(entry_id)
            index._rows.append(row)
            index._id_set.add(entry_id)
        return index
