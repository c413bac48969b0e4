import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pagegraph.embedding import EmbeddingVector, HashingEmbedder, VectorIndex, fnv1a32
from pagegraph.errors import ValidationError


def _cosine(a, b):
    av, bv = np.asarray(a.values, float), np.asarray(b.values, float)
    return float(av @ bv / (np.linalg.norm(av) * np.linalg.norm(bv)))


def _reference_embed(text, dim=256):
    """Independent reimplementation of the hashing scheme for cross-checking."""
    grams = [text[i:i + 3] for i in range(len(text) - 2)] if len(text) >= 3 else [text]
    acc = [0.0] * dim
    for gram in grams:
        h = 0x811C9DC5
        for byte in gram.encode("utf-8"):
            h = ((h ^ byte) * 0x01000193) & 0xFFFFFFFF
        acc[h % dim] += 1.0 if h % 2 == 0 else -1.0
    norm = math.sqrt(sum(v * v for v in acc))
    return [v / norm for v in acc]


class TestHashingEmbedder:
    def test_deterministic(self):
        embedder = HashingEmbedder()
        for text in ("home screen", "a", "xy", "payment form page"):
            assert embedder.embed(text) == embedder.embed(text)

    def test_matches_reference_scheme(self):
        embedder = HashingEmbedder()
        for text in ("home screen", "payment form", "settings page with toggles"):
            got = np.asarray(embedder.embed(text).values)
            want = np.asarray(_reference_embed(text), dtype=np.float32)
            assert np.allclose(got, want, atol=1e-6)

    def test_similar_texts_score_higher(self):
        embedder = HashingEmbedder()
        anchor = embedder.embed("home screen")
        close = _cosine(anchor, embedder.embed("home screen page"))
        far = _cosine(anchor, embedder.embed("payment form"))
        assert close > far

    def test_empty_text_rejected(self):
        with pytest.raises(ValidationError):
            HashingEmbedder().embed("")

    def test_normalized_and_declared_dim(self):
        embedder = HashingEmbedder()
        vector = embedder.embed("anything at all")
        assert vector.dim == embedder.dim == 256
        assert abs(np.linalg.norm(np.asarray(vector.values)) - 1.0) < 1e-6

    def test_short_text_uses_whole_string(self):
        embedder = HashingEmbedder()
        assert embedder.embed("ab") != embedder.embed("ba")


class TestVectorIndex:
    def test_unit_vector_dot_products(self):
        index = VectorIndex(2)
        index.add("a", EmbeddingVector((1.0, 0.0)))
        index.add("b", EmbeddingVector((0.0, 1.0)))
        index.add("c", EmbeddingVector((0.6, 0.8)))
        result = index.top_k(EmbeddingVector((1.0, 0.0)), 3)
        assert [r[0] for r in result] == ["a", "c", "b"]
        assert result[0][1] == pytest.approx(1.0, abs=1e-6)
        assert result[1][1] == pytest.approx(0.6, abs=1e-6)
        assert result[2][1] == pytest.approx(0.0, abs=1e-6)

    def test_empty_index(self):
        assert VectorIndex(4).top_k(EmbeddingVector((1.0, 0.0, 0.0, 0.0)), 3) == []

    def test_k_larger_than_entries(self):
        index = VectorIndex(2)
        index.add("only", EmbeddingVector((0.0, 1.0)))
        assert len(index.top_k(EmbeddingVector((1.0, 0.0)), 10)) == 1

    def test_dim_mismatch_rejected(self):
        index = VectorIndex(3)
        with pytest.raises(ValidationError):
            index.top_k(EmbeddingVector((1.0, 0.0)), 1)
        with pytest.raises(ValidationError):
            index.add("x", EmbeddingVector((1.0, 0.0)))

    def test_zero_vector_rejected_at_add(self):
        index = VectorIndex(2)
        with pytest.raises(ValidationError):
            index.add("zero", EmbeddingVector((0.0, 0.0)))

    def test_duplicate_id_rejected(self):
        index = VectorIndex(2)
        index.add("a", EmbeddingVector((1.0, 0.0)))
        with pytest.raises(ValidationError):
            index.add("a", EmbeddingVector((0.0, 1.0)))

    def test_ties_keep_insertion_order(self):
        index = VectorIndex(2)
        index.add("first", EmbeddingVector((0.0, 1.0)))
        index.add("second", EmbeddingVector((0.0, 1.0)))
        result = index.top_k(EmbeddingVector((0.0, 1.0)), 2)
        assert [r[0] for r in result] == ["first", "second"]
        # Adding more entries must not reorder the earlier tie.
        index.add("third", EmbeddingVector((1.0, 0.0)))
        result = index.top_k(EmbeddingVector((0.0, 1.0)), 3)
        assert [r[0] for r in result] == ["first", "second", "third"]

    def test_scores_clipped_to_unit_interval(self):
        index = VectorIndex(2)
        index.add("a", EmbeddingVector((1.0, 0.0)))
        index.add("b", EmbeddingVector((-1.0, 0.0)))
        result = dict(index.top_k(EmbeddingVector((1.0, 0.0)), 2))
        assert -1.0 <= result["b"] <= result["a"] <= 1.0

    def test_brute_force_equivalence_randomized(self):
        rng = random.Random(7)
        for _ in range(50):
            dim = rng.choice([2, 3, 8])
            count = rng.randrange(1, 50)
            index = VectorIndex(dim)
            rows = []
            for i in range(count):
                values = [rng.uniform(-1, 1) for _ in range(dim)]
                if all(abs(v) < 1e-12 for v in values):
                    values[0] = 1.0
                index.add(f"id{i}", EmbeddingVector(tuple(values)))
                row = np.asarray(values, dtype=np.float64)
                rows.append(row / np.linalg.norm(row))
            query = np.asarray([rng.uniform(-1, 1) for _ in range(dim)])
            if np.linalg.norm(query) == 0:
                query[0] = 1.0
            unit_query = (query / np.linalg.norm(query)).astype(np.float32)
            scores = [float(np.asarray(r, dtype=np.float32) @ unit_query) for r in rows]
            expected = sorted(range(count), key=lambda i: (-scores[i], i))
            k = rng.randrange(1, count + 1)
            got = index.top_k(EmbeddingVector(tuple(unit_query.tolist())), k)
            assert [g[0] for g in got] == [f"id{i}" for i in expected[:k]]

    def test_serialization_round_trips_bit_exactly(self):
        index = VectorIndex(3)
        index.add("alpha", EmbeddingVector((0.1, 0.2, 0.3)))
        index.add("beta", EmbeddingVector((0.9, -0.4, 0.05)))
        blob = index.to_bytes()
        again = VectorIndex.from_bytes(blob)
        assert again.ids == index.ids
        assert again.to_bytes() == blob


@given(st.text(min_size=1, max_size=40))
@settings(max_examples=200, deadline=None)
def test_embedding_matches_reference_property(text):
    got = np.asarray(HashingEmbedder().embed(text).values)
    want = np.asarray(_reference_embed(text), dtype=np.float32)
    assert np.allclose(got, want, atol=1e-6)


def test_fnv1a_known_values():
    # Published FNV-1a 32-bit test vectors.
    assert fnv1a32(b"") == 0x811C9DC5
    assert fnv1a32(b"a") == 0xE40C292C
    assert fnv1a32(b"foobar") == 0xBF9CF968
