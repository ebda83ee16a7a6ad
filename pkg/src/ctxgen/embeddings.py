"""Word-vector storage, sentence embedding, and cosine similarity.

Sentence vectors are unweighted means of word vectors; cosine against a
zero-norm vector is defined as 0 so that out-of-vocabulary sentences are
never treated as duplicates of anything.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ctxgen.text_core import Token

log = logging.getLogger(__name__)


class EmbeddingFormatError(ValueError):
    """Raised for malformed word-vector files."""


@dataclass
class EmbeddingStore:
    """Lowercase word -> vector map with a fixed dimensionality."""

    dim: int
    vectors: dict[str, np.ndarray]

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)

    def get(self, word: str) -> np.ndarray | None:
        return self.vectors.get(word)


@dataclass(frozen=True)
class SentenceVector:
    """Mean word vector of a sentence plus its in-vocabulary coverage."""

    values: np.ndarray
    coverage: float


def load_vectors(path: str | Path) -> EmbeddingStore:
    """Load a text word-vector file: ``word f1 f2 ... fD`` per line.

    The dimensionality is inferred from the first line; a line with the
    wrong number of floats raises :class:`EmbeddingFormatError` naming the
    line. Duplicate words keep the last occurrence with a warning.
    """
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            word, values = parts[0].lower(), parts[1:]
            if dim is None:
                if not values:
                    raise EmbeddingFormatError(
                        f"{path}:{lineno}: no vector components on first entry"
                    )
                dim = len(values)
            if len(values) != dim:
                raise EmbeddingFormatError(
                    f"{path}:{lineno}: expected {dim} floats, got {len(values)}"
                )
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise EmbeddingFormatError(f"{path}:{lineno}: {exc}") from exc
            if word in vectors:
                log.warning("duplicate vector for %r at %s:%d; keeping last", word, path, lineno)
            vectors[word] = vec
    if dim is None:
        raise EmbeddingFormatError(f"{path}: empty word-vector file")
    return EmbeddingStore(dim=dim, vectors=vectors)


def embed_sentence(tokens: list[Token], store: EmbeddingStore) -> SentenceVector:
    """Mean vector over in-vocabulary tokens.

    A sentence with no in-vocabulary tokens (or no tokens at all) embeds to
    the zero vector with coverage 0.
    """
    found = [store.vectors[t.surface] for t in tokens if t.surface in store.vectors]
    if not found:
        return SentenceVector(values=np.zeros(store.dim), coverage=0.0)
    values = np.mean(found, axis=0)
    return SentenceVector(values=values, coverage=len(found) / len(tokens))


def cosine_similarity(u: SentenceVector, v: SentenceVector) -> float:
    """Standard cosine in [-1, 1]; 0 when either vector has zero norm."""
    a, b = u.values, v.values
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    norm_a = np.linalg.norm(a)
    norm_b = np.linalg.norm(b)
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return float(np.dot(a, b) / (norm_a * norm_b))
