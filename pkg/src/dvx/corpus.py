"""Corpus ingestion: manifests, unit-normalized embeddings, relevance scores.

The corpus is immutable after construction and safe to share across
threads; every downstream module consumes it read-only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DvxError
from .formats import read_embeddings, read_relevance, validate_embedding_file

__all__ = [
    "ImageRecord",
    "EmbeddingMatrix",
    "RelevanceVector",
    "Corpus",
    "normalize_rows",
    "compute_relevance",
    "load_corpus",
    "validate_embedding_file",
]

ZERO_NORM_FLOOR = 1e-12
UNIT_NORM_TOL = 1e-6


@dataclass(frozen=True)
class ImageRecord:
    """One manifest entry; ``id`` equals the embedding row index."""

    id: int
    external_id: str
    uri: str
    tags: tuple[str, ...] = ()


@dataclass(frozen=True)
class EmbeddingMatrix:
    """N x d matrix of unit-norm feature vectors, one row per image."""

    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class RelevanceVector:
    """Per-image relevance scores (cosine similarity to the task query)."""

    scores: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64).reshape(-1)
        scores.setflags(write=False)
        object.__setattr__(self, "scores", scores)

    @property
    def n(self) -> int:
        return self.scores.shape[0]


@dataclass(frozen=True)
class Corpus:
    records: tuple[ImageRecord, ...]
    embeddings: EmbeddingMatrix
    relevance: RelevanceVector
    name: str = field(default="corpus")

    def __post_init__(self):
        n = len(self.records)
        if self.embeddings.n != n or self.relevance.n != n:
            raise DvxError(
                "COUNT_MISMATCH",
                f"records={n}, embedding rows={self.embeddings.n}, "
                f"relevance={self.relevance.n}",
            )

    @property
    def n(self) -> int:
        return len(self.records)

    @property
    def d(self) -> int:
        return self.embeddings.d


def normalize_rows(matrix: np.ndarray) -> EmbeddingMatrix:
    """Scale every row to unit Euclidean norm.

    Rows with norm below 1e-12 raise ``ZERO_ROW``; non-finite entries raise
    ``NONFINITE_EMBEDDING``.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise DvxError("FORMAT_ERROR", f"expected 2-D matrix, got shape {matrix.shape}")
    if not np.isfinite(matrix).all():
        raise DvxError("NONFINITE_EMBEDDING", "matrix contains NaN or Inf entries")
    norms = np.linalg.norm(matrix, axis=1)
    bad = np.flatnonzero(norms < ZERO_NORM_FLOOR)
    if bad.size:
        raise DvxError("ZERO_ROW", f"row {bad[0]} has norm < {ZERO_NORM_FLOOR}")
    return EmbeddingMatrix(matrix / norms[:, None])


def compute_relevance(embeddings: EmbeddingMatrix, query: np.ndarray) -> RelevanceVector:
    """Cosine similarity of every row against a unit-norm query vector."""
    query = np.asarray(query, dtype=np.float64).reshape(-1)
    if query.shape[0] != embeddings.d:
        raise DvxError(
            "DIM_MISMATCH",
            f"query has length {query.shape[0]}, embeddings have d={embeddings.d}",
        )
    norm = float(np.linalg.norm(query))
    if abs(norm - 1.0) > UNIT_NORM_TOL:
        raise ValueError(f"query must be unit-norm, got norm {norm}")
    scores = np.clip(embeddings.rows @ query, -1.0, 1.0)
    return RelevanceVector(scores)


def _load_manifest(path: str | Path) -> tuple[ImageRecord, ...]:
    with open(path, encoding="utf-8") as fh:
        entries = json.load(fh)
    if not isinstance(entries, list):
        raise DvxError("FORMAT_ERROR", f"{path}: manifest must be a JSON array")
    records = []
    for idx, entry in enumerate(entries):
        records.append(
            ImageRecord(
                id=idx,
                external_id=str(entry.get("id", idx)),
                uri=str(entry.get("uri", "")),
                tags=tuple(entry.get("tags", ()) or ()),
            )
        )
    return tuple(records)


def load_corpus(
    manifest_path: str | Path,
    embeddings_path: str | Path,
    relevance_source: str | Path | np.ndarray,
    name: str = "corpus",
) -> Corpus:
    """Load manifest + embeddings and attach relevance scores.

    ``relevance_source`` is either a path to a DVXR score file or a raw
    query-embedding vector of length d (normalized here, then scored via
    :func:`compute_relevance`).
    """
    records = _load_manifest(manifest_path)
    raw = read_embeddings(embeddings_path)
    if raw.shape[0] != len(records):
        raise DvxError(
            "COUNT_MISMATCH",
            f"manifest has {len(records)} entries, embedding file has {raw.shape[0]} rows",
        )
    embeddings = normalize_rows(raw)

    if isinstance(relevance_source, (str, Path)):
        scores = read_relevance(relevance_source)
        if scores.shape[0] != embeddings.n:
            raise DvxError(
                "COUNT_MISMATCH",
                f"relevance file has {scores.shape[0]} scores for {embeddings.n} images",
            )
        if not np.isfinite(scores).all():
            raise DvxError("NONFINITE_EMBEDDING", "relevance file contains NaN or Inf")
        relevance = RelevanceVector(scores)
    else:
        query = np.asarray(relevance_source, dtype=np.float64).reshape(-1)
        if query.shape[0] != embeddings.d:
            raise DvxError(
                "DIM_MISMATCH",
                f"query has length {query.shape[0]}, embeddings have d={embeddings.d}",
            )
        norm = float(np.linalg.norm(query))
        if norm < ZERO_NORM_FLOOR:
            raise DvxError("ZERO_ROW", "query embedding has zero norm")
        relevance = compute_relevance(embeddings, query / norm)

    return Corpus(records=records, embeddings=embeddings, relevance=relevance, name=name)
