"""Exact dot-product retrieval over externally produced embeddings."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Sequence, Tuple, Union

import numpy as np

from ..errors import DimensionMismatchError, UnknownDocumentError
from .utils import RankedList

VectorLike = Union[Sequence[float], np.ndarray]


@dataclass(frozen=True)
class DenseIndex:
    doc_ids: Tuple[str, ...]
    matrix: np.ndarray
    dim: int
    _positions: Mapping[str, int] = field(repr=False, compare=False, default_factory=dict)

    @classmethod
    def from_vectors(
        cls,
        vectors: Union[Mapping[str, VectorLike], Iterable[Tuple[str, VectorLike]]],
        *,
        dim: int = 0,
    ) -> "DenseIndex":
        items = list(vectors.items() if isinstance(vectors, Mapping) else vectors)
        doc_ids = tuple(doc_id for doc_id, _ in items)
        if len(set(doc_ids)) != len(doc_ids):
            raise ValueError("duplicate doc_id in dense vectors")

        if not items:
            return cls(doc_ids=(), matrix=np.zeros((0, dim)), dim=dim)

        rows = [np.asarray(vector, dtype=np.float64) for _, vector in items]
        dim = dim or rows[0].shape[0]
        if dim <= 0:
            raise DimensionMismatchError("dense vectors must have positive dimension")
        for doc_id, row in zip(doc_ids, rows):
            if row.ndim != 1 or row.shape[0] != dim:
                raise DimensionMismatchError(f"vector for {doc_id!r} has shape {row.shape}, expected ({dim},)")
            if not np.all(np.isfinite(row)):
                raise ValueError(f"vector for {doc_id!r} has non-finite components")

        matrix = np.vstack(rows)
        matrix.setflags(write=False)
        return cls(
            doc_ids=doc_ids,
            matrix=matrix,
            dim=dim,
            _positions={doc_id: position for position, doc_id in enumerate(doc_ids)},
        )

    @property
    def vectors(self) -> Dict[str, np.ndarray]:
        return {doc_id: self.matrix[position] for position, doc_id in enumerate(self.doc_ids)}

    def __len__(self) -> int:
        return len(self.doc_ids)

    def __contains__(self, doc_id: object) -> bool:
        return doc_id in self._positions

    def position(self, doc_id: str) -> int:
        try:
            return self._positions[doc_id]
        except KeyError:
            raise UnknownDocumentError(f"doc_id {doc_id!r} is not in the dense index") from None

    def score_all(self, query_vector: VectorLike) -> np.ndarray:
        query = np.asarray(query_vector, dtype=np.float64)
        if not self.doc_ids:
            return np.zeros(0)
        if query.ndim != 1 or query.shape[0] != self.dim:
            raise DimensionMismatchError(f"query has shape {query.shape}, index dimension is {self.dim}")
        return self.matrix @ query


def dense_search(index: DenseIndex, query_vector: VectorLike, k: int, *, query_id: str = "") -> RankedList:
    scores = index.score_all(query_vector)
    return RankedList.from_scores(query_id, zip(index.doc_ids, scores.tolist()), k)


def rerank(candidates: RankedList, dense: DenseIndex, query_vector: VectorLike, k: int) -> RankedList:
    """Reorder a first-stage candidate set by dot product; nothing outside the set is added."""

    positions = [dense.position(doc_id) for doc_id in candidates.doc_ids]
    # same full-matrix product as dense_search, so scores match it exactly
    scores = dense.score_all(query_vector)
    return RankedList.from_scores(
        candidates.query_id,
        ((doc_id, float(scores[position])) for doc_id, position in zip(candidates.doc_ids, positions)),
        k,
    )


__all__ = ["DenseIndex", "dense_search", "rerank"]
