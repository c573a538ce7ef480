from __future__ import annotations

import logging
import math
from typing import Iterable, Optional, Protocol, Sequence

from ..config import DEFAULT_EDGES
from ..corpus import normalize_whitespace
from ..errors import BucketEdgesError
from ..retrieval.utils import RankedList

logger = logging.getLogger(__name__)

BUCKET_COUNT = 5


class Scored(Protocol):
    correct: bool


def _safe_divide(numerator: float, denominator: float) -> float:
    if denominator == 0:
        return 0.0
    return numerator / denominator


def normalize_answer(text: str) -> str:
    """Lowercase and collapse whitespace; punctuation is kept."""

    return normalize_whitespace(text).lower()


def is_correct(prediction: str, gold_answers: Sequence[str]) -> bool:
    """True when a normalised gold answer is a substring of the normalised prediction."""

    if not gold_answers:
        raise ValueError("gold_answers must be non-empty")
    normalized = normalize_answer(prediction)
    for gold in gold_answers:
        target = normalize_answer(gold)
        if target and target in normalized:
            return True
    return False


def accuracy(results: Iterable[Scored]) -> float:
    rows = list(results)
    if not rows:
        logger.warning("accuracy() called with no results; reporting 0.0")
        return 0.0
    return _safe_divide(sum(1 for row in rows if row.correct), len(rows))


def recall_at_k(ranked: RankedList, gold_doc_id: str, k: int) -> int:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return int(gold_doc_id in ranked.doc_ids[:k])


def validate_edges(edges: Sequence[float]) -> None:
    if len(edges) != BUCKET_COUNT - 1:
        raise BucketEdgesError(f"expected {BUCKET_COUNT - 1} edges, got {len(edges)}")
    if any(not math.isfinite(edge) for edge in edges):
        raise BucketEdgesError(f"bucket edges must be finite: {list(edges)}")
    if any(low >= high for low, high in zip(edges, edges[1:])):
        raise BucketEdgesError(f"bucket edges must be strictly ascending: {list(edges)}")


def assign_bucket(pageviews: int, log_base: int = 10, edges: Optional[Sequence[float]] = None) -> int:
    """Popularity bucket 0..4: the number of edges strictly below log(pageviews).

    ``pageviews == 0`` has no logarithm and lands in bucket 0.
    """

    if pageviews < 0:
        raise ValueError(f"pageviews must be non-negative, got {pageviews}")
    if log_base not in DEFAULT_EDGES:
        raise BucketEdgesError(f"log_base must be 10 or 2, got {log_base}")
    edges = list(DEFAULT_EDGES[log_base] if edges is None else edges)
    validate_edges(edges)
    if pageviews == 0:
        return 0
    value = math.log10(pageviews) if log_base == 10 else math.log2(pageviews)
    return sum(1 for edge in edges if edge < value)


__all__ = [
    "BUCKET_COUNT",
    "accuracy",
    "assign_bucket",
    "is_correct",
    "normalize_answer",
    "recall_at_k",
    "validate_edges",
]
