"""BM25 sparse retrieval over an in-memory inverted index."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

from ..corpus import Corpus
from ..errors import UnknownDocumentError
from .utils import RankedList, tokenize


@dataclass(frozen=True)
class BM25Params:
    k1: float = 1.2
    b: float = 0.75


DEFAULT_BM25 = BM25Params()


@dataclass(frozen=True)
class SparseIndex:
    # term -> {doc_id: term frequency}, doc_ids in corpus order
    postings: Mapping[str, Mapping[str, int]]
    doc_lengths: Mapping[str, int]
    avg_doc_length: float
    doc_count: int

    def document_frequency(self, term: str) -> int:
        return len(self.postings.get(term, {}))

    def idf(self, term: str) -> float:
        df = self.document_frequency(term)
        return math.log(1.0 + (self.doc_count - df + 0.5) / (df + 0.5))

    def to_record(self) -> Dict[str, object]:
        return {
            "doc_count": self.doc_count,
            "avg_doc_length": self.avg_doc_length,
            "doc_lengths": dict(self.doc_lengths),
            "postings": {term: [[doc_id, tf] for doc_id, tf in docs.items()] for term, docs in self.postings.items()},
        }

    @classmethod
    def from_record(cls, record: Mapping[str, object]) -> "SparseIndex":
        postings = {
            str(term): {str(doc_id): int(tf) for doc_id, tf in docs}
            for term, docs in record["postings"].items()  # type: ignore[union-attr]
        }
        return cls(
            postings=postings,
            doc_lengths={str(k): int(v) for k, v in record["doc_lengths"].items()},  # type: ignore[union-attr]
            avg_doc_length=float(record["avg_doc_length"]),  # type: ignore[arg-type]
            doc_count=int(record["doc_count"]),  # type: ignore[arg-type]
        )


def build_sparse_index_from_texts(items: Iterable[Tuple[str, str]]) -> SparseIndex:
    postings: Dict[str, Dict[str, int]] = {}
    doc_lengths: Dict[str, int] = {}

    for doc_id, text in items:
        terms = tokenize(text)
        doc_lengths[doc_id] = len(terms)
        for term, tf in Counter(terms).items():
            postings.setdefault(term, {})[doc_id] = tf

    doc_count = len(doc_lengths)
    avg = sum(doc_lengths.values()) / doc_count if doc_count else 0.0
    return SparseIndex(postings=postings, doc_lengths=doc_lengths, avg_doc_length=avg, doc_count=doc_count)


def build_sparse_index(corpus: Corpus) -> SparseIndex:
    return build_sparse_index_from_texts((doc.doc_id, doc.text) for doc in corpus.documents)


def _term_weight(index: SparseIndex, term: str, doc_id: str, params: BM25Params) -> float:
    tf = index.postings.get(term, {}).get(doc_id, 0)
    if tf == 0:
        return 0.0
    length_ratio = index.doc_lengths[doc_id] / index.avg_doc_length
    saturation = tf * (params.k1 + 1) / (tf + params.k1 * (1 - params.b + params.b * length_ratio))
    return index.idf(term) * saturation


def bm25_score(
    index: SparseIndex,
    query_terms: Sequence[str],
    doc_id: str,
    params: BM25Params = DEFAULT_BM25,
) -> float:
    """Lucene-style BM25; repeated query terms contribute once per occurrence."""

    if doc_id not in index.doc_lengths:
        raise UnknownDocumentError(f"doc_id {doc_id!r} is not in the sparse index")
    score = 0.0
    for term in query_terms:
        score += _term_weight(index, term, doc_id, params)
    return score


def score_text(
    index: SparseIndex,
    query_terms: Sequence[str],
    text: str,
    params: BM25Params = DEFAULT_BM25,
) -> float:
    """BM25 of an arbitrary passage using the collection statistics of ``index``."""

    terms = tokenize(text)
    if not terms or index.avg_doc_length == 0:
        return 0.0
    counts = Counter(terms)
    norm = params.k1 * (1 - params.b + params.b * len(terms) / index.avg_doc_length)
    score = 0.0
    for term in query_terms:
        tf = counts.get(term, 0)
        if tf:
            score += index.idf(term) * tf * (params.k1 + 1) / (tf + norm)
    return score


def sparse_search(
    index: SparseIndex,
    query: str,
    k: int,
    *,
    query_id: str = "",
    params: BM25Params = DEFAULT_BM25,
) -> RankedList:
    terms = tokenize(query)
    candidates: List[str] = sorted({doc_id for term in set(terms) for doc_id in index.postings.get(term, {})})
    scores = {doc_id: bm25_score(index, terms, doc_id, params) for doc_id in candidates}
    positive = {doc_id: score for doc_id, score in scores.items() if score > 0}
    return RankedList.from_scores(query_id, positive, k)


__all__ = [
    "BM25Params",
    "DEFAULT_BM25",
    "SparseIndex",
    "bm25_score",
    "build_sparse_index",
    "build_sparse_index_from_texts",
    "score_text",
    "sparse_search",
]
