"""Interchangeable retriever objects behind the ``Retriever`` protocol."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from ..corpus import Corpus
from ..dataset import QAInstance
from ..errors import ConfigError
from .dense import DenseIndex, dense_search, rerank
from .ideal import ideal_retrieve
from .sparse import DEFAULT_BM25, BM25Params, SparseIndex, sparse_search
from .utils import RankedList, Retriever

QueryEncoder = Callable[[QAInstance], Sequence[float]]

RETRIEVER_NAMES = ("bm25", "dense", "bm25_dense_rerank", "ideal")


@dataclass(frozen=True)
class Bm25Retriever:
    index: SparseIndex
    params: BM25Params = DEFAULT_BM25
    name: str = "bm25"

    def retrieve(self, instance: QAInstance, k: int) -> RankedList:
        return sparse_search(self.index, instance.question, k, query_id=instance.qa_id, params=self.params)


@dataclass(frozen=True)
class DenseRetriever:
    index: DenseIndex
    encode: QueryEncoder
    name: str = "dense"

    def retrieve(self, instance: QAInstance, k: int) -> RankedList:
        return dense_search(self.index, self.encode(instance), k, query_id=instance.qa_id)


@dataclass(frozen=True)
class RerankRetriever:
    sparse: SparseIndex
    dense: DenseIndex
    encode: QueryEncoder
    depth: int = 100
    params: BM25Params = DEFAULT_BM25
    name: str = "bm25_dense_rerank"

    def retrieve(self, instance: QAInstance, k: int) -> RankedList:
        candidates = sparse_search(
            self.sparse, instance.question, max(self.depth, k), query_id=instance.qa_id, params=self.params
        )
        return rerank(candidates, self.dense, self.encode(instance), k)


@dataclass(frozen=True)
class IdealRetriever:
    corpus: Corpus
    fallback: Retriever
    name: str = "ideal"

    def retrieve(self, instance: QAInstance, k: int) -> RankedList:
        return ideal_retrieve(self.corpus, instance, k, self.fallback)


def build_retriever(
    name: str,
    *,
    corpus: Optional[Corpus] = None,
    sparse: Optional[SparseIndex] = None,
    dense: Optional[DenseIndex] = None,
    encode: Optional[QueryEncoder] = None,
    params: BM25Params = DEFAULT_BM25,
    rerank_depth: int = 100,
    ideal_fallback: str = "bm25",
) -> Retriever:
    """Assemble a retriever by name from whichever indexes the run has built."""

    if name == "bm25":
        if sparse is None:
            raise ConfigError("bm25 retrieval needs a sparse index")
        return Bm25Retriever(sparse, params)
    if name == "dense":
        if dense is None or encode is None:
            raise ConfigError("dense retrieval needs a dense index and a query encoder")
        return DenseRetriever(dense, encode)
    if name == "bm25_dense_rerank":
        if sparse is None or dense is None or encode is None:
            raise ConfigError("reranking needs sparse and dense indexes and a query encoder")
        return RerankRetriever(sparse, dense, encode, depth=rerank_depth, params=params)
    if name == "ideal":
        if corpus is None:
            raise ConfigError("ideal retrieval needs the corpus")
        if ideal_fallback == "ideal":
            raise ConfigError("the ideal retriever cannot fall back to itself")
        fallback = build_retriever(
            ideal_fallback,
            sparse=sparse,
            dense=dense,
            encode=encode,
            params=params,
            rerank_depth=rerank_depth,
        )
        return IdealRetriever(corpus, fallback)
    raise ConfigError(f"unknown retriever {name!r}; expected one of {', '.join(RETRIEVER_NAMES)}")


__all__ = [
    "Bm25Retriever",
    "DenseRetriever",
    "IdealRetriever",
    "QueryEncoder",
    "RETRIEVER_NAMES",
    "RerankRetriever",
    "build_retriever",
]
