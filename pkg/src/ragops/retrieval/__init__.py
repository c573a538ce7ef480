"""Sparse, dense, two-stage and oracle retrieval."""
from __future__ import annotations

from .backends import (
    RETRIEVER_NAMES,
    Bm25Retriever,
    DenseRetriever,
    IdealRetriever,
    RerankRetriever,
    build_retriever,
)
from .dense import DenseIndex, dense_search, rerank
from .ideal import ideal_retrieve
from .sparse import BM25Params, SparseIndex, bm25_score, build_sparse_index, sparse_search
from .utils import RankedList, Retriever, tokenize

__all__ = [
    "BM25Params",
    "Bm25Retriever",
    "DenseIndex",
    "DenseRetriever",
    "IdealRetriever",
    "RETRIEVER_NAMES",
    "RankedList",
    "RerankRetriever",
    "Retriever",
    "SparseIndex",
    "bm25_score",
    "build_retriever",
    "build_sparse_index",
    "dense_search",
    "ideal_retrieve",
    "rerank",
    "sparse_search",
    "tokenize",
]
