from __future__ import annotations

import pytest

from ragops.dataset import QAInstance
from ragops.errors import ConfigError, UnknownEntityError
from ragops.retrieval import Bm25Retriever, build_retriever, build_sparse_index, ideal_retrieve
from ragops.retrieval.dense import DenseIndex
from ragops.retrieval.utils import RankedList


def _instance(entity_id="E1", question="apple trees"):
    return QAInstance("q1", question, ("x",), entity_id, 10)


def test_ideal_puts_summary_first(toy_corpus):
    fallback = Bm25Retriever(build_sparse_index(toy_corpus))
    ranked = ideal_retrieve(toy_corpus, _instance("E3", "apple trees"), 3, fallback)
    assert ranked.doc_ids[0] == "d3"
    assert len(ranked) == 3
    assert ranked.doc_ids.count("d3") == 1


def test_ideal_k1_skips_fallback(toy_corpus):
    class Exploding:
        name = "boom"

        def retrieve(self, instance, k):
            raise AssertionError("fallback must not run for k=1")

    ranked = ideal_retrieve(toy_corpus, _instance("E2"), 1, Exploding())
    assert ranked.doc_ids == ["d2"]
    assert ranked.entries[0][1] == 1.0


def test_ideal_sentinel_above_fallback_scores(toy_corpus):
    fallback = Bm25Retriever(build_sparse_index(toy_corpus))
    ranked = ideal_retrieve(toy_corpus, _instance("E2", "apple trees cherry"), 4, fallback)
    scores = [score for _, score in ranked.entries]
    assert scores[0] > max(scores[1:])


def test_ideal_missing_summary(toy_corpus):
    fallback = Bm25Retriever(build_sparse_index(toy_corpus))
    with pytest.raises(UnknownEntityError):
        ideal_retrieve(toy_corpus, _instance("E404"), 1, fallback)


def test_build_retriever_errors(toy_corpus):
    with pytest.raises(ConfigError):
        build_retriever("bm25")
    with pytest.raises(ConfigError):
        build_retriever("dense", sparse=build_sparse_index(toy_corpus))
    with pytest.raises(ConfigError):
        build_retriever("tfidf", sparse=build_sparse_index(toy_corpus))


def test_rerank_retriever_reorders_bm25_candidates(toy_corpus):
    sparse = build_sparse_index(toy_corpus)
    dense = DenseIndex.from_vectors({doc.doc_id: [float(i), 1.0] for i, doc in enumerate(toy_corpus.documents)})
    retriever = build_retriever(
        "bm25_dense_rerank", sparse=sparse, dense=dense, encode=lambda instance: [1.0, 0.0], rerank_depth=10
    )
    ranked = retriever.retrieve(_instance(question="apple cherry trees"), 2)
    bm25_ids = set(Bm25Retriever(sparse).retrieve(_instance(question="apple cherry trees"), 10).doc_ids)
    assert set(ranked.doc_ids) <= bm25_ids
    assert ranked.doc_ids == ["d4", "d3"]


def test_ranked_list_record_round_trip():
    ranked = RankedList.from_scores("q", {"a": 2.0, "b": 1.0}, 5)
    assert RankedList.from_record(ranked.to_record()) == ranked
