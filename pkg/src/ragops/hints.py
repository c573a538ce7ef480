"""Hint extraction: pick the most relevant sentence from the top-K documents."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Protocol, Sequence

from .corpus import Document, Sentence, document_sentences
from .errors import EmptyDocumentSetError
from .retrieval.dense import DenseIndex
from .retrieval.sparse import (
    DEFAULT_BM25,
    BM25Params,
    SparseIndex,
    bm25_score,
    build_sparse_index_from_texts,
    score_text,
)
from .retrieval.utils import RankedList, tokenize

TextEmbedder = Callable[[List[str]], Sequence[Sequence[float]]]


class HintMode(str, Enum):
    SENTENCE = "S"
    DOCUMENT = "D"


@dataclass(frozen=True)
class Hint:
    mode: HintMode
    sentence: Sentence
    source_doc_id: str
    hint_text: str

    def summary(self) -> Dict[str, object]:
        return {
            "mode": self.mode.value,
            "source_doc_id": self.source_doc_id,
            "sentence_index": self.sentence.index,
            "sentence": self.sentence.text,
            "hint_text": self.hint_text,
        }


class SentenceRanker(Protocol):
    name: str

    def score(self, question: str, sentences: Sequence[Sentence]) -> List[float]:
        ...


@dataclass(frozen=True)
class Bm25SentenceRanker:
    """BM25 over sentences.

    With ``collection`` set, IDF and average length come from the document
    index and each sentence is scored independently of the rest of the pool.
    Without it the candidate pool is its own collection.
    """

    collection: Optional[SparseIndex] = None
    params: BM25Params = DEFAULT_BM25
    name: str = "bm25"

    def score(self, question: str, sentences: Sequence[Sentence]) -> List[float]:
        terms = tokenize(question)
        if self.collection is not None:
            return [score_text(self.collection, terms, sentence.text, self.params) for sentence in sentences]
        index = build_sparse_index_from_texts((sentence.key, sentence.text) for sentence in sentences)
        return [bm25_score(index, terms, sentence.key, self.params) for sentence in sentences]


@dataclass(frozen=True)
class DenseSentenceRanker:
    """Dot product between the embedded question and each embedded sentence."""

    embed: TextEmbedder
    name: str = "dense"

    def score(self, question: str, sentences: Sequence[Sentence]) -> List[float]:
        vectors = self.embed([question, *(sentence.text for sentence in sentences)])
        index = DenseIndex.from_vectors(zip((sentence.key for sentence in sentences), vectors[1:]))
        return index.score_all(vectors[0]).tolist()


def score_sentences(question: str, sentences: Sequence[Sentence], ranker: SentenceRanker) -> RankedList:
    """Rank every candidate sentence; equal scores fall back to (doc_id, sentence index)."""

    if not sentences:
        raise EmptyDocumentSetError("no candidate sentences to rank")
    scores = ranker.score(question, sentences)
    return RankedList.from_scores(
        question, zip((sentence.key for sentence in sentences), scores), len(sentences)
    )


def extract_hint(
    question: str,
    top_docs: Sequence[Document],
    ranker: SentenceRanker,
    mode: HintMode = HintMode.SENTENCE,
) -> Hint:
    """Select the single best sentence across ``top_docs`` and render it as a hint.

    Ties go to the higher-ranked document, then to the earlier sentence.
    Mode ``S`` returns the sentence itself, mode ``D`` the whole source document.
    """

    if not top_docs:
        raise EmptyDocumentSetError("hint extraction needs at least one document")

    pool: List[Sentence] = []
    doc_rank: Dict[str, int] = {}
    for rank, doc in enumerate(top_docs):
        if doc.doc_id in doc_rank:
            continue
        sentences = document_sentences(doc)
        if not sentences:
            raise EmptyDocumentSetError(f"document {doc.doc_id!r} yields no sentences")
        doc_rank[doc.doc_id] = rank
        pool.extend(sentences)

    scores = ranker.score(question, pool)
    *_, best = min(
        ((-score, doc_rank[sentence.doc_id], sentence.index, sentence) for score, sentence in zip(scores, pool)),
        key=lambda item: item[:3],
    )

    source = next(doc for doc in top_docs if doc.doc_id == best.doc_id)
    mode = HintMode(mode)
    hint_text = best.text if mode is HintMode.SENTENCE else source.text
    return Hint(mode=mode, sentence=best, source_doc_id=source.doc_id, hint_text=hint_text)


__all__ = [
    "Bm25SentenceRanker",
    "DenseSentenceRanker",
    "Hint",
    "HintMode",
    "SentenceRanker",
    "TextEmbedder",
    "extract_hint",
    "score_sentences",
]
