"""Documents, the corpus container and rule-based sentence segmentation."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from .errors import (
    CorpusFormatError,
    DuplicateDocumentError,
    DuplicateSummaryError,
    MissingSummaryError,
    UnknownDocumentError,
    UnknownEntityError,
)

# Tokens ending in "." that never close a sentence. Matching is case-sensitive
# and applies to the whitespace-delimited token that carries the period.
ABBREVIATIONS = frozenset(
    {
        "Dr.", "Mr.", "Mrs.", "Ms.", "Prof.", "Sr.", "Jr.", "St.", "Mt.", "Ft.",
        "Gen.", "Col.", "Lt.", "Sgt.", "Capt.", "Rev.", "Hon.", "Gov.", "Sen.", "Rep.",
        "Inc.", "Ltd.", "Co.", "Corp.", "Bros.", "No.", "Nos.", "Vol.", "pp.", "p.",
        "etc.", "vs.", "e.g.", "i.e.", "cf.", "al.", "approx.", "ca.", "c.",
        "Jan.", "Feb.", "Mar.", "Apr.", "Jun.", "Jul.", "Aug.", "Sep.", "Sept.", "Oct.", "Nov.", "Dec.",
        "U.S.", "U.K.", "U.N.", "D.C.",
    }
)

_BOUNDARY = re.compile(r"[.!?](?= (\S))")
_WHITESPACE = re.compile(r"\s+")


def _is_initial(token: str) -> bool:
    return len(token) == 2 and token[0].isupper() and token[1] == "."


def normalize_whitespace(text: str) -> str:
    """Collapse whitespace runs to single spaces and trim both ends."""

    return _WHITESPACE.sub(" ", text).strip()


@dataclass(frozen=True)
class Document:
    doc_id: str
    title: str
    text: str
    entity_id: Optional[str] = None
    is_summary: bool = False


@dataclass(frozen=True)
class Sentence:
    text: str
    doc_id: str
    index: int

    @property
    def key(self) -> str:
        return sentence_key(self.doc_id, self.index)


def sentence_key(doc_id: str, index: int) -> str:
    return f"{doc_id}#{index:06d}"


@dataclass(frozen=True)
class Corpus:
    documents: Tuple[Document, ...]
    by_entity_summary: Mapping[str, str]
    _by_id: Mapping[str, Document] = field(repr=False, compare=False, default_factory=dict)

    @classmethod
    def from_documents(cls, documents: Iterable[Document]) -> "Corpus":
        ordered: List[Document] = []
        by_id: Dict[str, Document] = {}
        summaries: Dict[str, str] = {}

        for doc in documents:
            if doc.doc_id in by_id:
                raise DuplicateDocumentError(f"duplicate doc_id {doc.doc_id!r}")
            if doc.is_summary:
                if doc.entity_id is None:
                    raise CorpusFormatError(f"summary document {doc.doc_id!r} has no entity_id")
                if doc.entity_id in summaries:
                    raise DuplicateSummaryError(
                        f"entity {doc.entity_id!r} has two summary documents: "
                        f"{summaries[doc.entity_id]!r} and {doc.doc_id!r}"
                    )
                summaries[doc.entity_id] = doc.doc_id
            by_id[doc.doc_id] = doc
            ordered.append(doc)

        return cls(documents=tuple(ordered), by_entity_summary=summaries, _by_id=by_id)

    def __len__(self) -> int:
        return len(self.documents)

    def __contains__(self, doc_id: object) -> bool:
        return doc_id in self._by_id

    def get(self, doc_id: str) -> Document:
        try:
            return self._by_id[doc_id]
        except KeyError:
            raise UnknownDocumentError(f"unknown doc_id {doc_id!r}") from None

    def has_entity(self, entity_id: str) -> bool:
        return any(doc.entity_id == entity_id for doc in self.documents)


def split_sentences(text: str, doc_id: str = "") -> List[Sentence]:
    """Split ``text`` on ``.``/``!``/``?`` followed by a space and an uppercase letter or digit.

    Uppercase is judged with ``str.isupper``, so "Émile" can open a sentence.

    Whitespace is normalised first, so joining the returned sentences with single
    spaces reproduces the normalised text. Tokens listed in ``ABBREVIATIONS`` and
    single-letter initials ("J.") do not end a sentence.
    """

    normalized = normalize_whitespace(text)
    if not normalized:
        return []

    pieces: List[str] = []
    start = 0
    for match in _BOUNDARY.finditer(normalized):
        opener = match.group(1)
        if not (opener.isupper() or opener.isdigit()):
            continue
        end = match.end()
        token_start = normalized.rfind(" ", start, end) + 1
        token = normalized[max(token_start, start):end]
        if token in ABBREVIATIONS or _is_initial(token):
            continue
        pieces.append(normalized[start:end])
        start = end + 1

    pieces.append(normalized[start:])
    return [
        Sentence(text=piece, doc_id=doc_id, index=index)
        for index, piece in enumerate(piece for piece in pieces if piece)
    ]


def document_sentences(doc: Document) -> List[Sentence]:
    return split_sentences(doc.text, doc_id=doc.doc_id)


def get_summary_doc(corpus: Corpus, entity_id: str) -> Document:
    """Return the summary document flagged for ``entity_id``."""

    doc_id = corpus.by_entity_summary.get(entity_id)
    if doc_id is not None:
        return corpus.get(doc_id)
    if corpus.has_entity(entity_id):
        raise MissingSummaryError(f"entity {entity_id!r} has no summary document")
    raise UnknownEntityError(f"unknown entity {entity_id!r}")


def document_to_record(doc: Document) -> Dict[str, object]:
    return {
        "id": doc.doc_id,
        "title": doc.title,
        "text": doc.text,
        "entity_id": doc.entity_id,
        "is_summary": doc.is_summary,
    }


def serialize_corpus(corpus: Corpus) -> List[Dict[str, object]]:
    """Records in file order; ``ragops.data.write_jsonl`` turns them into a corpus file."""

    return [document_to_record(doc) for doc in corpus.documents]


__all__ = [
    "ABBREVIATIONS",
    "Corpus",
    "Document",
    "Sentence",
    "document_sentences",
    "document_to_record",
    "get_summary_doc",
    "normalize_whitespace",
    "sentence_key",
    "serialize_corpus",
    "split_sentences",
]
