from __future__ import annotations

import pytest

from ragops.corpus import Corpus, Document, get_summary_doc, normalize_whitespace, split_sentences
from ragops.errors import (
    CorpusFormatError,
    DuplicateDocumentError,
    DuplicateSummaryError,
    MissingSummaryError,
    UnknownEntityError,
)


def test_split_sentences_basic():
    sentences = split_sentences("Alpha one. Beta two! Gamma three?", doc_id="d")
    assert [s.text for s in sentences] == ["Alpha one.", "Beta two!", "Gamma three?"]
    assert [s.index for s in sentences] == [0, 1, 2]
    assert all(s.doc_id == "d" for s in sentences)


def test_split_sentences_keeps_abbreviations_and_initials():
    text = "Dr. Smith met Mr. Jones in St. Louis. J. R. Tolkien wrote books. It was 1954."
    assert [s.text for s in split_sentences(text)] == [
        "Dr. Smith met Mr. Jones in St. Louis.",
        "J. R. Tolkien wrote books.",
        "It was 1954.",
    ]


def test_split_sentences_needs_uppercase_or_digit_after_boundary():
    assert len(split_sentences("Version 2.0 is out. then nothing")) == 1
    assert len(split_sentences("Done. 42 remain.")) == 2


def test_split_sentences_non_ascii_uppercase_opens_a_sentence():
    assert [s.text for s in split_sentences("Zola wrote novels. Émile was his first name. Åsa agreed.")] == [
        "Zola wrote novels.",
        "Émile was his first name.",
        "Åsa agreed.",
    ]
    assert len(split_sentences("He met Ö. Larsson in Oslo. élan is lowercase.")) == 1


def test_split_sentences_rejoins_to_normalized_text():
    text = "  First   line.\nSecond\tline.  Third line. "
    joined = " ".join(s.text for s in split_sentences(text))
    assert joined == normalize_whitespace(text)


def test_split_sentences_empty():
    assert split_sentences("   ") == []


def test_sentence_keys_sort_by_document_then_index():
    sentences = split_sentences("A one. B two. C three. D four. E five. F six. G seven. H eight. I nine. J ten. K eleven.", "d")
    keys = [s.key for s in sentences]
    assert keys == sorted(keys)


def test_corpus_rejects_duplicates():
    doc = Document("d1", "T", "Text.")
    with pytest.raises(DuplicateDocumentError):
        Corpus.from_documents([doc, doc])


def test_corpus_rejects_second_summary():
    with pytest.raises(DuplicateSummaryError):
        Corpus.from_documents(
            [Document("a", "T", "One.", "E1", True), Document("b", "T", "Two.", "E1", True)]
        )


def test_summary_needs_entity():
    with pytest.raises(CorpusFormatError):
        Corpus.from_documents([Document("a", "T", "One.", None, True)])


def test_get_summary_doc(toy_corpus):
    assert get_summary_doc(toy_corpus, "E1").doc_id == "d1"


def test_get_summary_doc_missing_and_unknown():
    corpus = Corpus.from_documents([Document("a", "T", "One.", "E1", False)])
    with pytest.raises(MissingSummaryError):
        get_summary_doc(corpus, "E1")
    with pytest.raises(UnknownEntityError):
        get_summary_doc(corpus, "E404")
