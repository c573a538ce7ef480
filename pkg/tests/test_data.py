from __future__ import annotations

import json

import pytest

from ragops import data
from ragops.corpus import serialize_corpus
from ragops.errors import CorpusFormatError, DimensionMismatchError, DuplicateDocumentError, DuplicateSummaryError


def _write_lines(path, rows):
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return path


def test_load_corpus_round_trip(tmp_path, toy_corpus):
    path = data.write_jsonl(tmp_path / "corpus.jsonl", serialize_corpus(toy_corpus))
    loaded = data.load_corpus(path)
    assert [doc.doc_id for doc in loaded.documents] == ["d1", "d2", "d3", "d4", "d5"]
    assert loaded.by_entity_summary == {"E1": "d1", "E2": "d2", "E3": "d3"}


def test_load_corpus_normalizes_whitespace(tmp_path):
    path = _write_lines(tmp_path / "c.jsonl", [json.dumps({"id": "a", "title": " T ", "text": "One.\n\n Two."})])
    doc = data.load_corpus(path).get("a")
    assert doc.text == "One. Two."
    assert doc.title == "T"


def test_load_corpus_reports_line_numbers(tmp_path):
    path = _write_lines(
        tmp_path / "c.jsonl",
        [json.dumps({"id": "a", "title": "T", "text": "One."}), "", "{not json"],
    )
    with pytest.raises(CorpusFormatError) as excinfo:
        data.load_corpus(path)
    assert excinfo.value.line_number == 3


def test_load_corpus_rejects_blank_text(tmp_path):
    path = _write_lines(tmp_path / "c.jsonl", [json.dumps({"id": "a", "title": "T", "text": "   "})])
    with pytest.raises(CorpusFormatError):
        data.load_corpus(path)


def test_load_corpus_duplicate_id_and_summary(tmp_path):
    dup = _write_lines(
        tmp_path / "dup.jsonl",
        [json.dumps({"id": "a", "title": "T", "text": "x"}), json.dumps({"id": "a", "title": "T", "text": "y"})],
    )
    with pytest.raises(DuplicateDocumentError) as excinfo:
        data.load_corpus(dup)
    assert excinfo.value.line_number == 2

    summaries = _write_lines(
        tmp_path / "sum.jsonl",
        [
            json.dumps({"id": "a", "title": "T", "text": "x", "entity_id": "E", "is_summary": True}),
            json.dumps({"id": "b", "title": "T", "text": "y", "entity_id": "E", "is_summary": True}),
        ],
    )
    with pytest.raises(DuplicateSummaryError):
        data.load_corpus(summaries)


def test_empty_corpus_file(tmp_path):
    path = _write_lines(tmp_path / "empty.jsonl", [""])
    assert len(data.load_corpus(path)) == 0


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        data.load_corpus(tmp_path / "nope.jsonl")


def test_load_dataset(tmp_path):
    row = {"id": "q1", "question": "Who?", "answers": ["X"], "entity_id": "E", "pageviews": 10, "relation": "r"}
    path = _write_lines(tmp_path / "d.jsonl", [json.dumps(row)])
    (instance,) = data.load_dataset(path)
    assert instance.gold_answers == ("X",)
    assert instance.pageviews == 10


@pytest.mark.parametrize(
    "row",
    [
        {"id": "q1", "question": "Who?", "answers": [], "entity_id": "E", "pageviews": 1},
        {"id": "q1", "question": "Who?", "answers": ["X"], "entity_id": "E", "pageviews": -1},
    ],
)
def test_load_dataset_rejects_bad_rows(tmp_path, row):
    path = _write_lines(tmp_path / "d.jsonl", [json.dumps(row)])
    with pytest.raises(CorpusFormatError):
        data.load_dataset(path)


def test_load_vectors_dimension_check(tmp_path):
    path = _write_lines(
        tmp_path / "v.jsonl",
        [json.dumps({"id": "a", "vector": [1.0, 0.0]}), json.dumps({"id": "b", "vector": [1.0]})],
    )
    with pytest.raises((CorpusFormatError, DimensionMismatchError)):
        data.load_vectors(path)


def test_cached_loaders(tmp_path, toy_corpus):
    path = data.write_jsonl(tmp_path / "corpus.jsonl", serialize_corpus(toy_corpus))
    assert data.get_corpus(path) is data.get_corpus(path)
