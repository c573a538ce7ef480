from __future__ import annotations

import hashlib
import json
import logging
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Set, Tuple

from .corpus import Corpus, Document, normalize_whitespace
from .dataset import QAInstance
from .errors import CorpusFormatError, DuplicateDocumentError, DuplicateSummaryError
from .retrieval.dense import DenseIndex
from .validation import CorpusRecord, QARecord, VectorRecord, validate_record

logger = logging.getLogger(__name__)


def iter_jsonl(path: Path) -> Iterator[Tuple[int, Any]]:
    """Yield ``(line_number, decoded_object)`` for every non-blank line."""

    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Expected data file not found: {path}")
    with path.open("r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                yield line_number, json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"malformed JSON: {exc.msg}", line_number=line_number) from exc


def dumps_record(record: Mapping[str, Any]) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False)


def write_jsonl(path: Path, records: Iterable[Mapping[str, Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(dumps_record(record) + "\n")
    return path


def write_json(path: Path, payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


def read_json(path: Path) -> Any:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Expected data file not found: {path}")
    return json.loads(path.read_text(encoding="utf-8"))


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def load_corpus(path: Path) -> Corpus:
    """Load a corpus file, normalising whitespace and enforcing identity invariants."""

    documents: List[Document] = []
    seen_ids: Set[str] = set()
    summaries: Dict[str, str] = {}

    for line_number, payload in iter_jsonl(path):
        record = validate_record(CorpusRecord, payload, line_number=line_number)
        if record.id in seen_ids:
            raise DuplicateDocumentError(f"duplicate doc_id {record.id!r}", line_number=line_number)
        if record.is_summary:
            if record.entity_id is None:
                raise CorpusFormatError(f"summary document {record.id!r} has no entity_id", line_number=line_number)
            if record.entity_id in summaries:
                raise DuplicateSummaryError(
                    f"entity {record.entity_id!r} already has summary document {summaries[record.entity_id]!r}",
                    line_number=line_number,
                )
            summaries[record.entity_id] = record.id
        seen_ids.add(record.id)
        documents.append(
            Document(
                doc_id=record.id,
                title=normalize_whitespace(record.title),
                text=normalize_whitespace(record.text),
                entity_id=record.entity_id,
                is_summary=record.is_summary,
            )
        )

    corpus = Corpus.from_documents(documents)
    logger.info("Loaded %d documents (%d summaries) from %s", len(corpus), len(summaries), path)
    return corpus


def load_dataset(path: Path) -> List[QAInstance]:
    instances: List[QAInstance] = []
    seen: Set[str] = set()
    for line_number, payload in iter_jsonl(path):
        record = validate_record(QARecord, payload, line_number=line_number)
        if record.id in seen:
            raise CorpusFormatError(f"duplicate question id {record.id!r}", line_number=line_number)
        seen.add(record.id)
        instances.append(
            QAInstance(
                qa_id=record.id,
                question=record.question,
                gold_answers=tuple(record.answers),
                entity_id=record.entity_id,
                pageviews=record.pageviews,
                relation=record.relation,
            )
        )
    logger.info("Loaded %d questions from %s", len(instances), path)
    return instances


def load_vectors(path: Path) -> DenseIndex:
    """Read a ``{"id", "vector"}`` JSON Lines file into a dense index."""

    rows: List[Tuple[str, List[float]]] = []
    dim = 0
    for line_number, payload in iter_jsonl(path):
        record = validate_record(VectorRecord, payload, line_number=line_number)
        if dim and len(record.vector) != dim:
            raise CorpusFormatError(
                f"vector for {record.id!r} has length {len(record.vector)}, expected {dim}", line_number=line_number
            )
        dim = dim or len(record.vector)
        rows.append((record.id, record.vector))
    return DenseIndex.from_vectors(rows, dim=dim)


def vectors_to_records(index: DenseIndex) -> List[Dict[str, Any]]:
    return [{"id": doc_id, "vector": index.matrix[i].tolist()} for i, doc_id in enumerate(index.doc_ids)]


@lru_cache(maxsize=4)
def get_corpus(path: Path) -> Corpus:
    return load_corpus(path)


@lru_cache(maxsize=4)
def get_dataset(path: Path) -> Tuple[QAInstance, ...]:
    return tuple(load_dataset(path))


def clear_caches() -> None:
    """Clear all cached loaders (useful for tests)."""

    get_corpus.cache_clear()
    get_dataset.cache_clear()


__all__ = [
    "clear_caches",
    "dumps_record",
    "file_sha256",
    "get_corpus",
    "get_dataset",
    "iter_jsonl",
    "load_corpus",
    "load_dataset",
    "load_vectors",
    "read_json",
    "vectors_to_records",
    "write_json",
    "write_jsonl",
]
