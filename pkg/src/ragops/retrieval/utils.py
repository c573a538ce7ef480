"""Shared retrieval types: the ranked result list and the term tokenizer."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, Iterable, List, Mapping, Protocol, Tuple, Union

if TYPE_CHECKING:
    from ..dataset import QAInstance

_TERM = re.compile(r"[^\W_]+")


def tokenize(text: str) -> List[str]:
    """Lowercase and split on every non-alphanumeric character."""

    return _TERM.findall(text.lower())


ScoreSource = Union[Mapping[str, float], Iterable[Tuple[str, float]]]


def _ranking_key(entry: Tuple[str, float]) -> Tuple[float, str]:
    doc_id, score = entry
    return (-score, doc_id)


@dataclass(frozen=True)
class RankedList:
    query_id: str
    entries: Tuple[Tuple[str, float], ...]
    k_requested: int

    def __post_init__(self) -> None:
        if self.k_requested < 0:
            raise ValueError("k_requested must be non-negative")
        if len(self.entries) > self.k_requested:
            raise ValueError("more entries than requested")
        seen = set()
        for doc_id, score in self.entries:
            if doc_id in seen:
                raise ValueError(f"duplicate doc_id {doc_id!r} in ranked list")
            if not math.isfinite(score):
                raise ValueError(f"non-finite score for {doc_id!r}")
            seen.add(doc_id)
        if list(self.entries) != sorted(self.entries, key=_ranking_key):
            raise ValueError("entries must be sorted by score desc, doc_id asc")

    @classmethod
    def from_scores(cls, query_id: str, scores: ScoreSource, k: int) -> "RankedList":
        """Sort by score descending, break ties by doc_id ascending, keep the first ``k``."""

        items = scores.items() if isinstance(scores, Mapping) else scores
        ordered = sorted(((doc_id, float(score)) for doc_id, score in items), key=_ranking_key)
        return cls(query_id=query_id, entries=tuple(ordered[: max(k, 0)]), k_requested=max(k, 0))

    @property
    def doc_ids(self) -> List[str]:
        return [doc_id for doc_id, _ in self.entries]

    def scores(self) -> Dict[str, float]:
        return dict(self.entries)

    def truncate(self, k: int) -> "RankedList":
        return RankedList(self.query_id, self.entries[: max(k, 0)], min(self.k_requested, max(k, 0)))

    def __len__(self) -> int:
        return len(self.entries)

    def to_record(self) -> Dict[str, object]:
        return {
            "qa_id": self.query_id,
            "k": self.k_requested,
            "entries": [[doc_id, score] for doc_id, score in self.entries],
        }

    @classmethod
    def from_record(cls, record: Mapping[str, object]) -> "RankedList":
        entries = tuple((str(doc_id), float(score)) for doc_id, score in record["entries"])  # type: ignore[union-attr]
        return cls(query_id=str(record["qa_id"]), entries=entries, k_requested=int(record["k"]))  # type: ignore[arg-type]


class Retriever(Protocol):
    """Anything that ranks corpus documents for a dataset question."""

    name: str

    def retrieve(self, instance: "QAInstance", k: int) -> RankedList:
        ...


__all__ = ["RankedList", "Retriever", "tokenize"]
