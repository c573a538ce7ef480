from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Tuple


@dataclass(frozen=True)
class QAInstance:
    """A factual question about a subject entity plus its accepted answers."""

    qa_id: str
    question: str
    gold_answers: Tuple[str, ...]
    entity_id: str
    pageviews: int
    relation: str = ""

    def __post_init__(self) -> None:
        if not self.gold_answers:
            raise ValueError(f"instance {self.qa_id!r} has no gold answers")
        if self.pageviews < 0:
            raise ValueError(f"instance {self.qa_id!r} has negative pageviews")


def instance_to_record(instance: QAInstance) -> Dict[str, object]:
    return {
        "id": instance.qa_id,
        "question": instance.question,
        "answers": list(instance.gold_answers),
        "entity_id": instance.entity_id,
        "pageviews": instance.pageviews,
        "relation": instance.relation,
    }


__all__ = ["QAInstance", "instance_to_record"]
