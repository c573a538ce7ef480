"""Prompt-based synthetic QA pairs and their single-string flattened form."""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Union

from ..config import EndpointConfig
from ..corpus import Document, normalize_whitespace
from ..errors import FlattenError, FlattenedParseError, NoQAPairsError
from .client import GenerationClient

logger = logging.getLogger(__name__)

DEFAULT_QA_PROMPT = (
    "You are building a question answering dataset from the document below.\n"
    "Step 1: list every entity mentioned in the document.\n"
    "Step 2: for each entity, list the facts the document states about it.\n"
    "Step 3: turn each fact into a question whose answer is a short span copied from the document.\n"
    "Generate as many question-answer pairs as possible. After your reasoning, write the final pairs as\n"
    "alternating lines of the form:\n"
    "Q: <question>\n"
    "A: <answer>\n\n"
    "Document:\n{document}\n"
)

PAIR_SEPARATOR = " | "
QUESTION_PREFIX = "question: "
ANSWER_MARKER = ", answer: "

_Q_LINE = re.compile(r"^\s*Q\d*\s*:\s*(?P<text>.*\S)\s*$", re.IGNORECASE)
_A_LINE = re.compile(r"^\s*A\d*\s*:\s*(?P<text>.*\S)\s*$", re.IGNORECASE)


@dataclass(frozen=True)
class QAPair:
    question: str
    answer: str
    source_doc_id: str = ""

    def __post_init__(self) -> None:
        if not self.question.strip() or not self.answer.strip():
            raise ValueError("QAPair needs a non-empty question and answer")

    def to_record(self) -> Dict[str, str]:
        return {"question": self.question, "answer": self.answer, "source_doc_id": self.source_doc_id}


def parse_qa_lines(output: str, source_doc_id: str = "") -> List[QAPair]:
    """Collect ``Q:``/``A:`` line pairs; a question without a following answer is dropped."""

    pairs: List[QAPair] = []
    pending: Optional[str] = None
    for line in output.splitlines():
        q_match = _Q_LINE.match(line)
        if q_match:
            pending = q_match["text"]
            continue
        a_match = _A_LINE.match(line)
        if a_match and pending is not None:
            pairs.append(QAPair(question=pending, answer=a_match["text"], source_doc_id=source_doc_id))
            pending = None
    return pairs


def answer_in_document(answer: str, doc: Document) -> bool:
    return normalize_whitespace(answer).casefold() in normalize_whitespace(doc.text).casefold()


def generate_qa_pairs(
    client: Union[GenerationClient, EndpointConfig],
    doc: Document,
    prompt_template: str = DEFAULT_QA_PROMPT,
    *,
    consistency_filter: bool = True,
    max_pairs: Optional[int] = None,
) -> List[QAPair]:
    if not doc.text.strip():
        raise ValueError(f"document {doc.doc_id!r} is empty")
    if isinstance(client, EndpointConfig):
        with GenerationClient(client) as owned:
            return generate_qa_pairs(
                owned, doc, prompt_template, consistency_filter=consistency_filter, max_pairs=max_pairs
            )

    prompt = prompt_template.replace("{document}", doc.text)
    result = client.generate_answer(prompt)
    pairs = parse_qa_lines(result.output_text, source_doc_id=doc.doc_id)
    if not pairs:
        raise NoQAPairsError(f"no parseable QA pairs for {doc.doc_id}", doc_id=doc.doc_id)

    if consistency_filter:
        kept = [pair for pair in pairs if answer_in_document(pair.answer, doc)]
        if len(kept) < len(pairs):
            logger.debug("Consistency filter dropped %d of %d pairs for %s", len(pairs) - len(kept), len(pairs), doc.doc_id)
        pairs = kept
    if max_pairs is not None:
        pairs = pairs[:max_pairs]
    return pairs


def textualize(pair: QAPair) -> str:
    return f"{QUESTION_PREFIX}{pair.question}{ANSWER_MARKER}{pair.answer}"


def flatten_qa_pairs(pairs: Sequence[QAPair]) -> str:
    """``question: {q1}, answer: {a1} | question: {q2}, answer: {a2} | ...``"""

    if not pairs:
        raise FlattenError("nothing to flatten")
    for pair in pairs:
        if "|" in pair.question or "|" in pair.answer:
            raise FlattenError(f"'|' inside a field of {pair!r}")
        if ANSWER_MARKER in pair.question:
            raise FlattenError(f"question contains the answer marker {ANSWER_MARKER!r}: {pair.question!r}")
    return PAIR_SEPARATOR.join(textualize(pair) for pair in pairs)


def parse_flattened(text: str, source_doc_id: str = "") -> List[QAPair]:
    if not text:
        raise FlattenedParseError("empty flattened text", position=0)

    pairs: List[QAPair] = []
    position = 0
    for segment in text.split(PAIR_SEPARATOR):
        if not segment.startswith(QUESTION_PREFIX):
            raise FlattenedParseError(f"expected {QUESTION_PREFIX!r}", position=position)
        body = segment[len(QUESTION_PREFIX):]
        question, marker, answer = body.partition(ANSWER_MARKER)
        if not marker:
            raise FlattenedParseError("missing answer", position=position + len(segment))
        if "|" in answer:
            offset = len(QUESTION_PREFIX) + len(question) + len(marker) + answer.index("|")
            raise FlattenedParseError("stray '|' in answer", position=position + offset)
        if not question.strip() or not answer.strip():
            raise FlattenedParseError("empty question or answer", position=position)
        pairs.append(QAPair(question=question, answer=answer, source_doc_id=source_doc_id))
        position += len(segment) + len(PAIR_SEPARATOR)
    return pairs


__all__ = [
    "ANSWER_MARKER",
    "DEFAULT_QA_PROMPT",
    "PAIR_SEPARATOR",
    "QAPair",
    "answer_in_document",
    "flatten_qa_pairs",
    "generate_qa_pairs",
    "parse_flattened",
    "parse_qa_lines",
    "textualize",
]
