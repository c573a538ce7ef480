"""Zero-shot prompt templates for the no-retrieval, RAG and hinted variants."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Tuple

from .corpus import Document
from .errors import PromptSpecError
from .hints import Hint

logger = logging.getLogger(__name__)

QUESTION_TEMPLATE = "Question: {question}"
CONTEXT_TEMPLATE = "Context: {context} Question: {question}"
DOCUMENT_SEPARATOR = "\n"
HINT_SEPARATOR = "\n"


class PromptVariant(str, Enum):
    NO_RAG = "NO_RAG"
    RAG = "RAG"
    SRAG = "SRAG"


@dataclass(frozen=True)
class PromptSpec:
    variant: PromptVariant
    question: str
    context_docs: Tuple[Document, ...] = field(default_factory=tuple)
    hint: Optional[Hint] = None
    include_titles: bool = False

    def validate(self) -> None:
        variant = PromptVariant(self.variant)
        if variant is PromptVariant.NO_RAG and (self.context_docs or self.hint is not None):
            raise PromptSpecError("NO_RAG prompts take neither context documents nor a hint")
        if variant is PromptVariant.RAG and self.hint is not None:
            raise PromptSpecError("RAG prompts do not carry a hint; use the SRAG variant")
        if variant is PromptVariant.SRAG and self.hint is None:
            raise PromptSpecError("SRAG prompts need a hint")
        if len({doc.doc_id for doc in self.context_docs}) != len(self.context_docs):
            raise PromptSpecError("context documents must be distinct")


def render_document(doc: Document, include_titles: bool = False) -> str:
    return f"{doc.title}: {doc.text}" if include_titles and doc.title else doc.text


def render_context(docs: Sequence[Document], include_titles: bool = False) -> str:
    return DOCUMENT_SEPARATOR.join(render_document(doc, include_titles) for doc in docs)


def build_prompt(spec: PromptSpec) -> str:
    """Render ``spec`` with the fixed templates.

    NO_RAG: ``Question: {q}``; RAG: ``Context: {d1}\\n{d2} Question: {q}``;
    SRAG: the RAG context with ``{hint}\\n`` inserted in front of the first document.
    """

    spec.validate()
    variant = PromptVariant(spec.variant)
    if variant is PromptVariant.NO_RAG:
        return QUESTION_TEMPLATE.format(question=spec.question)

    context = render_context(spec.context_docs, spec.include_titles)
    if variant is PromptVariant.SRAG:
        assert spec.hint is not None
        context = spec.hint.hint_text + HINT_SEPARATOR + context if context else spec.hint.hint_text
    return CONTEXT_TEMPLATE.format(context=context, question=spec.question)


def prompt_token_estimate(prompt: str) -> int:
    return len(prompt.split())


def warn_if_oversized(prompt: str, threshold: int, *, qa_id: str = "") -> int:
    """Log a warning above ``threshold`` whitespace tokens; the prompt is never truncated."""

    tokens = prompt_token_estimate(prompt)
    if threshold and tokens > threshold:
        logger.warning("Prompt for %s has ~%d tokens (threshold %d); sending as-is", qa_id or "<query>", tokens, threshold)
    return tokens


__all__ = [
    "CONTEXT_TEMPLATE",
    "DOCUMENT_SEPARATOR",
    "HINT_SEPARATOR",
    "PromptSpec",
    "PromptVariant",
    "QUESTION_TEMPLATE",
    "build_prompt",
    "prompt_token_estimate",
    "render_context",
    "render_document",
    "warn_if_oversized",
]
