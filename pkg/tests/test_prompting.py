from __future__ import annotations

import logging

import pytest

from conftest import GOLDEN_DIR
from ragops.corpus import Document, Sentence
from ragops.errors import PromptSpecError
from ragops.hints import Hint, HintMode
from ragops.prompting import PromptSpec, PromptVariant, build_prompt, prompt_token_estimate, warn_if_oversized

QUESTION = "What is Balano's color?"
DOCS = (
    Document("d1", "Balano", "Balano's color is Green."),
    Document("d2", "Weather", "The weather there is mild."),
)
HINT = Hint(HintMode.SENTENCE, Sentence("Balano's color is Green.", "d1", 0), "d1", "Balano's color is Green.")


def golden(name: str) -> str:
    return (GOLDEN_DIR / f"{name}.txt").read_text(encoding="utf-8").rstrip("\n")


@pytest.mark.parametrize(
    "name, spec",
    [
        ("no_rag", PromptSpec(PromptVariant.NO_RAG, QUESTION)),
        ("rag", PromptSpec(PromptVariant.RAG, QUESTION, DOCS)),
        ("srag", PromptSpec(PromptVariant.SRAG, QUESTION, DOCS, HINT)),
    ],
)
def test_prompts_match_golden_files(name, spec):
    assert build_prompt(spec) == golden(name)


def test_srag_is_rag_with_hint_prefix():
    rag = build_prompt(PromptSpec(PromptVariant.RAG, QUESTION, DOCS))
    srag = build_prompt(PromptSpec(PromptVariant.SRAG, QUESTION, DOCS, HINT))
    assert rag.startswith("Context: ")
    assert srag == "Context: " + HINT.hint_text + "\n" + rag[len("Context: "):]


def test_srag_without_context_documents():
    prompt = build_prompt(PromptSpec(PromptVariant.SRAG, QUESTION, (), HINT))
    assert prompt == f"Context: {HINT.hint_text} Question: {QUESTION}"


def test_titles_are_optional():
    prompt = build_prompt(PromptSpec(PromptVariant.RAG, QUESTION, DOCS[:1], include_titles=True))
    assert prompt.startswith("Context: Balano: Balano's color is Green.")


@pytest.mark.parametrize(
    "spec",
    [
        PromptSpec(PromptVariant.NO_RAG, QUESTION, DOCS),
        PromptSpec(PromptVariant.NO_RAG, QUESTION, hint=HINT),
        PromptSpec(PromptVariant.RAG, QUESTION, DOCS, HINT),
        PromptSpec(PromptVariant.SRAG, QUESTION, DOCS),
        PromptSpec(PromptVariant.RAG, QUESTION, (DOCS[0], DOCS[0])),
    ],
)
def test_invalid_specs(spec):
    with pytest.raises(PromptSpecError):
        build_prompt(spec)


def test_oversized_prompts_warn_but_pass_through(caplog):
    prompt = " ".join(["word"] * 50)
    with caplog.at_level(logging.WARNING, logger="ragops.prompting"):
        assert warn_if_oversized(prompt, 10, qa_id="qa-1") == 50
    assert "qa-1" in caplog.text
    assert prompt_token_estimate("a b  c") == 3
