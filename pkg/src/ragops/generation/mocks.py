"""Deterministic, thread-safe offline backends used by tests and mock runs."""
from __future__ import annotations

import hashlib
import re
import threading
import time
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Type

import numpy as np

from ..config import EndpointConfig
from ..corpus import split_sentences
from ..errors import EndpointError, TransientEndpointError
from ..retrieval.utils import tokenize

UNKNOWN_ANSWER = "I don't know."

_QUESTION = re.compile(r"^What is (?P<subject>.+?)'s (?P<relation>.+?)\?$")


def split_prompt(prompt: str) -> "tuple[str, str]":
    """Return ``(context, question)`` for a prompt rendered by ``build_prompt``."""

    head, marker, question = prompt.rpartition("Question: ")
    if not marker:
        return "", prompt.strip()
    context = head.strip()
    if context.startswith("Context:"):
        context = context[len("Context:"):].strip()
    return context, question.strip()


def extract_fact(question: str, context: str) -> Optional[str]:
    """Find ``"{subject}'s {relation} is {object}."`` in ``context`` for a template question."""

    match = _QUESTION.match(question.strip())
    if match is None:
        return None
    pattern = re.compile(
        re.escape(f"{match['subject']}'s {match['relation']} is ") + r"(?P<object>[^.\n]+)\."
    )
    found = pattern.search(context)
    return found["object"].strip() if found else None


class EchoBackend:
    def complete(self, prompt: str, config: EndpointConfig) -> str:
        return prompt


class ExtractiveBackend:
    """Answers template questions by pattern-matching the fact anywhere in the context."""

    def complete(self, prompt: str, config: EndpointConfig) -> str:
        context, question = split_prompt(prompt)
        return extract_fact(question, context) or UNKNOWN_ANSWER


class FirstSentenceBackend:
    """Like ``ExtractiveBackend`` but only reads the first sentence of the context."""

    def complete(self, prompt: str, config: EndpointConfig) -> str:
        context, question = split_prompt(prompt)
        first_line = context.split("\n", 1)[0]
        sentences = split_sentences(first_line)
        first = sentences[0].text if sentences else ""
        return extract_fact(question, first) or UNKNOWN_ANSWER


@dataclass
class ScriptedBackend:
    """Fixed replies; ``by_substring`` picks a reply when its key occurs in the prompt."""

    response: str = ""
    by_substring: Mapping[str, str] = field(default_factory=dict)

    def complete(self, prompt: str, config: EndpointConfig) -> str:
        for needle in sorted(self.by_substring):
            if needle in prompt:
                return self.by_substring[needle]
        return self.response


class FlakyBackend:
    """Raises ``error`` for the first ``failures`` calls, then delegates."""

    def __init__(
        self,
        inner: object,
        failures: int,
        error: Type[EndpointError] = TransientEndpointError,
    ) -> None:
        self.inner = inner
        self.failures = failures
        self.error = error
        self.calls = 0
        self._lock = threading.Lock()

    def _tick(self) -> None:
        with self._lock:
            self.calls += 1
            failing = self.calls <= self.failures
        if failing:
            raise self.error(f"injected failure {self.calls}/{self.failures}")

    def complete(self, prompt: str, config: EndpointConfig) -> str:
        self._tick()
        return self.inner.complete(prompt, config)  # type: ignore[attr-defined]

    def embed(self, texts: Sequence[str], config: EndpointConfig) -> List[List[float]]:
        self._tick()
        return self.inner.embed(texts, config)  # type: ignore[attr-defined]


class InstrumentedBackend:
    """Records the peak number of concurrent calls."""

    def __init__(self, inner: object, hold: float = 0.01) -> None:
        self.inner = inner
        self.hold = hold
        self.in_flight = 0
        self.max_in_flight = 0
        self.calls = 0
        self._lock = threading.Lock()

    def complete(self, prompt: str, config: EndpointConfig) -> str:
        with self._lock:
            self.in_flight += 1
            self.calls += 1
            self.max_in_flight = max(self.max_in_flight, self.in_flight)
        try:
            time.sleep(self.hold)
            return self.inner.complete(prompt, config)  # type: ignore[attr-defined]
        finally:
            with self._lock:
                self.in_flight -= 1


@dataclass(frozen=True)
class HashingEmbedder:
    """Feature-hashed bag of tokens, L2-normalised; zero vector for token-free text."""

    dim: int = 64

    def embed_one(self, text: str) -> List[float]:
        vector = np.zeros(self.dim, dtype=np.float64)
        for token in tokenize(text):
            digest = hashlib.sha256(token.encode("utf-8")).digest()
            slot = int.from_bytes(digest[:8], "big") % self.dim
            vector[slot] += 1.0 if digest[8] % 2 == 0 else -1.0
        norm = float(np.linalg.norm(vector))
        if norm > 0:
            vector /= norm
        return vector.tolist()

    def embed(self, texts: Sequence[str], config: Optional[EndpointConfig] = None) -> List[List[float]]:
        return [self.embed_one(text) for text in texts]


MOCK_GENERATORS: Dict[str, type] = {
    "echo": EchoBackend,
    "extractive": ExtractiveBackend,
    "first_sentence": FirstSentenceBackend,
}


def mock_generator(name: str, response: str = "") -> object:
    if name == "scripted":
        return ScriptedBackend(response=response)
    try:
        return MOCK_GENERATORS[name]()
    except KeyError as exc:
        raise ValueError(f"unknown mock generator {name!r}") from exc


__all__ = [
    "EchoBackend",
    "ExtractiveBackend",
    "FirstSentenceBackend",
    "FlakyBackend",
    "HashingEmbedder",
    "InstrumentedBackend",
    "MOCK_GENERATORS",
    "ScriptedBackend",
    "UNKNOWN_ANSWER",
    "extract_fact",
    "mock_generator",
    "split_prompt",
]
