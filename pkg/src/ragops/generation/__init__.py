"""Model endpoints: answer generation, embeddings and synthetic QA pairs."""
from __future__ import annotations

from typing import Optional

from ..config import EmbedderConfig, GeneratorConfig
from .client import GenerationClient, GenerationResult, HttpBackend, embed_texts, generate_answer
from .mocks import HashingEmbedder, mock_generator
from .qa import QAPair, flatten_qa_pairs, generate_qa_pairs, parse_flattened


def build_generation_client(config: GeneratorConfig, backend: Optional[object] = None) -> GenerationClient:
    """Client for the configured generator; ``backend`` overrides the configured one."""

    if backend is None:
        backend = HttpBackend() if config.kind == "http" else mock_generator(config.mock, config.mock_response)
    return GenerationClient(config.endpoint, backend)


def build_embedding_client(config: EmbedderConfig, backend: Optional[object] = None) -> GenerationClient:
    if backend is None:
        backend = HttpBackend() if config.kind == "http" else HashingEmbedder(dim=config.dim)
    return GenerationClient(config.endpoint, backend)


__all__ = [
    "GenerationClient",
    "GenerationResult",
    "HashingEmbedder",
    "HttpBackend",
    "QAPair",
    "build_embedding_client",
    "build_generation_client",
    "embed_texts",
    "flatten_qa_pairs",
    "generate_answer",
    "generate_qa_pairs",
    "parse_flattened",
]
