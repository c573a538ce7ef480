"""Chat-completions and embedding client with bounded retries and a concurrency gate."""
from __future__ import annotations

import logging
import os
import threading
import time
from contextlib import nullcontext
from dataclasses import dataclass
from typing import Callable, ContextManager, Dict, List, Optional, Protocol, Sequence, Tuple, TypeVar

import httpx

from ..config import EndpointConfig
from ..errors import (
    CredentialError,
    DimensionMismatchError,
    EmptyCompletionError,
    ProtocolEndpointError,
    RetriesExhaustedError,
    TransientEndpointError,
)

logger = logging.getLogger(__name__)

TRANSIENT_STATUS = frozenset({408, 409, 425, 429, 500, 502, 503, 504})

T = TypeVar("T")


class ChatBackend(Protocol):
    def complete(self, prompt: str, config: EndpointConfig) -> str:
        ...


class EmbeddingBackend(Protocol):
    def embed(self, texts: Sequence[str], config: EndpointConfig) -> List[List[float]]:
        ...


@dataclass(frozen=True)
class GenerationResult:
    prompt: str
    output_text: str
    latency: float
    attempts: int


class HttpBackend:
    """Plain JSON over HTTP against a chat-completions compatible server."""

    def __init__(self, client: Optional[httpx.Client] = None, *, transport: Optional[httpx.BaseTransport] = None) -> None:
        self._client = client or httpx.Client(transport=transport)

    def close(self) -> None:
        self._client.close()

    @staticmethod
    def _headers(config: EndpointConfig) -> Dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if config.api_key_env:
            api_key = os.environ.get(config.api_key_env, "").strip()
            if not api_key:
                raise CredentialError(f"Missing required env: {config.api_key_env}")
            headers["Authorization"] = f"Bearer {api_key}"
        return headers

    def _post(self, config: EndpointConfig, path: str, payload: Dict[str, object]) -> Dict[str, object]:
        url = config.base_url.rstrip("/") + path
        try:
            response = self._client.post(url, json=payload, headers=self._headers(config), timeout=config.timeout)
        except httpx.TimeoutException as exc:
            raise TransientEndpointError(f"timeout calling {url}: {exc!r}") from exc
        except httpx.TransportError as exc:
            raise TransientEndpointError(f"transport failure calling {url}: {exc!r}") from exc

        if response.status_code in TRANSIENT_STATUS:
            raise TransientEndpointError(f"{url} answered {response.status_code}")
        if response.status_code >= 400:
            raise ProtocolEndpointError(f"{url} answered {response.status_code}: {response.text[:200]}")
        try:
            body = response.json()
        except ValueError as exc:
            raise ProtocolEndpointError(f"{url} returned a non-JSON body") from exc
        if not isinstance(body, dict):
            raise ProtocolEndpointError(f"{url} returned {type(body).__name__}, expected an object")
        return body

    def complete(self, prompt: str, config: EndpointConfig) -> str:
        payload: Dict[str, object] = {
            "model": config.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": config.temperature,
        }
        if config.max_tokens is not None:
            payload["max_tokens"] = config.max_tokens
        body = self._post(config, config.chat_path, payload)
        try:
            content = body["choices"][0]["message"]["content"]  # type: ignore[index]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProtocolEndpointError("response has no choices[0].message.content") from exc
        return content or ""

    def embed(self, texts: Sequence[str], config: EndpointConfig) -> List[List[float]]:
        body = self._post(config, config.embeddings_path, {"model": config.model_name, "input": list(texts)})
        try:
            data = sorted(body["data"], key=lambda item: item.get("index", 0))  # type: ignore[union-attr,arg-type]
            return [[float(x) for x in item["embedding"]] for item in data]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolEndpointError("response has no data[].embedding vectors") from exc


class GenerationClient:
    """Shareable client: at most ``max_concurrency`` calls in flight, ``max_retries + 1`` attempts each."""

    def __init__(
        self,
        config: EndpointConfig,
        backend: Optional[object] = None,
        *,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.config = config
        self.backend = backend if backend is not None else HttpBackend()
        self._gate = threading.BoundedSemaphore(config.max_concurrency)
        self._sleep = sleep

    def close(self) -> None:
        """Release the backend's connection pool, if it holds one."""

        close = getattr(self.backend, "close", None)
        if callable(close):
            close()

    def __enter__(self) -> "GenerationClient":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()

    def _call_with_retry(self, call: Callable[[], T], what: str) -> Tuple[T, int]:
        max_attempts = self.config.max_retries + 1
        last_error: Optional[Exception] = None
        for attempt in range(1, max_attempts + 1):
            try:
                with self._gate:
                    return call(), attempt
            except TransientEndpointError as exc:
                last_error = exc
                if attempt == max_attempts:
                    break
                delay = self.config.backoff_base * (2 ** (attempt - 1))
                logger.warning(
                    "%s attempt %d/%d failed (%s); retrying in %.2fs", what, attempt, max_attempts, exc, delay
                )
                self._sleep(delay)
        raise RetriesExhaustedError(
            f"{what} failed after {max_attempts} attempts: {last_error}", attempts=max_attempts
        ) from last_error

    def generate_answer(self, prompt: str) -> GenerationResult:
        if not prompt:
            raise ValueError("prompt must be non-empty")
        started = time.perf_counter()
        output, attempts = self._call_with_retry(
            lambda: self.backend.complete(prompt, self.config), "chat completion"  # type: ignore[attr-defined]
        )
        if not output.strip():
            raise EmptyCompletionError(f"empty completion from {self.config.model_name} after {attempts} attempt(s)")
        return GenerationResult(
            prompt=prompt, output_text=output, latency=time.perf_counter() - started, attempts=attempts
        )

    def embed_texts(self, texts: Sequence[str]) -> List[List[float]]:
        if not texts:
            raise ValueError("texts must be non-empty")
        vectors, _ = self._call_with_retry(
            lambda: self.backend.embed(list(texts), self.config), "embedding"  # type: ignore[attr-defined]
        )
        if len(vectors) != len(texts):
            raise ProtocolEndpointError(f"expected {len(texts)} vectors, got {len(vectors)}")
        dims = {len(vector) for vector in vectors}
        if len(dims) != 1 or 0 in dims:
            raise DimensionMismatchError(f"embedding batch has inconsistent dimensions {sorted(dims)}")
        return [list(vector) for vector in vectors]


def _one_shot(config: EndpointConfig, backend: Optional[object]) -> ContextManager[GenerationClient]:
    """A client closed on exit when it built its own backend; a caller's backend stays open."""

    client = GenerationClient(config, backend)
    return client if backend is None else nullcontext(client)


def generate_answer(config: EndpointConfig, prompt: str, backend: Optional[ChatBackend] = None) -> GenerationResult:
    with _one_shot(config, backend) as client:
        return client.generate_answer(prompt)


def embed_texts(
    config: EndpointConfig, texts: Sequence[str], backend: Optional[EmbeddingBackend] = None
) -> List[List[float]]:
    with _one_shot(config, backend) as client:
        return client.embed_texts(texts)


__all__ = [
    "ChatBackend",
    "EmbeddingBackend",
    "GenerationClient",
    "GenerationResult",
    "HttpBackend",
    "TRANSIENT_STATUS",
    "embed_texts",
    "generate_answer",
]
