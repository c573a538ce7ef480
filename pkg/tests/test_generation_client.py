from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor

import httpx
import pytest

from ragops.config import EndpointConfig
from ragops.corpus import Document
from ragops.errors import (
    CredentialError,
    DimensionMismatchError,
    EmptyCompletionError,
    ProtocolEndpointError,
    RetriesExhaustedError,
)
from ragops.generation import GenerationClient, HttpBackend, embed_texts, generate_answer
from ragops.generation import client as client_module
from ragops.generation.mocks import (
    EchoBackend,
    FlakyBackend,
    HashingEmbedder,
    InstrumentedBackend,
    ScriptedBackend,
)
from ragops.generation.qa import generate_qa_pairs


def _config(**overrides):
    fields = {"base_url": "http://llm.test/v1", "model_name": "tiny", "api_key_env": "RAGOPS_TEST_KEY", "backoff_base": 0.0}
    fields.update(overrides)
    return EndpointConfig(**fields)


def _no_sleep(_):
    return None


def test_http_backend_sends_chat_request(monkeypatch):
    monkeypatch.setenv("RAGOPS_TEST_KEY", "secret")
    seen = {}

    def handler(request: httpx.Request) -> httpx.Response:
        seen["url"] = str(request.url)
        seen["auth"] = request.headers["Authorization"]
        seen["body"] = json.loads(request.content)
        return httpx.Response(200, json={"choices": [{"message": {"content": "Paris"}}]})

    backend = HttpBackend(transport=httpx.MockTransport(handler))
    result = generate_answer(_config(max_tokens=16), "Question: capital?", backend)

    assert result.output_text == "Paris"
    assert result.attempts == 1
    assert seen["url"] == "http://llm.test/v1/chat/completions"
    assert seen["auth"] == "Bearer secret"
    assert seen["body"] == {
        "model": "tiny",
        "messages": [{"role": "user", "content": "Question: capital?"}],
        "temperature": 0.0,
        "max_tokens": 16,
    }


def test_http_backend_embeddings_sorted_by_index(monkeypatch):
    monkeypatch.setenv("RAGOPS_TEST_KEY", "secret")

    def handler(request: httpx.Request) -> httpx.Response:
        return httpx.Response(
            200, json={"data": [{"index": 1, "embedding": [0.0, 1.0]}, {"index": 0, "embedding": [1.0, 0.0]}]}
        )

    backend = HttpBackend(transport=httpx.MockTransport(handler))
    assert embed_texts(_config(), ["a", "b"], backend) == [[1.0, 0.0], [0.0, 1.0]]


def test_missing_credential(monkeypatch):
    monkeypatch.delenv("RAGOPS_TEST_KEY", raising=False)
    backend = HttpBackend(transport=httpx.MockTransport(lambda request: httpx.Response(200, json={})))
    with pytest.raises(CredentialError):
        generate_answer(_config(), "Question: x?", backend)


def test_rate_limit_is_retried(monkeypatch):
    monkeypatch.setenv("RAGOPS_TEST_KEY", "secret")
    statuses = iter([429, 503, 200])

    def handler(request: httpx.Request) -> httpx.Response:
        status = next(statuses)
        if status != 200:
            return httpx.Response(status)
        return httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}]})

    client = GenerationClient(_config(), HttpBackend(transport=httpx.MockTransport(handler)), sleep=_no_sleep)
    assert client.generate_answer("Question: x?").attempts == 3


@pytest.mark.parametrize(
    "response",
    [
        httpx.Response(400, text="bad request"),
        httpx.Response(200, text="not json"),
        httpx.Response(200, json=["list"]),
        httpx.Response(200, json={"choices": []}),
    ],
)
def test_protocol_errors_are_not_retried(monkeypatch, response):
    monkeypatch.setenv("RAGOPS_TEST_KEY", "secret")
    calls = []

    def handler(request: httpx.Request) -> httpx.Response:
        calls.append(request)
        return response

    client = GenerationClient(_config(), HttpBackend(transport=httpx.MockTransport(handler)), sleep=_no_sleep)
    with pytest.raises(ProtocolEndpointError):
        client.generate_answer("Question: x?")
    assert len(calls) == 1


def test_flaky_backend_recovers_on_third_attempt():
    delays = []
    backend = FlakyBackend(ScriptedBackend(response="fine"), failures=2)
    client = GenerationClient(_config(max_retries=3, backoff_base=0.5), backend, sleep=delays.append)
    result = client.generate_answer("Question: x?")
    assert result.attempts == 3
    assert result.output_text == "fine"
    assert delays == [0.5, 1.0]


def test_retries_exhausted():
    backend = FlakyBackend(EchoBackend(), failures=100)
    client = GenerationClient(_config(max_retries=2), backend, sleep=_no_sleep)
    with pytest.raises(RetriesExhaustedError) as excinfo:
        client.generate_answer("Question: x?")
    assert excinfo.value.attempts == 3
    assert backend.calls == 3


def test_concurrency_never_exceeds_limit():
    backend = InstrumentedBackend(EchoBackend(), hold=0.02)
    client = GenerationClient(_config(max_concurrency=3), backend)
    with ThreadPoolExecutor(max_workers=12) as pool:
        list(pool.map(client.generate_answer, [f"Question: {i}?" for i in range(24)]))
    assert backend.calls == 24
    assert 1 <= backend.max_in_flight <= 3


def test_empty_completion_and_prompt():
    client = GenerationClient(_config(), ScriptedBackend(response="   "))
    with pytest.raises(EmptyCompletionError):
        client.generate_answer("Question: x?")
    with pytest.raises(ValueError):
        client.generate_answer("")


def test_embedding_batches_match_single_calls():
    client = GenerationClient(_config(), HashingEmbedder(dim=16))
    texts = ["alpha beta", "gamma", "alpha beta"]
    batch = client.embed_texts(texts)
    assert batch == [client.embed_texts([text])[0] for text in texts]
    assert batch[0] == batch[2]
    assert all(len(vector) == 16 for vector in batch)


def test_embedding_shape_checks():
    class Ragged:
        def embed(self, texts, config):
            return [[1.0, 0.0], [1.0]][: len(texts)]

    class Short:
        def embed(self, texts, config):
            return [[1.0]]

    with pytest.raises(DimensionMismatchError):
        GenerationClient(_config(), Ragged()).embed_texts(["a", "b"])
    with pytest.raises(ProtocolEndpointError):
        GenerationClient(_config(), Short()).embed_texts(["a", "b"])


def _chat_handler(request: httpx.Request) -> httpx.Response:
    return httpx.Response(200, json={"choices": [{"message": {"content": "Q: Which colour?\nA: Green"}}]})


def test_client_context_closes_http_pool(monkeypatch):
    monkeypatch.setenv("RAGOPS_TEST_KEY", "secret")
    http_client = httpx.Client(transport=httpx.MockTransport(_chat_handler))
    with GenerationClient(_config(), HttpBackend(http_client)) as client:
        assert client.generate_answer("Question: colour?").attempts == 1
        assert not http_client.is_closed
    assert http_client.is_closed


def test_close_ignores_backends_without_pool():
    client = GenerationClient(_config(), EchoBackend())
    client.close()
    assert client.generate_answer("still usable").output_text == "still usable"


def test_module_functions_leave_caller_backend_open(monkeypatch):
    monkeypatch.setenv("RAGOPS_TEST_KEY", "secret")
    http_client = httpx.Client(transport=httpx.MockTransport(_chat_handler))
    generate_answer(_config(), "Question: colour?", HttpBackend(http_client))
    assert not http_client.is_closed
    http_client.close()


class RecordingBackend:
    created = []

    def __init__(self):
        self.closed = False
        RecordingBackend.created.append(self)

    def complete(self, prompt, config):
        return "Q: Which colour?\nA: Green"

    def close(self):
        self.closed = True


def test_clients_built_from_config_are_closed(monkeypatch):
    monkeypatch.setattr(client_module, "HttpBackend", RecordingBackend)
    monkeypatch.setattr(RecordingBackend, "created", [])

    assert generate_answer(_config(), "Question: colour?").output_text.endswith("Green")
    pairs = generate_qa_pairs(_config(), Document("d1", "T", "The colour is Green."))

    assert [pair.answer for pair in pairs] == ["Green"]
    assert len(RecordingBackend.created) == 2
    assert all(backend.closed for backend in RecordingBackend.created)
