"""Per-instance orchestration: indexes, retrieval, hints, prompts, generation and scoring."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .config import RunConfig, RunVariant
from .corpus import Corpus, Document, get_summary_doc
from .data import load_vectors
from .dataset import QAInstance
from .errors import (
    ConfigError,
    CredentialError,
    EndpointError,
    MissingArtifactError,
    NoQAPairsError,
)
from .evaluation.metrics import assign_bucket, is_correct
from .evaluation.report import InstanceResult
from .generation.client import GenerationClient
from .generation.qa import DEFAULT_QA_PROMPT, QAPair, generate_qa_pairs
from .hints import Bm25SentenceRanker, DenseSentenceRanker, HintMode, SentenceRanker, extract_hint
from .prompting import PromptSpec, PromptVariant, build_prompt, warn_if_oversized
from .retrieval.backends import QueryEncoder, build_retriever
from .retrieval.dense import DenseIndex
from .retrieval.sparse import BM25Params, SparseIndex, build_sparse_index
from .retrieval.utils import RankedList, Retriever

logger = logging.getLogger(__name__)

EMBED_BATCH_SIZE = 64


@dataclass(frozen=True)
class Indexes:
    sparse: SparseIndex
    dense: Optional[DenseIndex] = None


def bm25_params(config: RunConfig) -> BM25Params:
    return BM25Params(k1=config.retriever.k1, b=config.retriever.b)


def embed_corpus(corpus: Corpus, client: GenerationClient, batch_size: int = EMBED_BATCH_SIZE) -> DenseIndex:
    vectors: List[Tuple[str, List[float]]] = []
    docs = list(corpus.documents)
    for start in range(0, len(docs), batch_size):
        batch = docs[start : start + batch_size]
        embedded = client.embed_texts([doc.text for doc in batch])
        vectors.extend(zip((doc.doc_id for doc in batch), embedded))
    return DenseIndex.from_vectors(vectors)


def needs_dense_store(config: RunConfig) -> bool:
    dense_names = ("dense", "bm25_dense_rerank")
    if config.retriever.name == "ideal":
        return config.retriever.ideal_fallback in dense_names
    return config.retriever.name in dense_names


def build_indexes(config: RunConfig, corpus: Corpus, embedder: Optional[GenerationClient] = None) -> Indexes:
    """Sparse index always; a dense store only when the run needs one."""

    sparse = build_sparse_index(corpus)
    dense: Optional[DenseIndex] = None
    if needs_dense_store(config):
        if config.embedder is None:
            raise ConfigError("dense retrieval needs an 'embedder' section")
        if config.embedder.kind == "file":
            assert config.embedder.vectors_path is not None
            dense = load_vectors(config.embedder.vectors_path)
            known = set(dense.doc_ids)
            missing = [doc.doc_id for doc in corpus.documents if doc.doc_id not in known]
            if missing:
                raise ConfigError(f"vectors file lacks {len(missing)} corpus documents, e.g. {missing[:3]}")
        else:
            if embedder is None:
                raise ConfigError("an embedding client is required to embed the corpus")
            dense = embed_corpus(corpus, embedder)
    logger.info(
        "Built sparse index (%d docs, %d terms)%s",
        sparse.doc_count,
        len(sparse.postings),
        f" and dense store ({len(dense.doc_ids)} x {dense.dim})" if dense is not None else "",
    )
    return Indexes(sparse=sparse, dense=dense)


def build_query_encoder(config: RunConfig, embedder: Optional[GenerationClient]) -> Optional[QueryEncoder]:
    if config.embedder is None:
        return None
    if config.embedder.kind == "file":
        if config.embedder.query_vectors_path is None:
            return None
        queries = load_vectors(config.embedder.query_vectors_path)

        def encode_from_file(instance: QAInstance) -> Sequence[float]:
            return queries.matrix[queries.position(instance.qa_id)]

        return encode_from_file

    if embedder is None:
        return None

    def encode(instance: QAInstance) -> Sequence[float]:
        return embedder.embed_texts([instance.question])[0]

    return encode


def build_run_retriever(
    config: RunConfig, corpus: Corpus, indexes: Indexes, encode: Optional[QueryEncoder]
) -> Retriever:
    return build_retriever(
        config.retriever.name,
        corpus=corpus,
        sparse=indexes.sparse,
        dense=indexes.dense,
        encode=encode,
        params=bm25_params(config),
        rerank_depth=config.retriever.rerank_depth,
        ideal_fallback=config.retriever.ideal_fallback,
    )


def build_sentence_ranker(
    config: RunConfig, indexes: Indexes, embedder: Optional[GenerationClient] = None
) -> SentenceRanker:
    if config.hints is not None and config.hints.ranker == "dense":
        if embedder is None:
            raise ConfigError("dense hint ranking needs an embedding client")
        return DenseSentenceRanker(embed=embedder.embed_texts)
    return Bm25SentenceRanker(collection=indexes.sparse, params=bm25_params(config))


def run_retrieval(
    instances: Sequence[QAInstance], retriever: Retriever, depth: int
) -> Dict[str, RankedList]:
    return {instance.qa_id: retriever.retrieve(instance, depth) for instance in instances}


def _gold_doc_id(corpus: Corpus, instance: QAInstance) -> Optional[str]:
    try:
        return get_summary_doc(corpus, instance.entity_id).doc_id
    except LookupError:
        return None


def _prompt_spec(
    config: RunConfig,
    instance: QAInstance,
    ranked: Optional[RankedList],
    corpus: Corpus,
    ranker: Optional[SentenceRanker],
) -> Tuple[PromptSpec, Optional[Dict[str, object]]]:
    variant = RunVariant(config.variant)
    if variant is RunVariant.NO_RAG:
        return PromptSpec(PromptVariant.NO_RAG, instance.question), None
    if ranked is None:
        raise MissingArtifactError(f"no retrieval result for {instance.qa_id}")

    ranked_docs: List[Document] = [corpus.get(doc_id) for doc_id in ranked.doc_ids]
    context = tuple(ranked_docs[: config.top_k_context])
    if variant is RunVariant.RAG:
        return PromptSpec(PromptVariant.RAG, instance.question, context, include_titles=config.include_titles), None

    assert ranker is not None
    mode = HintMode.SENTENCE if variant is RunVariant.SRAG_S else HintMode.DOCUMENT
    hint = extract_hint(instance.question, ranked_docs[: config.hint_k], ranker, mode)
    spec = PromptSpec(PromptVariant.SRAG, instance.question, context, hint=hint, include_titles=config.include_titles)
    return spec, hint.summary()


def answer_instance(
    config: RunConfig,
    instance: QAInstance,
    *,
    corpus: Corpus,
    client: GenerationClient,
    ranked: Optional[RankedList] = None,
    ranker: Optional[SentenceRanker] = None,
) -> InstanceResult:
    """Build the prompt for ``instance``, generate and score it.

    Failures while ranking hints, building the prompt or calling the endpoint
    become an incorrect row carrying the error text. A missing credential or a
    missing retrieval artifact propagates.
    """

    bucket = assign_bucket(instance.pageviews, config.eval.log_base, config.eval.edges)
    retrieved = ranked.doc_ids if ranked is not None else []
    base = {
        "qa_id": instance.qa_id,
        "bucket": bucket,
        "retrieved_doc_ids": retrieved,
        "gold_doc_id": _gold_doc_id(corpus, instance),
    }

    try:
        spec, hint_summary = _prompt_spec(config, instance, ranked, corpus, ranker)
        prompt = build_prompt(spec)
    except (CredentialError, MissingArtifactError):
        raise
    except (EndpointError, LookupError, ValueError) as exc:
        logger.error("Prompt construction failed for %s: %s", instance.qa_id, exc)
        return InstanceResult(prediction="", correct=False, error=f"{type(exc).__name__}: {exc}", **base)
    warn_if_oversized(prompt, config.prompt_token_warning, qa_id=instance.qa_id)

    try:
        result = client.generate_answer(prompt)
    except CredentialError:
        raise
    except EndpointError as exc:
        logger.error("Generation failed for %s: %s", instance.qa_id, exc)
        return InstanceResult(
            prediction="",
            correct=False,
            hint_used=hint_summary,
            error=f"{type(exc).__name__}: {exc}",
            attempts=getattr(exc, "attempts", 0) or 0,
            **base,
        )

    logger.debug("%s answered in %.3fs after %d attempt(s)", instance.qa_id, result.latency, result.attempts)
    return InstanceResult(
        prediction=result.output_text,
        correct=is_correct(result.output_text, instance.gold_answers),
        hint_used=hint_summary,
        attempts=result.attempts,
        **base,
    )


def run_generation(
    config: RunConfig,
    instances: Sequence[QAInstance],
    *,
    corpus: Corpus,
    client: GenerationClient,
    retrieval: Optional[Mapping[str, RankedList]] = None,
    ranker: Optional[SentenceRanker] = None,
) -> List[InstanceResult]:
    """Answer every instance concurrently (bounded by the client) and return rows sorted by ``qa_id``."""

    retrieval = retrieval or {}
    workers = max(1, client.config.max_concurrency)

    def work(instance: QAInstance) -> InstanceResult:
        return answer_instance(
            config, instance, corpus=corpus, client=client, ranked=retrieval.get(instance.qa_id), ranker=ranker
        )

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(work, instances))
    failures = sum(1 for row in results if row.error is not None)
    if failures:
        logger.warning("%d of %d instances failed generation", failures, len(results))
    return sorted(results, key=lambda row: row.qa_id)


def run_augmentation(
    config: RunConfig, corpus: Corpus, client: GenerationClient
) -> Tuple[List[QAPair], Dict[str, str]]:
    """QA pairs from every summary document, in corpus order; per-document failures are collected."""

    template = config.augment.prompt_template or DEFAULT_QA_PROMPT
    summaries = [doc for doc in corpus.documents if doc.is_summary]
    workers = max(1, client.config.max_concurrency)

    def work(doc: Document) -> Tuple[List[QAPair], Optional[str]]:
        try:
            pairs = generate_qa_pairs(
                client,
                doc,
                template,
                consistency_filter=config.augment.consistency_filter,
                max_pairs=config.augment.max_pairs_per_doc,
            )
        except CredentialError:
            raise
        except (EndpointError, NoQAPairsError) as exc:
            logger.warning("QA generation failed for %s: %s", doc.doc_id, exc)
            return [], f"{type(exc).__name__}: {exc}"
        return pairs, None

    with ThreadPoolExecutor(max_workers=workers) as pool:
        outcomes = list(pool.map(work, summaries))

    pairs: List[QAPair] = []
    failures: Dict[str, str] = {}
    for doc, (doc_pairs, error) in zip(summaries, outcomes):
        pairs.extend(doc_pairs)
        if error is not None:
            failures[doc.doc_id] = error
    logger.info("Generated %d QA pairs from %d summary documents (%d failed)", len(pairs), len(summaries), len(failures))
    return pairs, failures


__all__ = [
    "Indexes",
    "answer_instance",
    "bm25_params",
    "build_indexes",
    "build_query_encoder",
    "build_run_retriever",
    "build_sentence_ranker",
    "embed_corpus",
    "needs_dense_store",
    "run_augmentation",
    "run_generation",
    "run_retrieval",
]
