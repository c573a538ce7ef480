from __future__ import annotations

import copy
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError

DEFAULT_EDGES = {10: [2.0, 3.0, 4.0, 5.0], 2: [6.0, 8.0, 10.0, 12.0]}

RetrieverName = Literal["bm25", "dense", "bm25_dense_rerank", "ideal"]


class RunVariant(str, Enum):
    NO_RAG = "NO_RAG"
    RAG = "RAG"
    SRAG_S = "SRAG_S"
    SRAG_D = "SRAG_D"

    @property
    def is_hinted(self) -> bool:
        return self in (RunVariant.SRAG_S, RunVariant.SRAG_D)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", protected_namespaces=())


class EndpointConfig(_Section):
    """Connection settings for one model endpoint; the credential stays in the environment."""

    base_url: str = "http://localhost:8000/v1"
    model_name: str = "default"
    api_key_env: Optional[str] = "OPENAI_API_KEY"
    timeout: float = Field(default=30.0, gt=0)
    max_retries: int = Field(default=3, ge=0)
    max_concurrency: int = Field(default=4, ge=1)
    temperature: float = Field(default=0.0, ge=0)
    backoff_base: float = Field(default=0.5, ge=0)
    max_tokens: Optional[int] = Field(default=None, ge=1)
    chat_path: str = "/chat/completions"
    embeddings_path: str = "/embeddings"


class RetrieverConfig(_Section):
    name: RetrieverName = "bm25"
    k1: float = Field(default=1.2, ge=0)
    b: float = Field(default=0.75, ge=0, le=1)
    rerank_depth: int = Field(default=100, ge=1)
    ideal_fallback: Literal["bm25", "dense", "bm25_dense_rerank"] = "bm25"


class HintConfig(_Section):
    k: Optional[int] = Field(default=None, ge=1)
    ranker: Literal["bm25", "dense"] = "bm25"


class GeneratorConfig(_Section):
    kind: Literal["http", "mock"] = "mock"
    mock: Literal["echo", "extractive", "first_sentence", "scripted"] = "echo"
    mock_response: str = ""
    endpoint: EndpointConfig = Field(default_factory=EndpointConfig)


class EmbedderConfig(_Section):
    kind: Literal["http", "file", "mock"] = "mock"
    endpoint: EndpointConfig = Field(default_factory=EndpointConfig)
    vectors_path: Optional[Path] = None
    query_vectors_path: Optional[Path] = None
    dim: int = Field(default=64, ge=1)

    @model_validator(mode="after")
    def _file_needs_vectors(self) -> "EmbedderConfig":
        if self.kind == "file" and self.vectors_path is None:
            raise ValueError("embedder kind 'file' needs vectors_path")
        return self


class AugmentConfig(_Section):
    prompt_template: Optional[str] = None
    consistency_filter: bool = True
    max_pairs_per_doc: Optional[int] = Field(default=None, ge=1)
    emit_flattened: bool = True


class EvalConfig(_Section):
    log_base: Literal[10, 2] = 10
    bucket_edges: Optional[List[float]] = None
    recall_ks: List[int] = Field(default_factory=lambda: [1, 3, 5])
    alpha: float = Field(default=0.01, gt=0, lt=1)
    significance_pairs: List[Tuple[str, str]] = Field(default_factory=list)

    @field_validator("bucket_edges")
    @classmethod
    def _four_ascending(cls, value: Optional[List[float]]) -> Optional[List[float]]:
        if value is None:
            return value
        if len(value) != 4 or any(a >= b for a, b in zip(value, value[1:])):
            raise ValueError("bucket_edges must be four strictly ascending numbers")
        return value

    @field_validator("recall_ks")
    @classmethod
    def _positive_ks(cls, value: List[int]) -> List[int]:
        if any(k < 1 for k in value):
            raise ValueError("recall_ks must be positive")
        return sorted(set(value))

    @property
    def edges(self) -> List[float]:
        return list(self.bucket_edges) if self.bucket_edges is not None else list(DEFAULT_EDGES[self.log_base])


class RunConfig(_Section):
    run_name: str = "run"
    corpus_path: Path
    dataset_path: Path
    output_dir: Path = Path("runs/default")
    retriever: RetrieverConfig = Field(default_factory=RetrieverConfig)
    top_k_context: int = Field(default=1, ge=0)
    variant: RunVariant = RunVariant.RAG
    include_titles: bool = False
    hints: Optional[HintConfig] = None
    generator: GeneratorConfig = Field(default_factory=GeneratorConfig)
    embedder: Optional[EmbedderConfig] = None
    augment: AugmentConfig = Field(default_factory=AugmentConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)
    prompt_token_warning: int = Field(default=2048, ge=0)

    @model_validator(mode="after")
    def _cross_field_invariants(self) -> "RunConfig":
        if self.variant.is_hinted and self.hints is None:
            raise ValueError(f"variant {self.variant.value} needs a 'hints' section")
        if self.needs_embedder and self.embedder is None:
            raise ValueError("dense retrieval or dense hint ranking needs an 'embedder' section")
        if self.hints is not None and self.hints.ranker == "dense" and self.embedder is not None:
            if self.embedder.kind == "file":
                raise ValueError("dense hint ranking embeds sentences on the fly; a vectors file cannot")
        return self

    @property
    def needs_embedder(self) -> bool:
        dense_names = {"dense", "bm25_dense_rerank"}
        if self.retriever.name in dense_names:
            return True
        if self.retriever.name == "ideal" and self.retriever.ideal_fallback in dense_names:
            return True
        return bool(self.variant.is_hinted and self.hints is not None and self.hints.ranker == "dense")

    @property
    def hint_k(self) -> int:
        if self.hints is not None and self.hints.k is not None:
            return self.hints.k
        return max(self.top_k_context, 1)

    @property
    def retrieval_depth(self) -> int:
        depth = max(self.top_k_context, max(self.eval.recall_ks, default=1))
        if self.variant.is_hinted:
            depth = max(depth, self.hint_k)
        return depth

    @property
    def paths(self) -> "RunPaths":
        return RunPaths.from_output_dir(self.output_dir)

    def snapshot(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


@dataclass(frozen=True)
class RunPaths:
    sparse_index: Path
    dense_vectors: Path
    retrieval: Path
    results: Path
    synthetic_qa: Path
    synthetic_qa_flat: Path
    report_json: Path
    report_txt: Path
    comparison: Path
    figures: Path

    @classmethod
    def from_output_dir(cls, output_dir: Path) -> "RunPaths":
        root = Path(output_dir)
        return cls(
            sparse_index=root / "index" / "sparse_index.json",
            dense_vectors=root / "index" / "dense_vectors.jsonl",
            retrieval=root / "retrieval.jsonl",
            results=root / "results.jsonl",
            synthetic_qa=root / "synthetic_qa.jsonl",
            synthetic_qa_flat=root / "synthetic_qa_flat.jsonl",
            report_json=root / "report.json",
            report_txt=root / "report.txt",
            comparison=root / "comparison.txt",
            figures=root / "figures",
        )


def _apply_override(tree: Dict[str, Any], dotted_key: str, value: Any) -> None:
    node = tree
    *parents, leaf = dotted_key.split(".")
    for part in parents:
        child = node.get(part)
        if not isinstance(child, dict):
            child = {}
            node[part] = child
        node = child
    node[leaf] = value


def _resolve_relative(tree: Dict[str, Any], base: Path) -> None:
    for key in ("corpus_path", "dataset_path", "output_dir"):
        if key in tree and tree[key] is not None and not Path(tree[key]).is_absolute():
            tree[key] = str(base / tree[key])
    embedder = tree.get("embedder")
    if isinstance(embedder, dict):
        for key in ("vectors_path", "query_vectors_path"):
            if embedder.get(key) and not Path(embedder[key]).is_absolute():
                embedder[key] = str(base / embedder[key])


def build_run_config(tree: Mapping[str, Any], overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    merged: Dict[str, Any] = copy.deepcopy(dict(tree))
    for dotted_key, value in (overrides or {}).items():
        if value is not None:
            _apply_override(merged, dotted_key, value)
    try:
        return RunConfig.model_validate(merged)
    except ValidationError as exc:
        raise ConfigError(f"invalid run configuration: {exc}") from exc


def load_run_config(path: Path, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """Read a YAML run configuration; relative paths resolve against the file's directory."""

    path = Path(path)
    if not path.exists():
        raise ConfigError(f"configuration file not found: {path}")
    tree = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    if not isinstance(tree, dict):
        raise ConfigError(f"configuration root must be a mapping, got {type(tree).__name__}")
    _resolve_relative(tree, path.resolve().parent)
    overrides = dict(overrides or {})
    if overrides.get("output_dir") is not None:
        overrides["output_dir"] = str(Path(overrides["output_dir"]).resolve())
    return build_run_config(tree, overrides)


__all__ = [
    "AugmentConfig",
    "DEFAULT_EDGES",
    "EmbedderConfig",
    "EndpointConfig",
    "EvalConfig",
    "GeneratorConfig",
    "HintConfig",
    "RetrieverConfig",
    "RunConfig",
    "RunPaths",
    "RunVariant",
    "build_run_config",
    "load_run_config",
]
