"""``ragops`` command line: index, retrieve, generate, augment, evaluate and report."""
from __future__ import annotations

import argparse
import logging
from contextlib import ExitStack
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .config import RunConfig, RunVariant, load_run_config
from .corpus import Corpus
from .data import (
    get_corpus,
    get_dataset,
    iter_jsonl,
    load_vectors,
    read_json,
    vectors_to_records,
    write_json,
    write_jsonl,
)
from .errors import (
    ConfigError,
    CorpusFormatError,
    CredentialError,
    DatasetMismatchError,
    FlattenError,
    MissingArtifactError,
)
from .evaluation.charts import write_figures
from .evaluation.report import (
    EvalReport,
    InstanceResult,
    SignificanceResult,
    build_report,
    compare_runs,
    render_comparison_table,
    render_text_report,
)
from .generation import build_embedding_client, build_generation_client
from .generation.client import GenerationClient
from .generation.qa import QAPair, flatten_qa_pairs
from .logging_utils import configure_logging
from .manifest import read_manifest, utc_now, write_manifest
from .pipeline import (
    Indexes,
    build_indexes,
    build_query_encoder,
    build_run_retriever,
    build_sentence_ranker,
    needs_dense_store,
    run_augmentation,
    run_generation,
    run_retrieval,
)
from .retrieval.sparse import SparseIndex
from .retrieval.utils import RankedList

logger = logging.getLogger(__name__)


def _inputs(config: RunConfig) -> Dict[str, Optional[Path]]:
    inputs: Dict[str, Optional[Path]] = {"corpus": config.corpus_path, "dataset": config.dataset_path}
    if config.embedder is not None:
        inputs["vectors"] = config.embedder.vectors_path
        inputs["query_vectors"] = config.embedder.query_vectors_path
    return inputs


def _manifest(config: RunConfig, artifact: Path, command: str, started_at: str, **extra: Optional[Path]) -> None:
    inputs = _inputs(config)
    inputs.update(extra)
    write_manifest(artifact, command=command, config=config.snapshot(), inputs=inputs, started_at=started_at)


def _embedder(config: RunConfig, stack: ExitStack) -> Optional[GenerationClient]:
    """Embedding client for the run, closed when ``stack`` unwinds."""

    if config.embedder is None or config.embedder.kind == "file":
        return None
    return stack.enter_context(build_embedding_client(config.embedder))


def _load_indexes(config: RunConfig) -> Indexes:
    paths = config.paths
    if not paths.sparse_index.exists():
        raise MissingArtifactError(f"sparse index not found at {paths.sparse_index}; run 'ragops index' first")
    sparse = SparseIndex.from_record(read_json(paths.sparse_index))
    dense = load_vectors(paths.dense_vectors) if paths.dense_vectors.exists() else None
    return Indexes(sparse=sparse, dense=dense)


def _load_retrieval(path: Path) -> Dict[str, RankedList]:
    if not path.exists():
        raise MissingArtifactError(f"retrieval run not found at {path}; run 'ragops retrieve' first")
    return {ranked.query_id: ranked for ranked in (RankedList.from_record(obj) for _, obj in iter_jsonl(path))}


def _load_results(path: Path) -> List[InstanceResult]:
    if not path.exists():
        raise MissingArtifactError(f"results file not found at {path}")
    return [InstanceResult.model_validate(obj) for _, obj in iter_jsonl(path)]


def cmd_index(config: RunConfig) -> Indexes:
    started = utc_now()
    corpus = get_corpus(config.corpus_path)
    with ExitStack() as stack:
        indexes = build_indexes(config, corpus, _embedder(config, stack))
    paths = config.paths
    write_json(paths.sparse_index, indexes.sparse.to_record())
    _manifest(config, paths.sparse_index, "index", started)
    if indexes.dense is not None:
        write_jsonl(paths.dense_vectors, vectors_to_records(indexes.dense))
        _manifest(config, paths.dense_vectors, "index", started)
    return indexes


def cmd_retrieve(config: RunConfig) -> Dict[str, RankedList]:
    started = utc_now()
    corpus = get_corpus(config.corpus_path)
    instances = get_dataset(config.dataset_path)
    indexes = _load_indexes(config)
    if needs_dense_store(config) and indexes.dense is None:
        raise MissingArtifactError(f"dense vectors not found at {config.paths.dense_vectors}")
    with ExitStack() as stack:
        encode = build_query_encoder(config, _embedder(config, stack))
        retriever = build_run_retriever(config, corpus, indexes, encode)
        retrieval = run_retrieval(instances, retriever, config.retrieval_depth)
    path = config.paths.retrieval
    write_jsonl(path, (retrieval[qa_id].to_record() for qa_id in sorted(retrieval)))
    _manifest(config, path, "retrieve", started, sparse_index=config.paths.sparse_index)
    logger.info("Wrote %d ranked lists (%s, depth %d) to %s", len(retrieval), retriever.name, config.retrieval_depth, path)
    return retrieval


def cmd_generate(config: RunConfig, client: Optional[GenerationClient] = None) -> List[InstanceResult]:
    started = utc_now()
    corpus: Corpus = get_corpus(config.corpus_path)
    instances = get_dataset(config.dataset_path)
    paths = config.paths

    retrieval: Dict[str, RankedList] = {}
    if config.variant is not RunVariant.NO_RAG or paths.retrieval.exists():
        retrieval = _load_retrieval(paths.retrieval)

    with ExitStack() as stack:
        ranker = None
        if config.variant.is_hinted:
            ranker = build_sentence_ranker(config, _load_indexes(config), _embedder(config, stack))
        if client is None:
            client = stack.enter_context(build_generation_client(config.generator))
        results = run_generation(config, instances, corpus=corpus, client=client, retrieval=retrieval, ranker=ranker)
    write_jsonl(paths.results, (row.model_dump(mode="json") for row in results))
    _manifest(config, paths.results, "generate", started, retrieval=paths.retrieval if retrieval else None)
    correct = sum(1 for row in results if row.correct)
    logger.info("Wrote %d results to %s (%d correct)", len(results), paths.results, correct)
    return results


def _flattened_rows(pairs: Sequence[QAPair]) -> List[Dict[str, str]]:
    by_doc: Dict[str, List[QAPair]] = {}
    for pair in pairs:
        by_doc.setdefault(pair.source_doc_id, []).append(pair)
    rows = []
    for doc_id, doc_pairs in by_doc.items():
        try:
            rows.append({"source_doc_id": doc_id, "flattened": flatten_qa_pairs(doc_pairs)})
        except FlattenError as exc:
            logger.warning("Skipping flattened export for %s: %s", doc_id, exc)
    return rows


def cmd_augment(config: RunConfig, client: Optional[GenerationClient] = None) -> int:
    started = utc_now()
    corpus = get_corpus(config.corpus_path)
    with ExitStack() as stack:
        if client is None:
            client = stack.enter_context(build_generation_client(config.generator))
        pairs, failures = run_augmentation(config, corpus, client)
    paths = config.paths
    write_jsonl(paths.synthetic_qa, (pair.to_record() for pair in pairs))
    _manifest(config, paths.synthetic_qa, "augment", started)

    if config.augment.emit_flattened:
        write_jsonl(paths.synthetic_qa_flat, _flattened_rows(pairs))
        _manifest(config, paths.synthetic_qa_flat, "augment", started)
    if failures:
        logger.warning("QA generation failed for %d documents: %s", len(failures), ", ".join(sorted(failures)))
    return len(pairs)


def _parse_named(values: Sequence[str]) -> List[Tuple[str, Path]]:
    named = []
    for value in values:
        name, sep, path = value.partition("=")
        if not sep or not name or not path:
            raise ConfigError(f"--results expects NAME=PATH, got {value!r}")
        named.append((name, Path(path)))
    return named


def _check_same_dataset(runs: Sequence[Tuple[str, Path]]) -> None:
    hashes = {}
    for name, path in runs:
        manifest = read_manifest(path)
        if manifest is not None and "dataset" in manifest.input_hashes:
            hashes[name] = manifest.input_hashes["dataset"]
    if len(set(hashes.values())) > 1:
        raise DatasetMismatchError(f"runs were produced from different datasets: {hashes}")


def cmd_evaluate(config: RunConfig, results: Sequence[str] = ()) -> List[EvalReport]:
    started = utc_now()
    runs = _parse_named(results) if results else [(config.run_name, config.paths.results)]
    names = [name for name, _ in runs]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate run names: {names}")
    loaded = {name: _load_results(path) for name, path in runs}

    pairs = [tuple(pair) for pair in config.eval.significance_pairs]
    if not pairs:
        pairs = [(names[0], name) for name in names[1:]]
    for baseline, candidate in pairs:
        if baseline not in loaded or candidate not in loaded:
            raise ConfigError(f"significance pair ({baseline}, {candidate}) names an unknown run")
    if pairs:
        _check_same_dataset(runs)

    significance: Dict[str, List[SignificanceResult]] = {name: [] for name in names}
    for baseline, candidate in pairs:
        significance[candidate].extend(
            compare_runs(baseline, loaded[baseline], candidate, loaded[candidate], alpha=config.eval.alpha)
        )

    reports = []
    for name in names:
        report = build_report(loaded[name], run_name=name, ks=config.eval.recall_ks)
        reports.append(report.model_copy(update={"significance": significance[name]}))

    paths = config.paths
    write_json(paths.report_json, {"alpha": config.eval.alpha, "reports": [r.model_dump(mode="json") for r in reports]})
    text = "\n".join(render_text_report(report) for report in reports)
    if len(reports) > 1:
        rows = [row for report in reports for row in report.significance]
        text += "\n" + render_comparison_table(reports, rows)
    paths.report_txt.parent.mkdir(parents=True, exist_ok=True)
    paths.report_txt.write_text(text, encoding="utf-8")
    run_inputs = {f"results:{name}": path for name, path in runs}
    _manifest(config, paths.report_json, "evaluate", started, **run_inputs)
    _manifest(config, paths.report_txt, "evaluate", started, **run_inputs)
    return reports


def cmd_report(config: RunConfig) -> str:
    started = utc_now()
    paths = config.paths
    if not paths.report_json.exists():
        raise MissingArtifactError(f"report not found at {paths.report_json}; run 'ragops evaluate' first")
    payload = read_json(paths.report_json)
    reports = [EvalReport.model_validate(item) for item in payload["reports"]]
    rows = [row for report in reports for row in report.significance]
    table = render_comparison_table(reports, rows)
    paths.comparison.parent.mkdir(parents=True, exist_ok=True)
    paths.comparison.write_text(table, encoding="utf-8")
    _manifest(config, paths.comparison, "report", started, report=paths.report_json)
    for figure in write_figures(reports, paths.figures):
        _manifest(config, figure, "report", started, report=paths.report_json)
    return table


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ragops", description="Retrieval-augmented QA experiments on long-tail entities.")
    parser.add_argument("--log-level", default="INFO", help="Logging level (default: INFO)")
    commands = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("index", "Build the sparse index and, when needed, the dense vector store"),
        ("retrieve", "Rank documents for every dataset question"),
        ("generate", "Answer every question under the configured variant"),
        ("augment", "Generate synthetic QA pairs from summary documents"),
        ("evaluate", "Score results files and run significance tests"),
        ("report", "Render the comparison table and figures from an evaluation"),
    ):
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("--config", type=Path, required=True, help="YAML run configuration")
        sub.add_argument("--retriever", choices=("bm25", "dense", "bm25_dense_rerank", "ideal"))
        sub.add_argument("--variant", choices=("NO_RAG", "RAG", "SRAG_S", "SRAG_D"))
        sub.add_argument("--top-k", type=int, dest="top_k")
        sub.add_argument("--output-dir", type=Path, dest="output_dir")
        if name == "evaluate":
            sub.add_argument(
                "--results", action="append", default=[], metavar="NAME=PATH",
                help="Results file to evaluate (repeatable); defaults to this run's results",
            )
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        "retriever.name": args.retriever,
        "variant": args.variant,
        "top_k_context": args.top_k,
        "output_dir": args.output_dir,
    }


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        config = load_run_config(args.config, _overrides(args))
        if args.command == "index":
            indexes = cmd_index(config)
            print(f"Indexed {indexes.sparse.doc_count} documents into {config.output_dir}")
        elif args.command == "retrieve":
            retrieval = cmd_retrieve(config)
            print(f"Retrieved for {len(retrieval)} questions -> {config.paths.retrieval}")
        elif args.command == "generate":
            results = cmd_generate(config)
            correct = sum(1 for row in results if row.correct)
            print(f"Answered {len(results)} questions ({correct} correct) -> {config.paths.results}")
        elif args.command == "augment":
            count = cmd_augment(config)
            print(f"Generated {count} QA pairs -> {config.paths.synthetic_qa}")
        elif args.command == "evaluate":
            for report in cmd_evaluate(config, args.results):
                print(f"{report.run_name}: accuracy {report.overall_accuracy:.4f} over {report.instance_count} questions")
        elif args.command == "report":
            print(cmd_report(config), end="")
    except (ConfigError, CorpusFormatError, CredentialError, DatasetMismatchError, MissingArtifactError) as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return 2
    return 0


__all__ = [
    "build_parser",
    "cmd_augment",
    "cmd_evaluate",
    "cmd_generate",
    "cmd_index",
    "cmd_report",
    "cmd_retrieve",
    "main",
]
