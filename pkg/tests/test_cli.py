from __future__ import annotations

import json

import pytest

from ragops import data
from ragops.cli import cmd_augment, cmd_evaluate, cmd_generate, cmd_index, cmd_report, cmd_retrieve, main
from ragops.errors import DatasetMismatchError, ProtocolEndpointError
from ragops.generation.client import GenerationClient
from ragops.generation.mocks import ExtractiveBackend
from ragops.generation.qa import QAPair, parse_flattened
from ragops.manifest import manifest_path, read_manifest


def _run(config):
    cmd_index(config)
    cmd_retrieve(config)
    return cmd_generate(config)


def _accuracy(results):
    return sum(row.correct for row in results) / len(results)


def test_ideal_retrieval_answers_everything(run_config):
    config = run_config("ideal", retriever={"name": "ideal"}, top_k_context=1)
    results = _run(config)
    assert len(results) == 50
    assert _accuracy(results) == 1.0
    assert all(row.retrieved_doc_ids[0] == row.gold_doc_id for row in results)


def test_bm25_rag_top3(run_config):
    config = run_config("bm25", top_k_context=3)
    results = _run(config)
    assert _accuracy(results) >= 0.90
    assert [row.qa_id for row in results] == sorted(row.qa_id for row in results)


def test_hint_first_beats_plain_context_for_first_sentence_reader(run_config, distractor_heavy_dir):
    common = {
        "corpus_path": str(distractor_heavy_dir / "corpus.jsonl"),
        "dataset_path": str(distractor_heavy_dir / "dataset.jsonl"),
        "generator": {"kind": "mock", "mock": "first_sentence"},
        "top_k_context": 3,
    }
    rag = _run(run_config("heavy_rag", **common))
    srag = _run(run_config("heavy_srag", variant="SRAG_S", hints={"k": 3}, **common))
    assert _accuracy(srag) >= _accuracy(rag)
    assert _accuracy(srag) >= 0.9
    assert all(row.hint_used["mode"] == "S" for row in srag)


def test_document_hints_with_dense_ranker(run_config):
    config = run_config(
        "srag_d",
        variant="SRAG_D",
        top_k_context=2,
        hints={"k": 3, "ranker": "dense"},
        embedder={"kind": "mock", "dim": 32},
    )
    results = _run(config)
    assert all(row.hint_used["mode"] == "D" for row in results)
    assert all(row.error is None for row in results)


@pytest.mark.parametrize(
    "retriever, embedder",
    [
        ("dense", "file"),
        ("bm25_dense_rerank", "mock"),
    ],
)
def test_dense_retrievers(run_config, benchmark_dir, retriever, embedder):
    if embedder == "file":
        section = {
            "kind": "file",
            "vectors_path": str(benchmark_dir / "vectors.jsonl"),
            "query_vectors_path": str(benchmark_dir / "query_vectors.jsonl"),
        }
    else:
        section = {"kind": "mock", "dim": 32}
    config = run_config(retriever, retriever={"name": retriever}, embedder=section)
    cmd_index(config)
    assert config.paths.dense_vectors.exists()
    retrieval = cmd_retrieve(config)
    assert len(retrieval) == 50
    assert all(len(ranked) == config.retrieval_depth for ranked in retrieval.values())


def test_no_rag_echo_prompt(run_config):
    config = run_config("no_rag", variant="NO_RAG", generator={"kind": "mock", "mock": "echo"})
    results = cmd_generate(config)
    instances = {inst.qa_id: inst for inst in data.get_dataset(config.dataset_path)}
    assert all(row.prediction == f"Question: {instances[row.qa_id].question}" for row in results)
    assert all(row.retrieved_doc_ids == [] for row in results)


def test_reruns_are_byte_identical(run_config):
    first = run_config("repeat_a", run_name="repeat", top_k_context=3)
    second = run_config("repeat_b", run_name="repeat", top_k_context=3)
    for config in (first, second):
        _run(config)
        cmd_evaluate(config)
    for attr in ("retrieval", "results", "report_txt", "report_json"):
        assert getattr(first.paths, attr).read_bytes() == getattr(second.paths, attr).read_bytes()


def test_manifests_record_inputs(run_config):
    config = run_config("manifest")
    _run(config)
    manifest = read_manifest(config.paths.results)
    assert manifest is not None
    assert manifest.command == "generate"
    assert manifest.input_hashes["dataset"] == data.file_sha256(config.dataset_path)
    assert manifest.artifact_sha256 == data.file_sha256(config.paths.results)
    assert manifest_path(config.paths.results).exists()

    cmd_evaluate(config)
    cmd_report(config)
    paths = config.paths
    figures = sorted(paths.figures.glob("*.html"))
    assert figures
    for artifact in [paths.report_json, paths.report_txt, paths.comparison, *figures]:
        sidecar = read_manifest(artifact)
        assert sidecar is not None, artifact.name
        assert sidecar.artifact_sha256 == data.file_sha256(artifact)
    assert read_manifest(paths.report_txt).input_hashes["results:manifest"] == data.file_sha256(paths.results)
    assert read_manifest(paths.comparison).command == "report"


def test_augment_and_flattened_export(run_config):
    response = "Reasoning.\nQ: Who is described?\nA: an entity\nQ: Is it archived?\nA: yes\n"
    config = run_config(
        "augment",
        generator={"kind": "mock", "mock": "scripted", "mock_response": response},
        augment={"consistency_filter": False},
    )
    assert cmd_augment(config) == 100
    pairs = [json.loads(line) for line in config.paths.synthetic_qa.read_text(encoding="utf-8").splitlines()]
    assert {pair["source_doc_id"] for pair in pairs} == set(data.get_corpus(config.corpus_path).by_entity_summary.values())

    rows = [json.loads(line) for line in config.paths.synthetic_qa_flat.read_text(encoding="utf-8").splitlines()]
    assert len(rows) == 50
    for row in rows:
        parsed = parse_flattened(row["flattened"], row["source_doc_id"])
        assert parsed == [
            QAPair("Who is described?", "an entity", row["source_doc_id"]),
            QAPair("Is it archived?", "yes", row["source_doc_id"]),
        ]


def test_augment_filter_drops_off_document_answers(run_config):
    config = run_config(
        "augment_filtered",
        generator={"kind": "mock", "mock": "scripted", "mock_response": "Q: Colour?\nA: xyzzy\n"},
    )
    assert cmd_augment(config) == 0


class RejectsQuestions:
    """Extractive answers, except for prompts that end with one of ``questions``."""

    def __init__(self, questions):
        self.questions = tuple(questions)
        self.inner = ExtractiveBackend()

    def complete(self, prompt, config):
        if prompt.endswith(tuple(f"Question: {question}" for question in self.questions)):
            raise ProtocolEndpointError("400: request rejected")
        return self.inner.complete(prompt, config)


def test_failed_questions_become_error_rows(run_config):
    config = run_config("partial_failure", retriever={"name": "ideal"})
    rejected = [inst.question for inst in data.get_dataset(config.dataset_path)[:5]]
    client = GenerationClient(config.generator.endpoint, RejectsQuestions(rejected))
    cmd_index(config)
    cmd_retrieve(config)

    results = cmd_generate(config, client)

    assert len(results) == 50
    failed = [row for row in results if row.error is not None]
    assert len(failed) == 5
    assert all(not row.correct and row.error.startswith("ProtocolEndpointError") for row in failed)
    assert sum(row.correct for row in results) == 45

    report = cmd_evaluate(config)[0]
    assert report.instance_count == 50
    assert report.error_count == 5
    assert report.overall_accuracy == pytest.approx(0.9)


def test_evaluate_and_report_two_runs(run_config):
    bm25 = run_config("cmp_bm25", generator={"kind": "mock", "mock": "first_sentence"})
    ideal = run_config("cmp_ideal", retriever={"name": "ideal"})
    _run(bm25)
    _run(ideal)

    evaluation = run_config("cmp_eval")
    reports = cmd_evaluate(
        evaluation, [f"bm25={bm25.paths.results}", f"ideal={ideal.paths.results}"]
    )
    assert [report.run_name for report in reports] == ["bm25", "ideal"]
    assert reports[1].overall_accuracy == 1.0
    assert reports[1].recall_at[1] == 1.0
    assert sum(stats.count for stats in reports[0].per_bucket) == 50
    assert reports[1].significance[0].label == "ideal vs bm25"

    payload = json.loads(evaluation.paths.report_json.read_text(encoding="utf-8"))
    assert payload["alpha"] == 0.01
    assert "(b) ideal" in evaluation.paths.report_txt.read_text(encoding="utf-8")

    table = cmd_report(evaluation)
    assert table.splitlines()[3].startswith("(b) ideal")
    assert evaluation.paths.comparison.read_text(encoding="utf-8") == table
    assert evaluation.paths.comparison == evaluation.output_dir / "comparison.txt"
    assert len(list(evaluation.paths.figures.glob("*.html"))) == 3


def test_evaluate_rejects_mismatched_runs(run_config, tmp_path):
    config = run_config("mismatch")
    results = _run(config)
    trimmed = tmp_path / "trimmed.jsonl"
    data.write_jsonl(trimmed, (row.model_dump(mode="json") for row in results[:10]))
    with pytest.raises(DatasetMismatchError):
        cmd_evaluate(config, [f"full={config.paths.results}", f"trimmed={trimmed}"])


def test_main_end_to_end(write_config, benchmark_dir, tmp_path, capsys):
    path = write_config(
        {
            "run_name": "cli",
            "corpus_path": str(benchmark_dir / "corpus.jsonl"),
            "dataset_path": str(benchmark_dir / "dataset.jsonl"),
            "output_dir": str(tmp_path / "cli"),
            "generator": {"kind": "mock", "mock": "extractive"},
        }
    )
    for command in ("index", "retrieve", "generate", "evaluate", "report"):
        assert main([command, "--config", str(path), "--retriever", "ideal"]) == 0
    out = capsys.readouterr().out
    assert "Answered 50 questions (50 correct)" in out
    assert "cli: accuracy 1.0000 over 50 questions" in out


def test_main_exit_codes(write_config, benchmark_dir, tmp_path):
    assert main(["index", "--config", str(tmp_path / "missing.yaml")]) == 2
    path = write_config(
        {
            "corpus_path": str(benchmark_dir / "corpus.jsonl"),
            "dataset_path": str(benchmark_dir / "dataset.jsonl"),
            "output_dir": str(tmp_path / "fresh"),
        }
    )
    assert main(["generate", "--config", str(path)]) == 2
    assert main(["report", "--config", str(path)]) == 2
    with pytest.raises(SystemExit):
        main(["index"])
