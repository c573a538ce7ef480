from __future__ import annotations

import sys
from pathlib import Path
from typing import Any, Callable, Dict

import pytest
import yaml

sys.path.append(str(Path(__file__).resolve().parents[1] / "src"))

from ragops import data
from ragops.config import load_run_config
from ragops.corpus import Corpus, Document
from ragops.data_generation import generate_all_datasets

GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


@pytest.fixture
def toy_corpus() -> Corpus:
    return Corpus.from_documents(
        [
            Document("d1", "Apple", "Apple pie is a classic dessert. Apples grow on trees.", "E1", True),
            Document("d2", "Banana", "Banana bread uses ripe bananas. Bread is baked.", "E2", True),
            Document("d3", "Cherry", "Cherry trees blossom in spring. The cherry is red.", "E3", True),
            Document("d4", "Orchard", "An orchard has apple trees and cherry trees.", "E1"),
            Document("d5", "Bakery", "The bakery sells bread, pie and cake.", "E2"),
        ]
    )


@pytest.fixture(scope="session")
def benchmark_dir(tmp_path_factory) -> Path:
    directory = tmp_path_factory.mktemp("benchmark")
    generate_all_datasets(directory, entities=50, distractors=1, answer_position="last", vectors_dim=32)
    return directory


@pytest.fixture(scope="session")
def distractor_heavy_dir(tmp_path_factory) -> Path:
    directory = tmp_path_factory.mktemp("distractor_heavy")
    generate_all_datasets(directory, entities=20, distractors=4, answer_position="last")
    return directory


@pytest.fixture
def write_config(tmp_path) -> Callable[..., Path]:
    """Write a YAML run configuration and return its path."""

    def _write(tree: Dict[str, Any], name: str = "run.yaml") -> Path:
        path = tmp_path / name
        path.write_text(yaml.safe_dump(tree, sort_keys=True), encoding="utf-8")
        return path

    return _write


@pytest.fixture
def run_config(write_config, benchmark_dir, tmp_path):
    def _make(output: str = "out", **fields: Any):
        tree: Dict[str, Any] = {
            "run_name": output,
            "corpus_path": str(benchmark_dir / "corpus.jsonl"),
            "dataset_path": str(benchmark_dir / "dataset.jsonl"),
            "output_dir": str(tmp_path / output),
            "generator": {"kind": "mock", "mock": "extractive"},
        }
        tree.update(fields)
        return load_run_config(write_config(tree, f"{output}.yaml"))

    return _make


@pytest.fixture(autouse=True)
def _clear_cache():
    yield
    data.clear_caches()
