"""Seeded synthetic long-tail entity benchmark: corpus, questions and optional vectors."""
from __future__ import annotations

import argparse
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .corpus import Document, document_to_record
from .data import write_jsonl
from .dataset import QAInstance, instance_to_record
from .generation.mocks import HashingEmbedder

logger = logging.getLogger(__name__)

RNG_SEED = 42

FACT_TEMPLATE = "{subject}'s {relation} is {answer}."
QUESTION_TEMPLATE = "What is {subject}'s {relation}?"

SYLLABLES = (
    "ka", "lo", "mi", "zan", "ter", "vo", "rin", "sha", "pel", "dor", "qui", "bex",
    "nal", "tor", "yus", "gri", "fen", "ol", "hu", "mar", "sel", "wek", "ja", "pru",
)

RELATIONS: Dict[str, Tuple[str, ...]] = {
    "occupation": ("painter", "architect", "botanist", "sculptor", "cartographer", "violinist", "chemist", "jurist"),
    "place of birth": ("Brindlemoor", "Castavel", "Ostrawick", "Pellandry", "Quorvane", "Tessmere", "Ulvarby"),
    "genre": ("baroque pop", "dream folk", "space rock", "chamber jazz", "synth noir", "desert blues"),
    "country": ("Arvenia", "Belloria", "Corsavia", "Drumaland", "Estrovia", "Feldonia"),
    "sport": ("fencing", "rowing", "curling", "handball", "orienteering", "water polo"),
    "religion": ("Solarism", "Veltic faith", "Marrowism", "Ondine creed", "Halcyonism"),
}

OPENERS = (
    "{subject} appears in a regional archive.",
    "{subject} is recorded in several local chronicles.",
    "{subject} is the subject of a short encyclopedia entry.",
)

FILLERS = (
    "Records about this figure were compiled over many decades.",
    "Historians have published a handful of essays on the topic.",
    "The archive also holds letters and photographs.",
    "Few contemporary accounts survive today.",
    "Later editions corrected several minor details.",
)

DISTRACTOR_TOPICS = (
    "river restoration", "railway history", "urban gardening", "lighthouse keeping", "glass blowing",
    "beekeeping", "tidal energy", "bookbinding", "weather stations", "mountain huts",
)


@dataclass(frozen=True)
class SyntheticBenchmark:
    documents: Tuple[Document, ...]
    instances: Tuple[QAInstance, ...]


def _unique_words(rng: np.random.Generator, count: int, syllables: int) -> List[str]:
    words: List[str] = []
    seen = set()
    while len(words) < count:
        word = "".join(rng.choice(SYLLABLES, size=syllables)).capitalize()
        if word not in seen:
            seen.add(word)
            words.append(word)
    return words


def _summary_text(rng: np.random.Generator, subject: str, fact: str, answer_position: str) -> str:
    opener = OPENERS[int(rng.integers(len(OPENERS)))].format(subject=subject)
    fillers = [FILLERS[i] for i in rng.choice(len(FILLERS), size=2, replace=False)]
    sentences = [opener, *fillers]
    if answer_position == "first":
        sentences.insert(0, fact)
    else:
        sentences.append(fact)
    return " ".join(sentences)


def _distractor_text(subject: str, topic: str) -> str:
    return (
        f"{subject} was mentioned in a newsletter about {topic}. "
        f"The newsletter covered {topic} in detail. "
        "Several readers wrote letters in response."
    )


def generate_benchmark(
    entities: int = 25,
    distractors: int = 3,
    answer_position: str = "last",
    seed: int = RNG_SEED,
) -> SyntheticBenchmark:
    """One summary stating the answer verbatim per entity, plus ``distractors`` docs naming the entity."""

    if entities < 1:
        raise ValueError("entities must be >= 1")
    if distractors < 0:
        raise ValueError("distractors must be >= 0")
    if answer_position not in ("first", "last"):
        raise ValueError("answer_position must be 'first' or 'last'")

    rng = np.random.default_rng(seed)
    first_names = _unique_words(rng, entities, 2)
    surnames = _unique_words(rng, entities, 3)
    relation_names = sorted(RELATIONS)

    documents: List[Document] = []
    instances: List[QAInstance] = []
    for i in range(entities):
        entity_id = f"Q{1000 + i}"
        subject = f"{first_names[i]} {surnames[i]}"
        relation = relation_names[int(rng.integers(len(relation_names)))]
        objects = RELATIONS[relation]
        answer = objects[int(rng.integers(len(objects)))]
        fact = FACT_TEMPLATE.format(subject=subject, relation=relation, answer=answer)

        documents.append(
            Document(
                doc_id=f"{entity_id}-summary",
                title=subject,
                text=_summary_text(rng, subject, fact, answer_position),
                entity_id=entity_id,
                is_summary=True,
            )
        )
        for j in range(distractors):
            topic = DISTRACTOR_TOPICS[(i + j) % len(DISTRACTOR_TOPICS)]
            documents.append(
                Document(
                    doc_id=f"{entity_id}-d{j}",
                    title=f"{subject} ({topic})",
                    text=_distractor_text(subject, topic),
                    entity_id=entity_id,
                )
            )

        pageviews = int(rng.lognormal(mean=8.0, sigma=2.5))
        instances.append(
            QAInstance(
                qa_id=f"qa-{i:05d}",
                question=QUESTION_TEMPLATE.format(subject=subject, relation=relation),
                gold_answers=(answer,),
                entity_id=entity_id,
                pageviews=pageviews,
                relation=relation,
            )
        )

    return SyntheticBenchmark(documents=tuple(documents), instances=tuple(instances))


def generate_all_datasets(
    output_dir: Path,
    *,
    entities: int = 25,
    distractors: int = 3,
    answer_position: str = "last",
    vectors_dim: Optional[int] = None,
    seed: int = RNG_SEED,
) -> Tuple[Path, ...]:
    output_dir = Path(output_dir).resolve()
    output_dir.mkdir(parents=True, exist_ok=True)

    benchmark = generate_benchmark(entities, distractors, answer_position, seed)
    paths = [
        write_jsonl(output_dir / "corpus.jsonl", (document_to_record(doc) for doc in benchmark.documents)),
        write_jsonl(output_dir / "dataset.jsonl", (instance_to_record(inst) for inst in benchmark.instances)),
    ]
    if vectors_dim:
        paths.extend(_write_vectors(output_dir, benchmark, vectors_dim))
    logger.info(
        "Generated %d documents and %d questions in %s", len(benchmark.documents), len(benchmark.instances), output_dir
    )
    return tuple(paths)


def _write_vectors(output_dir: Path, benchmark: SyntheticBenchmark, dim: int) -> Sequence[Path]:
    embedder = HashingEmbedder(dim=dim)
    doc_vectors = embedder.embed([doc.text for doc in benchmark.documents])
    query_vectors = embedder.embed([inst.question for inst in benchmark.instances])
    return (
        write_jsonl(
            output_dir / "vectors.jsonl",
            ({"id": doc.doc_id, "vector": vec} for doc, vec in zip(benchmark.documents, doc_vectors)),
        ),
        write_jsonl(
            output_dir / "query_vectors.jsonl",
            ({"id": inst.qa_id, "vector": vec} for inst, vec in zip(benchmark.instances, query_vectors)),
        ),
    )


def main(argv: Optional[Sequence[str]] = None) -> None:
    parser = argparse.ArgumentParser(description="Generate a synthetic long-tail entity QA benchmark.")
    parser.add_argument("--output", type=Path, default=Path.cwd(), help="Directory where JSON Lines files are written")
    parser.add_argument("--entities", type=int, default=25)
    parser.add_argument("--distractors", type=int, default=3, help="Distractor documents per entity")
    parser.add_argument("--answer-position", choices=("first", "last"), default="last")
    parser.add_argument("--vectors-dim", type=int, default=0, help="Also write hashed vectors of this dimension")
    parser.add_argument("--seed", type=int, default=RNG_SEED)
    args = parser.parse_args(argv)

    paths = generate_all_datasets(
        args.output,
        entities=args.entities,
        distractors=args.distractors,
        answer_position=args.answer_position,
        vectors_dim=args.vectors_dim or None,
        seed=args.seed,
    )
    print("Datasets generated:")
    for path in paths:
        print(f"  {path}")


if __name__ == "__main__":
    main()
