from __future__ import annotations

from ..corpus import Corpus, get_summary_doc
from ..dataset import QAInstance
from .utils import RankedList, Retriever


def ideal_retrieve(corpus: Corpus, instance: QAInstance, k: int, fallback: Retriever) -> RankedList:
    """Oracle ranking: the entity's summary document first, ranks 2..k from ``fallback``.

    The summary entry is scored one above the best fallback score so the list
    stays finite and sorted.
    """

    summary = get_summary_doc(corpus, instance.entity_id)
    if k <= 0:
        return RankedList(query_id=instance.qa_id, entries=(), k_requested=0)

    others = []
    if k > 1:
        candidates = fallback.retrieve(instance, k)
        others = [(doc_id, score) for doc_id, score in candidates.entries if doc_id != summary.doc_id][: k - 1]

    sentinel = max((score for _, score in others), default=0.0) + 1.0
    return RankedList.from_scores(instance.qa_id, [(summary.doc_id, sentinel), *others], k)


__all__ = ["ideal_retrieve"]
