"""Per-instance result rows, aggregated run reports and run-to-run comparisons."""
from __future__ import annotations

import logging
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from ..errors import DatasetMismatchError, DegenerateVarianceError
from ..retrieval.utils import RankedList
from .metrics import BUCKET_COUNT, accuracy
from .stats import paired_t_test, wilcoxon_signed_rank

logger = logging.getLogger(__name__)


class InstanceResult(BaseModel):
    """One line of a results file."""

    model_config = ConfigDict(extra="ignore")

    qa_id: str
    prediction: str
    correct: bool
    bucket: int = Field(ge=0, le=BUCKET_COUNT - 1)
    retrieved_doc_ids: List[str] = Field(default_factory=list)
    gold_doc_id: Optional[str] = None
    hint_used: Optional[Dict[str, object]] = None
    error: Optional[str] = None
    attempts: int = Field(default=0, ge=0)

    @property
    def has_retrieval(self) -> bool:
        return bool(self.retrieved_doc_ids) and self.gold_doc_id is not None

    def recall_at(self, k: int) -> int:
        return int(self.gold_doc_id is not None and self.gold_doc_id in self.retrieved_doc_ids[:k])


class BucketStats(BaseModel):
    bucket: int
    count: int
    accuracy: float
    recall_at: Dict[int, float] = Field(default_factory=dict)


class SignificanceResult(BaseModel):
    label: str
    baseline: str
    candidate: str
    test: str
    metric: str
    statistic: float
    p_value: float
    p_one_sided: Optional[float] = None
    n: int
    defined: bool = True
    significant: bool = False


class EvalReport(BaseModel):
    run_name: str
    instance_count: int
    overall_accuracy: float
    error_count: int = 0
    per_bucket: List[BucketStats]
    recall_at: Dict[int, float] = Field(default_factory=dict)
    significance: List[SignificanceResult] = Field(default_factory=list)

    def bucket_accuracies(self) -> List[float]:
        return [stats.accuracy for stats in self.per_bucket]


def _results_frame(results: Sequence[InstanceResult], ks: Sequence[int]) -> pd.DataFrame:
    ordered = sorted(results, key=lambda row: row.qa_id)
    frame = pd.DataFrame(
        {
            "qa_id": [row.qa_id for row in ordered],
            "bucket": [row.bucket for row in ordered],
            "correct": [int(row.correct) for row in ordered],
            "error": [int(row.error is not None) for row in ordered],
        }
    )
    for k in ks:
        frame[f"recall_{k}"] = [row.recall_at(k) for row in ordered]
    return frame


def _with_retrieval(
    results: Sequence[InstanceResult], retrieval: Optional[Mapping[str, RankedList]]
) -> List[InstanceResult]:
    if not retrieval:
        return list(results)
    merged = []
    for row in results:
        ranked = retrieval.get(row.qa_id)
        if ranked is not None:
            row = row.model_copy(update={"retrieved_doc_ids": ranked.doc_ids})
        merged.append(row)
    return merged


def build_report(
    results: Sequence[InstanceResult],
    *,
    run_name: str = "run",
    ks: Sequence[int] = (1, 3, 5),
    retrieval: Optional[Mapping[str, RankedList]] = None,
) -> EvalReport:
    """Aggregate ``results`` into overall and per-bucket accuracy plus Recall@K.

    Rows are sorted by ``qa_id`` first so the report does not depend on input order.
    Recall is reported only when every row carries a retrieval list and a gold document.
    """

    if not results:
        raise ValueError("build_report needs at least one result")
    rows = _with_retrieval(results, retrieval)
    with_recall = all(row.has_retrieval for row in rows)
    ks = sorted(set(ks)) if with_recall else []
    frame = _results_frame(rows, ks)

    aggregations = {"count": ("correct", "size")}
    aggregations.update({f"recall_{k}": (f"recall_{k}", "mean") for k in ks})
    grouped = frame.groupby("bucket").agg(**aggregations).reindex(range(BUCKET_COUNT))

    per_bucket = []
    for bucket, row in grouped.iterrows():
        count = 0 if pd.isna(row["count"]) else int(row["count"])
        members = [result for result in rows if result.bucket == bucket]
        per_bucket.append(
            BucketStats(
                bucket=int(bucket),
                count=count,
                accuracy=accuracy(members) if members else 0.0,
                recall_at={k: (0.0 if count == 0 else float(row[f"recall_{k}"])) for k in ks},
            )
        )

    return EvalReport(
        run_name=run_name,
        instance_count=int(len(frame)),
        overall_accuracy=accuracy(rows),
        error_count=int(frame["error"].sum()),
        per_bucket=per_bucket,
        recall_at={k: float(frame[f"recall_{k}"].mean()) for k in ks},
    )


def _align(
    baseline: Sequence[InstanceResult], candidate: Sequence[InstanceResult]
) -> List[Tuple[InstanceResult, InstanceResult]]:
    left = {row.qa_id: row for row in baseline}
    right = {row.qa_id: row for row in candidate}
    if set(left) != set(right):
        missing = sorted(set(left) ^ set(right))
        raise DatasetMismatchError(
            f"runs cover different questions ({len(missing)} qa_ids differ, e.g. {missing[:3]})"
        )
    return [(left[qa_id], right[qa_id]) for qa_id in sorted(left)]


def _t_test_row(
    label: str,
    baseline: str,
    candidate: str,
    metric: str,
    a: List[float],
    b: List[float],
    alpha: float,
) -> SignificanceResult:
    try:
        result = paired_t_test(a, b)
    except DegenerateVarianceError:
        logger.warning("t-test on %s for %s is undefined (zero variance)", metric, label)
        return SignificanceResult(
            label=label, baseline=baseline, candidate=candidate, test="t-test", metric=metric,
            statistic=0.0, p_value=1.0, n=len(a), defined=False,
        )
    return SignificanceResult(
        label=label, baseline=baseline, candidate=candidate, test="t-test", metric=metric,
        statistic=result.statistic, p_value=result.p_two_sided, n=result.n,
        significant=result.p_two_sided < alpha,
    )


def compare_runs(
    baseline_name: str,
    baseline: Sequence[InstanceResult],
    candidate_name: str,
    candidate: Sequence[InstanceResult],
    *,
    alpha: float = 0.01,
) -> List[SignificanceResult]:
    """Paired tests of ``candidate`` against ``baseline`` over the same questions."""

    pairs = _align(baseline, candidate)
    label = f"{candidate_name} vs {baseline_name}"
    a = [float(cand.correct) for _, cand in pairs]
    b = [float(base.correct) for base, _ in pairs]

    wilcoxon = wilcoxon_signed_rank(a, b)
    rows = [
        SignificanceResult(
            label=label, baseline=baseline_name, candidate=candidate_name, test="wilcoxon", metric="accuracy",
            statistic=wilcoxon.statistic, p_value=wilcoxon.p_two_sided, p_one_sided=wilcoxon.p_one_sided,
            n=wilcoxon.n, defined=wilcoxon.defined, significant=wilcoxon.defined and wilcoxon.p_two_sided < alpha,
        )
    ]
    if len(pairs) >= 2:
        rows.append(_t_test_row(label, baseline_name, candidate_name, "accuracy", a, b, alpha))
        if all(base.has_retrieval and cand.has_retrieval for base, cand in pairs):
            rows.append(
                _t_test_row(
                    label, baseline_name, candidate_name, "recall@1",
                    [float(cand.recall_at(1)) for _, cand in pairs],
                    [float(base.recall_at(1)) for base, _ in pairs],
                    alpha,
                )
            )
    return rows


def _percent(value: float) -> str:
    return f"{100.0 * value:6.2f}"


def render_text_report(report: EvalReport) -> str:
    lines = [
        f"Run: {report.run_name}",
        f"Instances: {report.instance_count}  Errors: {report.error_count}",
        f"Overall accuracy: {_percent(report.overall_accuracy).strip()}%",
        "",
        "Bucket  Count  Accuracy" + "".join(f"  R@{k:<4}" for k in sorted(report.recall_at)),
    ]
    for stats in report.per_bucket:
        recall = "".join(f"  {_percent(stats.recall_at.get(k, 0.0))}" for k in sorted(report.recall_at))
        lines.append(f"{stats.bucket:>6}  {stats.count:>5}  {_percent(stats.accuracy):>8}{recall}")
    if report.recall_at:
        lines.append("")
        lines.append("Recall: " + ", ".join(f"R@{k}={_percent(v).strip()}%" for k, v in sorted(report.recall_at.items())))
    if report.significance:
        lines.append("")
        lines.append("Significance")
        for row in report.significance:
            one_sided = f" one-sided p={row.p_one_sided:.4g}" if row.p_one_sided is not None else ""
            flag = " *" if row.significant else ""
            status = "" if row.defined else " (undefined)"
            lines.append(
                f"  {row.label} [{row.test}, {row.metric}] stat={row.statistic:.4g} p={row.p_value:.4g}{one_sided} n={row.n}{status}{flag}"
            )
    return "\n".join(lines) + "\n"


def significance_marks(
    reports: Sequence[EvalReport], significance: Sequence[SignificanceResult]
) -> Dict[str, str]:
    """Letters of the runs each run beats on accuracy at the configured alpha."""

    letters = {report.run_name: chr(ord("a") + index) for index, report in enumerate(reports)}
    accuracy = {report.run_name: report.overall_accuracy for report in reports}
    marks: Dict[str, List[str]] = {name: [] for name in letters}
    for row in significance:
        if row.test != "wilcoxon" or not row.significant:
            continue
        if row.candidate not in letters or row.baseline not in letters:
            continue
        winner, loser = (
            (row.candidate, row.baseline)
            if accuracy[row.candidate] > accuracy[row.baseline]
            else (row.baseline, row.candidate)
        )
        marks[winner].append(letters[loser])
    return {name: "".join(sorted(set(found))) for name, found in marks.items()}


def render_comparison_table(
    reports: Sequence[EvalReport], significance: Sequence[SignificanceResult] = ()
) -> str:
    """One row per run: overall and per-bucket accuracy; ``^x`` marks a significant win over run ``x``."""

    marks = significance_marks(reports, significance)
    width = max([len("Run")] + [len(report.run_name) + 4 for report in reports])
    header = f"{'Run':<{width}}  {'Overall':>10}" + "".join(f"  {'B' + str(b):>7}" for b in range(BUCKET_COUNT))
    lines = [header, "-" * len(header)]
    for index, report in enumerate(reports):
        name = f"({chr(ord('a') + index)}) {report.run_name}"
        mark = f"^{marks[report.run_name]}" if marks.get(report.run_name) else ""
        overall = f"{_percent(report.overall_accuracy).strip()}{mark}"
        buckets = "".join(f"  {_percent(value)}" for value in report.bucket_accuracies())
        lines.append(f"{name:<{width}}  {overall:>10}{buckets}")
    return "\n".join(lines) + "\n"


__all__ = [
    "BucketStats",
    "EvalReport",
    "InstanceResult",
    "SignificanceResult",
    "build_report",
    "compare_runs",
    "render_comparison_table",
    "render_text_report",
    "significance_marks",
]
