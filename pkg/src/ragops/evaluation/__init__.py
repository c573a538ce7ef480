from .metrics import accuracy, assign_bucket, is_correct, normalize_answer, recall_at_k
from .report import (
    BucketStats,
    EvalReport,
    InstanceResult,
    SignificanceResult,
    build_report,
    compare_runs,
    render_comparison_table,
    render_text_report,
)
from .stats import TTestResult, WilcoxonResult, paired_t_test, wilcoxon_signed_rank

__all__ = [
    "BucketStats",
    "EvalReport",
    "InstanceResult",
    "SignificanceResult",
    "TTestResult",
    "WilcoxonResult",
    "accuracy",
    "assign_bucket",
    "build_report",
    "compare_runs",
    "is_correct",
    "normalize_answer",
    "paired_t_test",
    "recall_at_k",
    "render_comparison_table",
    "render_text_report",
    "wilcoxon_signed_rank",
]
