"""Paired significance tests: Wilcoxon signed-rank and Student's t."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy import special, stats

from ..errors import DegenerateVarianceError, LengthMismatchError

logger = logging.getLogger(__name__)

EXACT_WILCOXON_MAX_N = 25


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float
    p_two_sided: float
    p_one_sided: float
    n: int
    w_plus: float
    w_minus: float
    defined: bool = True
    exact: bool = True


@dataclass(frozen=True)
class TTestResult:
    statistic: float
    p_two_sided: float
    df: int
    n: int


def _paired_differences(a: Sequence[float], b: Sequence[float], minimum: int) -> np.ndarray:
    if len(a) != len(b):
        raise LengthMismatchError(f"paired samples differ in length: {len(a)} vs {len(b)}")
    if len(a) < minimum:
        raise LengthMismatchError(f"need at least {minimum} pairs, got {len(a)}")
    return np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)


def _exact_tails(ranks: np.ndarray, w_plus: float) -> Tuple[float, float]:
    # Average ranks are multiples of 0.5, so doubled ranks are integers and the
    # sign-flip distribution of 2*W+ is a subset-sum count.
    doubled = np.rint(ranks * 2).astype(np.int64)
    counts = np.zeros(int(doubled.sum()) + 1, dtype=np.int64)
    counts[0] = 1
    for rank in doubled:
        shifted = counts.copy()
        shifted[rank:] += counts[:-rank]
        counts = shifted
    total = float(2 ** len(doubled))
    observed = int(round(w_plus * 2))
    lower = counts[: observed + 1].sum() / total
    upper = counts[observed:].sum() / total
    return float(lower), float(upper)


def _normal_tails(ranks: np.ndarray, w_plus: float) -> Tuple[float, float]:
    n = len(ranks)
    mean = n * (n + 1) / 4.0
    _, tie_sizes = np.unique(ranks, return_counts=True)
    variance = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(tie_sizes**3 - tie_sizes)) / 48.0
    sd = math.sqrt(variance)
    lower = stats.norm.cdf((w_plus + 0.5 - mean) / sd)
    upper = stats.norm.sf((w_plus - 0.5 - mean) / sd)
    return float(lower), float(upper)


def wilcoxon_signed_rank(a: Sequence[float], b: Sequence[float]) -> WilcoxonResult:
    """Signed-rank test of ``a - b`` with zero differences dropped.

    Exact over all sign assignments for up to 25 non-zero differences,
    tie-corrected normal approximation with continuity correction above.
    ``p_one_sided`` is the probability of ``W+`` at least as large as observed
    (``a`` better than ``b``).
    """

    diffs = _paired_differences(a, b, minimum=1)
    nonzero = diffs[diffs != 0]
    n = int(nonzero.size)
    if n == 0:
        logger.warning("Wilcoxon test undefined: all %d paired differences are zero", diffs.size)
        return WilcoxonResult(
            statistic=0.0, p_two_sided=1.0, p_one_sided=1.0, n=0, w_plus=0.0, w_minus=0.0, defined=False
        )

    ranks = stats.rankdata(np.abs(nonzero), method="average")
    w_plus = float(ranks[nonzero > 0].sum())
    w_minus = float(n * (n + 1) / 2.0 - w_plus)
    exact = n <= EXACT_WILCOXON_MAX_N
    lower, upper = _exact_tails(ranks, w_plus) if exact else _normal_tails(ranks, w_plus)
    return WilcoxonResult(
        statistic=min(w_plus, w_minus),
        p_two_sided=min(1.0, 2.0 * min(lower, upper)),
        p_one_sided=min(1.0, upper),
        n=n,
        w_plus=w_plus,
        w_minus=w_minus,
        exact=exact,
    )


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    diffs = _paired_differences(a, b, minimum=2)
    n = int(diffs.size)
    sd = float(np.std(diffs, ddof=1))
    if sd == 0.0 or not math.isfinite(sd):
        raise DegenerateVarianceError("paired differences have zero variance; t statistic undefined")
    t = float(np.mean(diffs)) / (sd / math.sqrt(n))
    df = n - 1
    # Two-sided tail of Student's t via the regularised incomplete beta.
    p = float(special.betainc(df / 2.0, 0.5, df / (df + t * t)))
    return TTestResult(statistic=t, p_two_sided=min(1.0, p), df=df, n=n)


__all__ = [
    "EXACT_WILCOXON_MAX_N",
    "TTestResult",
    "WilcoxonResult",
    "paired_t_test",
    "wilcoxon_signed_rank",
]
