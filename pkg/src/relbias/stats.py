"""Wilcoxon signed-rank testing and accuracy summaries.

Conventions: paired two-sided test, zero differences dropped, tied
absolute differences mid-ranked. The null distribution is enumerated
exactly (via a subset-sum count over doubled ranks) up to
``EXACT_LIMIT`` effective pairs; beyond that a normal approximation with
tie and continuity corrections is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import ConfigurationError

EXACT_LIMIT = 25


@dataclass(frozen=True)
class WilcoxonResult:
    w_statistic: float
    p_value: float
    n_effective: int
    method: str  # "exact" | "normal_approximation"

    def significant_at(self, alpha: float) -> bool:
        return self.p_value < alpha


def _signed_rank_parts(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 1:
        raise ConfigurationError("samples must be 1-d, non-empty and of equal length")
    d = a - b
    d = d[d != 0.0]
    if d.size == 0:
        return np.array([]), np.array([])
    ranks = rankdata(np.abs(d))
    return d, ranks


def _exact_two_sided_p(ranks: np.ndarray, w_plus: float) -> float:
    """Enumerate the null distribution of W+ by counting sign subsets.

    Doubled mid-ranks are integers, so a subset-sum table over them counts,
    exactly, how many of the 2^n sign assignments reach each W+ value.
    """
    doubled = np.rint(2.0 * ranks).astype(np.int64)
    total = int(doubled.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts += shifted
    denom = 2.0 ** len(ranks)
    w2 = int(round(2.0 * w_plus))
    p_le = counts[: w2 + 1].sum() / denom
    p_ge = counts[w2:].sum() / denom
    return min(1.0, 2.0 * min(p_le, p_ge))


def _approx_two_sided_p(ranks: np.ndarray, w_plus: float) -> float:
    n = len(ranks)
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var -= ((tie_counts ** 3 - tie_counts).sum()) / 48.0
    if var <= 0:
        return 1.0
    d = w_plus - mean
    if d > 0:
        d -= 0.5
    elif d < 0:
        d += 0.5
    z = d / math.sqrt(var)
    return min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))


def wilcoxon_signed_rank(a, b) -> WilcoxonResult:
    """Paired two-sided Wilcoxon signed-rank test of ``a`` vs ``b``.

    All-zero differences are the degenerate no-evidence case and yield
    p = 1.0 rather than an error. The reported statistic is the classical
    min(W+, W-).
    """
    d, ranks = _signed_rank_parts(a, b)
    n_eff = len(d)
    if n_eff == 0:
        return WilcoxonResult(0.0, 1.0, 0, "exact")
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    if n_eff <= EXACT_LIMIT:
        p = _exact_two_sided_p(ranks, w_plus)
        method = "exact"
    else:
        p = _approx_two_sided_p(ranks, w_plus)
        method = "normal_approximation"
    return WilcoxonResult(min(w_plus, w_minus), p, n_eff, method)


def sample_sd(values) -> float:
    """Sample (n-1) standard deviation; 0 for a single value."""
    values = np.asarray(values, dtype=np.float64)
    if values.size < 1:
        raise ConfigurationError("need at least one value")
    if values.size == 1:
        return 0.0
    return float(np.std(values, ddof=1))


def summarize(accuracies) -> tuple[float, float]:
    """(mean, sd) of accuracy fractions, both expressed in percent units."""
    values = np.asarray(accuracies, dtype=np.float64)
    if values.size < 1:
        raise ConfigurationError("need at least one accuracy")
    return float(values.mean() * 100.0), sample_sd(values) * 100.0


@dataclass(frozen=True)
class GroupComparison:
    comparison: str
    w_statistic: float
    p_value: float
    significant: bool
    n_effective: int


def compare_groups(group_a, group_b, alpha: float = 0.05,
                   comparison: str = "a_vs_b") -> GroupComparison:
    """Wilcoxon test on the pooled per-simulation accuracies of two groups.

    Each group is a list of simulation summaries whose ``accuracies`` are
    concatenated in the given order (callers sort configurations by sweep
    value so the pairing is reproducible).
    """
    if not group_a or not group_b:
        raise ConfigurationError("both groups must be non-empty")
    pooled_a = [acc for summary in group_a for acc in summary.accuracies]
    pooled_b = [acc for summary in group_b for acc in summary.accuracies]
    if len(pooled_a) != len(pooled_b):
        raise ConfigurationError(
            f"pooled groups must pair up, got {len(pooled_a)} vs {len(pooled_b)} values"
        )
    result = wilcoxon_signed_rank(pooled_a, pooled_b)
    return GroupComparison(comparison, result.w_statistic, result.p_value,
                           result.p_value < alpha, result.n_effective)
