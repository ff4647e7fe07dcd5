"""Mann-Whitney U tests and sentence-type comparisons over entropy samples.

The U statistic is computed by the rank method with midranks for ties. For
small tie-free samples (n1 + n2 <= 20) the p-value comes from exact
enumeration of the U null distribution; otherwise a normal approximation
with tie correction and continuity correction is used. Entropy values are
multiples-of-1/k entropies, so ties are common and the tie handling
matters.

``less`` tests the hypothesis that the first sample is stochastically
smaller than the second.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from scipy.stats import norm, rankdata, tiecorrect

from .annotations import SentenceLabel
from .metrics import MetricRow

EXACT_SIZE_LIMIT = 20

ALTERNATIVES = ("less", "greater", "two_sided")

#: Significance thresholds and their star strings, checked in order.
STAR_THRESHOLDS = ((0.001, "***"), (0.01, "**"), (0.05, "*"))


@dataclass(frozen=True)
class MwuResult:
    u_statistic: float
    p_value: float
    alternative: str
    method: str  # "exact" or "normal_approx"
    n1: int
    n2: int


def _u_counts(n1: int, n2: int) -> list[int]:
    """Null distribution of U: counts[u] = number of ways to choose n1 of
    the ranks 1..n1+n2 such that U equals u. Exact integer arithmetic."""
    n = n1 + n2
    min_sum = n1 * (n1 + 1) // 2
    max_sum = min_sum + n1 * n2
    # ways[j][s] = subsets of size j of the ranks seen so far with rank sum s
    ways = [[0] * (max_sum + 1) for _ in range(n1 + 1)]
    ways[0][0] = 1
    for rank in range(1, n + 1):
        for j in range(min(rank, n1), 0, -1):
            row, prev = ways[j], ways[j - 1]
            for s in range(max_sum, rank - 1, -1):
                if prev[s - rank]:
                    row[s] += prev[s - rank]
    return ways[n1][min_sum : max_sum + 1]


def _exact_pvalue(u1: float, n1: int, n2: int, alternative: str) -> float:
    counts = _u_counts(n1, n2)
    total = sum(counts)
    u = int(round(u1))
    p_less = sum(counts[: u + 1]) / total
    p_greater = sum(counts[u:]) / total
    if alternative == "less":
        return p_less
    if alternative == "greater":
        return p_greater
    return min(1.0, 2.0 * min(p_less, p_greater))


def _normal_pvalue(u1: float, ranked: np.ndarray, n1: int, n2: int, alternative: str) -> float:
    mean = n1 * n2 / 2.0
    tie_factor = tiecorrect(ranked)
    sd = np.sqrt(tie_factor * n1 * n2 * (n1 + n2 + 1) / 12.0)
    if sd == 0.0:
        # Every observation identical; the data carry no ordering evidence.
        return 1.0
    if alternative == "less":
        p = float(norm.sf((mean - u1 - 0.5) / sd))
    elif alternative == "greater":
        p = float(norm.sf((u1 - mean - 0.5) / sd))
    else:
        big_u = max(u1, n1 * n2 - u1)
        p = min(1.0, 2.0 * float(norm.sf((big_u - mean - 0.5) / sd)))
    return min(1.0, max(p, 5e-324))


def mann_whitney_u(
    a: Sequence[float], b: Sequence[float], alternative: str = "two_sided"
) -> MwuResult:
    """Mann-Whitney U test of sample ``a`` against sample ``b``.

    Returns the U statistic for ``a`` (number of (a, b) pairs where a wins,
    ties counting one half) and the p-value for the given alternative.
    """
    if alternative not in ALTERNATIVES:
        raise ValueError(f"alternative must be one of {ALTERNATIVES}, got {alternative!r}")
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1:
        raise ValueError("samples must be one-dimensional")
    n1, n2 = len(x), len(y)
    if n1 == 0 or n2 == 0:
        raise ValueError("both samples must be non-empty")

    combined = np.concatenate([x, y])
    ranked = rankdata(combined)
    r1 = float(ranked[:n1].sum())
    u1 = r1 - n1 * (n1 + 1) / 2.0

    has_ties = len(np.unique(combined)) < n1 + n2
    if n1 + n2 <= EXACT_SIZE_LIMIT and not has_ties:
        p = _exact_pvalue(u1, n1, n2, alternative)
        method = "exact"
    else:
        p = _normal_pvalue(u1, ranked, n1, n2, alternative)
        method = "normal_approx"
    return MwuResult(
        u_statistic=u1, p_value=p, alternative=alternative, method=method, n1=n1, n2=n2
    )


def stars(p_value: float) -> str:
    for threshold, marker in STAR_THRESHOLDS:
        if p_value < threshold:
            return marker
    return ""


#: The four standing hypotheses, as (name, first label, relation, second label).
HYPOTHESES = (
    ("matching<coercion", SentenceLabel.MATCHING, "less", SentenceLabel.COERCION),
    ("matching<unrestricted", SentenceLabel.MATCHING, "less", SentenceLabel.UNRESTRICTED),
    ("coercion<unrestricted", SentenceLabel.COERCION, "less", SentenceLabel.UNRESTRICTED),
    ("coercion!=other_mismatch", SentenceLabel.COERCION, "two_sided", SentenceLabel.OTHER_MISMATCH),
)


@dataclass(frozen=True)
class HypothesisTest:
    graph: str
    hypothesis: str
    alternative: str
    result: Optional[MwuResult]  # None when a side has no instances
    stars: str
    confirmed: bool

    @property
    def untestable(self) -> bool:
        return self.result is None

    def marker(self) -> str:
        """Human-readable outcome: the relation with its stars, or a
        not-confirmed / untestable flag."""
        if self.untestable:
            return "untestable"
        rel = "<" if self.alternative == "less" else "!="
        if self.confirmed:
            return rel + self.stars
        return "not" + rel


@dataclass(frozen=True)
class ComparisonReport:
    """Mean entropy per sentence label for each graph, plus the outcome of
    every standing hypothesis."""

    means: dict[str, dict[SentenceLabel, tuple[Optional[float], int]]]
    tests: list[HypothesisTest]


def compare_sentence_types(tables: dict[str, Sequence[MetricRow]]) -> ComparisonReport:
    """Run the standing entropy comparisons on one metric table per graph.

    A hypothesis whose either side has zero instances is reported as
    untestable rather than raising.
    """
    means: dict[str, dict[SentenceLabel, tuple[Optional[float], int]]] = {}
    tests: list[HypothesisTest] = []
    for graph_name, rows in tables.items():
        by_label: dict[SentenceLabel, list[float]] = {label: [] for label in SentenceLabel}
        for row in rows:
            by_label[row.label].append(row.nte)
        means[graph_name] = {
            label: (float(np.mean(vals)) if vals else None, len(vals))
            for label, vals in by_label.items()
        }
        for name, first, alternative, second in HYPOTHESES:
            sample_a, sample_b = by_label[first], by_label[second]
            if not sample_a or not sample_b:
                tests.append(
                    HypothesisTest(
                        graph=graph_name, hypothesis=name, alternative=alternative,
                        result=None, stars="", confirmed=False,
                    )
                )
                continue
            result = mann_whitney_u(sample_a, sample_b, alternative)
            star = stars(result.p_value)
            tests.append(
                HypothesisTest(
                    graph=graph_name, hypothesis=name, alternative=alternative,
                    result=result, stars=star, confirmed=bool(star),
                )
            )
    return ComparisonReport(means=means, tests=tests)


def write_comparison_csv(report: ComparisonReport, target: Union[str, Path]) -> None:
    with open(Path(target), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["graph", "hypothesis", "alternative", "u", "p", "method", "n1", "n2", "stars"])
        for test in report.tests:
            if test.untestable:
                writer.writerow(
                    [test.graph, test.hypothesis, test.alternative, "", "", "untestable", "", "", ""]
                )
            else:
                r = test.result
                writer.writerow(
                    [
                        test.graph, test.hypothesis, test.alternative,
                        f"{r.u_statistic:.1f}", f"{r.p_value:.6g}", r.method,
                        r.n1, r.n2, test.stars,
                    ]
                )


def write_means_csv(report: ComparisonReport, target: Union[str, Path]) -> None:
    with open(Path(target), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["graph", "label", "mean_nte", "count"])
        for graph_name, by_label in report.means.items():
            for label in SentenceLabel:
                mean, count = by_label[label]
                writer.writerow(
                    [graph_name, label.value, "" if mean is None else f"{mean:.6f}", count]
                )
