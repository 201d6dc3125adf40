"""Statistics for comparing search algorithms over repeated runs."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass

EXACT_MAX_COMBINED = 12  # exact rank-sum distribution up to this combined sample size
SIGNIFICANCE = 0.05
# upper bounds on |A12 - 0.5| for each magnitude label
MAGNITUDE_THRESHOLDS = ((0.06, "negligible"), (0.14, "small"), (0.21, "medium"))


def _check_samples(a: Sequence[float], b: Sequence[float]) -> None:
    if len(a) == 0 or len(b) == 0:
        raise ValueError("both samples must be non-empty")


def midranks(values: Sequence[float]) -> list[float]:
    """1-based ranks of ``values`` with tied values sharing their average rank."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def _rank_sum_counts(n: int, total: int) -> dict[int, int]:
    """Number of size-``n`` subsets of ranks ``1..total`` for every possible rank sum."""
    # table[k][s]: subsets of size k with sum s over the ranks seen so far
    table = [dict() for _ in range(n + 1)]
    table[0][0] = 1
    for r in range(1, total + 1):
        for k in range(min(n, r), 0, -1):
            for s, c in table[k - 1].items():
                table[k][s + r] = table[k].get(s + r, 0) + c
    return table[n]


def wilcoxon_rank_sum(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sided p-value of the unpaired Wilcoxon rank-sum (Mann-Whitney) test.

    The exact null distribution is used when the samples have no ties and at
    most ``EXACT_MAX_COMBINED`` values in total; otherwise the normal
    approximation with tie and continuity corrections.
    """
    _check_samples(a, b)
    pooled = list(a) + list(b)
    if len(set(pooled)) == len(pooled) and len(pooled) <= EXACT_MAX_COMBINED:
        return rank_sum_exact_p(a, b)
    return rank_sum_normal_p(a, b)


def rank_sum_exact_p(a: Sequence[float], b: Sequence[float]) -> float:
    """Exact two-sided p-value for tie-free samples."""
    _check_samples(a, b)
    n = len(a)
    pooled = list(a) + list(b)
    if len(set(pooled)) != len(pooled):
        raise ValueError("the exact distribution assumes no ties")
    w = round(sum(midranks(pooled)[:n]))
    counts = _rank_sum_counts(n, len(pooled))
    total = sum(counts.values())
    lower = sum(c for s, c in counts.items() if s <= w)
    upper = sum(c for s, c in counts.items() if s >= w)
    return min(1.0, 2.0 * min(lower, upper) / total)


def rank_sum_normal_p(a: Sequence[float], b: Sequence[float]) -> float:
    """Normal-approximation two-sided p-value with tie and continuity corrections."""
    _check_samples(a, b)
    n, m = len(a), len(b)
    pooled = list(a) + list(b)
    u = sum(midranks(pooled)[:n]) - n * (n + 1) / 2
    mean = n * m / 2
    total = n + m
    tie_term = sum(t**3 - t for t in _tie_sizes(pooled))
    var = n * m / 12 * ((total + 1) - tie_term / (total * (total - 1)))
    if var <= 0:
        return 1.0  # every value tied
    z = max(0.0, abs(u - mean) - 0.5) / math.sqrt(var)
    return min(1.0, math.erfc(z / math.sqrt(2)))


def _tie_sizes(values: Sequence[float]) -> list[int]:
    counts: dict[float, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    return [c for c in counts.values() if c > 1]


def vargha_delaney_a12(a: Sequence[float], b: Sequence[float]) -> float:
    """Probability that a value drawn from ``a`` beats one from ``b`` (ties count half)."""
    _check_samples(a, b)
    wins = ties = 0
    for x in a:
        for y in b:
            if x > y:
                wins += 1
            elif x == y:
                ties += 1
    return (wins + 0.5 * ties) / (len(a) * len(b))


def magnitude(a12: float) -> str:
    gap = abs(a12 - 0.5)
    for bound, label in MAGNITUDE_THRESHOLDS:
        if gap < bound:
            return label
    return "large"


@dataclass(frozen=True)
class ComparisonReport:
    p_value: float
    a12: float
    magnitude: str

    @property
    def significant(self) -> bool:
        return self.p_value < SIGNIFICANCE

    def to_json(self) -> dict:
        return asdict(self)


def compare(a: Sequence[float], b: Sequence[float]) -> ComparisonReport:
    a12 = vargha_delaney_a12(a, b)
    return ComparisonReport(wilcoxon_rank_sum(a, b), a12, magnitude(a12))


@dataclass(frozen=True)
class RunSeries:
    """Convergence curve of one run: ``(elapsed, covered)`` points."""

    samples: tuple[tuple[float, int], ...]
    final_covered: int
    faults_found: int = 0

    def __post_init__(self):
        if not self.samples:
            raise ValueError("a run series needs at least one point")
        for (t0, c0), (t1, c1) in zip(self.samples, self.samples[1:]):
            if t1 < t0 or c1 < c0:
                raise ValueError(f"series must be non-decreasing, got {(t0, c0)} then {(t1, c1)}")

    @classmethod
    def from_events(cls, records: Sequence[dict], faults_found: int = 0) -> RunSeries:
        samples = tuple((float(r["evaluations"]), int(r["covered_count"])) for r in records)
        return cls(samples, samples[-1][1], faults_found)


def normalized_auc(series: RunSeries, budget: float, max_coverage: int) -> float:
    """Area under the step-shaped coverage curve over ``[0, budget]``.

    The curve starts at ``(0, 0)`` unless the series says otherwise, holds each
    value until the next point, and holds the last value until ``budget``. The
    area is divided by ``budget * max_coverage``.
    """
    if max_coverage < 1:
        raise ValueError("max_coverage must be at least 1")
    if budget <= 0:
        raise ValueError("budget must be positive")
    points = list(series.samples)
    if points[-1][0] > budget:
        raise ValueError(f"series point at {points[-1][0]} lies beyond the budget {budget}")
    area = 0.0
    for (t, c), (t_next, _) in zip(points, points[1:] + [(budget, 0)]):
        area += c * (t_next - t)
    return area / (budget * max_coverage)


# ---------------------------------------------------------------------------
# summaries and text tables


def median(values: Sequence[float]) -> float:
    return _quantile(sorted(values), 0.5)


def iqr(values: Sequence[float]) -> float:
    s = sorted(values)
    return _quantile(s, 0.75) - _quantile(s, 0.25)


def _quantile(sorted_values: Sequence[float], q: float) -> float:
    """Linear-interpolation quantile (the same rule as numpy's default)."""
    if not sorted_values:
        raise ValueError("empty sample")
    pos = q * (len(sorted_values) - 1)
    lo = math.floor(pos)
    hi = min(lo + 1, len(sorted_values) - 1)
    return sorted_values[lo] + (sorted_values[hi] - sorted_values[lo]) * (pos - lo)


def format_p(p: float) -> str:
    text = "<0.001" if p < 0.001 else f"{p:.3f}"
    return text + ("*" if p < SIGNIFICANCE else "")


def render_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    """Left-aligned first column, right-aligned numbers, separated by two spaces."""
    cells = [list(map(str, headers))] + [list(map(str, r)) for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]

    def line(row):
        parts = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        return "  ".join(parts).rstrip()

    rule = "  ".join("-" * w for w in widths)
    return "\n".join([line(cells[0]), rule] + [line(r) for r in cells[1:]])
