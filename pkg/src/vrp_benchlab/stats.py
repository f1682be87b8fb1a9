"""Wilcoxon signed-rank testing (exact enumeration and normal approximation),
Bonferroni correction, and the two-stage equivalence/superiority protocol."""

from __future__ import annotations

import math
from dataclasses import dataclass

EXACT_MODE_CUTOFF = 20
ALTERNATIVES = ("two-sided", "less", "greater")
ZERO_HANDLINGS = ("drop", "pratt")
MODES = ("exact", "normal-approx", "auto")
OUTCOMES = ("equivalent", "a-better", "a-worse", "different-undirected")


class StatsError(ValueError):
    pass


class AllZeroDifferencesError(StatsError):
    """Every paired difference is zero: the methods are indistinguishable."""


@dataclass(frozen=True)
class TestConfig:
    __test__ = False  # not a pytest class, despite the name

    alpha0: float = 0.025
    n_comparisons: int = 1
    alternative: str = "two-sided"
    zero_handling: str = "drop"
    mode: str = "auto"

    def __post_init__(self):
        if not 0 < self.alpha0 < 1:
            raise StatsError(f"alpha0 must be in (0, 1), got {self.alpha0}")
        if self.n_comparisons < 1:
            raise StatsError("n_comparisons must be >= 1")
        if self.alternative not in ALTERNATIVES:
            raise StatsError(f"alternative must be one of {ALTERNATIVES}")
        if self.zero_handling not in ZERO_HANDLINGS:
            raise StatsError(f"zero_handling must be one of {ZERO_HANDLINGS}")
        if self.mode not in MODES:
            raise StatsError(f"mode must be one of {MODES}")


@dataclass(frozen=True)
class SignedRanks:
    w_plus: float
    w_minus: float
    n_effective: int
    ties_present: bool
    ranks: tuple[float, ...]  # ranks of the nonzero differences, input order


def _mid_ranks(values: list[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda k: values[k])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mid = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mid
        i = j + 1
    return ranks


def signed_rank_statistic(diffs, zero_handling: str = "drop") -> SignedRanks:
    """Rank |differences| ascending with mid-ranks for ties; sum ranks by sign.

    Zeros are dropped by default; "pratt" ranks them too but excludes them
    from both sums. All-zero input raises AllZeroDifferencesError.
    """
    diffs = list(diffs)
    if not diffs:
        raise StatsError("no differences given")
    if zero_handling not in ZERO_HANDLINGS:
        raise StatsError(f"zero_handling must be one of {ZERO_HANDLINGS}")
    nonzero = [d for d in diffs if d != 0]
    if not nonzero:
        raise AllZeroDifferencesError("all differences are zero")
    if zero_handling == "drop":
        ranked = nonzero
        ranks = _mid_ranks([abs(d) for d in ranked])
    else:
        all_ranks = _mid_ranks([abs(d) for d in diffs])
        ranked, ranks = zip(*[(d, r) for d, r in zip(diffs, all_ranks) if d != 0])
        ranked, ranks = list(ranked), list(ranks)
    w_plus = sum(r for d, r in zip(ranked, ranks) if d > 0)
    w_minus = sum(r for d, r in zip(ranked, ranks) if d < 0)
    abs_sorted = sorted(abs(d) for d in ranked)
    ties = any(a == b for a, b in zip(abs_sorted, abs_sorted[1:]))
    return SignedRanks(
        w_plus=w_plus,
        w_minus=w_minus,
        n_effective=len(ranked),
        ties_present=ties,
        ranks=tuple(ranks),
    )


# ---------------------------------------------------------------------------
# Exact tail probabilities

def _tail_counts(doubled_ranks: list[int]) -> list[int]:
    """counts[s] = number of sign assignments whose positive-rank sum is s,
    on the doubled-rank integer grid."""
    total = sum(doubled_ranks)
    counts = [0] * (total + 1)
    counts[0] = 1
    for r in doubled_ranks:
        for s in range(total, r - 1, -1):
            counts[s] += counts[s - r]
    return counts


def exact_p_from_ranks(ranks, w: float, alternative: str) -> float:
    """Exact tail probability of W+ = w by enumerating all 2^n equiprobable
    sign assignments over the given rank multiset (mid-ranks welcome).

    The result is count / 2^n, a dyadic rational that floats represent
    exactly at enumeration scales.
    """
    if alternative not in ALTERNATIVES:
        raise StatsError(f"alternative must be one of {ALTERNATIVES}")
    doubled = []
    for r in ranks:
        d = round(2 * r)
        if abs(2 * r - d) > 1e-9:
            raise StatsError(f"rank {r} is not a half-integer")
        doubled.append(d)
    w2 = round(2 * w)
    if abs(2 * w - w2) > 1e-9:
        raise StatsError(f"statistic {w} is not a half-integer")
    counts = _tail_counts(doubled)
    denom = 2 ** len(doubled)
    ge = sum(counts[max(w2, 0) :])
    le = sum(counts[: w2 + 1]) if w2 >= 0 else 0
    if alternative == "greater":
        return ge / denom
    if alternative == "less":
        return le / denom
    return min(1.0, 2 * min(ge, le) / denom)


def wilcoxon_p_exact(w: float, n: int, alternative: str = "two-sided", ties_present: bool = False) -> float:
    """Exact p-value assuming tie-free ranks 1..n (ties force approx mode)."""
    if n > EXACT_MODE_CUTOFF:
        raise StatsError(f"n = {n} exceeds the exact-mode cutoff {EXACT_MODE_CUTOFF}")
    if n < 1:
        raise StatsError("n must be >= 1")
    if ties_present:
        raise StatsError("ties present: exact mode over ranks 1..n does not apply")
    return exact_p_from_ranks(range(1, n + 1), w, alternative)


# ---------------------------------------------------------------------------
# Normal approximation

def tie_correction(diffs) -> float:
    """Sum of (t^3 - t) over groups of tied |differences|."""
    groups: dict[float, int] = {}
    for d in diffs:
        groups[abs(d)] = groups.get(abs(d), 0) + 1
    return float(sum(t**3 - t for t in groups.values() if t > 1))


def normal_variance(n: int, correction: float = 0.0) -> float:
    return n * (n + 1) * (2 * n + 1) / 24.0 - correction / 48.0


def _sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def wilcoxon_p_approx(
    w: float, n: int, correction: float = 0.0, alternative: str = "two-sided"
) -> float:
    """Normal approximation with tie-corrected variance and a continuity
    correction of 0.5 toward the mean; capped at 1.0."""
    if alternative not in ALTERNATIVES:
        raise StatsError(f"alternative must be one of {ALTERNATIVES}")
    mean = n * (n + 1) / 4.0
    var = normal_variance(n, correction)
    if var <= 0:
        raise StatsError(f"degenerate variance {var} (n={n}, tie correction={correction})")
    sd = math.sqrt(var)
    p_greater = _sf((w - 0.5 - mean) / sd)
    p_less = _sf((mean - w - 0.5) / sd)
    if alternative == "greater":
        return min(1.0, p_greater)
    if alternative == "less":
        return min(1.0, p_less)
    return min(1.0, 2.0 * min(p_greater, p_less))


# ---------------------------------------------------------------------------
# The paired test

@dataclass(frozen=True)
class TestResult:
    __test__ = False  # not a pytest class, despite the name

    n_effective: int
    w_plus: float
    w_minus: float
    p_value: float
    mode_used: str
    ties_present: bool

    def __post_init__(self):
        if not 0 <= self.p_value <= 1:
            raise StatsError(f"p-value {self.p_value} outside [0, 1]")


def wilcoxon_test(a_costs, b_costs, config: TestConfig = TestConfig()) -> TestResult:
    """Paired signed-rank test of per-instance values a against b.

    Differences are a - b. auto mode enumerates exactly (over the observed
    rank multiset, so ties stay exact) when n_effective <= EXACT_MODE_CUTOFF
    and falls back to the normal approximation above it.
    """
    a = list(a_costs)
    b = list(b_costs)
    if len(a) != len(b):
        raise StatsError(f"paired lists differ in length: {len(a)} vs {len(b)}")
    if len(a) < 2:
        raise StatsError("need at least two pairs")
    diffs = [x - y for x, y in zip(a, b)]
    stat = signed_rank_statistic(diffs, config.zero_handling)
    if config.zero_handling == "drop":
        expected = stat.n_effective * (stat.n_effective + 1) / 2.0
        if abs(stat.w_plus + stat.w_minus - expected) > 1e-9:
            raise StatsError("rank sums violate conservation; this is a bug")
    mode = config.mode
    if mode == "auto":
        mode = "exact" if stat.n_effective <= EXACT_MODE_CUTOFF else "normal-approx"
    if mode == "exact":
        if stat.n_effective > EXACT_MODE_CUTOFF:
            raise StatsError(f"n = {stat.n_effective} exceeds the exact-mode cutoff")
        p = exact_p_from_ranks(stat.ranks, stat.w_plus, config.alternative)
    else:
        nonzero = [d for d in diffs if d != 0]
        p = wilcoxon_p_approx(
            stat.w_plus, stat.n_effective, tie_correction(nonzero), config.alternative
        )
    return TestResult(
        n_effective=stat.n_effective,
        w_plus=stat.w_plus,
        w_minus=stat.w_minus,
        p_value=p,
        mode_used=mode,
        ties_present=stat.ties_present,
    )


# ---------------------------------------------------------------------------
# Multiple comparisons and the decision protocol

def bonferroni(alpha0: float, n: int) -> float:
    """Familywise-corrected significance level alpha0 / n."""
    if not 0 < alpha0 < 1:
        raise StatsError(f"alpha0 must be in (0, 1), got {alpha0}")
    if n < 1:
        raise StatsError(f"n must be >= 1, got {n}")
    return alpha0 / n


@dataclass(frozen=True)
class Decision:
    p_h0: float
    p_h1: float
    alpha_adjusted: float
    outcome: str

    def __post_init__(self):
        if self.outcome not in OUTCOMES:
            raise StatsError(f"bad outcome {self.outcome!r}")
        if (self.outcome == "equivalent") != (self.p_h0 >= self.alpha_adjusted):
            raise StatsError("outcome 'equivalent' must coincide with p_h0 >= alpha")


def decide_outcome(
    p_h0: float, p_h1: float, alpha: float, p_h1_opposite: float | None = None
) -> str:
    """Two-stage decision: equivalence unless the two-sided test rejects, then
    direction via the one-sided p-values ("a-better" means a has lower values)."""
    if p_h0 >= alpha:
        return "equivalent"
    if p_h1 < alpha:
        return "a-better"
    if p_h1_opposite is not None and p_h1_opposite < alpha:
        return "a-worse"
    return "different-undirected"


def compare_protocol(a_gaps, b_gaps, alpha0: float, n_comparisons: int) -> Decision:
    """Compare paired per-instance average gaps of method a against method b
    at the Bonferroni-adjusted level.

    p_h0 is the two-sided p; p_h1 the one-sided p for "a is lower than b".
    Raises AllZeroDifferencesError for identical vectors (indistinguishable).
    """
    alpha = bonferroni(alpha0, n_comparisons)
    p_h0 = wilcoxon_test(a_gaps, b_gaps, TestConfig(alternative="two-sided")).p_value
    p_h1 = wilcoxon_test(a_gaps, b_gaps, TestConfig(alternative="less")).p_value
    p_opp = wilcoxon_test(a_gaps, b_gaps, TestConfig(alternative="greater")).p_value
    return Decision(
        p_h0=p_h0,
        p_h1=p_h1,
        alpha_adjusted=alpha,
        outcome=decide_outcome(p_h0, p_h1, alpha, p_opp),
    )
