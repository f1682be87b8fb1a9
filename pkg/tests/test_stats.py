import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from vrp_benchlab.stats import (
    AllZeroDifferencesError,
    Decision,
    StatsError,
    TestConfig,
    bonferroni,
    compare_protocol,
    decide_outcome,
    exact_p_from_ranks,
    normal_variance,
    signed_rank_statistic,
    tie_correction,
    wilcoxon_p_approx,
    wilcoxon_p_exact,
    wilcoxon_test,
)

from oracles import wilcoxon_bruteforce


# ---------------------------------------------------------------------------
# signed ranks

def test_signed_ranks_hand_case():
    stat = signed_rank_statistic([1, -2, 3])
    assert stat.w_plus == 4  # ranks 1 and 3
    assert stat.w_minus == 2
    assert stat.n_effective == 3
    assert not stat.ties_present


def test_signed_ranks_single():
    stat = signed_rank_statistic([5])
    assert (stat.w_plus, stat.w_minus) == (1, 0)


def test_signed_ranks_all_zero():
    with pytest.raises(AllZeroDifferencesError):
        signed_rank_statistic([0, 0])


def test_signed_ranks_midranks_for_ties():
    stat = signed_rank_statistic([1, -1, 2])
    assert stat.ties_present
    assert stat.w_plus == 1.5 + 3
    assert stat.w_minus == 1.5


def test_signed_ranks_drop_vs_pratt():
    dropped = signed_rank_statistic([0, 1, -2], zero_handling="drop")
    assert dropped.n_effective == 2
    assert (dropped.w_plus, dropped.w_minus) == (1, 2)
    pratt = signed_rank_statistic([0, 1, -2], zero_handling="pratt")
    assert pratt.n_effective == 2
    assert (pratt.w_plus, pratt.w_minus) == (2, 3)  # zero takes rank 1


@settings(max_examples=60)
@given(st.lists(st.integers(min_value=-50, max_value=50).filter(lambda v: v != 0),
                min_size=1, max_size=25))
def test_rank_sum_conservation(diffs):
    stat = signed_rank_statistic(diffs)
    n = stat.n_effective
    assert stat.w_plus + stat.w_minus == pytest.approx(n * (n + 1) / 2)


# ---------------------------------------------------------------------------
# exact p-values

def test_exact_all_positive_five():
    assert wilcoxon_p_exact(15, 5, "greater") == 1 / 32


def test_exact_hand_case_three():
    assert wilcoxon_p_exact(4, 3, "greater") == 3 / 8


def test_exact_two_sided_capped_at_median():
    # n = 4, statistic at the null mean 5: both tails >= 1/2.
    assert wilcoxon_p_exact(5, 4, "two-sided") == 1.0


def test_exact_rejects_large_n_and_ties():
    with pytest.raises(StatsError):
        wilcoxon_p_exact(10, 21, "greater")
    with pytest.raises(StatsError):
        wilcoxon_p_exact(3, 3, "greater", ties_present=True)


@pytest.mark.parametrize("alternative", ["greater", "less", "two-sided"])
def test_exact_equals_bruteforce_enumeration(alternative):
    rng = random.Random(11)
    for _ in range(40):
        n = rng.randint(3, 12)
        diffs = []
        while len(diffs) < n:
            d = round(rng.uniform(-10, 10), 3)
            if d != 0 and all(abs(d) != abs(e) for e in diffs):
                diffs.append(d)
        stat = signed_rank_statistic(diffs)
        ours = wilcoxon_p_exact(stat.w_plus, n, alternative)
        assert ours == wilcoxon_bruteforce(diffs, alternative)
        assert Fraction(ours).denominator <= 2**n  # dyadic rational


def test_exact_handles_tied_ranks():
    # all |diffs| equal: enumeration over the mid-rank multiset
    diffs = [1.0] * 4 + [-1.0]
    stat = signed_rank_statistic(diffs)
    p = exact_p_from_ranks(stat.ranks, stat.w_plus, "greater")
    assert p == wilcoxon_bruteforce(diffs, "greater")


# ---------------------------------------------------------------------------
# normal approximation

def test_approx_two_sided_near_one_at_mean():
    assert wilcoxon_p_approx(162.5, 25, alternative="two-sided") == 1.0


def test_approx_close_to_exact_at_twenty():
    rng = random.Random(5)
    for _ in range(10):
        diffs = rng.sample(range(1, 200), 20)
        diffs = [d if rng.random() < 0.5 else -d for d in diffs]
        stat = signed_rank_statistic(diffs)
        for alternative in ("greater", "less", "two-sided"):
            exact = wilcoxon_p_exact(stat.w_plus, 20, alternative)
            approx = wilcoxon_p_approx(stat.w_plus, 20, alternative=alternative)
            assert approx == pytest.approx(exact, abs=0.01)


def test_tie_correction_reduces_variance():
    n = 8
    correction = tie_correction([3] * n)
    assert correction == n**3 - n
    assert normal_variance(n, correction) < normal_variance(n, 0.0)


def test_approx_degenerate_variance():
    with pytest.raises(StatsError):
        wilcoxon_p_approx(1, 1, correction=1e9)


# ---------------------------------------------------------------------------
# wilcoxon_test

def test_test_identical_vectors_all_zero():
    with pytest.raises(AllZeroDifferencesError):
        wilcoxon_test([1, 2, 3], [1, 2, 3])


def test_test_uniformly_one_unit_worse():
    a = [float(100 + k) for k in range(12)]
    b = [v - 1 for v in a]
    result = wilcoxon_test(a, b, TestConfig(alternative="greater"))
    assert result.p_value == 1 / 4096
    assert result.mode_used == "exact"
    assert result.ties_present


def test_test_permutation_invariant():
    a = [10.0, 12.5, 9.0, 11.1, 10.7]
    b = [9.5, 13.0, 8.0, 11.0, 10.9]
    base = wilcoxon_test(a, b, TestConfig(alternative="less"))
    order = [3, 0, 4, 1, 2]
    shuffled = wilcoxon_test([a[i] for i in order], [b[i] for i in order],
                             TestConfig(alternative="less"))
    assert shuffled == base


def test_test_scale_invariant():
    b = [100.0, 101.0, 102.0, 103.0, 104.0]
    diffs = [1.5, -0.5, 2.0, -2.5, 0.75]
    for scale in (1.0, 3.0, 1000.0):
        a = [x + d * scale for x, d in zip(b, diffs)]
        result = wilcoxon_test(a, b, TestConfig(alternative="two-sided"))
        if scale == 1.0:
            base = result
        else:
            assert result == base


def test_test_antisymmetry():
    a = [10.0, 12.5, 9.0, 11.1, 10.7, 13.0]
    b = [9.5, 13.0, 8.0, 11.0, 10.9, 12.0]
    ab = wilcoxon_test(a, b, TestConfig(alternative="less"))
    ba = wilcoxon_test(b, a, TestConfig(alternative="greater"))
    assert ab.w_plus == ba.w_minus
    assert ab.w_minus == ba.w_plus
    assert ab.p_value == ba.p_value


def test_test_length_mismatch():
    with pytest.raises(StatsError):
        wilcoxon_test([1, 2], [1, 2, 3])


def test_test_auto_switches_to_approx_above_cutoff():
    rng = random.Random(2)
    a = [rng.uniform(0, 100) for _ in range(30)]
    b = [v + rng.uniform(-1, 1) for v in a]
    result = wilcoxon_test(a, b)
    assert result.mode_used == "normal-approx"
    assert result.n_effective == 30


# ---------------------------------------------------------------------------
# bonferroni and the protocol

def test_bonferroni_values():
    assert bonferroni(0.025, 2) == 0.0125
    assert bonferroni(0.05, 1) == 0.05
    assert bonferroni(0.025, 5) == 0.005


def test_bonferroni_invalid():
    with pytest.raises(StatsError):
        bonferroni(1.5, 2)
    with pytest.raises(StatsError):
        bonferroni(0.025, 0)


def test_decision_invariant_enforced():
    with pytest.raises(StatsError):
        Decision(p_h0=0.5, p_h1=0.01, alpha_adjusted=0.0125, outcome="a-better")


def test_decide_outcome_table_fixtures():
    alpha = bonferroni(0.025, 2)
    assert decide_outcome(8.27934e-06, 4.13967e-06, alpha) == "a-better"
    assert decide_outcome(3.95591e-18, 1.97796e-18, alpha) == "a-better"
    assert decide_outcome(0.5, 0.25, alpha) == "equivalent"
    assert decide_outcome(0.001, 0.9995, alpha, p_h1_opposite=0.0005) == "a-worse"
    assert decide_outcome(0.001, 0.5, alpha) == "different-undirected"


def test_protocol_a_better_and_a_worse():
    b = [float(10 + k) for k in range(10)]
    a = [v - 0.5 - 0.01 * k for k, v in enumerate(b)]  # strictly lower, tie-free
    decision = compare_protocol(a, b, alpha0=0.025, n_comparisons=2)
    assert decision.alpha_adjusted == 0.0125
    assert decision.outcome == "a-better"
    reverse = compare_protocol(b, a, alpha0=0.025, n_comparisons=2)
    assert reverse.outcome == "a-worse"


def test_protocol_equivalent_under_symmetric_noise():
    base = [float(10 + k) for k in range(10)]
    noise = [0.001 * (1 if k % 2 else -1) * (1 + k // 2) for k in range(10)]
    a = [v + e for v, e in zip(base, noise)]
    decision = compare_protocol(a, base, alpha0=0.025, n_comparisons=2)
    assert decision.outcome == "equivalent"
    assert decision.p_h0 >= decision.alpha_adjusted
