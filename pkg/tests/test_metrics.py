import random

import pytest
from hypothesis import given, settings, strategies as st

from vrp_benchlab.metrics import (
    BoxplotStats,
    CpuRatingTable,
    MetricsError,
    UnknownCpuError,
    aggregate_runs,
    boxplot_stats,
    convergence_profile,
    default_time_grid,
    gap,
    log_time_grid,
    normalize_time,
    primal_gap_fn,
    primal_integral,
    scaling_factor,
    time_to_best,
    trace_metrics,
)
from vrp_benchlab.orchestrator import RunRecord, Trace

from conftest import RATINGS_CSV
from oracles import riemann_primal_integral


# ---------------------------------------------------------------------------
# gap

def test_gap_table_values():
    assert round(gap(27591.0, 27591), 2) == 0.00
    assert round(gap(26757.5, 26362), 2) == 1.50
    assert round(gap(72748, 72359), 2) == 0.54


def test_gap_negative_preserved():
    assert gap(99, 100) == pytest.approx(-1.0)


def test_gap_nonpositive_bks():
    with pytest.raises(MetricsError):
        gap(100, 0)


@given(st.floats(min_value=1, max_value=1e6), st.floats(min_value=1, max_value=1e6))
def test_gap_zero_at_bks_and_increasing(bks, delta):
    assert gap(bks, bks) == 0.0
    assert gap(bks + delta, bks) > 0


# ---------------------------------------------------------------------------
# CPU normalization

@pytest.fixture
def ratings():
    return CpuRatingTable.from_csv(RATINGS_CSV)


def test_scaling_factor_matches_published_ratio(ratings):
    factor = scaling_factor(ratings, "Intel Core2 Duo T5500")
    assert factor == pytest.approx(3.8333, abs=0.01)
    assert 3.82 <= factor <= 3.84


def test_scaling_factor_identity(ratings):
    assert scaling_factor(ratings, "Intel Xeon E3-1245 v5") == 1.0


def test_scaling_factor_unknown_cpu(ratings):
    with pytest.raises(UnknownCpuError):
        scaling_factor(ratings, "abacus")


def test_normalize_time_slow_cpu(ratings):
    assert normalize_time(38.33, ratings, "Intel Core2 Duo T5500") == pytest.approx(10.0, abs=0.05)
    assert normalize_time(0.0, ratings, "Intel Core2 Duo T5500") == 0.0
    assert normalize_time(7.5, ratings, "Intel Xeon E3-1245 v5") == 7.5


def test_ratings_csv_requires_single_base():
    with pytest.raises(MetricsError):
        CpuRatingTable.from_csv("cpu_name,rating,base\na,100,true\nb,200,true\n")
    table = CpuRatingTable.from_csv("cpu_name,rating,base\na,100,\nb,200,\n", base_cpu="b")
    assert table.base_cpu == "b"


@settings(max_examples=50)
@given(
    t=st.floats(min_value=0, max_value=1e5),
    r1=st.integers(min_value=1, max_value=10000),
    r2=st.integers(min_value=1, max_value=10000),
)
def test_normalize_round_trips(t, r1, r2):
    table = CpuRatingTable(ratings={"base": float(r1), "other": float(r2)}, base_cpu="base")
    once = table.normalize_time(t, "other")
    back = once * table.scaling_factor("other")
    assert back == pytest.approx(t, rel=1e-12, abs=1e-12)


# ---------------------------------------------------------------------------
# aggregation

def _rec(cost, wall=1.0, cpu="test-cpu", solver="s", instance="i", seed=0):
    return RunRecord(
        solver=solver, instance=instance, seed=seed,
        trace=Trace(events=(), terminal_time=wall),
        final_cost=cost, wall_time=wall, cpu_name=cpu, threads_used=1, exit_status="ok",
    )


def test_aggregate_simple():
    stats = aggregate_runs([_rec(100, seed=1), _rec(102, seed=2), _rec(104, seed=3)], bks=100)
    assert stats.avg_cost == 102
    assert stats.avg_gap == pytest.approx(2.00)
    assert stats.best_cost == 100 and stats.worst_cost == 104
    assert stats.n_runs == 3


def test_aggregate_single_run_at_bks():
    stats = aggregate_runs([_rec(27591)], bks=27591)
    assert stats.avg_gap == stats.best_gap == stats.worst_gap == 0.0


def test_aggregate_counts_fifty():
    records = [_rec(1000 + k, seed=k) for k in range(50)]
    assert aggregate_runs(records, bks=1000).n_runs == 50


def test_aggregate_permutation_invariant():
    records = [_rec(100 + k, wall=k + 1.0, seed=k) for k in range(8)]
    shuffled = records[:]
    random.Random(1).shuffle(shuffled)
    assert aggregate_runs(records, 100) == aggregate_runs(shuffled, 100)


def test_aggregate_normalizes_times(ratings):
    records = [_rec(100, wall=38.33, cpu="Intel Core2 Duo T5500")]
    stats = aggregate_runs(records, bks=100, ratings=ratings)
    assert stats.avg_normalized_time == pytest.approx(10.0, abs=0.05)


def test_aggregate_rejects_mixed_keys():
    with pytest.raises(MetricsError):
        aggregate_runs([_rec(100, instance="a"), _rec(100, instance="b")], 100)


def test_aggregate_rejects_empty():
    with pytest.raises(MetricsError):
        aggregate_runs([], 100)


def test_run_stats_csv_keyed_by_solver_instance():
    from vrp_benchlab.metrics import run_stats_csv

    stats = aggregate_runs([_rec(100, seed=1), _rec(104, seed=2)], bks=100)
    rows = run_stats_csv([stats]).splitlines()
    assert rows[0].split(",")[:3] == ["solver", "instance", "n_runs"]
    assert rows[1].startswith("s,i,2,102.0,100.0,104.0,2.0")


# ---------------------------------------------------------------------------
# primal gap and integral

def test_primal_gap_zero_when_at_bks():
    fn = primal_gap_fn([(0.0, 100.0)], bks=100)
    assert fn(0) == 0.0
    assert fn(5) == 0.0


def test_primal_gap_one_before_first_incumbent():
    fn = primal_gap_fn([], bks=100)
    assert fn(0) == 1.0
    assert fn(100) == 1.0


def test_primal_gap_half_for_double_bks():
    fn = primal_gap_fn([(0.0, 200.0)], bks=100)
    assert fn(3) == 0.5


def test_primal_integral_closed_forms():
    assert primal_integral([(0.0, 100.0)], bks=100, horizon=10) == 0.0
    # gamma = 1 until t=2, then 0.5: 2*1 + 8*0.5 = 6
    assert primal_integral([(2.0, 200.0)], bks=100, horizon=10) == 6.0


def test_primal_integral_matches_riemann_oracle():
    rng = random.Random(7)
    for _ in range(20):
        bks = rng.randint(50, 150)
        events = []
        cost = bks * (2 + rng.random())
        t = 0.0
        for _ in range(rng.randint(1, 6)):
            t += round(rng.uniform(0.05, 1.0), 4)
            cost *= 0.7 + 0.25 * rng.random()
            events.append((round(t, 4), cost))
        horizon = round(t + rng.uniform(0.2, 1.0), 4)
        exact = primal_integral(events, bks, horizon)
        approx = riemann_primal_integral(events, bks, horizon)
        assert exact == pytest.approx(approx, abs=1e-6)


def test_primal_integral_monotone_in_horizon():
    events = [(1.0, 150.0), (3.0, 120.0)]
    values = [primal_integral(events, 100, h) for h in (1, 2, 4, 8)]
    assert values == sorted(values)


def test_primal_integral_ignores_non_improving_insertions():
    events = [(1.0, 150.0), (3.0, 120.0)]
    noisy = [(1.0, 150.0), (2.0, 160.0), (3.0, 120.0), (3.5, 120.0)]
    assert primal_integral(noisy, 100, 10) == primal_integral(events, 100, 10)


def test_primal_integral_errors():
    with pytest.raises(MetricsError):
        primal_integral([(0.0, 10.0)], bks=-1, horizon=5)
    with pytest.raises(MetricsError):
        primal_integral([(0.0, 10.0)], bks=10, horizon=0)


def test_trace_metrics_bounds():
    tm = trace_metrics([(1.0, 150.0), (3.0, 120.0)], bks=100, horizon=10)
    assert 0 <= tm.primal_integral <= 10
    assert tm.time_to_best == 3.0


# ---------------------------------------------------------------------------
# time to best

def test_time_to_best_basic():
    assert time_to_best([(1.0, 110.0), (5.0, 100.0)]) == 5.0
    assert time_to_best([(0.5, 42.0)]) == 0.5


def test_time_to_best_empty():
    with pytest.raises(MetricsError):
        time_to_best([])


# ---------------------------------------------------------------------------
# convergence profiles

def test_profile_mean_of_two_traces():
    traces = [([(0.0, 102.0)], 100.0), ([(0.0, 104.0)], 100.0)]
    profile = convergence_profile(traces, grid=[10.0])
    assert profile == [(10.0, pytest.approx(3.0))]


def test_profile_zero_when_all_at_bks():
    traces = [([(0.0, 100.0)], 100.0), ([(0.0, 50.0)], 50.0)]
    profile = convergence_profile(traces, grid=[1.0, 2.0, 4.0])
    assert all(value == 0.0 for _, value in profile)


def test_profile_caps_missing_incumbents():
    traces = [([(5.0, 100.0)], 100.0)]
    profile = convergence_profile(traces, grid=[1.0, 6.0], cap=100.0)
    assert profile[0][1] == 100.0
    assert profile[1][1] == 0.0


def test_profile_nonincreasing_for_monotone_traces():
    rng = random.Random(3)
    for _ in range(20):
        bks = 100.0
        traces = []
        for _ in range(rng.randint(1, 4)):
            t, cost = 0.0, bks * 2  # first gap 100% == cap
            events = []
            for _ in range(rng.randint(1, 6)):
                t += rng.uniform(0.1, 2.0)
                cost = max(bks, cost * rng.uniform(0.7, 0.999))
                if not events or cost < events[-1][1]:
                    events.append((t, cost))
            traces.append((events, bks))
        grid = [0.5 * k for k in range(1, 25)]
        values = [v for _, v in convergence_profile(traces, grid)]
        assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
        # Independent re-evaluation at the final instant: mean of final gaps.
        final = sum(100.0 * (ev[-1][1] - b) / b for ev, b in traces) / len(traces)
        assert values[-1] == pytest.approx(final)


def test_profile_errors():
    with pytest.raises(MetricsError):
        convergence_profile([], grid=[1.0])
    with pytest.raises(MetricsError):
        convergence_profile([([(0.0, 1.0)], 1.0)], grid=[])
    with pytest.raises(MetricsError):
        convergence_profile([([(0.0, 1.0)], 1.0)], grid=[2.0, 1.0])


def test_log_time_grid_spans_range():
    grid = log_time_grid(0.1, 100, points=31)
    assert grid[0] == pytest.approx(0.1)
    assert grid[-1] == pytest.approx(100)
    assert all(b > a for a, b in zip(grid, grid[1:]))


def test_default_time_grid_from_traces():
    traces = [Trace(events=((0.5, 10.0),), terminal_time=4.0)]
    grid = default_time_grid(traces, points=10)
    assert grid[0] == pytest.approx(0.5)
    assert grid[-1] == pytest.approx(4.0)


# ---------------------------------------------------------------------------
# boxplot statistics

def test_boxplot_simple():
    stats = boxplot_stats([1, 2, 3, 4, 5])
    assert stats == BoxplotStats(lo_whisker=1, q1=2, median=3, q3=4, hi_whisker=5, outliers=())


def test_boxplot_degenerate():
    stats = boxplot_stats([0, 0, 0, 0])
    assert (stats.lo_whisker, stats.q1, stats.median, stats.q3, stats.hi_whisker) == (0,) * 5
    assert stats.outliers == ()


def test_boxplot_flags_outlier():
    stats = boxplot_stats([0, 0.1, 0.2, 0.3, 5.0])
    # Hinges by median-of-halves: q1 = 0.1, q3 = 0.3, fence = 0.3 + 1.5 * 0.2 = 0.6.
    assert stats.q1 == pytest.approx(0.1)
    assert stats.q3 == pytest.approx(0.3)
    assert stats.outliers == (5.0,)
    assert stats.hi_whisker == pytest.approx(0.3)


def test_boxplot_empty():
    with pytest.raises(MetricsError):
        boxplot_stats([])


@settings(max_examples=50)
@given(st.lists(st.floats(min_value=-100, max_value=100), min_size=1, max_size=40))
def test_boxplot_ordering_invariants(values):
    stats = boxplot_stats(values)
    assert stats.lo_whisker <= stats.q1 <= stats.median <= stats.q3 <= stats.hi_whisker
    assert all(v < stats.lo_whisker or v > stats.hi_whisker for v in stats.outliers)
