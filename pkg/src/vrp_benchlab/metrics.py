"""Gaps, run aggregation, cross-CPU time normalization, primal integral,
time-to-best, convergence profiles and boxplot summaries."""

from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass

PRIMAL_GAP_EPS = 1e-9


class MetricsError(ValueError):
    pass


class UnknownCpuError(MetricsError):
    pass


def gap(value: float, bks: float) -> float:
    """Percentage gap 100 * (value - bks) / bks; negative for new best values."""
    if bks <= 0:
        raise MetricsError(f"BKS must be positive, got {bks}")
    return 100.0 * (value - bks) / bks


# ---------------------------------------------------------------------------
# CPU time normalization

@dataclass(frozen=True)
class CpuRatingTable:
    """Single-thread ratings per CPU name, with a designated base CPU.

    Times measured on CPU c convert to base-CPU seconds by dividing by
    scaling_factor(c) = rating(base) / rating(c).
    """

    ratings: dict[str, float]
    base_cpu: str

    def __post_init__(self):
        if self.base_cpu not in self.ratings:
            raise UnknownCpuError(f"base CPU {self.base_cpu!r} has no rating")
        for name, rating in self.ratings.items():
            if rating <= 0:
                raise MetricsError(f"rating for {name!r} must be positive, got {rating}")

    def scaling_factor(self, measured_cpu: str) -> float:
        """Divisor converting times measured on `measured_cpu` to the base scale."""
        if measured_cpu not in self.ratings:
            raise UnknownCpuError(f"no rating for CPU {measured_cpu!r}")
        return self.ratings[self.base_cpu] / self.ratings[measured_cpu]

    def normalize_time(self, t: float, measured_cpu: str) -> float:
        if t < 0:
            raise MetricsError(f"time must be nonnegative, got {t}")
        return t / self.scaling_factor(measured_cpu)

    @classmethod
    def from_csv(cls, text: str, base_cpu: str | None = None) -> "CpuRatingTable":
        """Load `cpu_name,rating,base` rows; exactly one row is flagged base=true
        unless `base_cpu` overrides the designation."""
        ratings: dict[str, float] = {}
        flagged: list[str] = []
        reader = csv.reader(io.StringIO(text))
        try:
            header = [h.strip().lower() for h in next(reader)]
        except StopIteration:
            raise MetricsError("empty ratings file") from None
        if header[:2] != ["cpu_name", "rating"]:
            raise MetricsError(f"ratings header must start with cpu_name,rating, got {header}")
        for row in reader:
            if not row or not row[0].strip():
                continue
            name = row[0].strip()
            try:
                ratings[name] = float(row[1])
            except (IndexError, ValueError):
                raise MetricsError(f"bad ratings row {row}") from None
            if len(row) > 2 and row[2].strip().lower() in ("true", "1", "yes", "base=true"):
                flagged.append(name)
        if base_cpu is None:
            if len(flagged) != 1:
                raise MetricsError(f"exactly one base row required, found {flagged}")
            base_cpu = flagged[0]
        return cls(ratings=ratings, base_cpu=base_cpu)


def scaling_factor(table: CpuRatingTable, measured_cpu: str) -> float:
    return table.scaling_factor(measured_cpu)


def normalize_time(t: float, table: CpuRatingTable, measured_cpu: str) -> float:
    return table.normalize_time(t, measured_cpu)


# ---------------------------------------------------------------------------
# Aggregation over runs

@dataclass(frozen=True)
class RunStats:
    """Summary of all runs of one solver on one instance."""

    solver: str
    instance: str
    n_runs: int
    avg_cost: float
    best_cost: float
    worst_cost: float
    avg_gap: float
    best_gap: float
    worst_gap: float
    mean_run_gap: float
    avg_normalized_time: float

    def __post_init__(self):
        if not self.best_cost <= self.avg_cost <= self.worst_cost:
            raise MetricsError(
                f"cost ordering violated: {self.best_cost} <= {self.avg_cost} <= {self.worst_cost}"
            )


def run_stats_csv(stats_list) -> str:
    """Comma-separated export of RunStats rows keyed by (solver, instance)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow([
        "solver", "instance", "n_runs", "avg_cost", "best_cost", "worst_cost",
        "avg_gap", "best_gap", "worst_gap", "mean_run_gap", "avg_normalized_time_s",
    ])
    for s in stats_list:
        writer.writerow([
            s.solver, s.instance, s.n_runs, repr(float(s.avg_cost)),
            repr(float(s.best_cost)), repr(float(s.worst_cost)),
            repr(float(s.avg_gap)), repr(float(s.best_gap)), repr(float(s.worst_gap)),
            repr(float(s.mean_run_gap)), repr(float(s.avg_normalized_time)),
        ])
    return out.getvalue()


def aggregate_runs(records, bks: float, ratings: CpuRatingTable | None = None) -> RunStats:
    """Average/best/worst costs and gaps over runs of one (solver, instance).

    The headline avg_gap is computed from avg_cost (the results-table
    construction); the mean of per-run gaps is kept alongside for
    transparency. Wall times are normalized per record before averaging when a
    ratings table is supplied.
    """
    records = list(records)
    if not records:
        raise MetricsError("no runs to aggregate")
    keys = {(r.solver, r.instance) for r in records}
    if len(keys) != 1:
        raise MetricsError(f"mixed (solver, instance) keys: {sorted(keys)}")
    costs = []
    times = []
    for r in records:
        if r.final_cost is None:
            raise MetricsError(f"run {r.key} has no final cost")
        costs.append(r.final_cost)
        t = r.wall_time
        if ratings is not None:
            t = ratings.normalize_time(t, r.cpu_name)
        times.append(t)
    solver, instance = next(iter(keys))
    avg_cost = sum(costs) / len(costs)
    return RunStats(
        solver=solver,
        instance=instance,
        n_runs=len(records),
        avg_cost=avg_cost,
        best_cost=min(costs),
        worst_cost=max(costs),
        avg_gap=gap(avg_cost, bks),
        best_gap=gap(min(costs), bks),
        worst_gap=gap(max(costs), bks),
        mean_run_gap=sum(gap(c, bks) for c in costs) / len(costs),
        avg_normalized_time=sum(times) / len(times),
    )


# ---------------------------------------------------------------------------
# Trace-based metrics

def _normalized_events(trace) -> list[tuple[float, float]]:
    """Events of a Trace or raw (t, cost) pairs as a monotone incumbent series.

    Raw pairs are sorted by time and filtered to strict improvements, so
    inserting non-improving events never changes any derived metric.
    """
    pairs = list(trace.events) if hasattr(trace, "events") else [tuple(p) for p in trace]
    pairs.sort(key=lambda p: p[0])
    events: list[tuple[float, float]] = []
    for t, cost in pairs:
        if not events or cost < events[-1][1]:
            events.append((t, cost))
    return events


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous step function: value values[k] on [times[k], times[k+1])."""

    times: tuple[float, ...]
    values: tuple[float, ...]

    def __call__(self, t: float) -> float:
        idx = bisect.bisect_right(self.times, t) - 1
        if idx < 0:
            raise MetricsError(f"step function undefined before {self.times[0]}")
        return self.values[idx]

    def integral(self, a: float, b: float) -> float:
        if b < a:
            raise MetricsError("integration bounds reversed")
        total = 0.0
        for k, value in enumerate(self.values):
            lo = max(a, self.times[k])
            hi = b if k + 1 == len(self.times) else min(b, self.times[k + 1])
            if hi > lo:
                total += value * (hi - lo)
        return total


def primal_gap_fn(trace, bks: float) -> StepFunction:
    """Primal gap over time: 1 before the first incumbent, then
    |c(t) - bks| / max(|c(t)|, |bks|, eps) for the current incumbent c(t)."""
    if bks <= 0:
        raise MetricsError(f"BKS must be positive, got {bks}")
    times = [0.0]
    values = [1.0]
    for t, cost in _normalized_events(trace):
        gamma = abs(cost - bks) / max(abs(cost), abs(bks), PRIMAL_GAP_EPS)
        if t <= 0.0:
            times, values = [0.0], [gamma]
        else:
            times.append(t)
            values.append(gamma)
    return StepFunction(times=tuple(times), values=tuple(values))


def primal_integral(trace, bks: float, horizon: float) -> float:
    """Integral of the primal gap from 0 to horizon (gap-seconds, in [0, horizon])."""
    if horizon <= 0:
        raise MetricsError(f"horizon must be positive, got {horizon}")
    return primal_gap_fn(trace, bks).integral(0.0, horizon)


def time_to_best(trace) -> float:
    """Instant at which the final (best) incumbent was found."""
    events = _normalized_events(trace)
    if not events:
        raise MetricsError("empty trace has no time-to-best")
    return events[-1][0]


@dataclass(frozen=True)
class TraceMetrics:
    primal_integral: float
    time_to_best: float
    horizon: float

    def __post_init__(self):
        if not 0 <= self.primal_integral <= self.horizon:
            raise MetricsError("primal integral outside [0, horizon]")
        if not 0 <= self.time_to_best <= self.horizon:
            raise MetricsError("time-to-best outside [0, horizon]")


def trace_metrics(trace, bks: float, horizon: float) -> TraceMetrics:
    return TraceMetrics(
        primal_integral=primal_integral(trace, bks, horizon),
        time_to_best=min(time_to_best(trace), horizon),
        horizon=horizon,
    )


# ---------------------------------------------------------------------------
# Convergence profiles

DEFAULT_PROFILE_CAP = 100.0
DEFAULT_PROFILE_POINTS = 100


def convergence_profile(
    traces: list[tuple[object, float]],
    grid: list[float],
    cap: float = DEFAULT_PROFILE_CAP,
) -> list[tuple[float, float]]:
    """Mean percentage gap of current incumbents at each grid instant.

    Before a trace's first incumbent its gap is undefined; it enters the
    average at `cap` percent so early profile points stay plottable.
    """
    if not grid:
        raise MetricsError("empty time grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise MetricsError("grid must be strictly increasing")
    if not traces:
        raise MetricsError("no traces to profile")
    series = []
    for trace, bks in traces:
        events = _normalized_events(trace)
        series.append(([e[0] for e in events], [e[1] for e in events], bks))
    profile = []
    for t in grid:
        gaps = []
        for times, costs, bks in series:
            idx = bisect.bisect_right(times, t) - 1
            gaps.append(cap if idx < 0 else gap(costs[idx], bks))
        profile.append((t, sum(gaps) / len(gaps)))
    return profile


def log_time_grid(start: float, horizon: float, points: int = DEFAULT_PROFILE_POINTS) -> list[float]:
    """`points` log-spaced instants from start to horizon inclusive."""
    if start <= 0 or horizon <= start:
        raise MetricsError(f"need 0 < start < horizon, got {start}, {horizon}")
    if points < 2:
        raise MetricsError("need at least two grid points")
    lo, hi = math.log(start), math.log(horizon)
    return [math.exp(lo + (hi - lo) * k / (points - 1)) for k in range(points)]


def default_time_grid(traces, horizon: float | None = None, points: int = DEFAULT_PROFILE_POINTS):
    """Log grid spanning the first incumbent events to the horizon."""
    firsts = []
    terminals = []
    for trace in traces:
        events = _normalized_events(trace)
        if events and events[0][0] > 0:
            firsts.append(events[0][0])
        terminals.append(getattr(trace, "terminal_time", events[-1][0] if events else 0.0))
    if horizon is None:
        horizon = max(terminals) if terminals else 0.0
    if horizon <= 0:
        raise MetricsError("cannot build a grid without a positive horizon")
    start = min(firsts) if firsts else horizon / 1000.0
    if start >= horizon:
        start = horizon / 1000.0
    return log_time_grid(start, horizon, points)


# ---------------------------------------------------------------------------
# Boxplot summaries

@dataclass(frozen=True)
class BoxplotStats:
    """Tukey five-number summary (hinges by the median-of-halves rule)."""

    lo_whisker: float
    q1: float
    median: float
    q3: float
    hi_whisker: float
    outliers: tuple[float, ...]


def _median(sorted_values: list[float]) -> float:
    n = len(sorted_values)
    mid = n // 2
    if n % 2:
        return sorted_values[mid]
    return (sorted_values[mid - 1] + sorted_values[mid]) / 2.0


def boxplot_stats(values) -> BoxplotStats:
    """Five-number summary with whiskers at the most extreme points within
    1.5 * IQR of the hinges; points beyond are outliers."""
    values = sorted(values)
    if not values:
        raise MetricsError("no values to summarize")
    n = len(values)
    half = (n + 1) // 2
    q1 = _median(values[:half])
    q3 = _median(values[n - half :])
    iqr = q3 - q1
    lo_fence = q1 - 1.5 * iqr
    hi_fence = q3 + 1.5 * iqr
    inside = [v for v in values if lo_fence <= v <= hi_fence]
    return BoxplotStats(
        lo_whisker=min(inside),
        q1=q1,
        median=_median(values),
        q3=q3,
        hi_whisker=max(inside),
        outliers=tuple(v for v in values if v < lo_fence or v > hi_fence),
    )
