"""Command-line interface.

Exit status discipline, stable across subcommands: 0 success, 1 domain-negative
result (infeasible solution, statistically non-equivalent methods), 2 usage or
input error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import warnings

from . import generator, metrics, report, stats
from .instances import (
    BksRegistry,
    DEFAULT_REPOSITORY,
    InstanceError,
    fetch_instances,
    format_instance,
    parse_instance,
    parse_solution,
)
from .orchestrator import (
    OrchestratorError,
    ResultSet,
    parse_plan,
    run_experiment,
)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2

PUBLISHED_HEADER = ["solver", "instance", "avg_cost", "time_seconds", "cpu_name"]


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_registry(path: str) -> BksRegistry:
    return BksRegistry.from_csv(_read(path))


def _load_ratings(args) -> metrics.CpuRatingTable | None:
    if not getattr(args, "ratings", None):
        return None
    return metrics.CpuRatingTable.from_csv(_read(args.ratings), base_cpu=getattr(args, "base_cpu", None))


# ---------------------------------------------------------------------------
# validate

def cmd_validate(args) -> int:
    inst = parse_instance(_read(args.instance))
    sol = parse_solution(_read(args.solution), inst)
    rep = inst.validate_solution(sol)
    print(f"instance {inst.name}: dimension {inst.dimension}, capacity {inst.capacity}")
    print(f"recomputed cost: {rep.recomputed_cost:g}")
    if rep.feasible:
        print("feasible: yes")
        return EXIT_OK
    print("feasible: no")
    for kind, detail in rep.violations:
        print(f"  violation [{kind}] {detail}")
    return EXIT_NEGATIVE


# ---------------------------------------------------------------------------
# generate

def _genspec_from_args(args) -> generator.GenSpec:
    if args.spec:
        return generator.parse_genspec(_read(args.spec))
    kwargs = dict(
        n_customers=args.n,
        depot_position=args.depot,
        customer_position=args.positions,
        n_clusters=args.clusters,
        target_route_size=args.route_size,
        grid_size=args.grid,
        seed=args.seed,
    )
    demand = args.demands
    if demand.startswith("uniform(") and demand.endswith(")"):
        lo, _, hi = demand[len("uniform(") : -1].partition(",")
        kwargs.update(demand_kind="uniform", demand_lo=int(lo), demand_hi=int(hi))
    else:
        kwargs["demand_kind"] = demand
    return generator.GenSpec(**kwargs)


def cmd_generate(args) -> int:
    base = _genspec_from_args(args)
    if args.sizes:
        sizes = [int(s) for s in args.sizes.split(",")]
        seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else [base.seed]
        instances = generator.generate_suite(base, sizes, seeds)
    else:
        instances = [generator.generate_instance(base)]
    os.makedirs(args.out, exist_ok=True)
    for inst in instances:
        path = os.path.join(args.out, f"{inst.name}.vrp")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(format_instance(inst))
        print(path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# run

def cmd_run(args) -> int:
    plan = parse_plan(_read(args.plan), base_dir=os.path.dirname(os.path.abspath(args.plan)))
    before = len(ResultSet.load(args.out)) if os.path.exists(args.out) else 0
    def progress(r):
        print(f"  {r.solver} {r.instance} seed={r.seed}: {r.exit_status} "
              f"cost={r.final_cost} t={r.wall_time:.3f}s")

    results = run_experiment(plan, args.out, on_record=progress if args.verbose else None)
    print(f"{args.out}: {len(results)} records ({len(results) - before} new)")
    crashed = [r for r in results if r.exit_status == "crash"]
    for record in crashed:
        print(f"  crash {record.key}: {record.error}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# fetch

def cmd_fetch(args) -> int:
    pairs = fetch_instances(
        args.source_url, args.names, cache_dir=args.cache_dir, offline=args.offline
    )
    rows = []
    for inst, bks in pairs:
        print(f"{inst.name}: dimension {inst.dimension}, capacity {inst.capacity}, "
              f"bks {bks if bks is not None else 'n/a'}")
        if bks is not None:
            rows.append((inst.name, bks))
    if args.bks_out and rows:
        reg = BksRegistry({name: (value, args.source_url) for name, value in rows})
        with open(args.bks_out, "w", encoding="utf-8") as fh:
            fh.write(reg.to_csv())
        print(f"wrote {args.bks_out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# shared results ingestion (ResultSet files or published tables)

def _load_published(path: str, ratings: metrics.CpuRatingTable | None, registry: BksRegistry):
    """Published aggregate rows -> RunStats (one pseudo-run per row)."""
    out = []
    with open(path, encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip().lower() for h in next(reader)]
        if header != PUBLISHED_HEADER:
            raise InstanceError(f"{path}: published table header must be {','.join(PUBLISHED_HEADER)}")
        for row in reader:
            if not row or not row[0].strip():
                continue
            solver, instance = row[0].strip(), row[1].strip()
            avg_cost, seconds, cpu = float(row[2]), float(row[3]), row[4].strip()
            if ratings is not None:
                if cpu not in ratings.ratings:
                    warnings.warn(f"{path}: skipping {solver}/{instance}: unrated CPU {cpu!r}")
                    continue
                seconds = ratings.normalize_time(seconds, cpu)
            bks = registry.lookup(instance)
            g = metrics.gap(avg_cost, bks)
            out.append(
                metrics.RunStats(
                    solver=solver, instance=instance, n_runs=1,
                    avg_cost=avg_cost, best_cost=avg_cost, worst_cost=avg_cost,
                    avg_gap=g, best_gap=g, worst_gap=g, mean_run_gap=g,
                    avg_normalized_time=seconds,
                )
            )
    return out


def _load_stats(paths, registry: BksRegistry, ratings) -> tuple[list[metrics.RunStats], list]:
    """Aggregate every results input into RunStats; also returns raw records
    (for trace-based charts; published tables contribute none).

    JSONL records are pooled across files before grouping, so sharded result
    sets of one experiment merge cleanly.
    """
    all_stats: list[metrics.RunStats] = []
    pool = ResultSet()
    for path in paths:
        if path.endswith(".csv"):
            all_stats.extend(_load_published(path, ratings, registry))
        else:
            pool.records.extend(ResultSet.load(path))
    usable = []
    for solver in pool.solvers():
        for instance in pool.instances():
            group = [r for r in pool.group(solver, instance) if r.final_cost is not None]
            dropped = len(pool.group(solver, instance)) - len(group)
            if dropped:
                warnings.warn(f"{solver}/{instance}: ignoring {dropped} run(s) with no cost")
            if not group:
                continue
            all_stats.append(metrics.aggregate_runs(group, registry.lookup(instance), ratings))
            usable.extend(group)
    return all_stats, usable


def _gap_vectors(stats_list: list[metrics.RunStats]):
    """Per-solver {instance: avg_gap} maps, solver order preserved."""
    by_solver: dict[str, dict[str, float]] = {}
    for stat in stats_list:
        by_solver.setdefault(stat.solver, {})[stat.instance] = stat.avg_gap
    return by_solver


# ---------------------------------------------------------------------------
# compare

def _compare_gap_table(args) -> list[str]:
    """Paired-gap CSV (instance,gap_a,gap_b) -> full signed-rank report."""
    a, b = [], []
    with open(args.gaps, encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip().lower() for h in next(reader)]
        if header[:1] != ["instance"] or len(header) != 3:
            raise InstanceError(f"{args.gaps}: header must be instance,gap_a,gap_b")
        name_a, name_b = header[1], header[2]
        for row in reader:
            if not row or not row[0].strip():
                continue
            a.append(float(row[1]))
            b.append(float(row[2]))
    two_sided = stats.wilcoxon_test(a, b, stats.TestConfig(alternative="two-sided"))
    print(f"n = {len(a)} pairs, n_effective = {two_sided.n_effective}, "
          f"W+ = {two_sided.w_plus:g}, W- = {two_sided.w_minus:g} "
          f"({two_sided.mode_used}{', ties' if two_sided.ties_present else ''})")
    decision = stats.compare_protocol(a, b, args.alpha0, args.n_comparisons)
    verdict = {
        "equivalent": "not statistically different",
        "a-better": f"{name_a} statistically better",
        "a-worse": f"{name_a} statistically worse",
        "different-undirected": "different, direction unresolved",
    }[decision.outcome]
    print(f"{name_a} vs {name_b}: p(H0) = {decision.p_h0:.6g}, p(H1) = {decision.p_h1:.6g} "
          f"-> {decision.outcome} ({verdict})")
    return [decision.outcome]


def cmd_compare(args) -> int:
    alpha = stats.bonferroni(args.alpha0, args.n_comparisons)
    print(f"adjusted alpha = {args.alpha0} / {args.n_comparisons} = {alpha:g}")
    decisions: list[str] = []

    if args.gaps:
        try:
            decisions = _compare_gap_table(args)
        except stats.AllZeroDifferencesError:
            print("identical gap vectors -> equivalent (methods indistinguishable)")
            decisions = ["equivalent"]
    elif args.pvalues:
        with open(args.pvalues, encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = [h.strip().lower() for h in next(reader)]
            if header != ["comparison", "p_h0", "p_h1"]:
                raise InstanceError(f"{args.pvalues}: header must be comparison,p_h0,p_h1")
            for row in reader:
                if not row or not row[0].strip():
                    continue
                outcome = stats.decide_outcome(float(row[1]), float(row[2]), alpha)
                decisions.append(outcome)
                print(f"{row[0].strip()}: p(H0) = {row[1].strip()}, p(H1) = {row[2].strip()} "
                      f"-> {outcome}")
    else:
        registry = _load_registry(args.bks)
        ratings = _load_ratings(args)
        stats_list, _ = _load_stats(args.results, registry, ratings)
        table = report.build_results_table(stats_list, registry)
        print(report.results_table_text(table))
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(report.results_table_csv(table))
            print(f"wrote {args.out}")
        if args.stats_out:
            with open(args.stats_out, "w", encoding="utf-8") as fh:
                fh.write(metrics.run_stats_csv(stats_list))
            print(f"wrote {args.stats_out}")
        by_solver = _gap_vectors(stats_list)
        solvers = list(by_solver)
        if len(solvers) < 2:
            print("only one solver present; nothing to compare")
            return EXIT_OK
        baseline = args.baseline or solvers[0]
        if baseline not in by_solver:
            raise InstanceError(f"baseline solver {baseline!r} not in results")
        for other in solvers:
            if other == baseline:
                continue
            shared = sorted(set(by_solver[baseline]) & set(by_solver[other]))
            if len(shared) < 2:
                warnings.warn(f"skipping {baseline} vs {other}: fewer than 2 shared instances")
                continue
            a = [by_solver[baseline][i] for i in shared]
            b = [by_solver[other][i] for i in shared]
            try:
                decision = stats.compare_protocol(a, b, args.alpha0, args.n_comparisons)
            except stats.AllZeroDifferencesError:
                decision = stats.Decision(p_h0=1.0, p_h1=1.0, alpha_adjusted=alpha, outcome="equivalent")
            decisions.append(decision.outcome)
            verdict = {
                "equivalent": "not statistically different",
                "a-better": f"{baseline} statistically better",
                "a-worse": f"{baseline} statistically worse",
                "different-undirected": "different, direction unresolved",
            }[decision.outcome]
            print(f"{baseline} vs {other} (n={len(shared)}): p(H0) = {decision.p_h0:.6g}, "
                  f"p(H1) = {decision.p_h1:.6g} -> {decision.outcome} ({verdict})")

    return EXIT_OK if all(d == "equivalent" for d in decisions) else EXIT_NEGATIVE


# ---------------------------------------------------------------------------
# charts

def _performance_points(stats_list: list[metrics.RunStats]) -> list[report.AlgoPoint]:
    by_solver: dict[str, list[metrics.RunStats]] = {}
    for stat in stats_list:
        by_solver.setdefault(stat.solver, []).append(stat)
    points = []
    for solver, group in by_solver.items():
        mean_gap = sum(s.avg_gap for s in group) / len(group)
        mean_minutes = sum(s.avg_normalized_time for s in group) / len(group) / 60.0
        points.append(report.AlgoPoint(name=solver, avg_time=mean_minutes, avg_gap=mean_gap))
    return points


def cmd_charts(args) -> int:
    registry = _load_registry(args.bks)
    ratings = _load_ratings(args)
    stats_list, records = _load_stats(args.results, registry, ratings)
    os.makedirs(args.out, exist_ok=True)
    base = os.path.join(args.out, args.kind)

    if args.kind == "performance":
        paths = report.write_performance_chart(_performance_points(stats_list), base)
    elif args.kind == "boxplot":
        by_solver = _gap_vectors(stats_list)
        groups = [
            (solver, metrics.boxplot_stats(list(gaps.values())))
            for solver, gaps in by_solver.items()
        ]
        paths = report.write_boxplots(groups, base)
    else:  # convergence
        by_solver_traces: dict[str, list[tuple[object, float]]] = {}
        horizon = 0.0
        for record in records:
            if len(record.trace.events) < 2:
                warnings.warn(
                    f"excluding single-event trace {record.key} from the convergence chart"
                )
                continue
            by_solver_traces.setdefault(record.solver, []).append(
                (record.trace, registry.lookup(record.instance))
            )
            horizon = max(horizon, record.trace.terminal_time)
        if not by_solver_traces:
            print("no multi-event traces available for a convergence chart", file=sys.stderr)
            return EXIT_USAGE
        all_traces = [t for traces in by_solver_traces.values() for t, _ in traces]
        grid = metrics.default_time_grid(all_traces, horizon=horizon, points=args.points)
        profiles = [
            (solver, metrics.convergence_profile(traces, grid))
            for solver, traces in by_solver_traces.items()
        ]
        paths = report.write_convergence_chart(profiles, base)
    for path in paths:
        print(path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vrp-benchlab",
        description="Benchmarking harness for CVRP solvers: instances, runs, metrics, statistics, charts.",
    )
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="print per-run progress where applicable")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("validate", help="check a solution file against an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("generate", help="generate seeded benchmark-style instances")
    p.add_argument("--spec", help="GenSpec config file (key = value lines)")
    p.add_argument("--n", type=int, default=20, help="number of customers")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depot", default="central", choices=generator.DEPOT_POSITIONS)
    p.add_argument("--positions", default="uniform-random", choices=generator.CUSTOMER_POSITIONS)
    p.add_argument("--clusters", type=int, default=3)
    p.add_argument("--demands", default="unit", help="unit | uniform(lo,hi) | small-large-mix")
    p.add_argument("--route-size", type=float, default=5.0)
    p.add_argument("--grid", type=int, default=1000)
    p.add_argument("--sizes", help="comma-separated sizes for a suite")
    p.add_argument("--seeds", help="comma-separated seeds for a suite")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="execute an experiment plan with resume")
    p.add_argument("--plan", required=True)
    p.add_argument("--out", default="results.jsonl")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("fetch", help="download instances into the cache")
    p.add_argument("--names", nargs="+", required=True)
    p.add_argument("--cache-dir", default=".vrp-cache")
    p.add_argument("--source-url", default=DEFAULT_REPOSITORY)
    p.add_argument("--offline", action="store_true")
    p.add_argument("--bks-out", help="write recomputed best-known values as a registry CSV")
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("compare", help="results table plus Wilcoxon comparison protocol")
    p.add_argument("--results", nargs="+", default=[],
                   help="ResultSet .jsonl files and/or published-aggregate .csv tables")
    p.add_argument("--gaps", help="paired-gap CSV (instance,gap_a,gap_b) to test directly")
    p.add_argument("--pvalues", help="CSV of precomputed comparison,p_h0,p_h1 rows")
    p.add_argument("--bks", help="BKS registry CSV (required with --results)")
    p.add_argument("--alpha0", type=float, default=0.025)
    p.add_argument("--n-comparisons", type=int, default=2)
    p.add_argument("--baseline", help="reference solver (default: first in the results)")
    p.add_argument("--ratings", help="CPU ratings CSV for time normalization")
    p.add_argument("--base-cpu", help="override the base CPU designated in the ratings file")
    p.add_argument("--out", help="also write the results table as CSV to this path")
    p.add_argument("--stats-out", help="write per-(solver, instance) metrics as CSV")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("charts", help="render a chart (SVG + CSV sidecar)")
    p.add_argument("--results", nargs="+", required=True)
    p.add_argument("--bks", required=True)
    p.add_argument("--kind", required=True, choices=["performance", "convergence", "boxplot"])
    p.add_argument("--ratings")
    p.add_argument("--base-cpu")
    p.add_argument("--points", type=int, default=metrics.DEFAULT_PROFILE_POINTS)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_charts)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.subcommand == "compare" and not (args.results or args.pvalues or args.gaps):
        print("error: compare needs --results, --gaps or --pvalues", file=sys.stderr)
        return EXIT_USAGE
    if args.subcommand == "compare" and args.results and not args.bks:
        print("error: --results requires --bks", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (
        InstanceError,
        OrchestratorError,
        metrics.MetricsError,
        stats.StatsError,
        report.ReportError,
        generator.InfeasibleSpecError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
