"""Results tables, performance charts with Pareto fronts, convergence
profiles, and boxplot panels.

Charts are matplotlib figures rendered to SVG with a pinned hash salt and no
date metadata, so identical inputs produce byte-identical documents; every
chart writer also emits a comma-separated sidecar with the plotted data.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from decimal import Decimal, ROUND_HALF_UP

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .instances import BksRegistry
from .metrics import BoxplotStats, RunStats, gap

# A group lands in its own boxplot panel when its median exceeds
# PANEL_SPLIT_FACTOR times every other group's maximum value.
PANEL_SPLIT_FACTOR = 5.0

_SVG_RC = {
    "svg.hashsalt": "vrp-benchlab",  # pinned so identical inputs give identical bytes
    "svg.fonttype": "none",  # keep labels as text elements, not glyph outlines
    "figure.max_open_warning": 0,
}
_LINESTYLES = ("-", "--", "-.", ":")


class ReportError(ValueError):
    pass


def format_gap(value: float) -> str:
    """Two decimals, round half up (the presentation used in results tables)."""
    return str(Decimal(repr(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


# ---------------------------------------------------------------------------
# Results table

@dataclass(frozen=True)
class ResultsTable:
    """Per-instance BKS plus (Avg, Gap) per solver, with a mean-gap footer."""

    solvers: tuple[str, ...]
    instances: tuple[str, ...]
    bks: tuple[float, ...]
    cells: tuple[tuple[tuple[float, float] | None, ...], ...]  # [row][solver] = (avg, gap)
    mean_gaps: tuple[float | None, ...]


def build_results_table(stats: list[RunStats], registry: BksRegistry) -> ResultsTable:
    """Arrange aggregated stats into the standard results-table shape."""
    solvers: list[str] = []
    instances: list[str] = []
    by_cell: dict[tuple[str, str], RunStats] = {}
    for stat in stats:
        if stat.solver not in solvers:
            solvers.append(stat.solver)
        if stat.instance not in instances:
            instances.append(stat.instance)
        key = (stat.solver, stat.instance)
        if key in by_cell:
            raise ReportError(f"duplicate-cell: {key} appears twice")
        by_cell[key] = stat
    if not by_cell:
        raise ReportError("no stats to tabulate")
    bks_values = []
    for instance in instances:
        if instance not in registry:
            raise ReportError(f"missing-bks: no entry for {instance!r}")
        bks_values.append(registry.lookup(instance))
    rows = []
    for instance, bks in zip(instances, bks_values):
        row = []
        for solver in solvers:
            stat = by_cell.get((solver, instance))
            row.append(None if stat is None else (stat.avg_cost, gap(stat.avg_cost, bks)))
        rows.append(tuple(row))
    means = []
    for s, _ in enumerate(solvers):
        gaps = [row[s][1] for row in rows if row[s] is not None]
        means.append(sum(gaps) / len(gaps) if gaps else None)
    return ResultsTable(
        solvers=tuple(solvers),
        instances=tuple(instances),
        bks=tuple(bks_values),
        cells=tuple(rows),
        mean_gaps=tuple(means),
    )


def results_table_text(table: ResultsTable) -> str:
    headers = ["Instance", "BKS"]
    for solver in table.solvers:
        headers += [f"{solver} Avg", f"{solver} Gap"]
    rows = [headers]
    for instance, bks, cells in zip(table.instances, table.bks, table.cells):
        row = [instance, f"{bks:g}"]
        for cell in cells:
            row += ["-", "-"] if cell is None else [f"{cell[0]:g}", format_gap(cell[1])]
        rows.append(row)
    footer = ["Mean", ""]
    for mean in table.mean_gaps:
        footer += ["", "-" if mean is None else format_gap(mean)]
    rows.append(footer)
    widths = [max(len(row[c]) for row in rows) for c in range(len(headers))]
    lines = []
    for r, row in enumerate(rows):
        lines.append("  ".join(cell.rjust(w) if c else cell.ljust(w)
                               for c, (cell, w) in enumerate(zip(row, widths))))
        if r == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def results_table_csv(table: ResultsTable) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    header = ["instance", "bks"]
    for solver in table.solvers:
        header += [f"avg_{solver}", f"gap_{solver}"]
    writer.writerow(header)
    for instance, bks, cells in zip(table.instances, table.bks, table.cells):
        row = [instance, repr(float(bks))]
        for cell in cells:
            row += ["", ""] if cell is None else [repr(float(cell[0])), format_gap(cell[1])]
        writer.writerow(row)
    footer = ["mean", ""]
    for mean in table.mean_gaps:
        footer += ["", "" if mean is None else format_gap(mean)]
    writer.writerow(footer)
    return out.getvalue()


# ---------------------------------------------------------------------------
# Performance chart and Pareto front

@dataclass(frozen=True)
class AlgoPoint:
    """One algorithm in (average normalized minutes, average % gap) space."""

    name: str
    avg_time: float
    avg_gap: float

    def __post_init__(self):
        if self.avg_time < 0:
            raise ReportError(f"{self.name}: negative average time")


def pareto_front(points: list[AlgoPoint]) -> tuple[tuple[AlgoPoint, ...], tuple[AlgoPoint, ...]]:
    """Partition points into (nondominated, dominated).

    p dominates q when p is no worse in both coordinates and strictly better
    in at least one; coincident points therefore stay nondominated.
    """
    if not points:
        raise ReportError("no points given")

    def dominates(p: AlgoPoint, q: AlgoPoint) -> bool:
        return (
            p.avg_time <= q.avg_time
            and p.avg_gap <= q.avg_gap
            and (p.avg_time < q.avg_time or p.avg_gap < q.avg_gap)
        )

    nondominated = tuple(p for p in points if not any(dominates(q, p) for q in points))
    dominated = tuple(p for p in points if any(dominates(q, p) for q in points))
    return nondominated, dominated


def _render_svg(fig) -> bytes:
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def render_performance_chart(points: list[AlgoPoint]) -> bytes:
    """Scatter of labeled algorithm points with the Pareto front polyline."""
    front, _ = pareto_front(points)
    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(6.4, 4.8))
        if len(front) > 1:
            chain = sorted(front, key=lambda p: (p.avg_time, p.avg_gap))
            ax.plot(
                [p.avg_time for p in chain],
                [p.avg_gap for p in chain],
                color="black",
                linewidth=1.2,
                zorder=1,
                label="Pareto front",
            )
        ax.scatter(
            [p.avg_time for p in points],
            [p.avg_gap for p in points],
            marker="*",
            s=90,
            color="black",
            zorder=2,
        )
        for p in points:
            ax.annotate(
                f"{p.name}\n({p.avg_time:.2f}, {p.avg_gap:.2f})",
                (p.avg_time, p.avg_gap),
                textcoords="offset points",
                xytext=(4, 4),
                fontsize=7,
            )
        ax.set_xlabel("Average time (min)")
        ax.set_ylabel("Average % gap")
        ax.yaxis.grid(True, linestyle="--", linewidth=0.5)
        if len(front) > 1:
            ax.legend(fontsize=8)
        fig.tight_layout()
        return _render_svg(fig)


def performance_chart_csv(points: list[AlgoPoint]) -> str:
    front, _ = pareto_front(points)
    on_front = {p.name for p in front}
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["name", "avg_time_min", "avg_gap_percent", "pareto_optimal"])
    for p in points:
        writer.writerow([p.name, repr(p.avg_time), repr(p.avg_gap), str(p.name in on_front).lower()])
    return out.getvalue()


# ---------------------------------------------------------------------------
# Convergence profile chart

def _check_shared_grid(profiles: list[tuple[str, list[tuple[float, float]]]]):
    if not profiles:
        raise ReportError("no profiles given")
    grid0 = [t for t, _ in profiles[0][1]]
    for name, profile in profiles[1:]:
        if [t for t, _ in profile] != grid0:
            raise ReportError(f"grid-mismatch: profile {name!r} uses a different time grid")
    return grid0


def render_convergence_chart(profiles: list[tuple[str, list[tuple[float, float]]]]) -> bytes:
    """One polyline per algorithm over a shared time grid."""
    _check_shared_grid(profiles)
    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(6.4, 4.8))
        for k, (name, profile) in enumerate(profiles):
            ax.plot(
                [t for t, _ in profile],
                [g for _, g in profile],
                linestyle=_LINESTYLES[k % len(_LINESTYLES)],
                color="black",
                linewidth=1.2,
                label=name,
            )
        ax.set_xlabel("Time (sec)")
        ax.set_ylabel("Average % gap")
        ax.set_xscale("log")
        ax.yaxis.grid(True, linestyle="--", linewidth=0.5)
        ax.legend(fontsize=8)
        fig.tight_layout()
        return _render_svg(fig)


def convergence_chart_csv(profiles: list[tuple[str, list[tuple[float, float]]]]) -> str:
    grid = _check_shared_grid(profiles)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["t_seconds"] + [name for name, _ in profiles])
    for k, t in enumerate(grid):
        writer.writerow([repr(t)] + [repr(profile[k][1]) for _, profile in profiles])
    return out.getvalue()


# ---------------------------------------------------------------------------
# Boxplots

def _group_max(stats: BoxplotStats) -> float:
    return max((stats.hi_whisker, *stats.outliers))


def split_panels(groups: list[tuple[str, BoxplotStats]]) -> tuple[list[int], list[int]]:
    """Indices of (main panel, overflow panel) groups under the split rule."""
    if len(groups) < 2:
        return list(range(len(groups))), []
    overflow = []
    for k, (_, stats) in enumerate(groups):
        other_max = max(_group_max(s) for j, (_, s) in enumerate(groups) if j != k)
        if stats.median > PANEL_SPLIT_FACTOR * other_max:
            overflow.append(k)
    if len(overflow) == len(groups):
        overflow = []
    main = [k for k in range(len(groups)) if k not in overflow]
    return main, overflow


def render_boxplots(groups: list[tuple[str, BoxplotStats]]) -> bytes:
    """Box-and-whisker glyphs from precomputed five-number summaries.

    A group whose median dwarfs every other group's maximum (the 5x rule)
    moves to a second panel with its own y-axis.
    """
    if not groups:
        raise ReportError("no groups given")
    main, overflow = split_panels(groups)

    def bxp_dict(name: str, s: BoxplotStats) -> dict:
        return {
            "label": name,
            "med": s.median,
            "q1": s.q1,
            "q3": s.q3,
            "whislo": s.lo_whisker,
            "whishi": s.hi_whisker,
            "fliers": list(s.outliers),
        }

    with plt.rc_context(_SVG_RC):
        if overflow:
            fig, axes = plt.subplots(
                1, 2, figsize=(6.4, 4.8), width_ratios=[max(len(main), 1), len(overflow)]
            )
            panels = [(axes[0], main), (axes[1], overflow)]
        else:
            fig, ax = plt.subplots(figsize=(6.4, 4.8))
            panels = [(ax, main)]
        for ax, members in panels:
            if not members:
                continue
            ax.bxp(
                [bxp_dict(*groups[k]) for k in members],
                showfliers=True,
                medianprops={"color": "black", "linewidth": 2.0},
                boxprops={"color": "black"},
                flierprops={"marker": "o", "markersize": 3},
            )
            ax.set_ylabel("Average % gap")
            ax.yaxis.grid(True, linestyle="--", linewidth=0.5)
        fig.tight_layout()
        return _render_svg(fig)


def boxplot_csv(groups: list[tuple[str, BoxplotStats]]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["name", "lo_whisker", "q1", "median", "q3", "hi_whisker", "outliers"])
    for name, s in groups:
        writer.writerow(
            [name, repr(s.lo_whisker), repr(s.q1), repr(s.median), repr(s.q3),
             repr(s.hi_whisker), ";".join(repr(v) for v in s.outliers)]
        )
    return out.getvalue()


# ---------------------------------------------------------------------------
# File writers (figure + sidecar)

def _write(path: str, data: bytes | str):
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(path, mode) as fh:
        fh.write(data)


def write_performance_chart(points: list[AlgoPoint], out_base: str) -> list[str]:
    paths = [f"{out_base}.svg", f"{out_base}.csv"]
    _write(paths[0], render_performance_chart(points))
    _write(paths[1], performance_chart_csv(points))
    return paths


def write_convergence_chart(profiles, out_base: str) -> list[str]:
    paths = [f"{out_base}.svg", f"{out_base}.csv"]
    _write(paths[0], render_convergence_chart(profiles))
    _write(paths[1], convergence_chart_csv(profiles))
    return paths


def write_boxplots(groups, out_base: str) -> list[str]:
    paths = [f"{out_base}.svg", f"{out_base}.csv"]
    _write(paths[0], render_boxplots(groups))
    _write(paths[1], boxplot_csv(groups))
    return paths
