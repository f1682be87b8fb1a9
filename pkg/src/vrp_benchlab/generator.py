"""Seeded CVRP instance generation in the style of modern grid benchmarks.

Determinism contract: every draw comes from the random() double stream of
Python's MT19937 (`random.Random(seed)`) mapped through the fixed inverse
transforms below, so equal GenSpec values yield byte-identical instances
across processes and platforms.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, replace

from .instances import Instance

DEPOT_POSITIONS = ("central", "eccentric", "random")
CUSTOMER_POSITIONS = ("uniform-random", "clustered", "mixed")
DEMAND_KINDS = ("unit", "uniform", "small-large-mix")

# Clustered placement: attachment radius is exponential with mean
# grid_size * CLUSTER_DECAY, truncated at grid_size * CLUSTER_MAX_RADIUS.
# Every clustered customer therefore lies within
# grid_size * CLUSTER_MAX_RADIUS + 1 of its cluster seed (the +1 absorbs
# rounding to integer grid coordinates).
CLUSTER_DECAY = 0.1
CLUSTER_MAX_RADIUS = 0.25

# small-large-mix demands: 50/50 mixture of uniform(1,10) and uniform(50,100).
MIX_SMALL = (1, 10)
MIX_LARGE = (50, 100)


class InfeasibleSpecError(ValueError):
    pass


@dataclass(frozen=True)
class GenSpec:
    """Parameters for one generated instance."""

    n_customers: int
    depot_position: str = "central"
    customer_position: str = "uniform-random"
    n_clusters: int = 3
    demand_kind: str = "unit"
    demand_lo: int = 1
    demand_hi: int = 1
    target_route_size: float = 5.0
    grid_size: int = 1000
    seed: int = 0
    name_prefix: str = "gen"

    def __post_init__(self):
        if self.n_customers < 1:
            raise InfeasibleSpecError("n_customers must be >= 1")
        if self.depot_position not in DEPOT_POSITIONS:
            raise InfeasibleSpecError(f"depot_position must be one of {DEPOT_POSITIONS}")
        if self.customer_position not in CUSTOMER_POSITIONS:
            raise InfeasibleSpecError(f"customer_position must be one of {CUSTOMER_POSITIONS}")
        if self.n_clusters < 1:
            raise InfeasibleSpecError("n_clusters must be >= 1")
        if self.demand_kind not in DEMAND_KINDS:
            raise InfeasibleSpecError(f"demand_kind must be one of {DEMAND_KINDS}")
        if self.demand_kind == "uniform" and not 0 <= self.demand_lo <= self.demand_hi:
            raise InfeasibleSpecError("uniform demands require 0 <= lo <= hi")
        if self.target_route_size < 1:
            raise InfeasibleSpecError("target_route_size must be >= 1")
        if self.grid_size < 2:
            raise InfeasibleSpecError("grid_size must be >= 2")
        if not 0 <= self.seed < 2**64:
            raise InfeasibleSpecError("seed must be a 64-bit unsigned integer")

    @property
    def name(self) -> str:
        return f"{self.name_prefix}-n{self.n_customers}-s{self.seed}"


def _uniform_int(rng: random.Random, lo: int, hi: int) -> int:
    """Integer uniform on [lo, hi], derived from one random() double."""
    return lo + int(rng.random() * (hi - lo + 1)) if hi > lo else lo


def _exponential(rng: random.Random, scale: float) -> float:
    u = rng.random()
    return -scale * math.log(1.0 - u)


def _depot_point(spec: GenSpec, rng: random.Random) -> tuple[int, int]:
    g = spec.grid_size
    if spec.depot_position == "central":
        return (g // 2, g // 2)
    if spec.depot_position == "eccentric":
        return (0, 0)
    return (_uniform_int(rng, 0, g), _uniform_int(rng, 0, g))


def layout_points(spec: GenSpec) -> tuple[tuple[int, int], list[tuple[int, int]], list[tuple[float, float]]]:
    """Deterministic geometry for `spec`: (depot, customer points, cluster seeds).

    Exposed so the clustered-placement radius guarantee can be checked
    against the seed points, which are not part of the emitted instance.
    """
    rng = random.Random(spec.seed)
    g = spec.grid_size
    depot = _depot_point(spec, rng)
    seeds: list[tuple[float, float]] = []
    if spec.customer_position in ("clustered", "mixed"):
        seeds = [(rng.random() * g, rng.random() * g) for _ in range(spec.n_clusters)]
    points: list[tuple[int, int]] = []
    for _ in range(spec.n_customers):
        clustered = spec.customer_position == "clustered" or (
            spec.customer_position == "mixed" and rng.random() < 0.5
        )
        if clustered:
            sx, sy = seeds[_uniform_int(rng, 0, len(seeds) - 1)]
            radius = min(_exponential(rng, CLUSTER_DECAY * g), CLUSTER_MAX_RADIUS * g)
            angle = rng.random() * 2.0 * math.pi
            x = min(max(round(sx + radius * math.cos(angle)), 0), g)
            y = min(max(round(sy + radius * math.sin(angle)), 0), g)
        else:
            x = _uniform_int(rng, 0, g)
            y = _uniform_int(rng, 0, g)
        points.append((x, y))
    return depot, points, seeds


def _draw_demands(spec: GenSpec, rng: random.Random) -> list[int]:
    demands = []
    for _ in range(spec.n_customers):
        if spec.demand_kind == "unit":
            demands.append(1)
        elif spec.demand_kind == "uniform":
            demands.append(_uniform_int(rng, spec.demand_lo, spec.demand_hi))
        else:
            lo, hi = MIX_SMALL if rng.random() < 0.5 else MIX_LARGE
            demands.append(_uniform_int(rng, lo, hi))
    return demands


def generate_instance(spec: GenSpec) -> Instance:
    """Generate one instance; capacity = ceil(target_route_size * mean demand),
    clamped up so every customer fits a vehicle alone."""
    depot, points, _ = layout_points(spec)
    # Demands consume a fresh stream keyed off the layout so adding geometry
    # modes never silently reshuffles demand draws.
    rng = random.Random(spec.seed ^ 0x9E3779B97F4A7C15)
    demands = _draw_demands(spec, rng)
    mean_demand = sum(demands) / len(demands)
    if mean_demand <= 0:
        raise InfeasibleSpecError("all-zero demands leave the capacity undefined")
    capacity = max(math.ceil(spec.target_route_size * mean_demand), max(demands))
    if min(demands) < 1:
        raise InfeasibleSpecError("generated a nonpositive customer demand")
    node_ids = tuple(range(1, spec.n_customers + 2))
    coords = {1: (float(depot[0]), float(depot[1]))}
    demand_map = {1: 0}
    for k, ((x, y), d) in enumerate(zip(points, demands), start=2):
        coords[k] = (float(x), float(y))
        demand_map[k] = d
    return Instance(
        name=spec.name,
        dimension=spec.n_customers + 1,
        capacity=capacity,
        depot_id=1,
        node_ids=node_ids,
        demands=demand_map,
        edge_weight_kind="rounded-euclidean",
        coords=coords,
    )


def generate_suite(base: GenSpec, sizes: list[int], seeds: list[int]) -> list[Instance]:
    """One instance per (size, seed) pair, names carrying n<size>-s<seed>."""
    if not sizes or not seeds:
        raise InfeasibleSpecError("sizes and seeds must be nonempty")
    return [
        generate_instance(replace(base, n_customers=size, seed=seed))
        for size in sizes
        for seed in seeds
    ]


# ---------------------------------------------------------------------------
# Plain-text config (key = value lines)

_INT_KEYS = {"n_customers", "n_clusters", "demand_lo", "demand_hi", "grid_size", "seed"}
_FLOAT_KEYS = {"target_route_size"}


def parse_genspec(text: str) -> GenSpec:
    """Read a GenSpec from `key = value` lines; '#' starts a comment.

    demand_kind accepts the compact form uniform(lo,hi).
    """
    values: dict[str, object] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InfeasibleSpecError(f"line {line_no}: expected key = value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if key == "demand_kind" and value.startswith("uniform(") and value.endswith(")"):
            lo, _, hi = value[len("uniform(") : -1].partition(",")
            values["demand_kind"] = "uniform"
            values["demand_lo"] = int(lo)
            values["demand_hi"] = int(hi)
            continue
        if key in _INT_KEYS:
            values[key] = int(value)
        elif key in _FLOAT_KEYS:
            values[key] = float(value)
        else:
            values[key] = value
    try:
        return GenSpec(**values)  # type: ignore[arg-type]
    except TypeError as exc:
        raise InfeasibleSpecError(str(exc)) from None
