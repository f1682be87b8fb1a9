import math
import subprocess
import sys

import pytest
from hypothesis import given, settings, strategies as st

from vrp_benchlab.generator import (
    CLUSTER_MAX_RADIUS,
    GenSpec,
    InfeasibleSpecError,
    generate_instance,
    generate_suite,
    layout_points,
    parse_genspec,
)
from vrp_benchlab.instances import format_instance, parse_instance


def test_unit_demand_capacity():
    inst = generate_instance(GenSpec(n_customers=20, demand_kind="unit", target_route_size=5))
    assert inst.capacity == 5  # ceil(5 * 1)
    assert inst.dimension == 21


def test_same_spec_same_bytes():
    spec = GenSpec(n_customers=30, customer_position="clustered", demand_kind="uniform",
                   demand_lo=1, demand_hi=10, seed=7)
    a = format_instance(generate_instance(spec))
    b = format_instance(generate_instance(spec))
    assert a == b


def test_determinism_across_process_restart(tmp_path):
    spec_line = ("GenSpec(n_customers=25, customer_position='mixed', demand_kind='uniform', "
                 "demand_lo=2, demand_hi=9, target_route_size=4.0, seed=123)")
    prog = (
        "from vrp_benchlab.generator import GenSpec, generate_instance\n"
        "from vrp_benchlab.instances import format_instance\n"
        f"print(format_instance(generate_instance({spec_line})), end='')\n"
    )
    out = subprocess.run([sys.executable, "-c", prog], capture_output=True, text=True, check=True)
    here = format_instance(generate_instance(eval(spec_line)))
    assert out.stdout == here


def test_capacity_matches_emitted_demand_mean():
    spec = GenSpec(n_customers=100, demand_kind="uniform", demand_lo=1, demand_hi=10,
                   target_route_size=10, seed=42)
    text = format_instance(generate_instance(spec))
    section = text.split("DEMAND_SECTION\n")[1].split("DEPOT_SECTION")[0]
    demands = [int(line.split()[1]) for line in section.strip().splitlines()]
    assert demands[0] == 0
    customers = demands[1:]
    expected = max(math.ceil(10 * sum(customers) / len(customers)), max(customers))
    assert parse_instance(text).capacity == expected


def test_coordinates_inside_grid_and_instance_valid():
    spec = GenSpec(n_customers=50, customer_position="mixed", demand_kind="small-large-mix",
                   grid_size=200, seed=3)
    inst = generate_instance(spec)
    for x, y in inst.coords.values():
        assert 0 <= x <= 200
        assert 0 <= y <= 200
    assert parse_instance(format_instance(inst)) == inst


def test_clustered_customers_near_some_seed():
    spec = GenSpec(n_customers=80, customer_position="clustered", n_clusters=4,
                   grid_size=1000, seed=11)
    _, points, seeds = layout_points(spec)
    bound = CLUSTER_MAX_RADIUS * spec.grid_size + 1
    for x, y in points:
        nearest = min(math.hypot(x - sx, y - sy) for sx, sy in seeds)
        assert nearest <= bound


def test_depot_modes():
    central = generate_instance(GenSpec(n_customers=5, depot_position="central", grid_size=100))
    assert central.coords[central.depot_id] == (50.0, 50.0)
    corner = generate_instance(GenSpec(n_customers=5, depot_position="eccentric", grid_size=100))
    assert corner.coords[corner.depot_id] == (0.0, 0.0)


def test_suite_cardinality_and_names():
    base = GenSpec(n_customers=10, seed=0)
    suite = generate_suite(base, sizes=[20, 50], seeds=[1, 2])
    assert len(suite) == 4
    names = [inst.name for inst in suite]
    assert len(set(names)) == 4
    assert "gen-n20-s1" in names
    assert all(f"n{size}-s{seed}" in name
               for name, (size, seed) in zip(names, [(20, 1), (20, 2), (50, 1), (50, 2)]))


def test_suite_empty_sizes_rejected():
    with pytest.raises(InfeasibleSpecError):
        generate_suite(GenSpec(n_customers=10), sizes=[], seeds=[1])


@pytest.mark.parametrize("kwargs", [
    dict(n_customers=0),
    dict(n_customers=5, depot_position="elsewhere"),
    dict(n_customers=5, demand_kind="uniform", demand_lo=9, demand_hi=2),
    dict(n_customers=5, target_route_size=0.5),
    dict(n_customers=5, grid_size=1),
    dict(n_customers=5, seed=-1),
])
def test_invalid_specs_rejected(kwargs):
    with pytest.raises(InfeasibleSpecError):
        GenSpec(**kwargs)


def test_zero_demand_spec_infeasible():
    spec = GenSpec(n_customers=5, demand_kind="uniform", demand_lo=0, demand_hi=0)
    with pytest.raises(InfeasibleSpecError):
        generate_instance(spec)


def test_parse_genspec_config():
    spec = parse_genspec(
        """
        # suite base
        n_customers = 40
        customer_position = clustered
        n_clusters = 5
        demand_kind = uniform(1,10)
        target_route_size = 8
        seed = 99
        """
    )
    assert spec.n_customers == 40
    assert spec.demand_kind == "uniform"
    assert (spec.demand_lo, spec.demand_hi) == (1, 10)
    assert spec.seed == 99


def test_parse_genspec_bad_line():
    with pytest.raises(InfeasibleSpecError):
        parse_genspec("n_customers 40")


@settings(max_examples=25, deadline=None)
@given(
    n=st.integers(min_value=1, max_value=40),
    position=st.sampled_from(["uniform-random", "clustered", "mixed"]),
    demand=st.sampled_from(["unit", "uniform", "small-large-mix"]),
    seed=st.integers(min_value=0, max_value=2**64 - 1),
)
def test_generated_instances_always_valid_and_deterministic(n, position, demand, seed):
    spec = GenSpec(n_customers=n, customer_position=position, demand_kind=demand,
                   demand_lo=1, demand_hi=12, target_route_size=3.0, grid_size=100, seed=seed)
    inst = generate_instance(spec)
    assert inst.dimension == n + 1
    assert max(inst.demands.values()) <= inst.capacity
    assert format_instance(generate_instance(spec)) == format_instance(inst)
