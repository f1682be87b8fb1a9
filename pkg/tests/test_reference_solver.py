import pytest

from vrp_benchlab.generator import GenSpec, generate_instance
from vrp_benchlab.instances import parse_instance
from vrp_benchlab.reference_solver import reference_solve

from oracles import exact_cvrp_optimum, naive_solution_cost

SINGLE = """\
NAME : single
TYPE : CVRP
DIMENSION : 2
EDGE_WEIGHT_TYPE : EUC_2D
CAPACITY : 5
NODE_COORD_SECTION
1 0 0
2 3 4
DEMAND_SECTION
1 0
2 5
DEPOT_SECTION
1
-1
EOF
"""


def test_single_customer_out_and_back():
    inst = parse_instance(SINGLE)
    sol, trace = reference_solve(inst, seed=1, time_limit=0.01)
    assert sol.routes == ((2,),)
    assert sol.cost == 2 * inst.distance(1, 2) == 10
    assert trace.events[-1][1] == 10


def test_same_seed_identical_trace():
    inst = generate_instance(GenSpec(n_customers=25, demand_kind="uniform",
                                     demand_lo=1, demand_hi=9, seed=5))
    _, trace_a = reference_solve(inst, seed=3, time_limit=0.05)
    _, trace_b = reference_solve(inst, seed=3, time_limit=0.05)
    assert trace_a == trace_b
    assert len(trace_a.events) >= 1


def test_feasible_and_monotone_on_random_instances():
    for seed in range(5):
        inst = generate_instance(GenSpec(n_customers=30, customer_position="mixed",
                                         demand_kind="uniform", demand_lo=1, demand_hi=10,
                                         target_route_size=4, seed=seed))
        sol, trace = reference_solve(inst, seed=seed, time_limit=0.05)
        report = inst.validate_solution(sol)
        assert report.feasible, report.violations
        assert sol.cost == naive_solution_cost(inst, sol)
        costs = [c for _, c in trace.events]
        assert costs == sorted(costs, reverse=True)
        assert trace.events[-1][1] == sol.cost
        assert trace.terminal_time >= trace.events[-1][0]


def test_time_limit_scales_trace_horizon():
    inst = generate_instance(GenSpec(n_customers=20, seed=2))
    _, trace = reference_solve(inst, seed=1, time_limit=0.02)
    assert trace.terminal_time == pytest.approx(0.02, abs=1e-6)


def test_near_optimal_on_tiny_instances():
    for seed in range(3):
        inst = generate_instance(GenSpec(n_customers=7, demand_kind="uniform",
                                         demand_lo=1, demand_hi=8, target_route_size=3,
                                         grid_size=100, seed=seed))
        sol, _ = reference_solve(inst, seed=seed, time_limit=0.1)
        optimum = exact_cvrp_optimum(inst)
        assert sol.cost <= optimum * 1.05


def test_rejects_nonpositive_time_limit():
    inst = parse_instance(SINGLE)
    with pytest.raises(ValueError):
        reference_solve(inst, seed=0, time_limit=0)
