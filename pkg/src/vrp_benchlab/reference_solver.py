"""Built-in CVRP heuristic: Clarke-Wright savings construction followed by
first-improvement relocate + 2-opt local search, restarted with seeded
perturbations until the time budget is spent.

Time is metered deterministically: the solver counts candidate-move
evaluations and converts them to seconds at WORK_UNITS_PER_SECOND. It never
reads the wall clock, so one (instance, seed, time_limit) triple always yields
the identical trace, which is what makes whole-pipeline runs reproducible.
The calibration is conservative for current hardware, so real elapsed time
normally stays at or below the nominal limit.
"""

from __future__ import annotations

import math
import random

from .instances import Instance, Solution
from .orchestrator import Trace

WORK_UNITS_PER_SECOND = 250_000

_EPS = 1e-9


class _BudgetExhausted(Exception):
    pass


class _Search:
    def __init__(self, inst: Instance, seed: int, time_limit: float):
        self.inst = inst
        self.ids = (inst.depot_id,) + inst.customers
        m = len(self.ids) - 1
        self.m = m
        self.dem = [0] + [inst.demands[self.ids[k]] for k in range(1, m + 1)]
        self.cap = inst.capacity
        self.dist = [
            [inst.distance(self.ids[a], self.ids[b]) for b in range(m + 1)] for a in range(m + 1)
        ]
        self.rng = random.Random(seed)
        self.units = 0
        self.budget = max(1, int(time_limit * WORK_UNITS_PER_SECOND))
        self.time_limit = time_limit
        self.best_routes: list[list[int]] = []
        self.best_cost = math.inf
        self.cur_cost = math.inf  # delta-tracked cost of the working solution
        self.events: list[tuple[float, float]] = []

    def tick(self, k: int = 1):
        self.units += k
        if self.units >= self.budget:
            raise _BudgetExhausted

    def now(self) -> float:
        return self.units / WORK_UNITS_PER_SECOND

    def total_cost(self, routes: list[list[int]]) -> float:
        d = self.dist
        total = 0
        for route in routes:
            prev = 0
            for c in route:
                total += d[prev][c]
                prev = c
            total += d[prev][0]
        return total

    def record_if_best(self, routes: list[list[int]]):
        cost = self.total_cost(routes)
        self.cur_cost = cost
        if cost < self.best_cost - _EPS:
            self.best_cost = cost
            self.best_routes = [route[:] for route in routes if route]
            self.events.append((self.now(), cost))

    def maybe_record(self, routes: list[list[int]]):
        """Record a new incumbent; cheap unless the tracked cost beats the best."""
        if self.cur_cost < self.best_cost - _EPS:
            self.record_if_best(routes)

    # -- construction ------------------------------------------------------

    def clarke_wright(self) -> tuple[list[list[int]], list[int]]:
        d = self.dist
        routes = [[c] for c in range(1, self.m + 1)]
        loads = [self.dem[c] for c in range(1, self.m + 1)]
        where = {c: c - 1 for c in range(1, self.m + 1)}
        savings = []
        for i in range(1, self.m + 1):
            for j in range(i + 1, self.m + 1):
                s = d[0][i] + d[0][j] - d[i][j]
                if s > 0:
                    savings.append((s, i, j))
        self.tick(max(1, self.m * self.m // 2))
        savings.sort(key=lambda t: (-t[0], t[1], t[2]))
        for _, i, j in savings:
            self.tick()
            ri, rj = where[i], where[j]
            if ri == rj or loads[ri] + loads[rj] > self.cap:
                continue
            a, b = routes[ri], routes[rj]
            if a[0] == i:
                a.reverse()
            if b[-1] == j:
                b.reverse()
            if a[-1] != i or b[0] != j:
                continue
            a.extend(b)
            for c in b:
                where[c] = ri
            loads[ri] += loads[rj]
            routes[rj] = []
            loads[rj] = 0
        live = [(route, load) for route, load in zip(routes, loads) if route]
        return [route for route, _ in live], [load for _, load in live]

    # -- local search ------------------------------------------------------

    def relocate_pass(self, routes: list[list[int]], loads: list[int]) -> bool:
        d, dem, cap = self.dist, self.dem, self.cap
        improved = False
        a = 0
        while a < len(routes):
            p = 0
            while p < len(routes[a]):
                c = routes[a][p]
                prev = routes[a][p - 1] if p > 0 else 0
                nxt = routes[a][p + 1] if p + 1 < len(routes[a]) else 0
                gain_remove = d[prev][c] + d[c][nxt] - d[prev][nxt]
                moved = False
                for b in range(len(routes)):
                    if b != a and loads[b] + dem[c] > cap:
                        continue
                    for q in range(len(routes[b]) + 1):
                        if b == a and (q == p or q == p + 1):
                            continue
                        u = routes[b][q - 1] if q > 0 else 0
                        v = routes[b][q] if q < len(routes[b]) else 0
                        self.tick()
                        delta = d[u][c] + d[c][v] - d[u][v] - gain_remove
                        if delta < -_EPS:
                            routes[a].pop(p)
                            qq = q if (b != a or q < p) else q - 1
                            routes[b].insert(qq, c)
                            loads[a] -= dem[c]
                            loads[b] += dem[c]
                            self.cur_cost += delta
                            self.maybe_record(routes)
                            improved = True
                            moved = True
                            break
                    if moved:
                        break
                if not moved:
                    p += 1
            if not routes[a]:
                routes.pop(a)
                loads.pop(a)
            else:
                a += 1
        return improved

    def two_opt_pass(self, routes: list[list[int]]) -> bool:
        d = self.dist
        improved = False
        for route in routes:
            k = len(route)
            i = 0
            while i < k - 1:
                j = i + 1
                restart = False
                while j < k:
                    prev_i = route[i - 1] if i > 0 else 0
                    next_j = route[j + 1] if j + 1 < k else 0
                    self.tick()
                    delta = (
                        d[prev_i][route[j]]
                        + d[route[i]][next_j]
                        - d[prev_i][route[i]]
                        - d[route[j]][next_j]
                    )
                    if delta < -_EPS:
                        route[i : j + 1] = reversed(route[i : j + 1])
                        self.cur_cost += delta
                        self.maybe_record(routes)
                        improved = True
                        restart = True
                        break
                    j += 1
                i = 0 if restart else i + 1
        return improved

    def local_search(self, routes: list[list[int]], loads: list[int]):
        self.cur_cost = self.total_cost(routes)
        while True:
            any_move = self.relocate_pass(routes, loads)
            any_move |= self.two_opt_pass(routes)
            if not any_move:
                return

    # -- perturbation ------------------------------------------------------

    def _randint(self, lo: int, hi: int) -> int:
        return lo + int(self.rng.random() * (hi - lo + 1)) if hi > lo else lo

    def perturb(self, routes: list[list[int]], loads: list[int]):
        dem, cap = self.dem, self.cap
        for _ in range(self._randint(1, 3)):
            self.tick()
            a = self._randint(0, len(routes) - 1)
            if not routes[a]:
                continue
            c = routes[a].pop(self._randint(0, len(routes[a]) - 1))
            loads[a] -= dem[c]
            targets = [b for b in range(len(routes)) if loads[b] + dem[c] <= cap]
            # A fresh route is always a legal fallback since every demand <= cap.
            pick = self._randint(0, len(targets))
            if pick == len(targets):
                routes.append([c])
                loads.append(dem[c])
            else:
                b = targets[pick]
                routes[b].insert(self._randint(0, len(routes[b])), c)
                loads[b] += dem[c]
        for a in range(len(routes) - 1, -1, -1):
            if not routes[a]:
                routes.pop(a)
                loads.pop(a)

    # -- driver ------------------------------------------------------------

    def run(self):
        try:
            routes, loads = self.clarke_wright()
            self.record_if_best(routes)
            self.local_search(routes, loads)
            self.record_if_best(routes)
            while True:
                routes = [route[:] for route in self.best_routes]
                loads = [sum(self.dem[c] for c in route) for route in routes]
                self.perturb(routes, loads)
                self.local_search(routes, loads)
                self.record_if_best(routes)
        except _BudgetExhausted:
            pass
        if not self.best_routes:
            # Budget died inside construction; singleton routes are always valid.
            self.best_routes = [[c] for c in range(1, self.m + 1)]
            self.best_cost = self.total_cost(self.best_routes)
            self.events.append((self.now(), self.best_cost))


def reference_solve(inst: Instance, seed: int, time_limit: float) -> tuple[Solution, Trace]:
    """Solve `inst` heuristically within a deterministic `time_limit` budget.

    Always returns a feasible solution (every customer fits a vehicle alone);
    the trace holds one event per new incumbent, on the solver's work-metered
    clock.
    """
    if time_limit <= 0:
        raise ValueError("time_limit must be positive")
    search = _Search(inst, seed, time_limit)
    search.run()
    routes = tuple(tuple(search.ids[c] for c in route) for route in search.best_routes)
    solution = Solution(routes=routes, cost=search.best_cost, source=f"builtin seed={seed}")
    terminal = max(search.time_limit, search.events[-1][0] if search.events else 0.0)
    trace = Trace(events=tuple(search.events), terminal_time=terminal)
    return solution, trace
