"""Solver execution: adapters, incumbent traces, run records, experiment plans.

Results are stored as newline-delimited JSON, one record per line, appended
durably as each run finishes; rerunning a plan skips completed
(solver, instance, seed) triples, so interrupted experiments resume cleanly.
"""

from __future__ import annotations

import configparser
import json
import math
import os
import re
import shlex
import subprocess
import tempfile
import threading
import time
import warnings
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field

from .instances import Instance, Solution, parse_instance, format_instance, parse_solution

TRACE_MODES = ("native-trace", "wrapper-parse", "final-only")
EXIT_STATUSES = ("ok", "timeout", "crash")

BUILTIN_COMMAND = "builtin"
KILL_GRACE_SECONDS = 2.0
_THREAD_SAMPLE_INTERVAL = 0.05


class OrchestratorError(Exception):
    pass


class SpawnFailureError(OrchestratorError):
    pass


class MalformedLineError(OrchestratorError):
    pass


class PlanError(OrchestratorError):
    pass


class StorageError(OrchestratorError):
    pass


class TraceWarning(UserWarning):
    """A trace event was dropped for violating monotone improvement."""


@dataclass(frozen=True)
class Trace:
    """Time-ordered incumbent events (seconds since solver start, cost)."""

    events: tuple[tuple[float, float], ...]
    terminal_time: float

    def __post_init__(self):
        if self.terminal_time < 0:
            raise OrchestratorError(f"negative terminal time {self.terminal_time}")
        prev_t = 0.0
        prev_cost = math.inf
        for t, cost in self.events:
            if t < prev_t:
                raise OrchestratorError(f"trace times must be nondecreasing, got {t} after {prev_t}")
            if cost >= prev_cost:
                raise OrchestratorError(f"incumbents must strictly improve, got {cost} after {prev_cost}")
            if t > self.terminal_time:
                raise OrchestratorError(f"event at {t}s beyond terminal time {self.terminal_time}s")
            prev_t, prev_cost = t, cost

    @property
    def final_cost(self) -> float | None:
        return self.events[-1][1] if self.events else None


def scan_trace_events(
    pairs: list[tuple[float, float]],
) -> tuple[list[tuple[float, float]], list[tuple[float, float]]]:
    """Split raw (t, cost) pairs into kept monotone-improving events and drops."""
    events: list[tuple[float, float]] = []
    dropped: list[tuple[float, float]] = []
    for t, cost in pairs:
        if events and (t < events[-1][0] or cost >= events[-1][1]):
            dropped.append((t, cost))
        else:
            events.append((t, cost))
    return events, dropped


def parse_trace(lines, terminal_time: float | None = None) -> Trace:
    """Parse `TRACE <t-seconds> <cost>` lines into a Trace.

    Non-improving events are dropped with a TraceWarning; anything that is not
    a well-formed trace line raises MalformedLineError. An empty stream yields
    an empty trace (legal for final-only adapters).
    """
    pairs: list[tuple[float, float]] = []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] != "TRACE" or len(parts) != 3:
            raise MalformedLineError(f"line {line_no}: expected 'TRACE <t> <cost>', got {line!r}")
        try:
            t, cost = float(parts[1]), float(parts[2])
        except ValueError:
            raise MalformedLineError(f"line {line_no}: bad numbers in {line!r}") from None
        if t < 0:
            raise MalformedLineError(f"line {line_no}: negative time {t}")
        pairs.append((t, cost))
    events, dropped = scan_trace_events(pairs)
    for t, cost in dropped:
        warnings.warn(f"dropped non-improving trace event ({t}, {cost})", TraceWarning)
    if terminal_time is None:
        terminal_time = events[-1][0] if events else 0.0
    return Trace(events=tuple(events), terminal_time=terminal_time)


def detect_cpu_name() -> str:
    try:
        with open("/proc/cpuinfo", encoding="utf-8") as fh:
            for line in fh:
                if line.lower().startswith("model name"):
                    return line.split(":", 1)[1].strip()
    except OSError:
        pass
    return "unknown-cpu"


@dataclass(frozen=True)
class SolverAdapter:
    """How to invoke one solver.

    `command` is a template with {instance} {seed} {timelimit} {output}
    placeholders; the special command "builtin" runs the bundled reference
    heuristic in-process. For wrapper-parse adapters, `trace_pattern` is a
    regex with named groups `t` and `cost` applied to each stdout line.
    """

    name: str
    command: str
    trace_mode: str = "native-trace"
    cpu_name: str = field(default_factory=detect_cpu_name)
    trace_pattern: str = ""
    metadata: str = ""  # free text copied onto records, e.g. GPU inference notes

    def __post_init__(self):
        if self.trace_mode not in TRACE_MODES:
            raise PlanError(f"adapter {self.name!r}: bad trace mode {self.trace_mode!r}")
        if self.command.strip() != BUILTIN_COMMAND and "{instance}" not in self.command:
            raise PlanError(f"adapter {self.name!r}: command must contain {{instance}}")
        if self.trace_mode == "wrapper-parse" and not self.trace_pattern:
            raise PlanError(f"adapter {self.name!r}: wrapper-parse needs trace_pattern")


def builtin_adapter(name: str = "builtin", cpu_name: str | None = None) -> SolverAdapter:
    return SolverAdapter(
        name=name,
        command=BUILTIN_COMMAND,
        trace_mode="native-trace",
        cpu_name=cpu_name if cpu_name is not None else detect_cpu_name(),
    )


@dataclass(frozen=True)
class RunRecord:
    """One solver execution over one instance with one seed."""

    solver: str
    instance: str
    seed: int
    trace: Trace
    final_cost: float | None
    wall_time: float
    cpu_name: str
    threads_used: int
    exit_status: str
    final_solution: Solution | None = None
    error: str | None = None
    metadata: str = ""

    def __post_init__(self):
        if self.exit_status not in EXIT_STATUSES:
            raise OrchestratorError(f"bad exit status {self.exit_status!r}")
        if self.trace.events and self.final_cost != self.trace.events[-1][1]:
            raise OrchestratorError(
                f"final cost {self.final_cost} != last trace incumbent {self.trace.events[-1][1]}"
            )

    def to_json_obj(self) -> dict:
        sol = None
        if self.final_solution is not None:
            sol = {
                "routes": [list(route) for route in self.final_solution.routes],
                "cost": self.final_solution.cost,
                "source": self.final_solution.source,
            }
        return {
            "solver": self.solver,
            "instance": self.instance,
            "seed": self.seed,
            "trace": [list(event) for event in self.trace.events],
            "terminal_time": self.trace.terminal_time,
            "final_cost": self.final_cost,
            "wall_time": self.wall_time,
            "cpu_name": self.cpu_name,
            "threads_used": self.threads_used,
            "exit_status": self.exit_status,
            "final_solution": sol,
            "error": self.error,
            "metadata": self.metadata,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "RunRecord":
        sol = None
        if obj.get("final_solution") is not None:
            raw = obj["final_solution"]
            sol = Solution(
                routes=tuple(tuple(route) for route in raw["routes"]),
                cost=raw["cost"],
                source=raw.get("source", ""),
            )
        return cls(
            solver=obj["solver"],
            instance=obj["instance"],
            seed=obj["seed"],
            trace=Trace(
                events=tuple((t, c) for t, c in obj["trace"]),
                terminal_time=obj["terminal_time"],
            ),
            final_cost=obj["final_cost"],
            wall_time=obj["wall_time"],
            cpu_name=obj["cpu_name"],
            threads_used=obj["threads_used"],
            exit_status=obj["exit_status"],
            final_solution=sol,
            error=obj.get("error"),
            metadata=obj.get("metadata", ""),
        )

    @property
    def key(self) -> tuple[str, str, int]:
        return (self.solver, self.instance, self.seed)


@dataclass(frozen=True)
class ExperimentPlan:
    adapters: tuple[SolverAdapter, ...]
    instances: tuple[str, ...]
    seeds: tuple[int, ...]
    time_limit: float
    parallel_workers: int = 1

    def __post_init__(self):
        if not self.adapters or not self.instances or not self.seeds:
            raise PlanError("adapters, instances and seeds must all be nonempty")
        if self.time_limit <= 0:
            raise PlanError("time_limit must be positive")
        if self.parallel_workers < 1:
            raise PlanError("parallel_workers must be >= 1")
        names = [a.name for a in self.adapters]
        if len(set(names)) != len(names):
            raise PlanError(f"duplicate adapter names in {names}")


def _split_list(raw: str) -> list[str]:
    return [tok for chunk in raw.split(",") for tok in chunk.split() if tok]


def parse_plan(text: str, base_dir: str = ".") -> ExperimentPlan:
    """Read an experiment plan: a [plan] section plus one [adapter NAME] block
    of key = value lines per solver."""
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise PlanError(f"bad plan file: {exc}") from exc
    if "plan" not in cp:
        raise PlanError("missing [plan] section")
    plan = cp["plan"]
    try:
        instances = tuple(
            p if os.path.isabs(p) else os.path.join(base_dir, p)
            for p in _split_list(plan.get("instances", ""))
        )
        seeds = tuple(int(s) for s in _split_list(plan.get("seeds", "")))
        time_limit = float(plan.get("time_limit", "0"))
        workers = int(plan.get("parallel_workers", "1"))
    except ValueError as exc:
        raise PlanError(f"bad [plan] value: {exc}") from exc
    adapters = []
    for section in cp.sections():
        if not section.startswith("adapter"):
            continue
        name = section[len("adapter") :].strip() or "solver"
        block = cp[section]
        if "command" not in block:
            raise PlanError(f"[{section}] missing command")
        kwargs = dict(
            name=name,
            command=block["command"],
            trace_mode=block.get("trace_mode", "native-trace"),
            trace_pattern=block.get("trace_pattern", ""),
            metadata=block.get("metadata", ""),
        )
        if block.get("cpu_name"):
            kwargs["cpu_name"] = block["cpu_name"]
        adapters.append(SolverAdapter(**kwargs))
    return ExperimentPlan(
        adapters=tuple(adapters),
        instances=instances,
        seeds=seeds,
        time_limit=time_limit,
        parallel_workers=workers,
    )


# ---------------------------------------------------------------------------
# Running one solver

class _ThreadPeakSampler:
    """Samples /proc/<pid>/status to record the peak thread count of a run."""

    def __init__(self, pid: int):
        self.pid = pid
        self.peak = 1
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._loop, daemon=True)

    def _loop(self):
        path = f"/proc/{self.pid}/status"
        while not self._stop.is_set():
            try:
                with open(path, encoding="utf-8") as fh:
                    for line in fh:
                        if line.startswith("Threads:"):
                            self.peak = max(self.peak, int(line.split()[1]))
                            break
            except (OSError, ValueError):
                return
            self._stop.wait(_THREAD_SAMPLE_INTERVAL)

    def __enter__(self):
        self._thread.start()
        return self

    def __exit__(self, *exc):
        self._stop.set()
        self._thread.join(timeout=1.0)


def _run_builtin(adapter: SolverAdapter, inst: Instance, seed: int, time_limit: float) -> RunRecord:
    from .reference_solver import reference_solve  # deferred: avoids import cycle

    solution, trace = reference_solve(inst, seed, time_limit)
    report = inst.validate_solution(solution)
    status, error = "ok", None
    if not report.feasible:
        status, error = "crash", "infeasible-solution: " + "; ".join(
            f"{kind}: {detail}" for kind, detail in report.violations
        )
        solution = None  # only feasible solutions are persisted
    # The builtin solver meters time deterministically, so its terminal time
    # doubles as the recorded wall time; this keeps whole runs reproducible.
    return RunRecord(
        solver=adapter.name,
        instance=inst.name,
        seed=seed,
        trace=trace,
        final_cost=trace.final_cost,
        wall_time=trace.terminal_time,
        cpu_name=adapter.cpu_name,
        threads_used=1,
        exit_status=status,
        final_solution=solution,
        error=error,
        metadata=adapter.metadata,
    )


def run_solver(
    adapter: SolverAdapter, inst: Instance, seed: int, time_limit: float
) -> RunRecord:
    """Execute one run and capture its trace per the adapter's trace mode.

    The process is killed KILL_GRACE_SECONDS after the time limit. Infeasible
    final solutions and monotonicity-violating traces are recorded as crashes
    ("infeasible-solution" / "trace-parse-failure"); a command that cannot be
    spawned raises SpawnFailureError.
    """
    if adapter.command.strip() == BUILTIN_COMMAND:
        return _run_builtin(adapter, inst, seed, time_limit)

    with tempfile.TemporaryDirectory(prefix="vrpbench-") as tmp:
        inst_path = os.path.join(tmp, f"{inst.name or 'instance'}.vrp")
        with open(inst_path, "w", encoding="utf-8") as fh:
            fh.write(format_instance(inst))
        out_path = os.path.join(tmp, "solution.sol")
        fills = {
            "instance": inst_path,
            "seed": str(seed),
            "timelimit": repr(float(time_limit)),
            "output": out_path,
        }
        try:
            argv = [tok.format(**fills) for tok in shlex.split(adapter.command)]
        except (KeyError, IndexError) as exc:
            raise SpawnFailureError(f"bad placeholder in command template: {exc}") from exc
        start = time.monotonic()
        try:
            proc = subprocess.Popen(
                argv, stdout=subprocess.PIPE, stderr=subprocess.DEVNULL, text=True, cwd=tmp
            )
        except (FileNotFoundError, PermissionError, OSError) as exc:
            raise SpawnFailureError(f"cannot spawn {argv[0]!r}: {exc}") from exc
        status, error = "ok", None
        with _ThreadPeakSampler(proc.pid) as sampler:
            try:
                stdout, _ = proc.communicate(timeout=time_limit + KILL_GRACE_SECONDS)
            except subprocess.TimeoutExpired:
                proc.kill()
                stdout, _ = proc.communicate()
                status = "timeout"
        wall = time.monotonic() - start
        if status == "ok" and proc.returncode != 0:
            status, error = "crash", f"exit code {proc.returncode}"

        pairs: list[tuple[float, float]] = []
        if adapter.trace_mode == "native-trace":
            for line in (stdout or "").splitlines():
                if line.strip().startswith("TRACE"):
                    parts = line.split()
                    try:
                        pairs.append((float(parts[1]), float(parts[2])))
                    except (IndexError, ValueError):
                        status, error = "crash", f"trace-parse-failure: bad line {line.strip()!r}"
        elif adapter.trace_mode == "wrapper-parse":
            pattern = re.compile(adapter.trace_pattern)
            for line in (stdout or "").splitlines():
                match = pattern.search(line)
                if match:
                    pairs.append((float(match.group("t")), float(match.group("cost"))))
        events, dropped = scan_trace_events(pairs)
        if dropped and error is None:
            status = "crash"
            error = f"trace-parse-failure: {len(dropped)} non-improving event(s), first {dropped[0]}"

        solution = None
        if os.path.exists(out_path):
            try:
                with open(out_path, encoding="utf-8") as fh:
                    solution = parse_solution(fh.read(), inst, source=adapter.name)
            except Exception as exc:  # noqa: BLE001 - any bad output is a crash
                if error is None:
                    status, error = "crash", f"solution-parse-failure: {exc}"
            if solution is not None:
                report = inst.validate_solution(solution)
                if not report.feasible:
                    if error is None:
                        status = "crash"
                        error = "infeasible-solution: " + "; ".join(
                            f"{kind}: {detail}" for kind, detail in report.violations
                        )
                    solution = None  # only feasible solutions are persisted
        if adapter.trace_mode == "final-only" and solution is not None:
            events = [(wall, solution.cost)]
        terminal = max(wall, events[-1][0] if events else 0.0)
        final_cost = events[-1][1] if events else (solution.cost if solution else None)
        return RunRecord(
            solver=adapter.name,
            instance=inst.name,
            seed=seed,
            trace=Trace(events=tuple(events), terminal_time=terminal),
            final_cost=final_cost,
            wall_time=wall,
            cpu_name=adapter.cpu_name,
            threads_used=sampler.peak,
            exit_status=status,
            final_solution=solution,
            error=error,
            metadata=adapter.metadata,
        )


# ---------------------------------------------------------------------------
# Result storage and experiment driver

class ResultSet:
    """An append-only collection of RunRecords backed by a JSONL file."""

    def __init__(self, records: list[RunRecord] | None = None):
        self.records: list[RunRecord] = list(records or [])

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def keys(self) -> set[tuple[str, str, int]]:
        return {r.key for r in self.records}

    def solvers(self) -> list[str]:
        seen: list[str] = []
        for r in self.records:
            if r.solver not in seen:
                seen.append(r.solver)
        return seen

    def group(self, solver: str, instance: str) -> list[RunRecord]:
        return [r for r in self.records if r.solver == solver and r.instance == instance]

    def instances(self) -> list[str]:
        seen: list[str] = []
        for r in self.records:
            if r.instance not in seen:
                seen.append(r.instance)
        return seen

    @classmethod
    def load(cls, path: str) -> "ResultSet":
        """Reload persisted records. A torn final line (crash mid-append) is
        ignored with a warning; corruption anywhere else raises StorageError."""
        records: list[RunRecord] = []
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        for idx, line in enumerate(lines):
            if not line.strip():
                continue
            try:
                records.append(RunRecord.from_json_obj(json.loads(line)))
            except (json.JSONDecodeError, KeyError, OrchestratorError) as exc:
                if idx == len(lines) - 1:
                    warnings.warn(f"{path}: ignoring torn final record: {exc}")
                    break
                raise StorageError(f"{path}:{idx + 1}: corrupt record: {exc}") from exc
        return cls(records)


def record_to_line(record: RunRecord) -> str:
    return json.dumps(record.to_json_obj(), sort_keys=True, separators=(",", ":"))


def run_experiment(plan: ExperimentPlan, store_path: str, on_record=None) -> ResultSet:
    """Run every (adapter, instance, seed) triple of the plan, resuming past
    progress from `store_path` and appending each record durably on finish.

    `on_record`, when given, is called with each freshly persisted RunRecord.
    """
    loaded_instances: dict[str, Instance] = {}
    for path in plan.instances:
        try:
            with open(path, encoding="utf-8") as fh:
                loaded_instances[path] = parse_instance(fh.read())
        except OSError as exc:
            raise PlanError(f"cannot read instance {path}: {exc}") from exc

    existing = ResultSet.load(store_path) if os.path.exists(store_path) else ResultSet()
    done = existing.keys()
    jobs = [
        (adapter, loaded_instances[path], seed)
        for adapter in plan.adapters
        for path in plan.instances
        for seed in plan.seeds
        if (adapter.name, loaded_instances[path].name, seed) not in done
    ]

    def one(job) -> RunRecord:
        adapter, inst, seed = job
        try:
            return run_solver(adapter, inst, seed, plan.time_limit)
        except OrchestratorError as exc:
            return RunRecord(
                solver=adapter.name,
                instance=inst.name,
                seed=seed,
                trace=Trace(events=(), terminal_time=0.0),
                final_cost=None,
                wall_time=0.0,
                cpu_name=adapter.cpu_name,
                threads_used=0,
                exit_status="crash",
                error=f"{type(exc).__name__}: {exc}",
            )

    results = ResultSet(existing.records)
    write_lock = threading.Lock()
    os.makedirs(os.path.dirname(os.path.abspath(store_path)), exist_ok=True)
    with open(store_path, "a", encoding="utf-8") as fh:
        with ThreadPoolExecutor(max_workers=plan.parallel_workers) as pool:
            futures = [pool.submit(one, job) for job in jobs]
            for future in as_completed(futures):
                record = future.result()
                with write_lock:
                    try:
                        fh.write(record_to_line(record) + "\n")
                        fh.flush()
                        os.fsync(fh.fileno())
                    except OSError as exc:
                        raise StorageError(f"cannot append to {store_path}: {exc}") from exc
                    results.records.append(record)
                if on_record is not None:
                    on_record(record)
    return results
