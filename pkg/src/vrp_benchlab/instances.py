"""CVRP instance model: parsing, distances, solutions, validation, BKS registry.

File formats follow the TSPLIB/CVRPLIB conventions: keyed header lines,
NODE_COORD_SECTION / DEMAND_SECTION / DEPOT_SECTION bodies, and
"Route #k: ..." solution files. Node ids are 1-based as in the files.
"""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
import urllib.error
import urllib.request
import warnings
from dataclasses import dataclass, field

ROUNDED_EUCLIDEAN = "rounded-euclidean"
EXACT_EUCLIDEAN = "exact-euclidean"
EXPLICIT_MATRIX = "explicit-matrix"

# EUC_2D is the CVRPLIB standard (nearest-integer distances). EXACT_2D is a
# harness extension for unrounded Euclidean costs; TSPLIB defines no such type.
_EDGE_WEIGHT_TYPES = {
    "EUC_2D": ROUNDED_EUCLIDEAN,
    "EXACT_2D": EXACT_EUCLIDEAN,
    "EXPLICIT": EXPLICIT_MATRIX,
}
_EDGE_WEIGHT_NAMES = {v: k for k, v in _EDGE_WEIGHT_TYPES.items()}


class InstanceError(ValueError):
    """Base class for instance/solution handling errors."""


class InstanceFormatError(InstanceError):
    """A file violates the instance or solution format.

    `kind` is a stable identifier (e.g. "malformed-header", "missing-section",
    "demand-exceeds-capacity", "duplicate-node-id", "malformed-route-line");
    `line` is the 1-based offending line, or 0 when nothing can be pointed at.
    """

    def __init__(self, kind: str, line: int, message: str):
        super().__init__(f"{kind} (line {line}): {message}")
        self.kind = kind
        self.line = line


class UnknownNodeError(InstanceError):
    pass


class UnknownInstanceError(InstanceError):
    pass


class FetchError(InstanceError):
    """Base class for instance-fetching failures; `kind` mirrors the message."""

    kind = "fetch-failure"


class NetworkUnavailableError(FetchError):
    kind = "network-unavailable"


class HttpFailureError(FetchError):
    kind = "http-failure"


class ParseFailureError(FetchError):
    kind = "parse-failure"


class CostMismatchWarning(UserWarning):
    """Declared solution cost disagrees with recomputation; recomputed wins."""


def nint(x: float) -> int:
    """Nearest integer, ties rounded half-up (the TSPLIB EUC_2D convention)."""
    return math.floor(x + 0.5)


@dataclass(frozen=True)
class Instance:
    """A CVRP instance. Immutable after construction.

    `coords` maps node id to (x, y) and is None for explicit-matrix instances;
    `matrix` is indexed by position in `node_ids` and is None otherwise.
    `extra` preserves unrecognized header keywords in file order.
    """

    name: str
    dimension: int
    capacity: int
    depot_id: int
    node_ids: tuple[int, ...]
    demands: dict[int, int]
    edge_weight_kind: str
    coords: dict[int, tuple[float, float]] | None = None
    matrix: tuple[tuple[float, ...], ...] | None = None
    extra: tuple[tuple[str, str], ...] = ()
    _index: dict[int, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dimension < 2:
            raise InstanceError(f"{self.name}: dimension must be >= 2, got {self.dimension}")
        if len(self.node_ids) != self.dimension:
            raise InstanceError(f"{self.name}: {len(self.node_ids)} nodes != dimension {self.dimension}")
        if len(set(self.node_ids)) != len(self.node_ids):
            raise InstanceError(f"{self.name}: duplicate node ids")
        if self.capacity <= 0:
            raise InstanceError(f"{self.name}: capacity must be positive")
        if self.depot_id not in self.node_ids:
            raise InstanceError(f"{self.name}: depot {self.depot_id} is not a node")
        if set(self.demands) != set(self.node_ids):
            raise InstanceError(f"{self.name}: demands do not cover exactly the node set")
        if self.demands[self.depot_id] != 0:
            raise InstanceError(f"{self.name}: depot demand must be 0")
        for node, d in self.demands.items():
            if node == self.depot_id:
                continue
            if d <= 0:
                raise InstanceError(f"{self.name}: customer {node} has nonpositive demand {d}")
            if d > self.capacity:
                raise InstanceError(
                    f"{self.name}: customer {node} demand {d} exceeds capacity {self.capacity}"
                )
        if self.edge_weight_kind == EXPLICIT_MATRIX:
            if self.matrix is None:
                raise InstanceError(f"{self.name}: explicit-matrix instance without matrix")
            n = self.dimension
            if len(self.matrix) != n or any(len(row) != n for row in self.matrix):
                raise InstanceError(f"{self.name}: matrix is not {n}x{n}")
            for i in range(n):
                if self.matrix[i][i] != 0:
                    raise InstanceError(f"{self.name}: matrix diagonal must be zero")
                for j in range(n):
                    if self.matrix[i][j] < 0:
                        raise InstanceError(f"{self.name}: negative matrix entry at ({i},{j})")
                    if self.matrix[i][j] != self.matrix[j][i]:
                        raise InstanceError(f"{self.name}: matrix is not symmetric at ({i},{j})")
        elif self.edge_weight_kind in (ROUNDED_EUCLIDEAN, EXACT_EUCLIDEAN):
            if self.coords is None or set(self.coords) != set(self.node_ids):
                raise InstanceError(f"{self.name}: coordinates do not cover the node set")
        else:
            raise InstanceError(f"{self.name}: unknown edge weight kind {self.edge_weight_kind!r}")
        object.__setattr__(self, "_index", {node: k for k, node in enumerate(self.node_ids)})

    @property
    def customers(self) -> tuple[int, ...]:
        return tuple(i for i in self.node_ids if i != self.depot_id)

    def distance(self, i: int, j: int) -> float:
        """Cost of traveling between nodes i and j under the instance's convention."""
        try:
            ii = self._index[i]
            jj = self._index[j]
        except KeyError as exc:
            raise UnknownNodeError(f"{self.name}: unknown node {exc.args[0]}") from None
        if self.edge_weight_kind == EXPLICIT_MATRIX:
            return self.matrix[ii][jj]
        xi, yi = self.coords[i]
        xj, yj = self.coords[j]
        d = math.hypot(xi - xj, yi - yj)
        if self.edge_weight_kind == ROUNDED_EUCLIDEAN:
            return nint(d)
        return d

    def route_cost(self, route: tuple[int, ...]) -> float:
        if not route:
            return 0
        total = self.distance(self.depot_id, route[0])
        for a, b in zip(route, route[1:]):
            total += self.distance(a, b)
        return total + self.distance(route[-1], self.depot_id)

    def solution_cost(self, sol: "Solution") -> float:
        """Total cost of `sol`: each route is depot -> c1 -> ... -> ck -> depot."""
        return sum(self.route_cost(route) for route in sol.routes)

    def validate_solution(self, sol: "Solution") -> "ValidationReport":
        """Check customer coverage and capacity; reports every violation found."""
        violations: list[tuple[str, str]] = []
        seen: dict[int, int] = {}
        for r, route in enumerate(sol.routes, start=1):
            load = 0
            for node in route:
                if node == self.depot_id:
                    violations.append(
                        ("unknown-node", f"depot {node} may not appear inside route {r}")
                    )
                    continue
                if node not in self._index:
                    violations.append(("unknown-node", f"route {r} references unknown node {node}"))
                    continue
                seen[node] = seen.get(node, 0) + 1
                load += self.demands[node]
            if load > self.capacity:
                violations.append(
                    ("capacity-exceeded", f"route {r} demand {load} exceeds capacity {self.capacity}")
                )
        for node, count in sorted(seen.items()):
            if count > 1:
                violations.append(("duplicate-customer", f"customer {node} served {count} times"))
        for node in self.customers:
            if node not in seen:
                violations.append(("missing-customer", f"customer {node}"))
        # Cost is recomputed over the legs the instance can price: ids the
        # instance does not know are dropped from the walk.
        known_routes = tuple(
            tuple(n for n in route if n in self._index) for route in sol.routes
        )
        cost = sum(self.route_cost(route) for route in known_routes)
        return ValidationReport(
            feasible=not violations, violations=tuple(violations), recomputed_cost=cost
        )


@dataclass(frozen=True)
class Solution:
    """A set of routes (customer ids; depot implicit at both ends) with a cost."""

    routes: tuple[tuple[int, ...], ...]
    cost: float
    source: str = ""


@dataclass(frozen=True)
class ValidationReport:
    feasible: bool
    violations: tuple[tuple[str, str], ...]
    recomputed_cost: float

    def __post_init__(self):
        if self.feasible != (not self.violations):
            raise InstanceError("report feasibility inconsistent with violation list")


# ---------------------------------------------------------------------------
# Instance file parsing / serialization

_SECTIONS = {"NODE_COORD_SECTION", "DEMAND_SECTION", "DEPOT_SECTION", "EDGE_WEIGHT_SECTION"}
_KNOWN_KEYS = {"NAME", "TYPE", "DIMENSION", "CAPACITY", "EDGE_WEIGHT_TYPE", "EDGE_WEIGHT_FORMAT"}


def parse_instance(text: str) -> Instance:
    """Parse a TSPLIB-style CVRP file into an Instance.

    Unknown header keywords are preserved as opaque metadata. Raises
    InstanceFormatError naming the offending line on malformed input.
    """
    lines = text.splitlines()
    header: dict[str, str] = {}
    extra: list[tuple[str, str]] = []
    coords: dict[int, tuple[float, float]] = {}
    demands: dict[int, int] = {}
    depot_ids: list[int] = []
    matrix_values: list[float] = []
    seen_sections: set[str] = set()

    def fail(kind: str, line_no: int, msg: str):
        raise InstanceFormatError(kind, line_no, msg)

    def require_dimension(line_no: int) -> int:
        if "DIMENSION" not in header:
            fail("malformed-header", line_no, "DIMENSION must precede data sections")
        try:
            return int(header["DIMENSION"])
        except ValueError:
            fail("malformed-header", line_no, f"bad DIMENSION {header['DIMENSION']!r}")

    i = 0
    n_lines = len(lines)
    while i < n_lines:
        raw = lines[i]
        line_no = i + 1
        i += 1
        stripped = raw.strip()
        if not stripped:
            continue
        if stripped == "EOF":
            break
        token = stripped.split(":")[0].strip().split()[0] if stripped else ""
        if token in _SECTIONS:
            seen_sections.add(token)
            dim = require_dimension(line_no)
            if token == "NODE_COORD_SECTION":
                i = _read_id_rows(lines, i, dim, coords, _parse_coord_row)
            elif token == "DEMAND_SECTION":
                i = _read_id_rows(lines, i, dim, demands, _parse_demand_row)
            elif token == "DEPOT_SECTION":
                while i < n_lines:
                    entry = lines[i].strip()
                    i += 1
                    if not entry:
                        continue
                    try:
                        value = int(entry)
                    except ValueError:
                        fail("malformed-header", i, f"bad depot entry {entry!r}")
                    if value == -1:
                        break
                    depot_ids.append(value)
            else:  # EDGE_WEIGHT_SECTION
                needed = dim * dim
                while len(matrix_values) < needed and i < n_lines:
                    entry = lines[i].strip()
                    if not entry or entry == "EOF" or entry.split()[0] in _SECTIONS:
                        break
                    i += 1
                    for tok in entry.split():
                        try:
                            matrix_values.append(float(tok))
                        except ValueError:
                            fail("malformed-header", i, f"bad matrix entry {tok!r}")
                if len(matrix_values) != needed:
                    fail(
                        "missing-section",
                        line_no,
                        f"EDGE_WEIGHT_SECTION holds {len(matrix_values)} values, expected {needed}",
                    )
            continue
        if ":" in stripped:
            key, _, value = stripped.partition(":")
            key = key.strip()
            value = value.strip()
            if key in _KNOWN_KEYS:
                header[key] = value
            else:
                extra.append((key, value))
            continue
        fail("malformed-header", line_no, f"unparsable line {stripped!r}")

    if header.get("TYPE", "CVRP") != "CVRP":
        fail("malformed-header", 0, f"TYPE must be CVRP, got {header.get('TYPE')!r}")
    dim = require_dimension(0)
    if "CAPACITY" not in header:
        fail("malformed-header", 0, "CAPACITY missing")
    try:
        capacity = int(header["CAPACITY"])
    except ValueError:
        fail("malformed-header", 0, f"bad CAPACITY {header['CAPACITY']!r}")
    ewt = header.get("EDGE_WEIGHT_TYPE", "EUC_2D")
    if ewt not in _EDGE_WEIGHT_TYPES:
        fail("malformed-header", 0, f"unsupported EDGE_WEIGHT_TYPE {ewt!r}")
    kind = _EDGE_WEIGHT_TYPES[ewt]
    if kind == EXPLICIT_MATRIX:
        if "EDGE_WEIGHT_SECTION" not in seen_sections:
            fail("missing-section", 0, "EDGE_WEIGHT_SECTION required for EXPLICIT weights")
        fmt = header.get("EDGE_WEIGHT_FORMAT", "FULL_MATRIX")
        if fmt != "FULL_MATRIX":
            fail("malformed-header", 0, f"unsupported EDGE_WEIGHT_FORMAT {fmt!r}")
    elif "NODE_COORD_SECTION" not in seen_sections:
        fail("missing-section", 0, "NODE_COORD_SECTION missing")
    if "DEMAND_SECTION" not in seen_sections:
        fail("missing-section", 0, "DEMAND_SECTION missing")
    if "DEPOT_SECTION" not in seen_sections:
        fail("missing-section", 0, "DEPOT_SECTION missing")
    if len(depot_ids) != 1:
        fail("malformed-header", 0, f"expected exactly one depot, got {depot_ids}")
    depot = depot_ids[0]

    node_ids = tuple(demands.keys()) if kind == EXPLICIT_MATRIX else tuple(coords.keys())
    for node, demand in demands.items():
        if node != depot and demand > capacity:
            fail(
                "demand-exceeds-capacity",
                0,
                f"customer {node} demand {demand} exceeds capacity {capacity}",
            )
    matrix = None
    if kind == EXPLICIT_MATRIX:
        matrix = tuple(
            tuple(matrix_values[r * dim : (r + 1) * dim]) for r in range(dim)
        )
    try:
        return Instance(
            name=header.get("NAME", ""),
            dimension=dim,
            capacity=capacity,
            depot_id=depot,
            node_ids=node_ids,
            demands=demands,
            edge_weight_kind=kind,
            coords=coords or None,
            matrix=matrix,
            extra=tuple(extra),
        )
    except InstanceError as exc:
        raise InstanceFormatError("malformed-header", 0, str(exc)) from exc


def _read_id_rows(lines, i, count, out, parse_row):
    for _ in range(count):
        while i < len(lines) and not lines[i].strip():
            i += 1
        if i >= len(lines):
            raise InstanceFormatError("missing-section", i, f"section truncated, expected {count} rows")
        node, value = parse_row(lines[i].strip(), i + 1)
        if node in out:
            raise InstanceFormatError("duplicate-node-id", i + 1, f"node {node} listed twice")
        out[node] = value
        i += 1
    return i


def _parse_coord_row(row: str, line_no: int) -> tuple[int, tuple[float, float]]:
    parts = row.split()
    if len(parts) != 3:
        raise InstanceFormatError("malformed-header", line_no, f"bad coordinate row {row!r}")
    try:
        return int(parts[0]), (float(parts[1]), float(parts[2]))
    except ValueError:
        raise InstanceFormatError("malformed-header", line_no, f"bad coordinate row {row!r}") from None


def _parse_demand_row(row: str, line_no: int) -> tuple[int, int]:
    parts = row.split()
    if len(parts) != 2:
        raise InstanceFormatError("malformed-header", line_no, f"bad demand row {row!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise InstanceFormatError("malformed-header", line_no, f"bad demand row {row!r}") from None


def _fmt_num(x: float) -> str:
    if float(x).is_integer():
        return str(int(x))
    return repr(float(x))


def format_instance(inst: Instance) -> str:
    """Serialize an Instance so that parse_instance(format_instance(i)) == i."""
    out = [f"NAME : {inst.name}", "TYPE : CVRP", f"DIMENSION : {inst.dimension}"]
    out.append(f"EDGE_WEIGHT_TYPE : {_EDGE_WEIGHT_NAMES[inst.edge_weight_kind]}")
    if inst.edge_weight_kind == EXPLICIT_MATRIX:
        out.append("EDGE_WEIGHT_FORMAT : FULL_MATRIX")
    out.append(f"CAPACITY : {inst.capacity}")
    for key, value in inst.extra:
        out.append(f"{key} : {value}")
    if inst.coords is not None:
        out.append("NODE_COORD_SECTION")
        for node in inst.node_ids:
            x, y = inst.coords[node]
            out.append(f"{node} {_fmt_num(x)} {_fmt_num(y)}")
    if inst.matrix is not None:
        out.append("EDGE_WEIGHT_SECTION")
        for row in inst.matrix:
            out.append(" ".join(_fmt_num(v) for v in row))
    out.append("DEMAND_SECTION")
    for node in inst.node_ids:
        out.append(f"{node} {inst.demands[node]}")
    out.append("DEPOT_SECTION")
    out.append(str(inst.depot_id))
    out.append("-1")
    out.append("EOF")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Solution files

def _customer_order(inst: Instance) -> tuple[int, ...]:
    return (inst.depot_id,) + tuple(n for n in inst.node_ids if n != inst.depot_id)


def parse_solution(text: str, inst: Instance, source: str = "") -> Solution:
    """Parse a CVRPLIB-style solution file ("Route #k: ..." lines, "Cost c").

    Route entries are customer numbers: positions in the instance's node
    order with the depot at position 0, following the convention of public
    repositories (with standard 1..n ids and depot 1, customer k is node
    k + 1). Out-of-range numbers are kept verbatim so validation can report
    them. The declared cost is cross-checked against recomputation; on
    mismatch a CostMismatchWarning is emitted and the recomputed value wins.
    """
    order = _customer_order(inst)
    routes: list[tuple[int, ...]] = []
    declared: float | None = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        lowered = line.lower()
        if lowered.startswith("route"):
            _, _, body = line.partition(":")
            try:
                tokens = [int(tok) for tok in body.split()]
            except ValueError:
                raise InstanceFormatError(
                    "malformed-route-line", line_no, f"bad route line {line!r}"
                ) from None
            routes.append(tuple(order[k] if 1 <= k < inst.dimension else k for k in tokens))
        elif lowered.startswith("cost"):
            try:
                declared = float(line.split()[1])
            except (IndexError, ValueError):
                raise InstanceFormatError(
                    "malformed-route-line", line_no, f"bad cost line {line!r}"
                ) from None
        else:
            raise InstanceFormatError("malformed-route-line", line_no, f"unexpected line {line!r}")
    if not routes:
        raise InstanceFormatError("malformed-route-line", 0, "no route lines found")
    sol = Solution(routes=tuple(routes), cost=0.0, source=source)
    if all(n in inst._index and n != inst.depot_id for route in routes for n in route):
        recomputed = inst.solution_cost(sol)
        if declared is not None and not math.isclose(declared, recomputed, rel_tol=1e-9, abs_tol=1e-6):
            warnings.warn(
                f"declared cost {declared} != recomputed {recomputed}; keeping recomputed",
                CostMismatchWarning,
            )
        return Solution(routes=tuple(routes), cost=recomputed, source=source)
    # Recomputation is impossible with unknown ids; validation will report them.
    return Solution(routes=tuple(routes), cost=declared if declared is not None else 0.0, source=source)


def format_solution(sol: Solution, inst: Instance) -> str:
    """Serialize routes using the customer-number convention of parse_solution."""
    number = {node: k for k, node in enumerate(_customer_order(inst))}
    out = []
    for k, route in enumerate(sol.routes, 1):
        try:
            body = " ".join(str(number[n]) for n in route)
        except KeyError as exc:
            raise UnknownNodeError(f"route {k} references unknown node {exc.args[0]}") from None
        out.append(f"Route #{k}: {body}")
    out.append(f"Cost {_fmt_num(sol.cost)}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Best-known-solution registry

@dataclass(frozen=True)
class BksRegistry:
    """Map from instance name to best known solution value, with references."""

    entries: dict[str, tuple[float, str]]

    def __post_init__(self):
        for name, (value, _) in self.entries.items():
            if value <= 0:
                raise InstanceError(f"BKS for {name!r} must be positive, got {value}")

    def lookup(self, name: str) -> float:
        try:
            return self.entries[name][0]
        except KeyError:
            raise UnknownInstanceError(f"no BKS entry for {name!r}") from None

    def reference(self, name: str) -> str:
        try:
            return self.entries[name][1]
        except KeyError:
            raise UnknownInstanceError(f"no BKS entry for {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    @classmethod
    def from_csv(cls, text: str) -> "BksRegistry":
        """Load from comma-separated `name,bks,reference` rows with a header."""
        entries: dict[str, tuple[float, str]] = {}
        reader = csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except StopIteration:
            raise InstanceError("empty BKS registry file") from None
        if [h.strip().lower() for h in header[:2]] != ["name", "bks"]:
            raise InstanceError(f"BKS registry header must start with name,bks, got {header}")
        for row in reader:
            if not row or not row[0].strip():
                continue
            name = row[0].strip()
            try:
                value = float(row[1])
            except (IndexError, ValueError):
                raise InstanceError(f"bad BKS row {row}") from None
            reference = row[2].strip() if len(row) > 2 else ""
            entries[name] = (value, reference)
        return cls(entries=entries)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["name", "bks", "reference"])
        for name, (value, reference) in self.entries.items():
            writer.writerow([name, _fmt_num(value), reference])
        return out.getvalue()


# ---------------------------------------------------------------------------
# Fetching from instance repositories

DEFAULT_REPOSITORY = "http://vrp.atd-lab.inf.puc-rio.br/media/com_vrp/instances/X"


def _download(url: str, dest: str, timeout: float) -> None:
    """Fetch url to dest atomically (temp file + rename) so concurrent fetches
    never expose partial files."""
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            data = resp.read()
    except urllib.error.HTTPError as exc:
        raise HttpFailureError(f"HTTP {exc.code} fetching {url}") from exc
    except (urllib.error.URLError, OSError) as exc:
        raise NetworkUnavailableError(f"cannot reach {url}: {exc}") from exc
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(dest) or ".", suffix=".part")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, dest)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def fetch_instances(
    source_url: str,
    names: list[str],
    cache_dir: str,
    offline: bool = False,
    timeout: float = 30.0,
) -> list[tuple[Instance, float | None]]:
    """Fetch (or reuse from cache) instance files, plus best-solution files.

    Returns one (Instance, bks) pair per name; bks is the recomputed cost of
    the repository's best solution, or None when no feasible solution file is
    available. Repeated calls hit the cache and never re-download.
    """
    os.makedirs(cache_dir, exist_ok=True)
    results: list[tuple[Instance, float | None]] = []
    base = source_url.rstrip("/")
    for name in names:
        vrp_path = os.path.join(cache_dir, f"{name}.vrp")
        if not os.path.exists(vrp_path):
            if offline:
                raise NetworkUnavailableError(f"{name}.vrp not cached and network disabled")
            _download(f"{base}/{name}.vrp", vrp_path, timeout)
        try:
            with open(vrp_path, encoding="utf-8") as fh:
                inst = parse_instance(fh.read())
        except InstanceFormatError as exc:
            raise ParseFailureError(f"{vrp_path}: {exc}") from exc
        bks = None
        sol_path = os.path.join(cache_dir, f"{name}.sol")
        if not os.path.exists(sol_path) and not offline:
            try:
                _download(f"{base}/{name}.sol", sol_path, timeout)
            except FetchError:
                pass  # best solutions are optional
        if os.path.exists(sol_path):
            try:
                with open(sol_path, encoding="utf-8") as fh:
                    sol = parse_solution(fh.read(), inst, source=f"{base}/{name}.sol")
                report = inst.validate_solution(sol)
                if report.feasible:
                    bks = report.recomputed_cost
                else:
                    warnings.warn(f"fetched solution for {name} is infeasible; ignoring")
            except InstanceFormatError as exc:
                warnings.warn(f"cannot parse fetched solution for {name}: {exc}")
        results.append((inst, bks))
    return results
