"""
Metric Graph Model

Metric graphs are stored as a vertex count plus a list of length-weighted
edges. Lengths are optical lengths in meters; conversion from physical
lengths happens in resonance_io only.

Functions:
- validate(): list invariant violations (data, never raised)
- summarize(): Euler characteristic, cycle count, total length, t0
- gen_complete(): complete graph K_n with a prescribed (l_min, total) length policy
- gen_random_connected(): random connected simple graph with the same policy
- save_graph() / load_graph(): JSON graph files
"""

import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from modules.errors import FileFormatError, GraphValidationError, ParameterError
from modules.fileio import atomic_write_text

logger = logging.getLogger(__name__)


class Edge(NamedTuple):
    u: int
    v: int
    length: float


@dataclass(frozen=True)
class MetricGraph:
    vertex_count: int
    edges: Tuple[Edge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vertex_count", int(self.vertex_count))
        object.__setattr__(
            self, "edges", tuple(Edge(int(u), int(v), float(l)) for u, v, l in self.edges)
        )

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([e.length for e in self.edges], dtype=float)

    @property
    def total_length(self) -> float:
        return math.fsum(e.length for e in self.edges)

    @property
    def l_min(self) -> float:
        return min(e.length for e in self.edges)

    @property
    def l_max(self) -> float:
        return max(e.length for e in self.edges)

    @property
    def degrees(self) -> np.ndarray:
        ends = [e.u for e in self.edges] + [e.v for e in self.edges]
        return np.bincount(np.asarray(ends, dtype=int), minlength=self.vertex_count)

    def bond_lengths(self) -> np.ndarray:
        """Lengths of the 2|E| directed bonds; bond 2e runs u->v, bond 2e+1 runs v->u."""
        return np.repeat(self.lengths, 2)

    def scaled(self, factor: float) -> "MetricGraph":
        return MetricGraph(self.vertex_count, [(e.u, e.v, e.length * factor) for e in self.edges])


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class GraphSummary:
    vertex_count: int
    edge_count: int
    chi: int
    beta: int
    total_length: float
    l_min: float
    t0: float
    lt0: float

    def as_dict(self) -> dict:
        return {
            "vertices": self.vertex_count,
            "edges": self.edge_count,
            "chi": self.chi,
            "beta": self.beta,
            "total_length": self.total_length,
            "l_min": self.l_min,
            "t0": self.t0,
            "lt0": self.lt0,
        }


def validate(graph: MetricGraph) -> ValidationReport:
    """
    Check the metric graph invariants.

    Returns:
        ValidationReport listing every violation; empty iff the graph is valid
    """
    violations: List[str] = []
    n = graph.vertex_count
    if n < 1:
        violations.append("no vertices")
    if not graph.edges:
        violations.append("no edges")

    for i, (u, v, length) in enumerate(graph.edges):
        if not (0 <= u < n and 0 <= v < n):
            violations.append(f"bad index: edge {i} ({u}, {v}) with {n} vertices")
        elif u == v:
            violations.append(f"self-loop: edge {i} at vertex {u}")
        if not (length > 0 and math.isfinite(length)):
            violations.append(f"non-positive length: edge {i} has length {length!r}")

    if n >= 1:
        good = [(u, v) for u, v, _ in graph.edges if 0 <= u < n and 0 <= v < n]
        rows = np.array([p[0] for p in good], dtype=int)
        cols = np.array([p[1] for p in good], dtype=int)
        adjacency = coo_matrix((np.ones(len(good)), (rows, cols)), shape=(n, n))
        n_components, _ = connected_components(adjacency, directed=False)
        if n_components > 1:
            violations.append(f"disconnected: {n_components} components")

    return ValidationReport(tuple(violations))


def require_valid(graph: MetricGraph) -> MetricGraph:
    report = validate(graph)
    if not report.ok:
        raise GraphValidationError(report.violations)
    return graph


def summarize(graph: MetricGraph) -> GraphSummary:
    """Compute chi, beta, total length, l_min, t0 = 1/(2 l_min) and lt0 = L t0."""
    require_valid(graph)
    chi = graph.vertex_count - graph.edge_count
    total = graph.total_length
    l_min = graph.l_min
    t0 = 1.0 / (2.0 * l_min)
    return GraphSummary(
        vertex_count=graph.vertex_count,
        edge_count=graph.edge_count,
        chi=chi,
        beta=1 - chi,
        total_length=total,
        l_min=l_min,
        t0=t0,
        lt0=total * t0,
    )


def _draw_lengths(m: int, length_spec: Tuple[float, float], rng: np.random.Generator) -> np.ndarray:
    """
    Draw m edge lengths: one exactly l_min, the rest l_min plus a random share of the surplus.

    Args:
        m: number of edges
        length_spec: (l_min, total_length) in meters
        rng: seeded generator

    Returns:
        Array of m lengths summing to total_length
    """
    l_min, total = (float(x) for x in length_spec)
    if not (l_min > 0 and total > 0):
        raise ParameterError(f"length spec must be positive, got {length_spec!r}")
    surplus = total - m * l_min
    if surplus < -1e-12 * total:
        raise ParameterError(
            f"infeasible length spec: {m} edges of at least {l_min} m exceed total {total} m"
        )

    shortest = int(rng.integers(m))
    if m == 1:
        if abs(surplus) > 1e-12 * total:
            raise ParameterError(f"a single edge needs l_min == total, got {length_spec!r}")
        return np.array([l_min])

    weights = rng.uniform(0.05, 1.0, size=m - 1)
    extra = max(surplus, 0.0) * weights / weights.sum()
    lengths = np.empty(m)
    lengths[shortest] = l_min
    lengths[np.arange(m) != shortest] = l_min + extra
    return lengths


def gen_complete(n: int, length_spec: Tuple[float, float], seed: int = 0) -> MetricGraph:
    """Complete simple graph K_n with pseudo-random lengths (deterministic per seed)."""
    if n < 2:
        raise ParameterError(f"complete graph needs n >= 2, got {n}")
    pairs = list(itertools.combinations(range(n), 2))
    rng = np.random.default_rng(seed)
    lengths = _draw_lengths(len(pairs), length_spec, rng)
    graph = MetricGraph(n, [(u, v, l) for (u, v), l in zip(pairs, lengths)])
    logger.debug("generated K_%d with total length %.6g m", n, graph.total_length)
    return graph


def gen_random_connected(n: int, m: int, length_spec: Tuple[float, float], seed: int = 0) -> MetricGraph:
    """
    Random connected simple graph: random spanning tree plus uniformly chosen extra edges.

    Args:
        n: vertex count
        m: edge count, n-1 <= m <= n(n-1)/2
        length_spec: (l_min, total_length)
        seed: random seed

    Returns:
        MetricGraph with n vertices and m edges
    """
    if n < 2:
        raise ParameterError(f"need at least 2 vertices, got {n}")
    if m < n - 1:
        raise ParameterError(f"{m} edges cannot connect {n} vertices")
    if m > n * (n - 1) // 2:
        raise ParameterError(f"{m} edges exceed the simple-graph bound {n * (n - 1) // 2} for {n} vertices")

    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    pairs = set()
    for i in range(1, n):
        parent = order[int(rng.integers(i))]
        pairs.add(tuple(sorted((int(order[i]), int(parent)))))

    remaining = [p for p in itertools.combinations(range(n), 2) if p not in pairs]
    extra = rng.choice(len(remaining), size=m - (n - 1), replace=False) if m > n - 1 else []
    pairs.update(remaining[int(i)] for i in extra)

    ordered = sorted(pairs)
    lengths = _draw_lengths(m, length_spec, rng)
    return MetricGraph(n, [(u, v, l) for (u, v), l in zip(ordered, lengths)])


def graph_to_dict(graph: MetricGraph) -> dict:
    return {
        "vertices": graph.vertex_count,
        "edges": [{"u": e.u, "v": e.v, "length": e.length} for e in graph.edges],
    }


def graph_from_dict(data: dict) -> MetricGraph:
    try:
        vertices = data["vertices"]
        edges = [(item["u"], item["v"], item["length"]) for item in data["edges"]]
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"graph file is missing field {exc}") from exc
    if not isinstance(vertices, int) or any(not isinstance(u, int) or not isinstance(v, int) for u, v, _ in edges):
        raise FileFormatError("graph file: vertex indices must be integers")
    return MetricGraph(vertices, edges)


def save_graph(graph: MetricGraph, path) -> Path:
    return atomic_write_text(path, json.dumps(graph_to_dict(graph), indent=2) + "\n")


def load_graph(path) -> MetricGraph:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise FileFormatError(f"graph file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: not a graph file ({exc.msg} at line {exc.lineno})") from exc
    return graph_from_dict(data)


def star_graph(legs: Sequence[float]) -> MetricGraph:
    """Star with centre 0 and one leaf per leg length."""
    return MetricGraph(len(legs) + 1, [(0, i + 1, l) for i, l in enumerate(legs)])


def interval(length: float = 1.0) -> MetricGraph:
    return MetricGraph(2, [(0, 1, length)])
