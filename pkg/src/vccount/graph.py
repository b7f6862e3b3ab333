"""Undirected simple graphs, seeded ensemble generators and edge-list I/O.

All randomness goes through :func:`numpy.random.default_rng`, i.e. the PCG64
bit generator, which produces identical streams on every platform for the
same integer seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Graph",
    "GenSpec",
    "ErdosRenyi",
    "ScaleFree",
    "GraphError",
    "EdgeListParseError",
    "gen_er",
    "gen_scale_free",
    "generate",
    "parse_edge_list",
    "serialize_edge_list",
    "parse_dimacs",
    "read_graph",
]


class GraphError(ValueError):
    """Raised when a graph or generator request violates the graph invariants."""


class EdgeListParseError(GraphError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.reason = message


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple undirected graph on vertices ``0..n-1``.

    ``edges`` is kept as a sorted tuple of ``(u, v)`` pairs with ``u < v`` so
    that two graphs with the same edge set compare (and serialize) equal.
    """

    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if self.n < 0:
            raise GraphError("vertex count must be nonnegative")
        norm = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={self.n}")
            e = (u, v) if u < v else (v, u)
            if e in norm:
                raise GraphError(f"duplicate edge {e}")
            norm.add(e)
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        return cls(n, tuple(edges))

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indptr, indices)`` int64 arrays for the compiled kernels."""
        deg = np.fromiter((len(a) for a in self.adjacency), dtype=np.int64, count=self.n)
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        indices = np.fromiter(
            (v for a in self.adjacency for v in a), dtype=np.int64, count=int(indptr[-1])
        )
        return indptr, indices

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self.edge_set

    def degrees(self) -> np.ndarray:
        return np.diff(self.csr[0])

    def components(self) -> list[list[int]]:
        """Connected components as sorted vertex lists, ordered by smallest vertex."""
        seen = [False] * self.n
        out = []
        adj = self.adjacency
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            stack, comp = [s], []
            while stack:
                u = stack.pop()
                comp.append(u)
                for w in adj[u]:
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
            out.append(sorted(comp))
        return out

    def induced(self, vertices: Sequence[int]) -> tuple["Graph", list[int]]:
        """Induced subgraph relabelled to ``0..len(vertices)-1``; also returns the label map."""
        labels = sorted(vertices)
        index = {v: i for i, v in enumerate(labels)}
        sub = [
            (index[u], index[v])
            for u in labels
            for v in self.adjacency[u]
            if u < v and v in index
        ]
        return Graph(len(labels), tuple(sub)), labels

    def with_edge(self, u: int, v: int) -> "Graph":
        return Graph(self.n, self.edges + (((u, v) if u < v else (v, u)),))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class ErdosRenyi:
    c: float


@dataclass(frozen=True)
class ScaleFree:
    gamma: float
    k_min: int = 1
    k_max: int | None = None


@dataclass(frozen=True)
class GenSpec:
    kind: ErdosRenyi | ScaleFree
    n: int
    seed: int = 0
    label: str = field(default="", compare=False)

    def with_seed(self, seed: int) -> "GenSpec":
        return GenSpec(self.kind, self.n, seed, self.label)


def _pair_from_index(k: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Map linear indices of the strict upper triangle (row-major) to ``(i, j)``."""
    k = k.astype(np.int64)
    total = n * (n - 1) // 2
    # rows counted from the end: r pairs remain in the last r rows' triangle
    rev = total - 1 - k
    t = np.floor((np.sqrt(8.0 * rev + 1.0) - 1.0) / 2.0).astype(np.int64)
    # guard the float sqrt at triangular-number boundaries
    t = np.where((t + 1) * (t + 2) // 2 <= rev, t + 1, t)
    t = np.where(t * (t + 1) // 2 > rev, t - 1, t)
    i = n - 2 - t
    row_start = i * (2 * n - i - 1) // 2
    j = k - row_start + i + 1
    return i, j


def gen_er(spec: GenSpec) -> Graph:
    """G(n, p) with ``p = c / (n - 1)``.

    The number of edges is drawn from Binomial(C(n, 2), p) and that many
    distinct pairs are then chosen uniformly, which is the same distribution as
    flipping one coin per pair.
    """
    if not isinstance(spec.kind, ErdosRenyi):
        raise GraphError("gen_er needs an ErdosRenyi GenSpec")
    n, c = spec.n, float(spec.kind.c)
    if n < 1:
        raise GraphError("n must be >= 1")
    if c < 0:
        raise GraphError("mean degree c must be >= 0")
    if n == 1:
        if c > 0:
            raise GraphError("c > n - 1 for n = 1")
        return Graph(1, ())
    if c > n - 1 + 1e-12:
        raise GraphError(f"c={c} exceeds n-1={n - 1}: edge probability would exceed 1")
    p = min(c / (n - 1), 1.0)
    rng = np.random.default_rng(spec.seed)
    total = n * (n - 1) // 2
    m = int(rng.binomial(total, p))
    if m == 0:
        return Graph(n, ())
    idx = rng.choice(total, size=m, replace=False, shuffle=False)
    i, j = _pair_from_index(np.sort(idx), n)
    return Graph(n, tuple(zip(i.tolist(), j.tolist())))


def scale_free_degree_law(gamma: float, k_min: int, k_max: int) -> tuple[np.ndarray, np.ndarray]:
    ks = np.arange(k_min, k_max + 1)
    w = ks.astype(float) ** (-gamma)
    return ks, w / w.sum()


def gen_scale_free(spec: GenSpec) -> Graph:
    """Erased configuration model with i.i.d. power-law target degrees.

    Degrees are drawn from ``P(k) ~ k**-gamma`` on ``[k_min, k_max]`` with
    ``k_max = floor(sqrt(n))`` unless given. Stubs are shuffled and paired in
    order; a leftover odd stub, self-loops and repeated pairs are dropped.
    """
    kind = spec.kind
    if not isinstance(kind, ScaleFree):
        raise GraphError("gen_scale_free needs a ScaleFree GenSpec")
    n = spec.n
    if n < 2:
        raise GraphError("n must be >= 2")
    if kind.gamma < 2:
        raise GraphError("gamma must be >= 2")
    k_max = kind.k_max if kind.k_max is not None else max(kind.k_min, math.isqrt(n))
    k_max = min(k_max, n - 1)
    if kind.k_min < 1 or k_max < kind.k_min:
        raise GraphError("need 1 <= k_min <= k_max")
    rng = np.random.default_rng(spec.seed)
    ks, probs = scale_free_degree_law(kind.gamma, kind.k_min, k_max)
    degrees = rng.choice(ks, size=n, p=probs)
    stubs = np.repeat(np.arange(n, dtype=np.int64), degrees)
    rng.shuffle(stubs)
    half = len(stubs) // 2
    pairs = stubs[: 2 * half].reshape(half, 2)
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    pairs.sort(axis=1)
    pairs = np.unique(pairs, axis=0) if len(pairs) else pairs
    return Graph(n, tuple(map(tuple, pairs.tolist())))


def generate(spec: GenSpec) -> Graph:
    if isinstance(spec.kind, ErdosRenyi):
        return gen_er(spec)
    return gen_scale_free(spec)


def serialize_edge_list(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


def _ints(line: str, lineno: int, count: int) -> list[int]:
    parts = line.split()
    if len(parts) != count:
        raise EdgeListParseError(lineno, f"expected {count} integers, got {line.strip()!r}")
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise EdgeListParseError(lineno, f"non-integer token in {line.strip()!r}") from None
    if any(v < 0 for v in vals):
        raise EdgeListParseError(lineno, "negative value")
    return vals


def parse_edge_list(text: str) -> Graph:
    """Parse the ``n m`` header followed by ``u v`` lines.

    Blank lines and ``#`` comments are skipped. Each kind of defect raises an
    :class:`EdgeListParseError` naming the offending (1-based) line.
    """
    header = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if header is None:
            header = _ints(line, lineno, 2)
            continue
        n = header[0]
        u, v = _ints(line, lineno, 2)
        if u == v:
            raise EdgeListParseError(lineno, f"self-loop at vertex {u}")
        if u >= n or v >= n:
            raise EdgeListParseError(lineno, f"vertex id {max(u, v)} >= n={n}")
        e = (u, v) if u < v else (v, u)
        if e in seen:
            raise EdgeListParseError(lineno, f"duplicate edge {e[0]} {e[1]}")
        seen.add(e)
        edges.append(e)
    if header is None:
        raise EdgeListParseError(1, "missing 'n m' header")
    n, m = header
    if m != len(edges):
        raise EdgeListParseError(lineno if text else 1, f"header declares {m} edges, found {len(edges)}")
    return Graph(n, tuple(edges))


def parse_dimacs(text: str) -> Graph:
    """Read ``p edge n m`` / ``e u v`` (1-indexed) into a 0-indexed graph."""
    n = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split()
        if not parts or parts[0] == "c":
            continue
        if parts[0] == "p":
            if len(parts) != 4:
                raise EdgeListParseError(lineno, "malformed problem line")
            n = int(parts[2])
        elif parts[0] == "e":
            if n is None:
                raise EdgeListParseError(lineno, "edge before problem line")
            if len(parts) != 3:
                raise EdgeListParseError(lineno, "malformed edge line")
            u, v = int(parts[1]) - 1, int(parts[2]) - 1
            if u == v:
                raise EdgeListParseError(lineno, f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise EdgeListParseError(lineno, "vertex id out of range")
            e = (u, v) if u < v else (v, u)
            if e in seen:
                raise EdgeListParseError(lineno, f"duplicate edge {e[0]} {e[1]}")
            seen.add(e)
            edges.append(e)
        else:
            raise EdgeListParseError(lineno, f"unknown line type {parts[0]!r}")
    if n is None:
        raise EdgeListParseError(1, "missing problem line")
    return Graph(n, tuple(edges))


def read_graph(path: str) -> Graph:
    with open(path) as fh:
        text = fh.read()
    if path.endswith((".dimacs", ".col", ".clq")) or text.lstrip().startswith(("p ", "c ")):
        return parse_dimacs(text)
    return parse_edge_list(text)
