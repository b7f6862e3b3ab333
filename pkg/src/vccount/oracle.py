"""Brute-force ground truth for minimum vertex covers of small graphs.

Two independent routes are provided: a bitmask branch-and-bound run per
connected component (:func:`enumerate_min_covers`) and plain subset
enumeration by increasing size (:func:`enumerate_min_covers_subsets`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from . import kernels
from .graph import Graph

__all__ = [
    "DEFAULT_BOUND",
    "OracleBoundExceeded",
    "OracleResult",
    "enumerate_min_covers",
    "enumerate_min_covers_subsets",
    "oracle_mutual_determinations",
]

DEFAULT_BOUND = 24
DEFAULT_LIST_CAP = 1 << 16


class OracleBoundExceeded(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    """Exact min cover size, count and per-vertex cover frequencies.

    ``covers`` is ``None`` when the number of covers exceeds the list cap.
    ``cocover[v]`` is the bitmask of vertices sharing at least one minimum
    cover with ``v`` (restricted to ``v``'s component).
    """

    n: int
    min_size: int
    count: int
    frequency: tuple[Fraction, ...]
    covers: tuple[frozenset[int], ...] | None = None
    cocover: tuple[int, ...] = field(default=(), repr=False)

    def is_positive_backbone(self, v: int) -> bool:
        return self.frequency[v] == 0

    def is_negative_backbone(self, v: int) -> bool:
        return self.frequency[v] == 1

    def unfrozen(self) -> list[int]:
        return [v for v in range(self.n) if 0 < self.frequency[v] < 1]

    def co_covered(self, u: int, v: int) -> bool:
        return bool(self.cocover[u] >> v & 1)

    def to_json(self) -> dict:
        out = {
            "n": self.n,
            "min_size": self.min_size,
            "count": self.count,
            "frequency": [str(f) for f in self.frequency],
        }
        if self.covers is not None:
            out["covers"] = [sorted(c) for c in self.covers]
        return out


def _check_bound(g: Graph, bound: int) -> None:
    if g.n > bound:
        raise OracleBoundExceeded(f"graph has {g.n} vertices, oracle bound is {bound}")


def enumerate_min_covers(
    g: Graph, bound: int = DEFAULT_BOUND, list_cap: int = DEFAULT_LIST_CAP, backend=None
) -> OracleResult:
    """All minimum vertex covers, combined across connected components."""
    _check_bound(g, bound)
    kern = backend or kernels.active
    min_size = 0
    count = 1
    freq: list[Fraction] = [Fraction(0)] * g.n
    cocover = [0] * g.n
    per_comp: list[tuple[list[int], list[int]]] = []
    for comp in g.components():
        if len(comp) == 1:
            per_comp.append((comp, [0]))
            continue
        sub, labels = g.induced(comp)
        adj = [sum(1 << w for w in sub.adjacency[u]) for u in range(sub.n)]
        k, total, counts, cc, covers = kern.enumerate_min_covers(sub.n, adj, list_cap)
        min_size += k
        count *= total
        for i, v in enumerate(labels):
            freq[v] = Fraction(counts[i], total)
            mask = 0
            bits = cc[i]
            while bits:
                b = (bits & -bits).bit_length() - 1
                bits &= bits - 1
                mask |= 1 << labels[b]
            cocover[v] = mask
        if total <= list_cap:
            per_comp.append((labels, covers))
        else:
            per_comp.append((labels, None))
    covers_out = None
    if count <= list_cap and all(c is not None for _, c in per_comp):
        decoded = []
        for labels, masks in per_comp:
            decoded.append([frozenset(labels[b] for b in range(len(labels)) if m >> b & 1) for m in masks])
        covers_out = tuple(sorted((frozenset().union(*combo) for combo in itertools.product(*decoded)), key=sorted))
    return OracleResult(g.n, min_size, count, tuple(freq), covers_out, tuple(cocover))


def enumerate_min_covers_subsets(g: Graph, bound: int = 20) -> OracleResult:
    """Independent check: try every vertex subset by increasing size."""
    _check_bound(g, bound)
    edges = g.edges
    for size in range(g.n + 1):
        found = [
            frozenset(sub)
            for sub in itertools.combinations(range(g.n), size)
            if all(u in sub or v in sub for u, v in edges)
        ]
        if found:
            break
    count = len(found)
    freq = tuple(Fraction(sum(v in c for c in found), count) for v in range(g.n))
    cocover = [0] * g.n
    for c in found:
        mask = sum(1 << v for v in c)
        for v in c:
            cocover[v] |= mask
    return OracleResult(g.n, size, count, freq, tuple(sorted(found, key=sorted)), tuple(cocover))


def oracle_mutual_determinations(g: Graph, res: OracleResult) -> set[tuple[int, int]]:
    """Edges between unfrozen vertices whose values are opposite in every minimum cover.

    Both ends of an edge can never be uncovered together, so an edge is a
    mutual determination exactly when no minimum cover contains both ends.
    """
    if res.covers is None:
        raise OracleBoundExceeded("explicit cover list unavailable (list cap exceeded)")
    out = set()
    for u, v in g.edges:
        if not (0 < res.frequency[u] < 1 and 0 < res.frequency[v] < 1):
            continue
        if not any(u in c and v in c for c in res.covers):
            out.add((u, v))
    return out
