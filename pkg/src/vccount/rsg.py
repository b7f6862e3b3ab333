"""Reduced solution graphs: backbone classification plus typed unfrozen edges.

A vertex is a positive backbone when it is uncovered in every minimum cover,
a negative backbone when it is covered in every one, and unfrozen otherwise.
Adjacent unfrozen vertices that take opposite values in every minimum cover
form a mutual determination (a ``DOUBLE`` edge); every other edge between
unfrozen vertices is ``SINGLE`` and only forbids both ends being uncovered.
"""

from __future__ import annotations

import enum
import json
import random
from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable

import numpy as np

from . import kernels
from .graph import Graph
from .oracle import DEFAULT_BOUND, OracleBoundExceeded, OracleResult, enumerate_min_covers

__all__ = [
    "CoverState",
    "EdgeKind",
    "Exactness",
    "ReducedSolutionGraph",
    "RSGConstructionError",
    "LeafRemoval",
    "UnfrozenSubgraph",
    "LevelDecomposition",
    "EquivalenceClasses",
    "EvenCycleContraction",
    "VerificationReport",
    "leaf_removal",
    "build_rsg_oracle",
    "build_rsg_heuristic",
    "verify_rsg",
    "unfrozen_subgraph",
    "levels",
    "equivalence_classes",
    "canonical_matching",
    "contract_even_cycles",
    "rsg_to_json",
    "rsg_from_json",
]


class CoverState(enum.Enum):
    POSITIVE = "+"  # uncovered in every minimum cover
    NEGATIVE = "-"  # covered in every minimum cover
    UNFROZEN = "0"


class EdgeKind(enum.Enum):
    DOUBLE = "double"
    SINGLE = "single"


class Exactness(enum.Enum):
    ORACLE_EXACT = "oracle_exact"
    VERIFIED = "verified"
    UNVERIFIED = "unverified"
    INEXACT = "inexact"

    @property
    def trusted(self) -> bool:
        return self in (Exactness.ORACLE_EXACT, Exactness.VERIFIED)


class RSGConstructionError(RuntimeError):
    """The heuristic builder reached a state it cannot turn into a consistent RSG."""


def _norm(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=False)
class ReducedSolutionGraph:
    base: Graph
    state: tuple[CoverState, ...]
    double_edges: frozenset[tuple[int, int]]
    single_edges: frozenset[tuple[int, int]]
    exactness: Exactness = Exactness.UNVERIFIED
    provenance: dict = field(default_factory=dict)

    @cached_property
    def unfrozen(self) -> tuple[int, ...]:
        return tuple(v for v, s in enumerate(self.state) if s is CoverState.UNFROZEN)

    @cached_property
    def negative(self) -> tuple[int, ...]:
        return tuple(v for v, s in enumerate(self.state) if s is CoverState.NEGATIVE)

    @cached_property
    def positive(self) -> tuple[int, ...]:
        return tuple(v for v, s in enumerate(self.state) if s is CoverState.POSITIVE)

    def edge_kind(self, u: int, v: int) -> EdgeKind | None:
        e = _norm(u, v)
        if e in self.double_edges:
            return EdgeKind.DOUBLE
        if e in self.single_edges:
            return EdgeKind.SINGLE
        return None

    def ratios(self) -> tuple[float, float, float]:
        """``(q0, q_plus, q_minus)``."""
        n = max(self.base.n, 1)
        return len(self.unfrozen) / n, len(self.positive) / n, len(self.negative) / n

    def with_exactness(self, exactness: Exactness) -> "ReducedSolutionGraph":
        return replace(self, exactness=exactness)

    def same_structure(self, other: "ReducedSolutionGraph") -> bool:
        return (
            self.base == other.base
            and self.state == other.state
            and self.double_edges == other.double_edges
            and self.single_edges == other.single_edges
        )


# --------------------------------------------------------------------------- leaf removal


@dataclass(frozen=True)
class LeafRemoval:
    trace: tuple[tuple[int, int], ...]
    isolated: frozenset[int]
    core_vertices: tuple[int, ...]
    base: Graph = field(repr=False)

    @property
    def core_empty(self) -> bool:
        return not self.core_vertices

    @property
    def cover_size(self) -> int:
        """Lower bound on the minimum cover size, exact when the core is empty."""
        return len(self.trace)

    @cached_property
    def core(self) -> Graph:
        return self.base.induced(self.core_vertices)[0]


def leaf_removal(g: Graph) -> LeafRemoval:
    ip, ix = g.csr
    leaves, nbrs, isolated, core = kernels.leaf_removal(g.n, ip, ix)
    return LeafRemoval(
        trace=tuple(zip(leaves.tolist(), nbrs.tolist())),
        isolated=frozenset(np.flatnonzero(isolated).tolist()),
        core_vertices=tuple(np.flatnonzero(core).tolist()),
        base=g,
    )


# --------------------------------------------------------------------------- builders


def _typed_edges(g: Graph, state, is_double) -> tuple[frozenset, frozenset]:
    double, single = set(), set()
    for u, v in g.edges:
        if state[u] is CoverState.UNFROZEN and state[v] is CoverState.UNFROZEN:
            (double if is_double(u, v) else single).add((u, v))
    return frozenset(double), frozenset(single)


def rsg_from_oracle(g: Graph, res: OracleResult, provenance: dict | None = None) -> ReducedSolutionGraph:
    state = tuple(
        CoverState.POSITIVE if f == 0 else CoverState.NEGATIVE if f == 1 else CoverState.UNFROZEN
        for f in res.frequency
    )
    double, single = _typed_edges(g, state, lambda u, v: not res.co_covered(u, v))
    return ReducedSolutionGraph(
        g, state, double, single, Exactness.ORACLE_EXACT,
        dict(provenance or {}, builder="oracle", min_size=res.min_size),
    )


def build_rsg_oracle(g: Graph, bound: int = DEFAULT_BOUND) -> ReducedSolutionGraph:
    """Exact RSG from exhaustive enumeration of the minimum covers."""
    return rsg_from_oracle(g, enumerate_min_covers(g, bound=bound))


@dataclass
class _WPState:
    g: Graph
    ip: np.ndarray
    ix: np.ndarray
    rev: np.ndarray
    msg: np.ndarray
    inc: np.ndarray
    active: np.ndarray
    changes: np.ndarray
    cap: int
    updates: int = 0

    def run(self, order, seeds=()) -> bool:
        ok, used = kernels.warning_propagation(
            self.ip, self.ix, self.rev, self.msg, self.inc, self.active,
            np.asarray(order, dtype=np.int64), np.asarray(seeds, dtype=np.int64),
            self.cap, self.changes,
        )
        self.updates += used
        return ok

    def deactivate(self, v: int) -> list[int]:
        """Fix ``v`` covered: drop its messages; returns slots to re-evaluate."""
        ip, ix, rev = self.ip, self.ix, self.rev
        self.active[v] = 0
        seeds = []
        for s in range(ip[v], ip[v + 1]):
            w = ix[s]
            if self.msg[s]:
                self.msg[s] = 0
                self.inc[w] -= 1
            r = rev[s]
            if self.msg[r]:
                self.msg[r] = 0
                self.inc[v] -= 1
            seeds.extend(range(ip[w], ip[w + 1]))
        return seeds

    def snapshot(self):
        return self.msg.copy(), self.inc.copy(), self.active.copy()

    def restore(self, snap) -> None:
        self.msg[:], self.inc[:], self.active[:] = snap


def _pick_break_vertex(st: _WPState, exclude: set[int]) -> int:
    act = st.active.astype(bool)
    deg = np.diff(st.ip)
    cand = np.flatnonzero(act & (st.changes > 0))
    if len(cand) == 0:
        cand = np.flatnonzero(act)
    # most oscillation, then highest degree, then lowest id
    key = np.lexsort((cand, -deg[cand], -st.changes[cand]))
    for k in key:
        v = int(cand[k])
        if v not in exclude:
            return v
    return int(cand[key[0]])


def build_rsg_heuristic(
    g: Graph,
    *,
    update_factor: int = 40,
    max_breaks: int | None = None,
    release: bool = True,
    normalize: bool = True,
) -> ReducedSolutionGraph:
    """Candidate RSG from warning propagation.

    ``i`` warns its neighbour ``j`` (``j`` must be covered) exactly when no
    other neighbour warns ``i``. A vertex receiving no warning is a positive
    backbone, one warning pairs it with the warning neighbour into a mutual
    determination, two or more make it a negative backbone.

    Warnings are first fixed bottom-up from the leaves, which mirrors adding
    vertices from the leaves towards the interior; on a graph with an empty
    leaf-removal core this settles every message. Messages inside the core
    are relaxed asynchronously; when they keep flipping (odd cycles) the most
    unstable vertex is fixed covered and relaxation resumes. Broken vertices
    are then tentatively released one by one.

    With ``normalize`` the raw structure is tightened: classes forced by the
    DOUBLE/SINGLE constraints become backbones, and SINGLE edges whose ends
    are opposite in every consistent assignment become DOUBLE.

    The result is ``UNVERIFIED``; run :func:`verify_rsg` before trusting it.
    If normalization finds unsatisfiable constraints the result is
    ``INEXACT`` and ``provenance["contradictions"]`` names one vertex per
    offending class.
    """
    n = g.n
    ip, ix = g.csr
    rev = kernels.reverse_slots(ip, ix)
    peeled = kernels.peel_messages(ip, ix, rev)
    msg = (peeled > 0).astype(np.uint8)
    inc = np.bincount(ix, weights=msg, minlength=n).astype(np.int64)
    st = _WPState(
        g, ip, ix, rev,
        msg=msg,
        inc=inc,
        active=np.ones(n, dtype=np.uint8),
        changes=np.zeros(n, dtype=np.int64),
        cap=update_factor * (len(ix) + n) + 1000,
    )
    max_breaks = n if max_breaks is None else max_breaks
    undetermined = np.flatnonzero(peeled < 0)
    tails = np.repeat(np.arange(n), np.diff(ip))

    broken: list[int] = []
    released: list[int] = []
    if len(undetermined):
        seeds = undetermined
        while not st.run((), seeds):
            if len(broken) >= max_breaks:
                raise RSGConstructionError(
                    f"warning cascade did not settle after {len(broken)} odd-cycle breaks"
                )
            v = _pick_break_vertex(st, set(broken))
            broken.append(v)
            st.deactivate(v)
            # the aborted cascade left its queue behind: re-evaluate every live slot
            seeds = np.flatnonzero(st.active[tails].astype(bool))
            st.changes[:] = 0
        if release:
            for v in reversed(list(broken)):
                snap = st.snapshot()
                if st.run([v]):
                    broken.remove(v)
                    released.append(v)
                else:
                    st.restore(snap)

    state, double = _raw_structure(g, st)
    provenance = {
        "builder": "heuristic",
        "undetermined_messages": int(len(undetermined)),
        "odd_cycle_breaks": sorted(broken),
        "released": sorted(released),
        "wp_updates": st.updates,
    }
    exactness = Exactness.UNVERIFIED
    if normalize:
        state, double, single, frozen, clash = _normalize_structure(g, state, double)
        provenance["frozen_by_constraints"] = frozen
        if clash:
            # no minimum cover satisfies these constraints: known wrong, reported rather than repaired
            provenance["contradictions"] = clash
            exactness = Exactness.INEXACT
    else:
        double, single = _typed_edges(g, state, lambda u, v: (u, v) in double)
    return ReducedSolutionGraph(g, state, double, single, exactness, provenance)


def _raw_structure(g: Graph, st: _WPState):
    inc, active = st.inc, st.active
    state = tuple(
        CoverState.NEGATIVE if not active[v] or inc[v] >= 2
        else CoverState.POSITIVE if inc[v] == 0
        else CoverState.UNFROZEN
        for v in range(g.n)
    )
    ip, ix, rev, msg = st.ip, st.ix, st.rev, st.msg
    tails = np.repeat(np.arange(g.n), np.diff(ip))
    both = np.flatnonzero((msg == 1) & (msg[rev] == 1))
    double = set()
    count = np.zeros(g.n, dtype=np.int64)
    for s in both:
        u, w = int(tails[s]), int(ix[s])
        if u < w and state[u] is CoverState.UNFROZEN and state[w] is CoverState.UNFROZEN:
            double.add((u, w))
            count[u] += 1
            count[w] += 1
    bad = [v for v in range(g.n) if state[v] is CoverState.UNFROZEN and count[v] != 1]
    if bad:
        raise RSGConstructionError(f"unfrozen vertices without a unique partner: {bad[:10]}")
    return state, double


def _normalize_structure(g: Graph, state, double):
    """Freeze constraint-forced classes, then retype always-opposite edges.

    Classes whose two states are both impossible are reported (one vertex
    each) and left unfrozen.
    """
    state = list(state)
    double = set(double)
    frozen: list[int] = []
    contradictions: set[int] = set()
    while True:
        unfrozen = tuple(v for v in range(g.n) if state[v] is CoverState.UNFROZEN)
        keep = set(unfrozen)
        double = {e for e in double if e[0] in keep and e[1] in keep}
        single = frozenset(
            e for e in g.edges if e[0] in keep and e[1] in keep and e not in double
        )
        us = UnfrozenSubgraph(unfrozen, frozenset(double), single)
        base, side, bad, succ = _implications(us)
        if bad:
            raise RSGConstructionError(f"odd DOUBLE cycle through vertices {bad[:5]}")
        forced = _failed_literals(succ)
        # both literals failing means the constraints are unsatisfiable: leave those classes alone
        clash = {lit >> 1 for lit in forced if lit ^ 1 in forced}
        forced = {lit for lit in forced if lit >> 1 not in clash}
        contradictions.update(base[c][0][0] for c in clash)
        if not forced:
            break
        for lit in forced:
            c, s = divmod(lit, 2)
            # state s (side s uncovered) is impossible: side s covered, other side uncovered
            for v in base[c][s]:
                state[v] = CoverState.NEGATIVE
                frozen.append(v)
            for v in base[c][1 - s]:
                state[v] = CoverState.POSITIVE
                frozen.append(v)
    eq = equivalence_classes(us)
    retyped = set(double)
    for x, y in single:
        cx, sx = eq.index[x]
        cy, sy = eq.index[y]
        if cx == cy and sx != sy:
            retyped.add((x, y))
    return tuple(state), frozenset(retyped), frozenset(single - retyped), sorted(frozen), sorted(contradictions)


def _failed_literals(succ: list[list[int]]) -> set[int]:
    """Literals ``L`` with an implication path to their negation."""
    failed = set()
    for lit in range(len(succ)):
        if not succ[lit]:
            continue
        target = lit ^ 1
        seen = {lit}
        stack = [lit]
        while stack:
            u = stack.pop()
            for w in succ[u]:
                if w == target:
                    failed.add(lit)
                    stack = []
                    break
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
    return failed



# --------------------------------------------------------------------------- unfrozen subgraph


@dataclass(frozen=True)
class UnfrozenSubgraph:
    vertices: tuple[int, ...]
    double: frozenset[tuple[int, int]]
    single: frozenset[tuple[int, int]]

    @cached_property
    def adjacency(self) -> dict[int, list[tuple[int, EdgeKind]]]:
        adj: dict[int, list[tuple[int, EdgeKind]]] = {v: [] for v in self.vertices}
        for u, v in sorted(self.double):
            adj[u].append((v, EdgeKind.DOUBLE))
            adj[v].append((u, EdgeKind.DOUBLE))
        for u, v in sorted(self.single):
            adj[u].append((v, EdgeKind.SINGLE))
            adj[v].append((u, EdgeKind.SINGLE))
        return adj

    @cached_property
    def partners(self) -> dict[int, list[int]]:
        return {v: [w for w, k in self.adjacency[v] if k is EdgeKind.DOUBLE] for v in self.vertices}

    @cached_property
    def components(self) -> list[tuple[int, ...]]:
        seen: set[int] = set()
        out = []
        adj = self.adjacency
        for s in self.vertices:
            if s in seen:
                continue
            seen.add(s)
            comp, stack = [], [s]
            while stack:
                u = stack.pop()
                comp.append(u)
                for w, _ in adj[u]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            out.append(tuple(sorted(comp)))
        return out

    @property
    def edge_count(self) -> int:
        return len(self.double) + len(self.single)

    def is_matched(self) -> bool:
        """Every vertex has exactly one DOUBLE partner."""
        return all(len(p) == 1 for p in self.partners.values())

    def restrict(self, vertices: Iterable[int]) -> "UnfrozenSubgraph":
        keep = set(vertices)
        return UnfrozenSubgraph(
            tuple(sorted(keep)),
            frozenset(e for e in self.double if e[0] in keep and e[1] in keep),
            frozenset(e for e in self.single if e[0] in keep and e[1] in keep),
        )

    def is_forest(self) -> bool:
        return self.edge_count == len(self.vertices) - len(self.components)


def unfrozen_subgraph(rsg: ReducedSolutionGraph) -> UnfrozenSubgraph:
    if rsg.exactness is Exactness.INEXACT:
        raise ValueError("refusing to extract the unfrozen subgraph of an INEXACT rsg")
    return UnfrozenSubgraph(rsg.unfrozen, rsg.double_edges, rsg.single_edges)


# --------------------------------------------------------------------------- equivalence classes


@dataclass(frozen=True)
class EquivalenceClasses:
    """Groups of unfrozen vertices whose joint values have exactly two options.

    Class ``i`` is ``(side_a, side_b)``: in state 0 side A is uncovered and
    side B covered, in state 1 the reverse. A vertex without a DOUBLE partner
    forms a class with an empty side B. ``merged`` flags classes obtained by
    fusing several mutual-determination classes (alternating even cycles and
    their unions). ``contradictions`` lists vertices whose constraints cannot
    be met.
    """

    classes: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]
    index: dict[int, tuple[int, int]]
    merged: tuple[bool, ...]
    contradictions: tuple[int, ...] = ()

    def uncovered_state(self, v: int) -> tuple[int, int]:
        """``(class, state)`` in which ``v`` is uncovered."""
        return self.index[v]


def _double_classes(us: UnfrozenSubgraph):
    side: dict[int, tuple[int, int]] = {}
    classes: list[tuple[list[int], list[int]]] = []
    bad: list[int] = []
    partners = us.partners
    for s in us.vertices:
        if s in side:
            continue
        cid = len(classes)
        groups: tuple[list[int], list[int]] = ([], [])
        side[s] = (cid, 0)
        queue = deque([s])
        while queue:
            u = queue.popleft()
            su = side[u][1]
            groups[su].append(u)
            for w in partners[u]:
                if w not in side:
                    side[w] = (cid, 1 - su)
                    queue.append(w)
                elif side[w][1] == su:
                    bad.append(w)
        classes.append((sorted(groups[0]), sorted(groups[1])))
    return classes, side, bad


def _tarjan(num: int, succ: list[list[int]]) -> list[int]:
    """Iterative Tarjan SCC; returns component id per node."""
    index = [-1] * num
    low = [0] * num
    comp = [-1] * num
    on = [False] * num
    stack: list[int] = []
    counter = 0
    ncomp = 0
    for root in range(num):
        if index[root] >= 0:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on[root] = True
        while work:
            v, i = work[-1]
            if i < len(succ[v]):
                work[-1] = (v, i + 1)
                w = succ[v][i]
                if index[w] < 0:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on[w] = True
                    work.append((w, 0))
                elif on[w]:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    p = work[-1][0]
                    low[p] = min(low[p], low[v])
                if low[v] == index[v]:
                    while True:
                        w = stack.pop()
                        on[w] = False
                        comp[w] = ncomp
                        if w == v:
                            break
                    ncomp += 1
    return comp


def _implications(us: UnfrozenSubgraph):
    base, side, bad = _double_classes(us)
    succ: list[list[int]] = [[] for _ in range(2 * len(base))]
    for x, y in us.single:
        cx, sx = side[x]
        cy, sy = side[y]
        # x uncovered -> y covered (class cy in state 1 - sy), and symmetrically
        succ[2 * cx + sx].append(2 * cy + 1 - sy)
        succ[2 * cy + sy].append(2 * cx + 1 - sx)
    return base, side, bad, succ


def equivalence_classes(us: UnfrozenSubgraph) -> EquivalenceClasses:
    """Fuse mutual-determination classes locked together by SINGLE edges.

    Literal ``2*c + s`` means "class ``c`` is in state ``s``". A SINGLE edge
    ``x - y`` forbids both ends uncovered, i.e. implies ``x uncovered ->
    y covered`` and the converse. Classes whose literals share a strongly
    connected component of this implication graph always move together; an
    alternating DOUBLE/SINGLE cycle is the basic example.
    """
    base, side, bad, succ = _implications(us)
    nc = len(base)
    comp = _tarjan(2 * nc, succ)

    # union-find with orientation parity over base classes
    parent = list(range(nc))
    parity = [0] * nc

    def find(c):
        path = []
        while parent[c] != c:
            path.append(c)
            c = parent[c]
        root = c
        acc = 0
        for node in reversed(path):
            acc ^= parity[node]
            parity[node] = acc
            parent[node] = root
        return root

    def orient(c):
        find(c)
        return parity[c] if parent[c] != c else 0

    first: dict[int, int] = {}
    for lit in range(2 * nc):
        k = comp[lit]
        if k in first:
            a, b = first[k], lit
            ca, sa = divmod(a, 2)
            cb, sb = divmod(b, 2)
            ra, rb = find(ca), find(cb)
            pa, pb = orient(ca) ^ sa, orient(cb) ^ sb
            if ra != rb:
                parent[rb] = ra
                parity[rb] = pa ^ pb
            elif pa != pb:
                bad.extend(base[ca][0][:1] or base[ca][1][:1])
        else:
            first[k] = lit

    groups: dict[int, list[int]] = {}
    for c in range(nc):
        groups.setdefault(find(c), []).append(c)
    classes = []
    merged = []
    index: dict[int, tuple[int, int]] = {}
    for root in sorted(groups, key=lambda r: min(min(base[c][0] + base[c][1]) for c in groups[r])):
        a_side: list[int] = []
        b_side: list[int] = []
        for c in groups[root]:
            o = orient(c)
            ga, gb = base[c]
            if o:
                ga, gb = gb, ga
            a_side.extend(ga)
            b_side.extend(gb)
        if not a_side or (b_side and min(b_side) < min(a_side)):
            a_side, b_side = b_side, a_side
        cid = len(classes)
        classes.append((tuple(sorted(a_side)), tuple(sorted(b_side))))
        merged.append(len(groups[root]) > 1)
        for v in a_side:
            index[v] = (cid, 0)
        for v in b_side:
            index[v] = (cid, 1)
    return EquivalenceClasses(tuple(classes), index, tuple(merged), tuple(sorted(set(bad))))


@dataclass(frozen=True)
class EvenCycleContraction:
    contracted: UnfrozenSubgraph
    class_map: dict[int, int]
    classes: EquivalenceClasses
    class_multiplier_exponent: int
    cover_offset: int


def contract_even_cycles(us: UnfrozenSubgraph) -> EvenCycleContraction:
    """Replace every fused class by one representative DOUBLE pair.

    Fused classes with no SINGLE edge leaving them are dropped entirely and
    counted in ``class_multiplier_exponent`` (each contributes a factor 2).
    ``cover_offset`` is the number of covered vertices hidden by the
    contraction, so min cover sizes can be recovered.
    """
    eq = equivalence_classes(us)
    rep: dict[int, int] = {}
    class_map: dict[int, int] = {}
    for cid, (a, b) in enumerate(eq.classes):
        for v in a:
            class_map[v] = cid
            rep[v] = a[0]
        for v in b:
            class_map[v] = cid
            rep[v] = b[0]
    external = set()
    single = set()
    for x, y in us.single:
        cx, cy = class_map[x], class_map[y]
        if cx == cy:
            continue
        external.add(cx)
        external.add(cy)
        single.add(_norm(rep[x], rep[y]))
    vertices: list[int] = []
    double = set()
    exponent = 0
    offset = 0
    for cid, (a, b) in enumerate(eq.classes):
        if eq.merged[cid]:
            if cid not in external:
                exponent += 1
                offset += len(b)
                continue
            offset += len(b) - 1
            vertices.extend((a[0], b[0]))
            double.add(_norm(a[0], b[0]))
        else:
            vertices.extend(a + b)
            for u in a + b:
                for w in us.partners[u]:
                    double.add(_norm(u, w))
    contracted = UnfrozenSubgraph(tuple(sorted(vertices)), frozenset(double), frozenset(single))
    return EvenCycleContraction(contracted, class_map, eq, exponent, offset)


def canonical_matching(us: UnfrozenSubgraph) -> dict[int, int]:
    """Perfect-as-possible matching on DOUBLE edges, lowest ids first.

    On a plain pair structure this is just the partner map. Where a DOUBLE
    class has several perfect matchings (an all-DOUBLE C4), augmenting paths
    are tried from the lowest vertex id with neighbours in increasing order,
    so the choice is reproducible.
    """
    partners = us.partners
    match: dict[int, int] = {}

    def augment(u, seen):
        for w in sorted(partners[u]):
            if w in seen:
                continue
            seen.add(w)
            if w not in match or augment(match[w], seen):
                match[w] = u
                match[u] = w
                return True
        return False

    for u in us.vertices:
        if u not in match:
            augment(u, {u})
    return match


# --------------------------------------------------------------------------- levels


@dataclass(frozen=True)
class LevelDecomposition:
    level: dict[int, int]
    levels: tuple[tuple[tuple[int, ...], ...], ...]
    core: frozenset[int]

    @property
    def pairs_per_level(self) -> list[int]:
        return [len(lv) for lv in self.levels]


def levels(us: UnfrozenSubgraph) -> LevelDecomposition:
    """Leaf-removal levels of mutual-determination units.

    A unit (a DOUBLE pair, or a larger DOUBLE-connected group) is a leaf when
    at most one SINGLE edge joins it to the units still present. All current
    leaves are peeled in the same round; the round number is the level. What
    cannot be peeled is the unfrozen core.
    """
    unit_of: dict[int, int] = {}
    units: list[tuple[int, ...]] = []
    for a, b in _double_classes(us)[0]:
        uid = len(units)
        members = tuple(sorted(a + b))
        units.append(members)
        for v in members:
            unit_of[v] = uid
    links: list[list[int]] = [[] for _ in units]
    for x, y in us.single:
        ux, uy = unit_of[x], unit_of[y]
        if ux != uy:
            links[ux].append(uy)
            links[uy].append(ux)
    alive = set(range(len(units)))
    out_levels = []
    level: dict[int, int] = {}
    rnd = 0
    while alive:
        leaves = [u for u in sorted(alive) if sum(1 for w in links[u] if w in alive) <= 1]
        if not leaves:
            break
        out_levels.append(tuple(units[u] for u in leaves))
        for u in leaves:
            for v in units[u]:
                level[v] = rnd
        alive.difference_update(leaves)
        rnd += 1
    core = frozenset(v for u in alive for v in units[u])
    return LevelDecomposition(level, tuple(out_levels), core)


# --------------------------------------------------------------------------- verification


@dataclass
class VerificationReport:
    exactness: Exactness
    checks: dict[str, bool]
    messages: list[str]
    implied_size: int | None
    reference_size: int | None
    reference: str
    rsg: ReducedSolutionGraph = field(repr=False)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def _structural_failures(g: Graph, rsg: ReducedSolutionGraph, need_matching: bool) -> dict[str, list[str]]:
    S = rsg.state
    adj = g.adjacency
    out: dict[str, list[str]] = {"positive_iff_all_negative": [], "edge_typing": [],
                                 "unique_partner": [], "positive_neighbor_implies_negative": []}
    for v in range(g.n):
        all_neg = all(S[w] is CoverState.NEGATIVE for w in adj[v])
        if (S[v] is CoverState.POSITIVE) != all_neg:
            out["positive_iff_all_negative"].append(f"vertex {v} is {S[v].value} but all-negative-neighbours={all_neg}")
        if any(S[w] is CoverState.POSITIVE for w in adj[v]) and S[v] is not CoverState.NEGATIVE:
            out["positive_neighbor_implies_negative"].append(f"vertex {v} has a positive neighbour")
    if rsg.double_edges & rsg.single_edges:
        out["edge_typing"].append("an edge is both DOUBLE and SINGLE")
    typed = rsg.double_edges | rsg.single_edges
    for e in typed:
        if e not in g.edge_set:
            out["edge_typing"].append(f"typed edge {e} is not a base edge")
        elif S[e[0]] is not CoverState.UNFROZEN or S[e[1]] is not CoverState.UNFROZEN:
            out["edge_typing"].append(f"typed edge {e} touches a frozen vertex")
    for u, v in g.edges:
        if S[u] is CoverState.UNFROZEN and S[v] is CoverState.UNFROZEN and (u, v) not in typed:
            out["edge_typing"].append(f"untyped unfrozen edge {(u, v)}")
    if need_matching:
        us = UnfrozenSubgraph(rsg.unfrozen, rsg.double_edges, rsg.single_edges)
        classes, _, odd = _double_classes(us)
        if odd:
            out["unique_partner"].append(f"odd DOUBLE cycle through vertex {odd[0]}")
        matching = canonical_matching(us)
        for a, b in classes:
            if len(a) != len(b) or any(v not in matching for v in a):
                out["unique_partner"].append(
                    f"DOUBLE class of vertex {a[0] if a else b[0]} has no perfect matching"
                )
    return out


def verify_rsg(
    g: Graph,
    rsg: ReducedSolutionGraph,
    *,
    decodes: int = 64,
    seed: int = 0,
    bound: int = DEFAULT_BOUND,
) -> VerificationReport:
    """Check an RSG and tag it ``VERIFIED``, ``INEXACT`` or leave it ``UNVERIFIED``.

    Checks, per connected component of ``g``: structural facts; the implied
    cover size against the oracle (component size <= ``bound``) or against
    leaf removal (empty core); with the oracle also identical vertex states
    and every DOUBLE edge being a true mutual determination. Finally
    ``decodes`` random consistent assignments must be covers of the implied
    size. Components with neither reference leave the result UNVERIFIED.
    """
    from .counter import decode_assignment, min_cover_size  # counter depends on this module

    if rsg.base != g:
        raise ValueError("rsg was built on a different graph")
    messages: list[str] = []
    checks: dict[str, bool] = {}
    oracle_built = rsg.provenance.get("builder") == "oracle"
    structural = _structural_failures(g, rsg, need_matching=not oracle_built)
    for name, fails in structural.items():
        checks[name] = not fails
        messages.extend(fails[:5])
    clash = rsg.provenance.get("contradictions")
    if clash:
        checks["constraints_satisfiable"] = False
        messages.append(f"builder found contradictory constraints around vertices {list(clash)[:5]}")

    implied = None
    try:
        implied = min_cover_size(rsg)
    except Exception as exc:  # inconsistent unfrozen constraints
        checks["consistent_constraints"] = False
        messages.append(f"unfrozen constraints unsatisfiable: {exc}")

    reference = 0
    refs: list[str] = []
    unresolved = []
    oracle_states_ok = True
    oracle_double_ok = True
    for comp in g.components():
        if len(comp) == 1:
            continue
        sub, labels = g.induced(comp)
        if len(comp) <= bound:
            res = enumerate_min_covers(sub, bound=bound)
            reference += res.min_size
            for i, v in enumerate(labels):
                f = res.frequency[i]
                want = CoverState.POSITIVE if f == 0 else CoverState.NEGATIVE if f == 1 else CoverState.UNFROZEN
                if rsg.state[v] is not want:
                    oracle_states_ok = False
                    messages.append(f"vertex {v}: rsg says {rsg.state[v].value}, oracle says {want.value}")
            pos = {v: i for i, v in enumerate(labels)}
            for u, v in rsg.double_edges:
                if u in pos and v in pos and res.co_covered(pos[u], pos[v]):
                    oracle_double_ok = False
                    messages.append(f"DOUBLE edge {(u, v)} is co-covered in some minimum cover")
            refs.append("oracle")
        else:
            lr = leaf_removal(sub)
            if lr.core_empty:
                reference += lr.cover_size
                refs.append("leaf_removal")
            else:
                unresolved.append(len(comp))
    checks["oracle_states"] = oracle_states_ok
    checks["oracle_mutual_determinations"] = oracle_double_ok

    size_ok = None
    if not unresolved and implied is not None:
        size_ok = implied == reference
        checks["cover_size"] = size_ok
        if not size_ok:
            messages.append(f"implied cover size {implied} != reference {reference}")
    elif implied is not None:
        messages.append(
            f"no size reference for {len(unresolved)} component(s) with a leaf-removal core "
            f"(sizes {sorted(unresolved)[:5]})"
        )

    if implied is not None and decodes > 0:
        rng = random.Random(seed)
        decode_ok = True
        edges = g.edges
        for _ in range(decodes):
            try:
                covered = decode_assignment(rsg, rng)
            except Exception as exc:
                decode_ok = False
                messages.append(f"decode failed: {exc}")
                break
            if len(covered) != implied or any(u not in covered and v not in covered for u, v in edges):
                decode_ok = False
                messages.append("decoded assignment is not a cover of the implied size")
                break
        checks["decode"] = decode_ok

    failed = not all(checks.values())
    if failed:
        exactness = Exactness.INEXACT
    elif unresolved:
        exactness = rsg.exactness if rsg.exactness is Exactness.ORACLE_EXACT else Exactness.UNVERIFIED
    else:
        exactness = Exactness.ORACLE_EXACT if rsg.exactness is Exactness.ORACLE_EXACT else Exactness.VERIFIED
    ref_name = "+".join(sorted(set(refs))) or "none"
    return VerificationReport(
        exactness, checks, messages, implied,
        reference if not unresolved else None, ref_name, rsg.with_exactness(exactness),
    )


# --------------------------------------------------------------------------- serialization

RSG_FORMAT = "vccount-rsg/1"


def rsg_to_json(rsg: ReducedSolutionGraph) -> dict:
    return {
        "format": RSG_FORMAT,
        "n": rsg.base.n,
        "edges": [list(e) for e in rsg.base.edges],
        "state": "".join(s.value for s in rsg.state),
        "double": [list(e) for e in sorted(rsg.double_edges)],
        "single": [list(e) for e in sorted(rsg.single_edges)],
        "exactness": rsg.exactness.value,
        "provenance": rsg.provenance,
    }


def rsg_from_json(doc: dict | str) -> ReducedSolutionGraph:
    if isinstance(doc, str):
        doc = json.loads(doc)
    if doc.get("format") != RSG_FORMAT:
        raise ValueError(f"not an RSG document (format={doc.get('format')!r})")
    g = Graph(doc["n"], tuple(tuple(e) for e in doc["edges"]))
    state = tuple(CoverState(c) for c in doc["state"])
    if len(state) != g.n:
        raise ValueError("state length does not match n")
    return ReducedSolutionGraph(
        g,
        state,
        frozenset(_norm(*e) for e in doc["double"]),
        frozenset(_norm(*e) for e in doc["single"]),
        Exactness(doc["exactness"]),
        dict(doc.get("provenance", {})),
    )
