"""Exact counting of minimum vertex covers on a reduced solution graph.

The unfrozen subgraph is turned into a binary constraint network whose nodes
are the equivalence classes of :func:`vccount.rsg.equivalence_classes` (a
mutual-determination pair, a fused even-cycle class, or a lone unfrozen
vertex). Each node state carries a ``(cost, lo, hi)`` value: ``cost`` is the
number of covered vertices and ``lo..hi`` brackets the number of minimum-cost
completions (``lo == hi`` whenever the search was not cut short). Values
combine in the (min, +) x (+, *) semiring, so the count reported is always the
number of assignments of minimum cover size.

Tree components are counted by peeling leaves into their parents. Components
with cycles are branched on the node of largest influence range, the forced
closure of each branch is applied, contradictory branches are pruned and the
residual is split into components again.
"""

from __future__ import annotations

import enum
import math
import random
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .rsg import (
    CoverState,
    EdgeKind,
    Exactness,
    ReducedSolutionGraph,
    UnfrozenSubgraph,
    equivalence_classes,
)

__all__ = [
    "BigCount",
    "PairCount",
    "InfluenceResult",
    "OnExceed",
    "Strategy",
    "CountBudget",
    "CountResult",
    "BudgetExceeded",
    "NotATreeError",
    "UntrustedRSGError",
    "tree_count",
    "forest_count",
    "influence_range",
    "count_solutions",
    "count_network",
    "entropy_density",
    "min_cover_size",
    "decode_assignment",
    "cover_marginals",
]

BigCount = int


class NotATreeError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    def __init__(self, message: str, stats: "CountResult | None" = None):
        super().__init__(message)
        self.stats = stats


class UntrustedRSGError(ValueError):
    pass


class OnExceed(enum.Enum):
    FAIL = "fail"
    RETURN_BOUNDS = "return_bounds"


class Strategy(enum.Enum):
    MAX_INFLUENCE = "max_influence"
    SPARSEST_NEAR_TOP_LEVEL = "sparsest_near_top_level"


@dataclass(frozen=True)
class CountBudget:
    max_exhaustion_vertices: int = 100_000
    max_branches: int = 1_000_000
    on_exceed: OnExceed = OnExceed.FAIL

    def __post_init__(self):
        if self.max_exhaustion_vertices <= 0 or self.max_branches <= 0:
            raise ValueError("budget caps must be positive")


@dataclass(frozen=True)
class PairCount:
    s_plus: BigCount  # root uncovered
    s_minus: BigCount  # root covered

    @property
    def total(self) -> BigCount:
        return self.s_plus + self.s_minus


@dataclass(frozen=True)
class InfluenceResult:
    vertex: int
    i_plus: int
    i_minus: int
    forced_plus: dict[int, bool] | None  # vertex -> covered; None if contradictory
    forced_minus: dict[int, bool] | None

    @property
    def i_total(self) -> int:
        return self.i_plus + self.i_minus


@dataclass
class CountResult:
    """Outcome of a count.

    ``top_branches`` lists the first exhaustion as ``(vertex, covered,
    count)`` where ``count`` is the whole-graph number of minimum covers with
    that vertex fixed; the entries sum to ``count``.
    """

    count: BigCount | None
    lower: BigCount
    upper: BigCount
    min_size: int | None
    exact: bool
    exactness: Exactness
    branches_explored: int = 0
    pruned_branches: int = 0
    exhaustion_vertices: int = 0
    top_branches: list[tuple[int, bool, BigCount]] = field(default_factory=list)
    components: int = 0

    def __int__(self) -> int:
        if self.count is None:
            raise BudgetExceeded("count is only bounded", self)
        return self.count

    def to_json(self) -> dict:
        return {
            "count_decimal_string": None if self.count is None else str(self.count),
            "lower": str(self.lower),
            "upper": str(self.upper),
            "min_cover_size": self.min_size,
            "exact": self.exact,
            "exactness": self.exactness.value,
            "branches_explored": self.branches_explored,
            "pruned_branches": self.pruned_branches,
            "exhaustion_vertices": self.exhaustion_vertices,
            "top_branches": [
                {"vertex": v, "covered": c, "count": str(k)} for v, c, k in self.top_branches
            ],
        }


# --------------------------------------------------------------------------- literal tree recursion


def tree_count(us: UnfrozenSubgraph, root: int) -> PairCount:
    """Leaves-to-root recursion on a tree component of the unfrozen subgraph.

    ``S+(i) = prod S-(child)`` and ``S-(i) = prod_{DOUBLE} S+(child) *
    prod_{SINGLE} S(child)``; every leaf starts at ``S+ = S- = 1``.
    """
    adj = us.adjacency
    if root not in adj:
        raise KeyError(f"vertex {root} is not in the unfrozen subgraph")
    parent: dict[int, tuple[int, EdgeKind] | None] = {root: None}
    order = [root]
    i = 0
    while i < len(order):
        u = order[i]
        i += 1
        up = parent[u]
        skipped = False
        for w, kind in adj[u]:
            if up is not None and w == up[0] and not skipped:
                skipped = True
                continue
            if w in parent:
                raise NotATreeError(f"cycle through vertex {w}")
            parent[w] = (u, kind)
            order.append(w)
    plus: dict[int, int] = {}
    minus: dict[int, int] = {}
    for u in order:
        plus[u] = 1
        minus[u] = 1
    for u in reversed(order):
        up = parent[u]
        if up is None:
            continue
        p, kind = up
        plus[p] *= minus[u]
        minus[p] *= plus[u] if kind is EdgeKind.DOUBLE else plus[u] + minus[u]
    return PairCount(plus[root], minus[root])


def forest_count(us: UnfrozenSubgraph | Iterable[UnfrozenSubgraph]) -> BigCount:
    """Product of per-component tree totals (empty forest -> 1)."""
    parts = [us] if isinstance(us, UnfrozenSubgraph) else list(us)
    total = 1
    for part in parts:
        for comp in part.components:
            total *= tree_count(part, comp[0]).total
    return total


# --------------------------------------------------------------------------- vertex-level influence


def influence_range(us: UnfrozenSubgraph, v: int) -> InfluenceResult:
    """Forced-closure sizes when ``v`` is fixed uncovered (plus) or covered (minus).

    The seed counts in both branches; a contradictory branch scores 0.
    """
    adj = us.adjacency
    if v not in adj:
        raise KeyError(f"vertex {v} is not unfrozen")

    def closure(covered: bool):
        val = {v: covered}
        queue = [v]
        while queue:
            u = queue.pop()
            cu = val[u]
            for w, kind in adj[u]:
                if kind is EdgeKind.DOUBLE:
                    want = not cu
                elif not cu:
                    want = True
                else:
                    continue
                have = val.get(w)
                if have is None:
                    val[w] = want
                    queue.append(w)
                elif have != want:
                    return None
        return val

    fp = closure(False)
    fm = closure(True)
    return InfluenceResult(v, len(fp) if fp else 0, len(fm) if fm else 0, fp, fm)


# --------------------------------------------------------------------------- constraint network

# a value is (cost, lo, hi) or None for "no assignment"


def _otimes(a, b):
    if a is None or b is None:
        return None
    return (a[0] + b[0], a[1] * b[1], a[2] * b[2])


def _oplus(a, b):
    if a is None:
        return b
    if b is None:
        return a
    if a[0] < b[0]:
        return a
    if b[0] < a[0]:
        return b
    return (a[0], a[1] + b[1], a[2] + b[2])


_ONE = (0, 1, 1)


@dataclass
class _Network:
    """Binary-state nodes; ``mask[a][b]`` bit ``2*sa + sb`` set when allowed."""

    sizes: list[int]
    label: list[int]  # lowest vertex id in the node, for deterministic ties
    sides: list[tuple[tuple[int, ...], tuple[int, ...]]]
    weights: list[list]
    mask: list[dict[int, int]]


def _build_network(us: UnfrozenSubgraph) -> tuple[_Network, dict[int, tuple[int, int]]]:
    eq = equivalence_classes(us)
    if eq.contradictions:
        raise ValueError(f"unfrozen constraints are contradictory near vertices {list(eq.contradictions)[:5]}")
    k = len(eq.classes)
    weights = [[(len(b), 1, 1), (len(a), 1, 1)] for a, b in eq.classes]
    mask: list[dict[int, int]] = [dict() for _ in range(k)]
    for x, y in us.single:
        cx, sx = eq.index[x]
        cy, sy = eq.index[y]
        if cx == cy:
            if sx == sy:
                weights[cx][sx] = None
            continue
        bit = 1 << (2 * sx + sy)
        rbit = 1 << (2 * sy + sx)
        mask[cx][cy] = mask[cx].get(cy, 0b1111) & ~bit
        mask[cy][cx] = mask[cy].get(cx, 0b1111) & ~rbit
    net = _Network(
        sizes=[len(a) + len(b) for a, b in eq.classes],
        label=[min(a + b) for a, b in eq.classes],
        sides=list(eq.classes),
        weights=weights,
        mask=mask,
    )
    return net, eq.index


def _allowed(m: int, sa: int, sb: int) -> bool:
    return bool(m >> (2 * sa + sb) & 1)


class _Search:
    def __init__(self, net: _Network, budget: CountBudget, strategy: Strategy, record_top: bool):
        self.net = net
        self.budget = budget
        self.strategy = strategy
        self.branches = 0
        self.pruned = 0
        self.exhausted = 0
        self.exceeded = False
        self.record_top = record_top
        self.top: list[tuple[int, bool, int]] = []
        self.depth = 0

    # -- helpers
    def _over(self) -> bool:
        b = self.budget
        return self.branches >= b.max_branches or self.exhausted >= b.max_exhaustion_vertices

    def _bound(self, nodes, w):
        cost = 0
        hi = 1
        for a in nodes:
            live = [x for x in w[a] if x is not None]
            cost += min(x[0] for x in live)
            hi *= sum(x[2] for x in live)
        return (cost, 0, hi)

    def _propagate(self, nodes: set[int], w: dict[int, list], queue: list[int]):
        """Eliminate nodes with a single live state; returns product or None."""
        mask = self.net.mask
        acc = _ONE
        while queue:
            a = queue.pop()
            if a not in nodes:
                continue
            live = [s for s in (0, 1) if w[a][s] is not None]
            if not live:
                return None
            if len(live) == 2:
                continue
            s = live[0]
            acc = _otimes(acc, w[a][s])
            nodes.discard(a)
            for b, m in mask[a].items():
                if b not in nodes:
                    continue
                wb = w[b]
                changed = False
                for sb in (0, 1):
                    if wb[sb] is not None and not _allowed(m, s, sb):
                        wb[sb] = None
                        changed = True
                if changed:
                    queue.append(b)
        return acc

    def _components(self, nodes: set[int]) -> list[list[int]]:
        mask = self.net.mask
        seen: set[int] = set()
        out = []
        for s in sorted(nodes, key=lambda a: self.net.label[a]):
            if s in seen:
                continue
            seen.add(s)
            comp = [s]
            i = 0
            while i < len(comp):
                u = comp[i]
                i += 1
                for b in mask[u]:
                    if b in nodes and b not in seen:
                        seen.add(b)
                        comp.append(b)
            out.append(comp)
        return out

    def _edges_within(self, comp: list[int]) -> int:
        cs = set(comp)
        return sum(1 for a in comp for b in self.net.mask[a] if b in cs) // 2

    def _tree_value(self, comp: list[int], w: dict[int, list]):
        mask = self.net.mask
        cs = set(comp)
        deg = {a: sum(1 for b in mask[a] if b in cs) for a in comp}
        leaves = [a for a in comp if deg[a] == 1]
        alive = set(comp)
        while leaves and len(alive) > 1:
            leaf = leaves.pop()
            if leaf not in alive or deg[leaf] != 1:
                continue
            p = next(b for b in mask[leaf] if b in alive)
            m = mask[p][leaf]
            wl = w[leaf]
            wp = w[p]
            for sp in (0, 1):
                if wp[sp] is None:
                    continue
                acc = None
                for sl in (0, 1):
                    if wl[sl] is not None and _allowed(m, sp, sl):
                        acc = _oplus(acc, wl[sl])
                wp[sp] = _otimes(wp[sp], acc)
            alive.discard(leaf)
            deg[p] -= 1
            if deg[p] == 1:
                leaves.append(p)
        (last,) = alive
        return _oplus(w[last][0], w[last][1])

    def _closure_size(self, comp_set: set[int], w, a: int, s: int) -> int:
        mask = self.net.mask
        fixed = {a: s}
        queue = [a]
        while queue:
            u = queue.pop()
            su = fixed[u]
            for b, m in mask[u].items():
                if b not in comp_set:
                    continue
                opts = [sb for sb in (0, 1) if w[b][sb] is not None and _allowed(m, su, sb)]
                if not opts:
                    return 0
                if len(opts) == 1:
                    have = fixed.get(b)
                    if have is None:
                        fixed[b] = opts[0]
                        queue.append(b)
                    elif have != opts[0]:
                        return 0
                elif b in fixed and fixed[b] not in opts:
                    return 0
        return sum(self.net.sizes[u] for u in fixed)

    def _pick(self, comp: list[int], w) -> int:
        cs = set(comp)
        mask = self.net.mask
        # only nodes on cycles can break them; influence still spans the component
        deg = {a: sum(1 for b in mask[a] if b in cs) for a in comp}
        peel = [a for a in comp if deg[a] <= 1]
        core = set(comp)
        while peel:
            a = peel.pop()
            if a not in core:
                continue
            core.discard(a)
            for b in mask[a]:
                if b in core:
                    deg[b] -= 1
                    if deg[b] == 1:
                        peel.append(b)
        pool = [a for a in comp if a in core] or comp
        if self.strategy is Strategy.SPARSEST_NEAR_TOP_LEVEL:
            hubs = [a for a in pool if deg[a] >= 3]
            pool = hubs or pool
        best, best_key = None, None
        for a in pool:
            infl = self._closure_size(cs, w, a, 0) + self._closure_size(cs, w, a, 1)
            key = (-infl, self.net.label[a])
            if best_key is None or key < best_key:
                best, best_key = a, key
        return best

    # -- main recursion
    def solve(self, nodes: set[int], w: dict[int, list], forced: list[int]):
        acc = self._propagate(nodes, w, forced)
        if acc is None:
            return None
        for comp in self._components(nodes):
            if len(comp) == 1:
                a = comp[0]
                val = _oplus(w[a][0], w[a][1])
            elif self._edges_within(comp) == len(comp) - 1:
                val = self._tree_value(comp, w)
            else:
                val = self._branch(comp, w)
            acc = _otimes(acc, val)
            if acc is None:
                return None
        return acc

    def _branch(self, comp: list[int], w):
        if self._over():
            self.exceeded = True
            if self.budget.on_exceed is OnExceed.FAIL:
                raise BudgetExceeded("counting budget exceeded")
            return self._bound(comp, w)
        j = self._pick(comp, w)
        self.exhausted += 1
        top = self.record_top and self.depth == 0
        self.depth += 1
        total = None
        for s in (0, 1):
            if w[j][s] is None:
                continue
            self.branches += 1
            sub_w = {a: list(w[a]) for a in comp}
            sub_w[j][1 - s] = None
            val = self.solve(set(comp), sub_w, [j])
            if val is None:
                self.pruned += 1
            if top:
                self.top.append((j, s, val))
            total = _oplus(total, val)
        self.depth -= 1
        if top:
            self.record_top = False  # only the first top-level exhaustion is reported
        return total


def _network_for(rsg: ReducedSolutionGraph):
    us = UnfrozenSubgraph(rsg.unfrozen, rsg.double_edges, rsg.single_edges)
    return us, *_build_network(us)


def count_network(
    rsg: ReducedSolutionGraph,
    budget: CountBudget | None = None,
    strategy: Strategy = Strategy.MAX_INFLUENCE,
    fixed: Mapping[int, bool] | None = None,
    network=None,
) -> CountResult:
    """Count minimum-cost consistent assignments, optionally with vertices pinned.

    ``fixed`` maps vertex -> covered. Pinning a backbone against its state
    gives count 0.
    """
    budget = budget or CountBudget()
    us, net, index = network or _network_for(rsg)
    w = {a: list(net.weights[a]) for a in range(len(net.weights))}
    queue = list(w)
    zero = False
    for v, covered in (fixed or {}).items():
        st = rsg.state[v]
        if st is CoverState.UNFROZEN:
            c, unc = index[v]
            keep = 1 - unc if covered else unc
            w[c][1 - keep] = None
            queue.append(c)
        elif (st is CoverState.NEGATIVE) != bool(covered):
            zero = True
    search = _Search(net, budget, strategy, record_top=not fixed)
    val = None if zero else search.solve(set(w), w, queue)
    neg = len(rsg.negative)
    top = _global_branches(net, search.top, val)
    if val is None:
        return CountResult(0, 0, 0, None, True, rsg.exactness, search.branches, search.pruned,
                           search.exhausted, top, len(us.components))
    cost, lo, hi = val
    exact = lo == hi
    return CountResult(
        lo if exact else None, lo, hi, neg + cost, exact, rsg.exactness,
        search.branches, search.pruned, search.exhausted, top, len(us.components),
    )


def _global_branches(net: _Network, local, total):
    """Turn the first exhaustion's per-component branch values into whole-graph counts."""
    if not local:
        return []
    comp_total = None
    for _, _, sval in local:
        comp_total = _oplus(comp_total, sval)
    out = []
    for j, s, sval in local:
        rep = net.sides[j][0][0]  # side A holds the lowest id of the class
        if sval is None or total is None or comp_total is None or sval[0] != comp_total[0]:
            k = 0
        elif total[1] == total[2] and comp_total[1] == comp_total[2]:
            k = sval[1] * (total[1] // comp_total[1])
        else:
            k = sval[1]  # bounds mode: the local count is all that is known
        out.append((rep, s == 1, k))
    return out


def count_solutions(
    rsg: ReducedSolutionGraph,
    budget: CountBudget | None = None,
    *,
    strategy: Strategy = Strategy.MAX_INFLUENCE,
    allow_unverified: bool = False,
) -> CountResult:
    """Number of minimum vertex covers implied by ``rsg`` (exact big integer).

    Refuses INEXACT input, and UNVERIFIED input unless ``allow_unverified``.
    """
    if rsg.exactness is Exactness.INEXACT:
        raise UntrustedRSGError("rsg failed verification; its count would be meaningless")
    if rsg.exactness is Exactness.UNVERIFIED and not allow_unverified:
        raise UntrustedRSGError("rsg is unverified; pass allow_unverified to count anyway")
    return count_network(rsg, budget, strategy)


def entropy_density(count: BigCount, n: int) -> float:
    """``ln(count) / n``; ``math.log`` handles arbitrarily large integers."""
    if count <= 0:
        raise ValueError("entropy of an empty solution set is undefined")
    if n <= 0:
        raise ValueError("n must be positive")
    return math.log(count) / n


def min_cover_size(rsg: ReducedSolutionGraph) -> int:
    """Negative backbones plus the cheapest consistent unfrozen assignment.

    With balanced classes (both sides equally large, always the case for
    matched structures) every assignment costs the same and no search runs.
    """
    if rsg.exactness is Exactness.INEXACT:
        raise UntrustedRSGError("rsg failed verification")
    us = UnfrozenSubgraph(rsg.unfrozen, rsg.double_edges, rsg.single_edges)
    eq = equivalence_classes(us)
    if eq.contradictions:
        raise ValueError("unfrozen constraints are contradictory")
    if all(len(a) == len(b) for a, b in eq.classes):
        return len(rsg.negative) + sum(len(a) for a, _ in eq.classes)
    res = count_network(rsg, CountBudget(max_branches=1 << 40, max_exhaustion_vertices=1 << 40))
    if res.min_size is None:
        raise ValueError("unfrozen constraints are unsatisfiable")
    return res.min_size


def cover_marginals(
    rsg: ReducedSolutionGraph,
    budget: CountBudget | None = None,
    strategy: Strategy = Strategy.MAX_INFLUENCE,
) -> dict[int, Fraction]:
    """Exact probability of being covered for every vertex, over minimum covers.

    Each unfrozen class is pinned to each of its two states and only its own
    component is recounted.
    """
    budget = budget or CountBudget()
    us, net, _ = _network_for(rsg)
    search = _Search(net, budget, strategy, False)
    out: dict[int, Fraction] = {v: Fraction(1) for v in rsg.negative}
    out.update({v: Fraction(0) for v in rsg.positive})
    for comp in search._components(set(range(len(net.weights)))):
        w = {a: list(net.weights[a]) for a in comp}
        total = search.solve(set(comp), w, list(comp))
        if total is None:
            raise ValueError("unsatisfiable unfrozen component")
        if total[1] != total[2]:
            raise BudgetExceeded("marginals need exact counts", None)
        cost, count, _ = total
        for a in comp:
            per_state = []
            for s in (0, 1):
                if net.weights[a][s] is None:
                    per_state.append(0)
                    continue
                sub = {b: list(net.weights[b]) for b in comp}
                sub[a][1 - s] = None
                val = search.solve(set(comp), sub, list(comp))
                per_state.append(val[1] if val is not None and val[0] == cost else 0)
            side_a, side_b = net.sides[a]
            # state 0: side A uncovered, side B covered
            for v in side_a:
                out[v] = Fraction(per_state[1], count)
            for v in side_b:
                out[v] = Fraction(per_state[0], count)
    if search.exceeded:
        raise BudgetExceeded("counting budget exceeded")
    return out


# --------------------------------------------------------------------------- decoding


def decode_assignment(rsg: ReducedSolutionGraph, rng: random.Random | None = None) -> set[int]:
    """A random minimum-size assignment consistent with ``rsg``; returns covered vertices.

    Balanced components are decoded by random fix-and-propagate, which never
    needs to backtrack on two-state binary constraints once a fix propagates
    without conflict. Unbalanced components (lone unfrozen vertices) are
    sampled exactly through conditional counts.
    """
    rng = rng or random.Random()
    us, net, _ = _network_for(rsg)
    search = _Search(net, CountBudget(1 << 40, 1 << 40), Strategy.MAX_INFLUENCE, False)
    state: dict[int, int] = {}
    w = {a: list(net.weights[a]) for a in range(len(net.weights))}

    for comp in search._components(set(w)):
        balanced = all(len(net.sides[a][0]) == len(net.sides[a][1]) for a in comp)
        if balanced:
            _decode_propagate(net, comp, w, state, rng)
        else:
            _decode_sample(search, comp, w, state, rng)

    covered = set(rsg.negative)
    for a, s in state.items():
        side_a, side_b = net.sides[a]
        covered.update(side_b if s == 0 else side_a)
    return covered


def _decode_propagate(net: _Network, comp, w, state, rng) -> None:
    order = list(comp)
    rng.shuffle(order)
    for a in order:
        if a in state:
            continue
        first = rng.randrange(2)
        for s in (first, 1 - first):
            trial = _try_fix(net, w, state, a, s)
            if trial is not None:
                state.update(trial)
                break
        else:
            raise ValueError(f"no consistent value for class containing vertex {net.label[a]}")


def _try_fix(net: _Network, w, state, a, s):
    if w[a][s] is None:
        return None
    new = {a: s}
    queue = [a]
    while queue:
        u = queue.pop()
        su = new[u]
        for b, m in net.mask[u].items():
            opts = [sb for sb in (0, 1) if w[b][sb] is not None and _allowed(m, su, sb)]
            have = state.get(b, new.get(b))
            if have is not None:
                if have not in opts:
                    return None
                continue
            if not opts:
                return None
            if len(opts) == 1:
                new[b] = opts[0]
                queue.append(b)
    return new


def _decode_sample(search: _Search, comp, w, state, rng) -> None:
    pinned: dict[int, int] = {}
    for a in comp:
        vals = []
        for s in (0, 1):
            sub = {b: list(w[b]) for b in comp}
            for b, sb in list(pinned.items()) + [(a, s)]:
                sub[b][1 - sb] = None
            vals.append(search.solve(set(comp), sub, list(pinned) + [a]))
        live = [v for v in vals if v is not None]
        if not live:
            raise ValueError("unsatisfiable component")
        best = min(v[0] for v in live)
        weights = [v[1] if v is not None and v[0] == best else 0 for v in vals]
        pinned[a] = 0 if rng.randrange(weights[0] + weights[1]) < weights[0] else 1
    state.update(pinned)
