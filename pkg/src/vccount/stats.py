"""Ensemble statistics and solution-space analytics.

Measured state ratios feed the mean-field unfrozen-degree law and the
influence-range fixed point; marginals come exact (count ratios) or from the
leaves-to-root iteration; an edge-addition experiment tracks how the count
moves as edges arrive one at a time.
"""

from __future__ import annotations

import csv
import math
import random
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import counter as C
from .graph import ErdosRenyi, GenSpec, Graph, generate
from .rsg import (
    CoverState,
    EdgeKind,
    Exactness,
    ReducedSolutionGraph,
    UnfrozenSubgraph,
    build_rsg_heuristic,
    unfrozen_subgraph,
    verify_rsg,
)

__all__ = [
    "InstanceStats",
    "EnsembleReport",
    "measure_instance",
    "measure_ensemble",
    "theoretical_Fr",
    "theoretical_Fr_vector",
    "EdgeStats",
    "derived_edge_stats",
    "InfluenceDistribution",
    "influence_distribution",
    "large_influence_fraction",
    "auto_s_max",
    "MarginalMode",
    "MarginalTable",
    "marginal_exact",
    "IterativeMarginal",
    "marginal_iterative",
    "Histogram",
    "marginal_histogram",
    "TraceStep",
    "EdgeTrace",
    "edge_addition_experiment",
    "random_edge_schedule",
    "windowed_mean",
    "write_fig2",
    "write_fig2_inset",
    "write_fig5",
    "write_fig6",
    "write_influence",
    "write_trace",
]

FR_KMAX = 24


# --------------------------------------------------------------------------- ensembles


@dataclass
class InstanceStats:
    seed: int
    n: int
    q0: float
    q_plus: float
    q_minus: float
    q_edg: float
    unfrozen_degree: np.ndarray  # counts of unfrozen vertices by unfrozen degree
    component_sizes: list[int]
    has_core: bool
    exactness: Exactness
    entropy: float | None = None
    count: int | None = None

    @property
    def max_component_fraction(self) -> float:
        return max(self.component_sizes, default=0) / max(self.n, 1)


def _sem(values) -> float:
    a = np.asarray(values, dtype=float)
    return float(a.std(ddof=1) / math.sqrt(len(a))) if len(a) > 1 else float("nan")


@dataclass
class EnsembleReport:
    label: str
    param: float
    n: int
    instances: int
    seed_base: int
    q0: float
    q_plus: float
    q_minus: float
    q_edg: float
    Fr_empirical: np.ndarray
    Fr_stderr: np.ndarray
    component_size_histogram: dict[int, int]
    max_component_fraction: float
    max_component_fraction_stderr: float
    components_per_vertex: float
    entropy_samples: list[float]
    exactness_tally: dict[str, int]
    core_fraction: float
    per_instance: list[InstanceStats] = field(default_factory=list, repr=False)

    @property
    def entropy_mean(self) -> float:
        return float(np.mean(self.entropy_samples)) if self.entropy_samples else float("nan")

    @property
    def entropy_stderr(self) -> float:
        return _sem(self.entropy_samples)

    @property
    def instances_verified(self) -> int:
        return len(self.entropy_samples)

    def q_sum_error(self) -> float:
        return abs(self.q0 + self.q_plus + self.q_minus - 1.0)


def measure_instance(
    g: Graph,
    seed: int = 0,
    *,
    count: bool = False,
    budget: C.CountBudget | None = None,
    decodes: int = 64,
    verify: bool = True,
) -> tuple[InstanceStats, ReducedSolutionGraph]:
    """Structure of one instance; ``verify=False`` skips verification (structure only, no counts)."""
    rsg = build_rsg_heuristic(g)
    if verify:
        rsg = verify_rsg(g, rsg, decodes=decodes, seed=seed).rsg
    us = UnfrozenSubgraph(rsg.unfrozen, rsg.double_edges, rsg.single_edges)
    deg = np.zeros(FR_KMAX + 1, dtype=np.int64)
    for v in us.vertices:
        deg[min(len(us.adjacency[v]), FR_KMAX)] += 1
    q0, qp, qm = rsg.ratios()
    st = InstanceStats(
        seed=seed,
        n=g.n,
        q0=q0,
        q_plus=qp,
        q_minus=qm,
        q_edg=us.edge_count / max(g.n, 1),
        unfrozen_degree=deg,
        component_sizes=sorted((len(c) for c in us.components), reverse=True),
        has_core=rsg.provenance.get("undetermined_messages", 0) > 0,
        exactness=rsg.exactness,
    )
    if count and rsg.exactness.trusted:
        try:
            res = C.count_solutions(rsg, budget)
            st.count = res.count
            st.entropy = C.entropy_density(res.count, g.n)
        except C.BudgetExceeded:
            pass
    return st, rsg


def _ensemble_row(spec: GenSpec, seed: int, **kw) -> InstanceStats:
    return measure_instance(generate(spec.with_seed(seed)), seed, **kw)[0]


def measure_ensemble(
    spec: GenSpec,
    instances: int,
    *,
    count: bool = False,
    budget: C.CountBudget | None = None,
    decodes: int = 64,
    threads: int = 1,
    verify: bool = True,
) -> EnsembleReport:
    """Heuristic RSG + verification per instance; seeds ``spec.seed + i``.

    Structural tallies use every instance; entropy samples only instances
    whose RSG verified (or is oracle exact) and counted within budget.
    ``verify=False`` is for structure-only sweeps; it leaves every instance
    UNVERIFIED, so no entropy samples are taken.
    """
    if instances < 1:
        raise ValueError("instances must be >= 1")
    seeds = [spec.seed + i for i in range(instances)]
    job = partial(_ensemble_row, spec, count=count, budget=budget, decodes=decodes, verify=verify)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(job, seeds))  # map keeps seed order
    else:
        rows = [job(s) for s in seeds]
    n = spec.n
    Fr = np.array([r.unfrozen_degree / n for r in rows])
    hist: Counter[int] = Counter()
    for r in rows:
        hist.update(r.component_sizes)
    tally = Counter(r.exactness.value for r in rows)
    fracs = [r.max_component_fraction for r in rows]
    param = getattr(spec.kind, "c", getattr(spec.kind, "gamma", float("nan")))
    return EnsembleReport(
        label=spec.label or type(spec.kind).__name__,
        param=float(param),
        n=n,
        instances=instances,
        seed_base=spec.seed,
        q0=float(np.mean([r.q0 for r in rows])),
        q_plus=float(np.mean([r.q_plus for r in rows])),
        q_minus=float(np.mean([r.q_minus for r in rows])),
        q_edg=float(np.mean([r.q_edg for r in rows])),
        Fr_empirical=Fr.mean(axis=0),
        Fr_stderr=Fr.std(axis=0, ddof=1) / math.sqrt(len(rows)) if len(rows) > 1 else np.full(Fr.shape[1], np.nan),
        component_size_histogram=dict(sorted(hist.items())),
        max_component_fraction=float(np.mean(fracs)),
        max_component_fraction_stderr=_sem(fracs),
        components_per_vertex=float(np.mean([len(r.component_sizes) / n for r in rows])),
        entropy_samples=[r.entropy for r in rows if r.entropy is not None],
        exactness_tally=dict(tally),
        core_fraction=float(np.mean([r.has_core for r in rows])),
        per_instance=rows,
    )


# --------------------------------------------------------------------------- unfrozen degree law


def _check_qs(q0, q_plus, q_minus):
    for q in (q0, q_plus, q_minus):
        if q < -1e-12 or q > 1 + 1e-12:
            raise ValueError("state ratios must lie in [0, 1]")
    if abs(q0 + q_plus + q_minus - 1.0) > 1e-9:
        raise ValueError(f"state ratios sum to {q0 + q_plus + q_minus}, not 1")


def theoretical_Fr(c: float, q0: float, q_plus: float, q_minus: float, k: int) -> float:
    """Probability that a vertex is unfrozen with ``k`` unfrozen neighbours.

    Poisson(c) degrees; one positive neighbour, ``k-1`` unfrozen and the rest
    negative, neighbours independent. The series over the degree ``i`` stops
    once the remaining Poisson mass is below 1e-12 and the last term no
    longer moves the sum.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    _check_qs(q0, q_plus, q_minus)
    if c < 0:
        raise ValueError("c must be >= 0")
    if c == 0 or q_plus == 0:
        return 0.0
    total = 0.0
    i = k
    log_c = math.log(c)
    # Poisson mass at i >= k, tracked for the stopping rule
    head = sum(math.exp(-c + j * log_c - math.lgamma(j + 1)) for j in range(k))
    while True:
        log_p = -c + i * log_c - math.lgamma(i + 1)
        p = math.exp(log_p)
        comb = math.lgamma(i) - math.lgamma(k) - math.lgamma(i - k + 1)  # C(i-1, k-1)
        term_log = log_p + math.log(i) + math.log(q_plus) + comb
        term = math.exp(term_log)
        if k > 1:
            term *= q0 ** (k - 1) if q0 > 0 else 0.0
        if i > k:
            term *= q_minus ** (i - k) if q_minus > 0 else 0.0
        total += term
        head += p
        # Poisson tail bound, plus a relative guard so small F_r keep full precision
        if 1.0 - head < 1e-12 and i > c and term <= 1e-17 * total:
            break
        i += 1
    return total


def theoretical_Fr_vector(c, q0, q_plus, q_minus, k_max: int = FR_KMAX) -> np.ndarray:
    """``F_r(k)`` for ``k = 0..k_max`` (index 0 is always 0)."""
    return np.array([0.0] + [theoretical_Fr(c, q0, q_plus, q_minus, k) for k in range(1, k_max + 1)])


class EdgeStats(NamedTuple):
    q_edg: float
    n_compo_estimate: float

    @property
    def tree_regime(self) -> bool:
        """The component estimate assumes trees; it means nothing once edges outnumber vertices."""
        return self.n_compo_estimate >= 0


def derived_edge_stats(Fr: Sequence[float], q0: float | None = None) -> EdgeStats:
    """Free edges per vertex from the degree law, and the tree-regime component count.

    ``Fr[k]`` is indexed by degree (``Fr[0]`` ignored). ``q0`` defaults to
    the law's own unfrozen mass.
    """
    fr = np.asarray(Fr, dtype=float)
    ks = np.arange(len(fr))
    q_edg = float((ks[1:] * fr[1:]).sum() / 2)
    if q0 is None:
        q0 = float(fr[1:].sum())
    return EdgeStats(q_edg, q0 - q_edg)


# --------------------------------------------------------------------------- influence fixed point


@dataclass
class InfluenceDistribution:
    P: np.ndarray  # P[s], s = 0..s_max
    R: float
    truncated_mass: float
    offspring: np.ndarray  # normalized degree law f(k), index k
    rounds: int
    converged: bool
    l1_change: float

    @property
    def s_max(self) -> int:
        return len(self.P) - 1

    def normalization_error(self) -> float:
        return abs(float(self.P.sum()) + self.R - 1.0)


class InfluenceNotConverged(RuntimeError):
    def __init__(self, dist: InfluenceDistribution):
        super().__init__(f"influence fixed point not converged after {dist.rounds} rounds "
                         f"(last L1 change {dist.l1_change:.3e})")
        self.dist = dist


def _truncated_conv(a: np.ndarray, b_hat: np.ndarray, size: int, L: int) -> np.ndarray:
    out = np.fft.irfft(np.fft.rfft(a, size) * b_hat, size)[:L]
    np.maximum(out, 0.0, out=out)
    return out


def auto_s_max(lam: float, target: float = 1e-12, cap: int = 1 << 20) -> int:
    """Truncation length leaving less than ``target`` of finite mass beyond it.

    Normalized, the offspring law is Poisson(``lam``), so ``P(s)`` is the
    Borel law whose tail decays like ``s^(-3/2) exp(-s (lam - 1 - ln lam))``.
    """
    if lam <= 0:
        return 256
    rate = lam - 1.0 - math.log(lam)
    if rate <= 0:
        return cap
    need = (-math.log(target)) / rate
    return min(cap, max(256, 1 << int(math.ceil(math.log2(need)))))


def _conv(a: np.ndarray, b_hat: np.ndarray, size: int, L: int) -> np.ndarray:
    return np.fft.irfft(np.fft.rfft(a, size) * b_hat, size)[:L]


def _series_inverse(a: np.ndarray, L: int) -> np.ndarray:
    """Truncated power series ``1/a`` (``a[0] != 0``) by Newton doubling."""
    b = np.array([1.0 / a[0]])
    n = 1
    while n < L:
        n = min(2 * n, L)
        size = 1 << int(math.ceil(math.log2(2 * n)))
        ab = _conv(a[:n], np.fft.rfft(b, size), size, n)
        ab = -ab
        ab[0] += 2.0
        b = _conv(b, np.fft.rfft(ab, size), size, n)
    return b


def influence_distribution(
    c: float,
    q0: float,
    q_plus: float,
    q_minus: float,
    s_max: int | None = 200,
    *,
    tol: float = 1e-10,
    max_rounds: int = 10_000,
    normalize: bool = True,
    raise_on_failure: bool = False,
    method: str = "newton",
) -> InfluenceDistribution:
    """Self-consistent size law of the set fixed by uncovering one unfrozen vertex.

    ``P(s) = sum_k f(k) [prod_{j<k} P(s_j)] delta(sum s_j = s - 1)``: the seed
    counts once and each of its ``k-1`` non-partner unfrozen neighbours
    opens an independent branch. ``f`` is the unfrozen-degree law; with
    ``normalize`` it is ``F_r`` divided by its total mass (the probability of
    being unfrozen), which makes ``f`` a distribution over unfrozen vertices.

    Solved on the truncated vector ``P[0..s_max]`` with FFT convolutions,
    by power-series Newton (default) or plain fixed-point rounds
    (``method="picard"``); ``l1_change`` is always the L1 size of one final
    fixed-point round. ``R`` is the escape probability ``1 - m*`` where
    ``m*`` is the smallest root of ``m = sum_k f(k) m^(k-1)``;
    ``truncated_mass`` is the finite-size mass beyond ``s_max``, reported
    separately so that truncation never counts as escape. ``s_max=None``
    picks a length from :func:`auto_s_max`.
    """
    _check_qs(q0, q_plus, q_minus)
    if s_max is None:
        s_max = auto_s_max(c * q0)
    if s_max < 1:
        raise ValueError("s_max must be >= 1")
    k_cap = max(FR_KMAX, int(c + 12 * math.sqrt(c + 1)) + 2)
    f = theoretical_Fr_vector(c, q0, q_plus, q_minus, k_cap)
    mass = float(f.sum())
    if normalize and mass > 0:
        f = f / mass
    ks = np.flatnonzero(f > 0)
    L = s_max + 1
    P = np.zeros(L)
    if len(ks) == 0:
        return InfluenceDistribution(P, 0.0 if normalize else 1.0, 0.0, f, 0, True, 0.0)
    k_hi = int(ks.max())
    size = 1 << int(math.ceil(math.log2(2 * L)))

    def picard(P, p_hat=None):
        # one round of P <- x * phi(P), with phi(m) = sum_k f(k) m^(k-1)
        p_hat = np.fft.rfft(P, size) if p_hat is None else p_hat
        acc = np.zeros(L)
        acc[0] = f[k_hi]
        for k in range(k_hi - 1, 0, -1):
            acc = _truncated_conv(acc, p_hat, size, L)
            acc[0] += f[k]
        new = np.zeros(L)
        new[1:] = acc[:-1]
        return new

    converged = False
    change = float("inf")
    rounds = 0
    if method == "newton":
        # Newton on G - x phi(G) = 0 as truncated power series
        for rounds in range(1, max_rounds + 1):
            g_hat = np.fft.rfft(P, size)
            phi = np.zeros(L)
            dphi = np.zeros(L)
            phi[0] = f[k_hi]
            for k in range(k_hi - 1, 0, -1):
                dphi = _conv(dphi, g_hat, size, L) + phi
                phi = _conv(phi, g_hat, size, L)
                phi[0] += f[k]
            resid = P.copy()
            resid[1:] -= phi[:-1]
            denom = -np.concatenate([[0.0], dphi[:-1]])
            denom[0] += 1.0
            step = _conv(resid, np.fft.rfft(_series_inverse(denom, L), size), size, L)
            new = np.maximum(P - step, 0.0)
            change = float(np.abs(new - P).sum())
            P = new
            if change < tol * 1e-3:
                break
        new = picard(P)
        change = float(np.abs(new - P).sum())
        P = new
        rounds += 1
        converged = change < tol
    elif method == "picard":
        for rounds in range(1, max_rounds + 1):
            new = picard(P)
            change = float(np.abs(new - P).sum())
            P = new
            if change < tol:
                converged = True
                break
    else:
        raise ValueError(f"unknown method {method!r}")

    # extinction probability of the branching process
    poly = f[1:]  # coefficient of m^(k-1)
    m = 0.0
    for _ in range(1_000_000):
        m_new = float(np.polyval(poly[::-1], m))
        if abs(m_new - m) < 1e-15:
            m = m_new
            break
        m = m_new
    if not normalize:
        m = min(m, 1.0)
    R = max(0.0, 1.0 - m)
    truncated = max(0.0, m - float(P.sum()))
    dist = InfluenceDistribution(P, R, truncated, f, rounds, converged, change)
    if not converged and raise_on_failure:
        raise InfluenceNotConverged(dist)
    return dist


def large_influence_fraction(rsg: ReducedSolutionGraph, threshold: float = 0.05) -> float:
    """Fraction of unfrozen vertices whose uncovering fixes more than ``threshold * n`` others."""
    us = UnfrozenSubgraph(rsg.unfrozen, rsg.double_edges, rsg.single_edges)
    if not us.vertices:
        return 0.0
    cut = threshold * rsg.base.n
    big = sum(1 for v in us.vertices if C.influence_range(us, v).i_plus > cut)
    return big / len(us.vertices)


# --------------------------------------------------------------------------- marginals


class MarginalMode:
    EXACT_RATIO = "exact_ratio"
    ITERATIVE = "iterative"


@dataclass(frozen=True)
class MarginalTable:
    p_cover: tuple[Fraction | float, ...]
    mode: str
    exactness: Exactness

    def total(self):
        return sum(self.p_cover)


def marginal_exact(rsg: ReducedSolutionGraph, budget: C.CountBudget | None = None) -> MarginalTable:
    """Cover probability per vertex as an exact ratio of solution counts."""
    if not rsg.exactness.trusted:
        raise C.UntrustedRSGError("exact marginals need an oracle-exact or verified rsg")
    table = C.cover_marginals(rsg, budget)
    return MarginalTable(tuple(table[v] for v in range(rsg.base.n)), MarginalMode.EXACT_RATIO, rsg.exactness)


@dataclass(frozen=True)
class IterativeMarginal:
    root: int
    p_uncovered_raw: float
    p_uncovered_normalized: float

    @property
    def p_cover_raw(self) -> float:
        return 1.0 - self.p_uncovered_raw

    @property
    def p_cover_normalized(self) -> float:
        return 1.0 - self.p_uncovered_normalized


def marginal_iterative(rsg: ReducedSolutionGraph, root: int) -> IterativeMarginal:
    """Leaves-to-root estimate of ``P(root uncovered)`` on a tree component.

    Raw: leaves start at 0.5 and ``P+(i) = prod (1 - P+(child))`` over all
    children. Normalized: ``U / (U + D)`` with ``U`` that product and ``D``
    the product of ``P+`` over DOUBLE children, which is the exact ratio on
    trees. A root that is itself a leaf is not initialized.
    """
    if rsg.state[root] is not CoverState.UNFROZEN:
        raise ValueError(f"vertex {root} is not unfrozen")
    us = unfrozen_subgraph(rsg)
    comp = next(c for c in us.components if root in c)
    sub = us.restrict(comp)
    if not sub.is_forest():
        raise C.NotATreeError("component of the root has a cycle")
    adj = sub.adjacency
    parent: dict[int, int | None] = {root: None}
    order = [root]
    for u in order:
        for w, _ in adj[u]:
            if w not in parent:
                parent[w] = u
                order.append(w)
    raw: dict[int, float] = {}
    norm: dict[int, float] = {}
    for u in reversed(order):
        children = [(w, k) for w, k in adj[u] if parent.get(w) == u]
        if not children:
            raw[u] = norm[u] = 0.5
            continue
        prod_raw = 1.0
        prod_u = 1.0
        prod_d = 1.0
        for w, kind in children:
            prod_raw *= 1.0 - raw[w]
            prod_u *= 1.0 - norm[w]
            if kind is EdgeKind.DOUBLE:
                prod_d *= norm[w]
        raw[u] = min(1.0, max(0.0, prod_raw))
        norm[u] = prod_u / (prod_u + prod_d)
    return IterativeMarginal(root, raw[root], norm[root])


@dataclass
class Histogram:
    zero: float
    one: float
    bins: list[float]
    vertices: int

    @property
    def central(self) -> float:
        """Mass of ``(0.4, 0.6]``."""
        return self.bins[4] + self.bins[5]

    def total(self) -> float:
        return self.zero + self.one + sum(self.bins)


def _bin_index(p, nbins: int) -> int:
    if isinstance(p, Fraction):
        x = p * nbins
        idx = -((-x.numerator) // x.denominator) - 1  # ceil(x) - 1
    else:
        idx = math.ceil(p * nbins - 1e-12) - 1
    return min(max(idx, 0), nbins - 1)


def marginal_histogram(tables: Iterable[MarginalTable], bins: int = 10) -> Histogram:
    """Separate bars for exactly 0 and exactly 1, plus ``bins`` intervals ``(i/b, (i+1)/b]``."""
    zero = one = 0
    counts = [0] * bins
    total = 0
    for t in tables:
        for p in t.p_cover:
            total += 1
            if p == 0:
                zero += 1
            elif p == 1:
                one += 1
            else:
                counts[_bin_index(p, bins)] += 1
    if total == 0:
        raise ValueError("no marginals to histogram")
    return Histogram(zero / total, one / total, [x / total for x in counts], total)


# --------------------------------------------------------------------------- edge addition


@dataclass
class TraceStep:
    step: int
    edge: tuple[int, int]
    case: str
    count: int | None
    log_count: float | None
    exactness: Exactness


@dataclass
class EdgeTrace:
    n: int
    steps: list[TraceStep]
    truncated: bool = False
    reason: str = ""

    def log_counts(self) -> np.ndarray:
        return np.array([np.nan if s.log_count is None else s.log_count for s in self.steps])

    def log_changes(self) -> np.ndarray:
        lc = np.concatenate([[0.0], self.log_counts()])
        return np.diff(lc)


def random_edge_schedule(n: int, c_final: float, seed: int = 0) -> list[tuple[int, int]]:
    """Edges of a G(n, c_final) instance in a seeded random arrival order."""
    g = generate(GenSpec(ErdosRenyi(c_final), n, seed))
    edges = list(g.edges)
    random.Random(seed).shuffle(edges)
    return edges


def _classify(prev: ReducedSolutionGraph | None, cur: ReducedSolutionGraph, edge) -> str:
    u, v = edge
    kind = cur.edge_kind(u, v)
    us = UnfrozenSubgraph(cur.unfrozen, cur.double_edges, cur.single_edges)
    if kind is EdgeKind.DOUBLE:
        adj = us.adjacency
        su = [w for w, k in adj[u] if w != v]
        sv = [w for w, k in adj[v] if w != u]
        if not su and not sv:
            return "c"
        if not su or not sv:
            return "d"
        rest = us.restrict(set(us.vertices) - {u, v})
        where = {x: i for i, comp in enumerate(rest.components) for x in comp}
        return "a" if {where[w] for w in su} != {where[w] for w in sv} else "b"
    if kind is EdgeKind.SINGLE:
        if prev is None:
            return "a"
        pus = UnfrozenSubgraph(prev.unfrozen, prev.double_edges, prev.single_edges)
        where = {x: i for i, comp in enumerate(pus.components) for x in comp}
        if u in where and v in where and where[u] == where[v]:
            return "b"
        return "a"
    return "backbone"


def edge_addition_experiment(
    n: int,
    schedule: Sequence[tuple[int, int]],
    budget: C.CountBudget | None = None,
    *,
    decodes: int = 16,
    stop_on_unverified: bool = False,
) -> EdgeTrace:
    """Add edges one at a time, rebuilding and recounting after each.

    Case labels: ``a`` a new DOUBLE edge whose two ends reach different
    unfrozen components (or a new SINGLE edge joining components), ``b`` the
    same inside one component, ``c`` an isolated new DOUBLE pair, ``d`` a
    DOUBLE pair attached by one end only, ``backbone`` when the new edge
    touches a frozen vertex.
    """
    edges: list[tuple[int, int]] = []
    steps: list[TraceStep] = []
    prev = None
    for i, e in enumerate(schedule):
        edges.append((min(e), max(e)))
        g = Graph(n, tuple(edges))
        rep = verify_rsg(g, build_rsg_heuristic(g), decodes=decodes, seed=i)
        cur = rep.rsg
        case = _classify(prev, cur, (min(e), max(e)))
        count = log_count = None
        if cur.exactness.trusted:
            try:
                count = C.count_solutions(cur, budget).count
            except C.BudgetExceeded:
                steps.append(TraceStep(i, e, case, None, None, cur.exactness))
                return EdgeTrace(n, steps, True, "budget exceeded")
            log_count = math.log(count)
        elif stop_on_unverified:
            steps.append(TraceStep(i, e, case, None, None, cur.exactness))
            return EdgeTrace(n, steps, True, "unverified rsg")
        steps.append(TraceStep(i, e, case, count, log_count, cur.exactness))
        prev = cur
    return EdgeTrace(n, steps)


def windowed_mean(values: Sequence[float], window: int) -> np.ndarray:
    """Trailing mean over ``window`` steps, ignoring NaN entries."""
    a = np.asarray(values, dtype=float)
    out = np.full(len(a), np.nan)
    for i in range(len(a)):
        seg = a[max(0, i - window + 1): i + 1]
        seg = seg[~np.isnan(seg)]
        if len(seg):
            out[i] = seg.mean()
    return out


# --------------------------------------------------------------------------- CSV emitters

FIG2_COLUMNS = ("c", "q0", "q_plus", "q_minus", "q_edg", "max_component_fraction")
FIG2_INSET_COLUMNS = ("c", "k", "Fr_theory", "Fr_empirical", "stderr")
FIG5_COLUMNS = ("c", "s_mean", "s_stderr", "instances_verified")
FIG6_COLUMNS = ("bin", "mass", "ensemble")
INFLUENCE_COLUMNS = ("s", "P", "R")
TRACE_COLUMNS = ("step", "case", "log_count")


def _writer(path):
    fh = open(path, "w", newline="")
    return fh, csv.writer(fh)


def write_fig2(path, reports: Sequence[EnsembleReport]) -> None:
    fh, w = _writer(path)
    with fh:
        w.writerow(FIG2_COLUMNS)
        for r in reports:
            w.writerow([r.param, r.q0, r.q_plus, r.q_minus, r.q_edg, r.max_component_fraction])


def write_fig2_inset(path, reports: Sequence[EnsembleReport], k_max: int = 12) -> None:
    fh, w = _writer(path)
    with fh:
        w.writerow(FIG2_INSET_COLUMNS)
        for r in reports:
            theory = theoretical_Fr_vector(r.param, r.q0, r.q_plus, 1.0 - r.q0 - r.q_plus, k_max)
            for k in range(1, k_max + 1):
                w.writerow([r.param, k, theory[k], r.Fr_empirical[k], r.Fr_stderr[k]])


def write_fig5(path, reports: Sequence[EnsembleReport]) -> None:
    fh, w = _writer(path)
    with fh:
        w.writerow(FIG5_COLUMNS)
        for r in reports:
            w.writerow([r.param, r.entropy_mean, r.entropy_stderr, r.instances_verified])


def write_fig6(path, hists: dict[str, Histogram]) -> None:
    fh, w = _writer(path)
    with fh:
        w.writerow(FIG6_COLUMNS)
        for label, h in hists.items():
            w.writerow(["0", h.zero, label])
            for i, m in enumerate(h.bins):
                w.writerow([f"({i / len(h.bins):.1f},{(i + 1) / len(h.bins):.1f}]", m, label])
            w.writerow(["1", h.one, label])


def write_influence(path, dist: InfluenceDistribution) -> None:
    fh, w = _writer(path)
    with fh:
        w.writerow(INFLUENCE_COLUMNS)
        for s, p in enumerate(dist.P):
            w.writerow([s, p, dist.R])


def write_trace(path, trace: EdgeTrace) -> None:
    fh, w = _writer(path)
    with fh:
        w.writerow(TRACE_COLUMNS)
        for st in trace.steps:
            w.writerow([st.step, st.case, "" if st.log_count is None else st.log_count])
