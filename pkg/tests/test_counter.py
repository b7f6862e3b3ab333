import math
import random
from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from vccount import counter as C
from vccount.graph import ErdosRenyi, GenSpec, Graph, generate, read_graph
from vccount.oracle import enumerate_min_covers
from vccount.rsg import (
    CoverState,
    Exactness,
    build_rsg_heuristic,
    build_rsg_oracle,
    unfrozen_subgraph,
    verify_rsg,
)

from conftest import FIG4, brute_min_covers, graphs, trees

CHAIN3 = Graph(6, ((0, 1), (1, 2), (2, 3), (3, 4), (4, 5)))


def _disjoint_union(a: Graph, b: Graph) -> Graph:
    return Graph(a.n + b.n, a.edges + tuple((u + a.n, v + a.n) for u, v in b.edges))


def test_fig4_counts_19_as_18_plus_1():
    rsg = verify_rsg(read_graph(str(FIG4)), build_rsg_heuristic(read_graph(str(FIG4)))).rsg
    res = C.count_solutions(rsg)
    assert res.count == 19 and res.exact
    assert sorted(k for _, _, k in res.top_branches) == [1, 18]
    assert {v for v, _, _ in res.top_branches} == {8}
    assert C.count_network(rsg, fixed={8: True}).count == 18
    assert C.count_network(rsg, fixed={8: False}).count == 1


def test_chain_pairs_tree_recursion():
    us = unfrozen_subgraph(build_rsg_oracle(CHAIN3))
    assert C.tree_count(us, 0) == C.PairCount(3, 1)
    assert sum(vars(C.tree_count(us, 3)).values()) == 4
    assert C.forest_count(us) == 4


def test_influence_convention_counts_seed_in_both():
    us = unfrozen_subgraph(build_rsg_oracle(CHAIN3))
    inf = C.influence_range(us, 1)
    assert (inf.i_plus, inf.i_minus) == (6, 2)
    assert inf.i_total == 8


@given(graphs(max_n=11))
def test_count_equals_oracle(g):
    rsg = build_rsg_oracle(g)
    res = C.count_solutions(rsg)
    covers = brute_min_covers(g)
    assert res.count == len(covers)
    assert res.min_size == len(covers[0])
    assert C.min_cover_size(rsg) == len(covers[0])


@given(graphs(max_n=10))
def test_strategies_agree(g):
    rsg = build_rsg_oracle(g)
    a = C.count_solutions(rsg, strategy=C.Strategy.MAX_INFLUENCE).count
    b = C.count_solutions(rsg, strategy=C.Strategy.SPARSEST_NEAR_TOP_LEVEL).count
    assert a == b


@given(trees(max_n=14), st.data())
def test_root_invariance_on_trees(g, data):
    rsg = build_rsg_oracle(g)
    us = unfrozen_subgraph(rsg)
    for comp in us.components:
        sub = us.restrict(comp)
        totals = {sum(vars(C.tree_count(sub, r)).values()) for r in comp}
        assert len(totals) == 1
    if us.vertices:
        r = data.draw(st.sampled_from(us.vertices))
        comp = next(c for c in us.components if r in c)
        assert sum(vars(C.tree_count(us.restrict(comp), r)).values()) >= 1


@given(graphs(max_n=7), graphs(max_n=7))
def test_forest_multiplicativity(a, b):
    ca = C.count_solutions(build_rsg_oracle(a)).count
    cb = C.count_solutions(build_rsg_oracle(b)).count
    assert C.count_solutions(build_rsg_oracle(_disjoint_union(a, b))).count == ca * cb


@given(graphs(max_n=10), st.data())
def test_branch_completeness(g, data):
    rsg = build_rsg_oracle(g)
    assume(rsg.unfrozen)
    v = data.draw(st.sampled_from(rsg.unfrozen))
    total = C.count_solutions(rsg).count
    covered = C.count_network(rsg, fixed={v: True}).count
    uncovered = C.count_network(rsg, fixed={v: False}).count
    assert covered + uncovered == total
    assert covered > 0 and uncovered > 0
    res = C.count_solutions(rsg)
    if res.top_branches:
        assert sum(k for _, _, k in res.top_branches) == total


@given(graphs(max_n=11), st.integers(0, 10**6))
def test_decode_soundness(g, seed):
    rsg = build_rsg_oracle(g)
    cover = C.decode_assignment(rsg, random.Random(seed))
    assert all(u in cover or v in cover for u, v in g.edges)
    assert len(cover) == enumerate_min_covers(g).min_size


@given(graphs(max_n=10))
def test_marginals_sum_to_cover_size(g):
    rsg = build_rsg_oracle(g)
    marg = C.cover_marginals(rsg)
    assert sum(marg.values(), Fraction(0)) == C.min_cover_size(rsg)
    assert [marg[v] for v in range(g.n)] == list(enumerate_min_covers(g).frequency)


def test_untrusted_rsg_refused():
    g = Graph(4, ((0, 1), (1, 2), (2, 3), (0, 3)))
    bad = build_rsg_oracle(g).with_exactness(Exactness.INEXACT)
    with pytest.raises(C.UntrustedRSGError):
        C.count_solutions(bad)
    unv = build_rsg_oracle(g).with_exactness(Exactness.UNVERIFIED)
    with pytest.raises(C.UntrustedRSGError):
        C.count_solutions(unv)
    assert C.count_solutions(unv, allow_unverified=True).count == 2


def _branchy_rsg():
    for seed in range(20):
        g = generate(GenSpec(ErdosRenyi(2.0), 2000, seed))
        rsg = build_rsg_heuristic(g)
        if C.count_solutions(rsg, allow_unverified=True).branches_explored > 2:
            return rsg
    pytest.skip("no instance needing branching")


def test_budget_fail_and_bounds():
    rsg = _branchy_rsg()
    exact = C.count_solutions(rsg, allow_unverified=True).count
    with pytest.raises(C.BudgetExceeded):
        C.count_solutions(rsg, C.CountBudget(max_branches=2), allow_unverified=True)
    b = C.count_solutions(
        rsg, C.CountBudget(max_branches=2, on_exceed=C.OnExceed.RETURN_BOUNDS), allow_unverified=True
    )
    assert not b.exact and b.count is None
    assert b.lower <= exact <= b.upper


def test_entropy_density():
    assert C.entropy_density(19, 14) == pytest.approx(math.log(19) / 14)
    assert C.entropy_density(2**5000, 1000) == pytest.approx(5000 * math.log(2) / 1000)
    with pytest.raises(ValueError):
        C.entropy_density(0, 5)


def test_backbone_pin_against_state_is_zero():
    rsg = build_rsg_oracle(Graph(3, ((0, 1), (1, 2))))
    assert rsg.state[1] is CoverState.NEGATIVE
    assert C.count_network(rsg, fixed={1: False}).count == 0


def test_count_json_has_decimal_string():
    rsg = build_rsg_oracle(read_graph(str(FIG4)))
    doc = C.count_solutions(rsg).to_json()
    assert doc["count_decimal_string"] == "19"
    assert doc["exactness"] == "oracle_exact"


def test_tree_count_refuses_cycles():
    us = unfrozen_subgraph(build_rsg_oracle(Graph(4, ((0, 1), (1, 2), (2, 3), (0, 3)))))
    with pytest.raises(C.NotATreeError):
        C.tree_count(us, 0)
