from fractions import Fraction

import pytest
from hypothesis import given

from vccount.graph import Graph
from vccount.oracle import (
    OracleBoundExceeded,
    enumerate_min_covers,
    enumerate_min_covers_subsets,
    oracle_mutual_determinations,
)

from conftest import brute_min_covers, graphs


def test_triangle():
    res = enumerate_min_covers(Graph(3, ((0, 1), (1, 2), (0, 2))))
    assert (res.min_size, res.count) == (2, 3)
    assert res.frequency == (Fraction(2, 3),) * 3


def test_empty_graph_has_one_cover():
    res = enumerate_min_covers(Graph(4, ()))
    assert (res.min_size, res.count) == (0, 1)
    assert all(res.is_positive_backbone(v) for v in range(4))


def test_star_center_is_negative_backbone():
    res = enumerate_min_covers(Graph(4, ((0, 1), (0, 2), (0, 3))))
    assert res.count == 1 and res.is_negative_backbone(0)


def test_bound_is_enforced():
    with pytest.raises(OracleBoundExceeded):
        enumerate_min_covers(Graph(30, ()), bound=24)


@given(graphs(max_n=11))
def test_matches_plain_enumeration(g):
    covers = brute_min_covers(g)
    res = enumerate_min_covers(g)
    assert res.count == len(covers)
    assert res.min_size == len(covers[0])
    assert set(res.covers) == set(covers)
    for v in range(g.n):
        assert res.frequency[v] == Fraction(sum(v in c for c in covers), len(covers))
    sub = enumerate_min_covers_subsets(g)
    assert (sub.min_size, sub.count, sub.frequency) == (res.min_size, res.count, res.frequency)


@given(graphs(max_n=10))
def test_mutual_determinations(g):
    covers = brute_min_covers(g)
    res = enumerate_min_covers(g)
    want = {
        e for e in g.edges
        if 0 < res.frequency[e[0]] < 1 and 0 < res.frequency[e[1]] < 1
        and all((e[0] in c) != (e[1] in c) for c in covers)
    }
    assert oracle_mutual_determinations(g, res) == want
