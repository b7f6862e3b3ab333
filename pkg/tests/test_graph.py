import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vccount.graph import (
    EdgeListParseError,
    ErdosRenyi,
    GenSpec,
    Graph,
    GraphError,
    ScaleFree,
    generate,
    parse_dimacs,
    parse_edge_list,
    serialize_edge_list,
)

from conftest import graphs


def test_graph_rejects_bad_edges():
    with pytest.raises(GraphError):
        Graph(2, ((0, 0),))
    with pytest.raises(GraphError):
        Graph(2, ((0, 2),))


@given(graphs(max_n=12))
def test_edge_list_round_trip(g):
    assert parse_edge_list(serialize_edge_list(g)) == g


@pytest.mark.parametrize(
    "text, line",
    [
        ("", 1),
        ("3 1\n0 0\n", 2),
        ("3 1\n0 5\n", 2),
        ("3 2\n0 1\n1 0\n", 3),
        ("3 2\n0 1\n", 2),
        ("3 1\n0 x\n", 2),
        ("3\n", 1),
    ],
)
def test_edge_list_errors_name_the_line(text, line):
    with pytest.raises(EdgeListParseError) as err:
        parse_edge_list(text)
    assert err.value.line == line


def test_isolated_vertices_survive_header():
    g = parse_edge_list("# comment\n5 1\n0 1\n")
    assert g.n == 5 and g.m == 1


def test_dimacs_is_one_indexed():
    g = parse_dimacs("c hi\np edge 3 2\ne 1 2\ne 2 3\n")
    assert g == Graph(3, ((0, 1), (1, 2)))


@given(st.integers(0, 2**63 - 1), st.sampled_from([ErdosRenyi(1.5), ScaleFree(2.5)]))
def test_generator_determinism(seed, kind):
    spec = GenSpec(kind, 60, seed)
    assert generate(spec) == generate(spec)


def test_er_mean_degree_and_poisson_law():
    degs = np.concatenate([generate(GenSpec(ErdosRenyi(2.0), 2000, s)).degrees() for s in range(10)])
    assert abs(degs.mean() - 2.0) < 0.05
    # fraction of isolated vertices against e^-c
    assert abs((degs == 0).mean() - math.exp(-2.0)) < 0.01


def test_scale_free_degree_cap():
    g = generate(GenSpec(ScaleFree(2.0), 900, 3))
    assert g.degrees().max() <= 30


def test_components_partition_vertices():
    g = Graph(5, ((0, 1), (2, 3)))
    comps = g.components()
    assert sorted(v for c in comps for v in c) == list(range(5))
    assert len(comps) == 3
