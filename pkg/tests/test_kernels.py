"""The compiled and pure-Python kernels must agree bit for bit."""

import numpy as np
import pytest
from hypothesis import given

from vccount import kernels

from conftest import graphs

pytestmark = pytest.mark.skipif(kernels.compiled_backend is None, reason="compiled kernels not built")
PY, CY = kernels.python_backend, kernels.compiled_backend


def _same(a, b):
    if isinstance(a, tuple):
        return len(a) == len(b) and all(_same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return np.array_equal(np.asarray(a), np.asarray(b))
    return a == b


@given(graphs(max_n=14))
def test_leaf_removal_agrees(g):
    ip, ix = g.csr
    assert _same(PY.leaf_removal(g.n, ip, ix), CY.leaf_removal(g.n, ip, ix))


@given(graphs(max_n=14))
def test_reverse_and_peel_agree(g):
    ip, ix = g.csr
    rev = PY.reverse_slots(ip, ix)
    assert np.array_equal(rev, CY.reverse_slots(ip, ix))
    assert np.array_equal(PY.peel_messages(ip, ix, rev), CY.peel_messages(ip, ix, rev))


@given(graphs(max_n=14))
def test_warning_propagation_agrees(g):
    ip, ix = g.csr
    rev = PY.reverse_slots(ip, ix)
    outs = []
    for k in (PY, CY):
        msg = np.zeros(len(ix), dtype=np.uint8)
        inc = np.zeros(g.n, dtype=np.int64)
        active = np.zeros(g.n, dtype=np.uint8)
        changes = np.zeros(g.n, dtype=np.int64)
        res = k.warning_propagation(
            ip, ix, rev, msg, inc, active, np.arange(g.n, dtype=np.int64),
            np.zeros(0, dtype=np.int64), 50 * (len(ix) + g.n), changes,
        )
        outs.append((tuple(res), msg.copy(), inc.copy(), active.copy(), changes.copy()))
    assert _same(outs[0], outs[1])


@given(graphs(max_n=12))
def test_cover_kernels_agree(g):
    adj = [sum(1 << w for w in g.adjacency[u]) for u in range(g.n)]
    assert PY.min_cover_size(g.n, adj) == CY.min_cover_size(g.n, adj)
    a = PY.enumerate_min_covers(g.n, adj, 1 << 10)
    b = CY.enumerate_min_covers(g.n, adj, 1 << 10)
    assert a[0] == b[0] and a[1] == b[1]
    assert list(a[2]) == list(b[2]) and list(a[3]) == list(b[3])
    assert sorted(a[4]) == sorted(b[4])


def test_selector_prefers_compiled():
    assert kernels.BACKEND == CY.BACKEND
    assert kernels.backends()[0] is CY
