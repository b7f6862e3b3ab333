"""Pure-Python kernels. Same signatures and results as the compiled ``_kernels``.

Arrays are numpy int64/uint8 in CSR layout; in/out arrays are mutated in place.
"""

from __future__ import annotations

from collections import deque

import numpy as np

BACKEND = "python"


def leaf_removal(n, indptr, indices):
    """Iterated leaf removal; returns ``(leaves, nbrs, isolated, core)``.

    Degree-1 vertices are processed FIFO, initially in increasing id order.
    ``isolated`` and ``core`` are uint8 masks.
    """
    indptr = indptr.tolist()
    indices = indices.tolist()
    deg = [indptr[v + 1] - indptr[v] for v in range(n)]
    alive = [True] * n
    isolated = np.zeros(n, dtype=np.uint8)
    leaves: list[int] = []
    nbrs: list[int] = []
    queue = deque(v for v in range(n) if deg[v] <= 1)
    while queue:
        u = queue.popleft()
        if not alive[u]:
            continue
        if deg[u] == 0:
            alive[u] = False
            isolated[u] = 1
            continue
        if deg[u] != 1:
            continue
        v = -1
        for s in range(indptr[u], indptr[u + 1]):
            if alive[indices[s]]:
                v = indices[s]
                break
        leaves.append(u)
        nbrs.append(v)
        alive[u] = False
        alive[v] = False
        for s in range(indptr[v], indptr[v + 1]):
            w = indices[s]
            if alive[w]:
                deg[w] -= 1
                if deg[w] <= 1:
                    queue.append(w)
    core = np.array(alive, dtype=np.uint8)
    return (
        np.array(leaves, dtype=np.int64),
        np.array(nbrs, dtype=np.int64),
        isolated,
        core,
    )


def reverse_slots(indptr, indices):
    """``rev[s]`` is the CSR slot of the reverse direction of slot ``s``."""
    n = len(indptr) - 1
    rev = np.empty(len(indices), dtype=np.int64)
    pos = {}
    ip = indptr.tolist()
    ix = indices.tolist()
    for u in range(n):
        for s in range(ip[u], ip[u + 1]):
            pos[(u, ix[s])] = s
    for u in range(n):
        for s in range(ip[u], ip[u + 1]):
            rev[s] = pos[(ix[s], u)]
    return rev


def warning_propagation(indptr, indices, rev, msg, inc, active, order, seeds, max_updates, changes):
    """Asynchronous warning propagation with vertex-by-vertex activation.

    ``msg[s] = 1`` when the tail of slot ``s`` warns its head (the head must
    be covered). A warning is sent iff the tail receives no warning from its
    other neighbours. Vertices in ``order`` are activated one at a time and
    the resulting cascade is relaxed to quiescence before the next one;
    ``seeds`` are slots re-evaluated first. Returns ``(converged, updates)``.
    ``changes[v]`` counts flips of messages into ``v``.
    """
    ip = indptr.tolist()
    ix = indices.tolist()
    rv = rev.tolist()
    m = msg.tolist()
    ic = inc.tolist()
    act = active.tolist()
    ch = changes.tolist()
    queued = [0] * len(ix)
    work: deque[int] = deque()
    updates = 0

    def push(s):
        if not queued[s]:
            queued[s] = 1
            work.append(s)

    def relax():
        nonlocal updates
        while work:
            s = work.popleft()
            queued[s] = 0
            i = tail[s]
            j = ix[s]
            if act[i] and act[j]:
                new = 1 if ic[i] - m[rv[s]] == 0 else 0
            else:
                new = 0
            if new != m[s]:
                m[s] = new
                ic[j] += 1 if new else -1
                ch[j] += 1
                updates += 1
                if updates > max_updates:
                    return False
                if act[j]:
                    for t in range(ip[j], ip[j + 1]):
                        if ix[t] != i:
                            push(t)
        return True

    def writeback(ok):
        msg[:] = m
        inc[:] = ic
        active[:] = act
        changes[:] = ch
        return ok, updates

    tail = np.repeat(np.arange(len(ip) - 1), np.diff(indptr)).tolist()
    for s in seeds:
        push(int(s))
    if not relax():
        return writeback(False)
    for w in order:
        w = int(w)
        act[w] = 1
        for s in range(ip[w], ip[w + 1]):
            if act[ix[s]]:
                push(s)
                push(rv[s])
        if not relax():
            return writeback(False)
    return writeback(True)


def peel_messages(indptr, indices, rev):
    """Warnings fixed by the leaf structure alone; -1 where undetermined.

    ``i -> j`` is 0 once any other neighbour of ``i`` is known to warn it,
    and 1 once all other incoming messages are known and are 0.
    """
    ip = indptr.tolist()
    ix = indices.tolist()
    rv = rev.tolist()
    n = len(ip) - 1
    tail = np.repeat(np.arange(n), np.diff(indptr)).tolist()
    msg = [-1] * len(ix)
    known = [0] * n
    ones = [0] * n
    work = deque(range(len(ix)))
    while work:
        s = work.popleft()
        if msg[s] >= 0:
            continue
        i = tail[s]
        r = rv[s]
        back = msg[r]
        if ones[i] - (back == 1) >= 1:
            val = 0
        elif known[i] - (back >= 0) == ip[i + 1] - ip[i] - 1:
            val = 1
        else:
            continue
        msg[s] = val
        j = ix[s]
        known[j] += 1
        ones[j] += val
        for t in range(ip[j], ip[j + 1]):
            if ix[t] != i and msg[t] < 0:
                work.append(t)
    return np.array(msg, dtype=np.int8)


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _greedy_matching(adj, free):
    matched = 0
    used = 0
    rest = free
    while rest:
        u = (rest & -rest).bit_length() - 1
        rest &= rest - 1
        if used >> u & 1:
            continue
        cand = adj[u] & free & ~used
        if cand:
            w = (cand & -cand).bit_length() - 1
            used |= (1 << u) | (1 << w)
            matched += 1
    return matched


def min_cover_size(nv, adj):
    """Exact minimum vertex cover size of a graph given as bitmask adjacency."""
    full = (1 << nv) - 1
    # greedy upper bound: repeatedly take a max-degree vertex
    C = 0
    while True:
        degs = [(_popcount(adj[u] & ~C), -u) for u in range(nv) if not C >> u & 1]
        if not degs:
            break
        d, negu = max(degs)
        if d == 0:
            break
        C |= 1 << -negu
    best = [_popcount(C)]

    def rec(C, X, size):
        if size >= best[0]:
            return
        free = full & ~C & ~X
        u, du = -1, 0
        rest = free
        while rest:
            v = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            d = _popcount(adj[v] & ~C)
            if d > du:
                u, du = v, d
        if u < 0:
            best[0] = size
            return
        active_free = 0
        rest = free
        while rest:
            v = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            if adj[v] & free:
                active_free |= 1 << v
        if size + _greedy_matching(adj, active_free) >= best[0]:
            return
        N = adj[u] & ~C
        if not (N & X):
            rec(C | N, X | (1 << u), size + _popcount(N))
        rec(C | (1 << u), X, size + 1)

    rec(0, 0, 0)
    return best[0]


def enumerate_min_covers(nv, adj, list_cap):
    """All minimum vertex covers of a small graph (bitmask adjacency).

    Returns ``(k, count, cover_counts, cocover, covers)`` where ``cocover[v]``
    is the OR of every minimum cover containing ``v`` and ``covers`` holds at
    most ``list_cap`` cover masks.
    """
    k = min_cover_size(nv, adj)
    full = (1 << nv) - 1
    counts = [0] * nv
    cocover = [0] * nv
    covers: list[int] = []
    total = [0]

    def rec(C, X, size):
        if size > k:
            return
        free = full & ~C & ~X
        u, du = -1, 0
        rest = free
        while rest:
            v = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            d = _popcount(adj[v] & ~C)
            if d > du:
                u, du = v, d
        if u < 0:
            if size == k:
                total[0] += 1
                rest = C
                while rest:
                    v = (rest & -rest).bit_length() - 1
                    rest &= rest - 1
                    counts[v] += 1
                    cocover[v] |= C
                if len(covers) < list_cap:
                    covers.append(C)
            return
        active_free = 0
        rest = free
        while rest:
            v = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            if adj[v] & free:
                active_free |= 1 << v
        if size + _greedy_matching(adj, active_free) > k:
            return
        rec(C | (1 << u), X, size + 1)
        N = adj[u] & ~C
        if not (N & X):
            rec(C | N, X | (1 << u), size + _popcount(N))

    rec(0, 0, 0)
    return k, total[0], counts, cocover, covers
