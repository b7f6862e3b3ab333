# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: leaf removal, warning propagation, min-cover enumeration.

Mirrors ``_kernels_py`` exactly; the test-suite runs both and compares.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint8_t, uint64_t
from libc.stdlib cimport malloc, free

BACKEND = "cython"

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil


def leaf_removal(Py_ssize_t n, int64_t[::1] indptr, int64_t[::1] indices):
    cdef int64_t[::1] deg = np.empty(n, dtype=np.int64)
    cdef uint8_t[::1] alive = np.ones(n, dtype=np.uint8)
    cdef uint8_t[::1] isolated = np.zeros(n, dtype=np.uint8)
    # each vertex enters the queue at most (initial + every degree drop) times
    cdef Py_ssize_t cap = n + indices.shape[0] + 1
    cdef int64_t[::1] queue = np.empty(cap, dtype=np.int64)
    cdef int64_t[::1] leaves = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] nbrs = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t head = 0, tail = 0, nt = 0
    cdef Py_ssize_t u, v, w, s
    for u in range(n):
        deg[u] = indptr[u + 1] - indptr[u]
        if deg[u] <= 1:
            queue[tail] = u
            tail += 1
    while head < tail:
        u = queue[head]
        head += 1
        if not alive[u]:
            continue
        if deg[u] == 0:
            alive[u] = 0
            isolated[u] = 1
            continue
        if deg[u] != 1:
            continue
        v = -1
        for s in range(indptr[u], indptr[u + 1]):
            if alive[indices[s]]:
                v = indices[s]
                break
        leaves[nt] = u
        nbrs[nt] = v
        nt += 1
        alive[u] = 0
        alive[v] = 0
        for s in range(indptr[v], indptr[v + 1]):
            w = indices[s]
            if alive[w]:
                deg[w] -= 1
                if deg[w] <= 1:
                    queue[tail] = w
                    tail += 1
    return (
        np.asarray(leaves[:nt]).copy(),
        np.asarray(nbrs[:nt]).copy(),
        np.asarray(isolated),
        np.asarray(alive),
    )


def reverse_slots(int64_t[::1] indptr, int64_t[::1] indices):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef int64_t[::1] rev = np.empty(indices.shape[0], dtype=np.int64)
    cdef int64_t[::1] cursor = np.array(indptr[:n], dtype=np.int64)
    cdef Py_ssize_t u, s, v
    # adjacency lists are sorted, so scanning u ascending visits v's slots in order
    for u in range(n):
        for s in range(indptr[u], indptr[u + 1]):
            v = indices[s]
            rev[cursor[v]] = s
            cursor[v] += 1
    return np.asarray(rev)


def warning_propagation(int64_t[::1] indptr, int64_t[::1] indices, int64_t[::1] rev,
                        uint8_t[::1] msg, int64_t[::1] inc, uint8_t[::1] active,
                        int64_t[::1] order, int64_t[::1] seeds, int64_t max_updates,
                        int64_t[::1] changes):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t m2 = indices.shape[0]
    cdef int64_t[::1] tail_of = np.empty(m2, dtype=np.int64)
    cdef uint8_t[::1] queued = np.zeros(m2, dtype=np.uint8)
    cdef int64_t[::1] ring = np.empty(m2 + 1, dtype=np.int64)
    cdef Py_ssize_t cap = m2 + 1
    cdef Py_ssize_t head = 0, tl = 0
    cdef Py_ssize_t u, s, t, i, j, k, w
    cdef int64_t updates = 0
    cdef uint8_t new
    for u in range(n):
        for s in range(indptr[u], indptr[u + 1]):
            tail_of[s] = u

    for k in range(seeds.shape[0]):
        s = seeds[k]
        if not queued[s]:
            queued[s] = 1
            ring[tl] = s
            tl = (tl + 1) % cap

    k = -1
    while True:
        while head != tl:
            s = ring[head]
            head = (head + 1) % cap
            queued[s] = 0
            i = tail_of[s]
            j = indices[s]
            if active[i] and active[j]:
                new = 1 if inc[i] - msg[rev[s]] == 0 else 0
            else:
                new = 0
            if new != msg[s]:
                msg[s] = new
                if new:
                    inc[j] += 1
                else:
                    inc[j] -= 1
                changes[j] += 1
                updates += 1
                if updates > max_updates:
                    return False, updates
                if active[j]:
                    for t in range(indptr[j], indptr[j + 1]):
                        if indices[t] != i and not queued[t]:
                            queued[t] = 1
                            ring[tl] = t
                            tl = (tl + 1) % cap
        k += 1
        if k >= order.shape[0]:
            break
        w = order[k]
        active[w] = 1
        for s in range(indptr[w], indptr[w + 1]):
            if active[indices[s]]:
                if not queued[s]:
                    queued[s] = 1
                    ring[tl] = s
                    tl = (tl + 1) % cap
                t = rev[s]
                if not queued[t]:
                    queued[t] = 1
                    ring[tl] = t
                    tl = (tl + 1) % cap
    return True, updates


def peel_messages(int64_t[::1] indptr, int64_t[::1] indices, int64_t[::1] rev):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t m2 = indices.shape[0]
    cdef cnp.int8_t[::1] msg = np.full(m2, -1, dtype=np.int8)
    cdef int64_t[::1] known = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] ones = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] tail_of = np.empty(m2, dtype=np.int64)
    cdef uint8_t[::1] queued = np.ones(m2, dtype=np.uint8)
    cdef int64_t[::1] ring = np.empty(m2 + 1, dtype=np.int64)
    cdef Py_ssize_t cap = m2 + 1
    cdef Py_ssize_t head = 0, tl = 0
    cdef Py_ssize_t u, s, t, i, j, r
    cdef int val
    for u in range(n):
        for s in range(indptr[u], indptr[u + 1]):
            tail_of[s] = u
    for s in range(m2):
        ring[tl] = s
        tl += 1
    while head != tl:
        s = ring[head]
        head = (head + 1) % cap
        queued[s] = 0
        if msg[s] >= 0:
            continue
        i = tail_of[s]
        r = rev[s]
        if ones[i] - (1 if msg[r] == 1 else 0) >= 1:
            val = 0
        elif known[i] - (1 if msg[r] >= 0 else 0) == indptr[i + 1] - indptr[i] - 1:
            val = 1
        else:
            continue
        msg[s] = val
        j = indices[s]
        known[j] += 1
        ones[j] += val
        for t in range(indptr[j], indptr[j + 1]):
            if indices[t] != i and msg[t] < 0 and not queued[t]:
                queued[t] = 1
                ring[tl] = t
                tl = (tl + 1) % cap
    return np.asarray(msg)


cdef struct Ctx:
    int nv
    uint64_t full
    uint64_t *adj
    int best
    int k
    int64_t total
    int64_t *counts
    uint64_t *cocover
    uint64_t *covers
    int64_t list_cap
    int64_t nlist


cdef inline int _greedy_matching(Ctx *c, uint64_t free_) nogil:
    cdef int matched = 0
    cdef uint64_t used = 0, rest = free_, cand
    cdef int u, w
    while rest:
        u = __builtin_ctzll(rest)
        rest &= rest - 1
        if (used >> u) & 1:
            continue
        cand = c.adj[u] & free_ & ~used
        if cand:
            w = __builtin_ctzll(cand)
            used |= (<uint64_t>1 << u) | (<uint64_t>1 << w)
            matched += 1
    return matched


cdef int _pick(Ctx *c, uint64_t C, uint64_t free_, uint64_t *active_free) nogil:
    cdef int u = -1, du = 0, d, v
    cdef uint64_t rest = free_, af = 0
    while rest:
        v = __builtin_ctzll(rest)
        rest &= rest - 1
        d = __builtin_popcountll(c.adj[v] & ~C)
        if d > du:
            u = v
            du = d
        if c.adj[v] & free_:
            af |= <uint64_t>1 << v
    active_free[0] = af
    return u


cdef void _rec_min(Ctx *c, uint64_t C, uint64_t X, int size) nogil:
    cdef uint64_t free_, af, N
    cdef int u
    if size >= c.best:
        return
    free_ = c.full & ~C & ~X
    u = _pick(c, C, free_, &af)
    if u < 0:
        c.best = size
        return
    if size + _greedy_matching(c, af) >= c.best:
        return
    N = c.adj[u] & ~C
    if not (N & X):
        _rec_min(c, C | N, X | (<uint64_t>1 << u), size + __builtin_popcountll(N))
    _rec_min(c, C | (<uint64_t>1 << u), X, size + 1)


cdef void _rec_enum(Ctx *c, uint64_t C, uint64_t X, int size) nogil:
    cdef uint64_t free_, af, N, rest
    cdef int u, v
    if size > c.k:
        return
    free_ = c.full & ~C & ~X
    u = _pick(c, C, free_, &af)
    if u < 0:
        if size == c.k:
            c.total += 1
            rest = C
            while rest:
                v = __builtin_ctzll(rest)
                rest &= rest - 1
                c.counts[v] += 1
                c.cocover[v] |= C
            if c.nlist < c.list_cap:
                c.covers[c.nlist] = C
                c.nlist += 1
        return
    if size + _greedy_matching(c, af) > c.k:
        return
    _rec_enum(c, C | (<uint64_t>1 << u), X, size + 1)
    N = c.adj[u] & ~C
    if not (N & X):
        _rec_enum(c, C | N, X | (<uint64_t>1 << u), size + __builtin_popcountll(N))


cdef int _greedy_upper(Ctx *c) nogil:
    cdef uint64_t C = 0
    cdef int u, bu, bd, d
    while True:
        bu = -1
        bd = 0
        for u in range(c.nv):
            if (C >> u) & 1:
                continue
            d = __builtin_popcountll(c.adj[u] & ~C)
            if d > bd:
                bd = d
                bu = u
        if bu < 0:
            break
        C |= <uint64_t>1 << bu
    return __builtin_popcountll(C)


def min_cover_size(int nv, adj):
    if nv > 64:
        raise ValueError("compiled oracle handles at most 64 vertices per component")
    cdef Ctx c
    cdef uint64_t buf[64]
    c.nv = nv
    c.full = (<uint64_t>1 << nv) - 1 if nv < 64 else <uint64_t>0xFFFFFFFFFFFFFFFF
    c.adj = buf
    for u in range(nv):
        buf[u] = <uint64_t>adj[u]
    c.best = _greedy_upper(&c)
    with nogil:
        _rec_min(&c, 0, 0, 0)
    return c.best


def enumerate_min_covers(int nv, adj, int64_t list_cap):
    if nv > 64:
        raise ValueError("compiled oracle handles at most 64 vertices per component")
    cdef Ctx c
    cdef uint64_t buf[64]
    cdef int64_t cnt[64]
    cdef uint64_t cov[64]
    cdef int u
    c.nv = nv
    c.full = (<uint64_t>1 << nv) - 1 if nv < 64 else <uint64_t>0xFFFFFFFFFFFFFFFF
    c.adj = buf
    for u in range(nv):
        buf[u] = <uint64_t>adj[u]
        cnt[u] = 0
        cov[u] = 0
    c.best = _greedy_upper(&c)
    with nogil:
        _rec_min(&c, 0, 0, 0)
    c.k = c.best
    c.total = 0
    c.counts = cnt
    c.cocover = cov
    c.list_cap = list_cap
    c.nlist = 0
    c.covers = <uint64_t *>malloc(max(list_cap, 1) * sizeof(uint64_t))
    if c.covers == NULL:
        raise MemoryError()
    try:
        with nogil:
            _rec_enum(&c, 0, 0, 0)
        covers = [int(c.covers[u]) for u in range(c.nlist)]
    finally:
        free(c.covers)
    return (
        c.k,
        int(c.total),
        [int(cnt[u]) for u in range(nv)],
        [int(cov[u]) for u in range(nv)],
        covers,
    )
