"""Compiled vs pure-Python kernel timings.

    python3 benchmarks/bench_kernels.py --n 20000 --c 2.0 --repeat 3

Each kernel runs on identical inputs under both backends; outputs are
compared before timings are printed.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from vccount import kernels
from vccount.graph import ErdosRenyi, GenSpec, generate


def _time(fn, repeat):
    out = None
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), out


def _wp_inputs(k, ip, ix):
    n = len(ip) - 1
    rev = k.reverse_slots(ip, ix)
    msg = np.zeros(len(ix), dtype=np.uint8)
    inc = np.zeros(n, dtype=np.int64)
    active = np.zeros(n, dtype=np.uint8)
    changes = np.zeros(n, dtype=np.int64)
    order = np.arange(n, dtype=np.int64)
    seeds = np.zeros(0, dtype=np.int64)
    return rev, msg, inc, active, order, seeds, changes


def cases(g, small):
    ip, ix = g.csr
    n = g.n
    adj = [sum(1 << w for w in small.adjacency[u]) for u in range(small.n)]

    def wp(k):
        rev, msg, inc, active, order, seeds, changes = _wp_inputs(k, ip, ix)
        ok, upd = k.warning_propagation(ip, ix, rev, msg, inc, active, order, seeds, 40 * (len(ix) + n), changes)
        return ok, upd, msg.tobytes()

    return {
        "leaf_removal": lambda k: k.leaf_removal(n, ip, ix),
        "reverse_slots": lambda k: k.reverse_slots(ip, ix).tobytes(),
        "peel_messages": lambda k: k.peel_messages(ip, ix, k.reverse_slots(ip, ix)).tobytes(),
        "warning_propagation": wp,
        f"enumerate_min_covers(n={small.n})": lambda k: k.enumerate_min_covers(small.n, adj, 1 << 12)[:2],
    }


def _comparable(x):
    if isinstance(x, tuple):
        return tuple(_comparable(v) for v in x)
    if isinstance(x, np.ndarray):
        return x.tobytes()
    return x


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--c", type=float, default=2.0)
    ap.add_argument("--small-n", type=int, default=22, help="graph size for the enumeration kernel")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)

    if kernels.compiled_backend is None:
        print("compiled kernels not built; nothing to compare")
        return 1
    g = generate(GenSpec(ErdosRenyi(args.c), args.n, args.seed))
    small = generate(GenSpec(ErdosRenyi(3.0), args.small_n, args.seed))
    print(f"graph n={g.n} m={g.m}; repeat={args.repeat}")
    print(f"{'kernel':<32}{'python s':>12}{'compiled s':>12}{'speedup':>10}")
    for name, fn in cases(g, small).items():
        tp, outp = _time(lambda: fn(kernels.python_backend), args.repeat)
        tc, outc = _time(lambda: fn(kernels.compiled_backend), args.repeat)
        same = _comparable(outp) == _comparable(outc)
        flag = "" if same else "  OUTPUT MISMATCH"
        print(f"{name:<32}{tp:>12.4f}{tc:>12.4f}{tp / max(tc, 1e-9):>9.1f}x{flag}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
