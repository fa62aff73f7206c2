#!/usr/bin/env python3
"""Numba vs pure-numpy backends: gossip matvec and full solver runs.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5] [--quick]

Both backends run the same inputs; the script also checks the results agree
to 1e-12 so a speedup never hides a wrong kernel.
"""
import argparse
import time

import numpy as np

from gossipavg import kernels
from gossipavg.graph import generate_regular
from gossipavg.solvers import MethodConfig, run


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def timed_both(fn, repeat):
    out = {}
    for backend in ("numpy", "numba"):
        kernels.set_backend(backend)
        result = fn()  # warm-up, also compiles the numba path
        out[backend] = (best_of(fn, repeat), result)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="smaller sizes")
    args = ap.parse_args()
    if not kernels.HAVE_NUMBA:
        raise SystemExit("numba unavailable (not installed or GOSSIPAVG_DISABLE_NUMBA set)")

    sizes = [(1000, 3, 10), (5000, 3, 50)] if args.quick else [(1000, 3, 10), (5000, 3, 50), (20000, 8, 50)]
    print(f"{'case':<34} {'numpy (s)':>10} {'numba (s)':>10} {'speedup':>8} {'max diff':>9}")
    print("-" * 76)
    for n, k, d in sizes:
        g = generate_regular(n, k, 0)
        x = np.random.default_rng(0).standard_normal((n, d))
        res = timed_both(lambda: kernels.gossip_apply(g.neighbors, g.k, x), args.repeat)
        report(f"gossip_apply n={n} k={k} d={d}", res, lambda a: a)
        for method in ("heavyball", "optimal", "nesterov"):
            cfg = MethodConfig(method, k, 100)
            res = timed_both(lambda: run(g, x, cfg), max(1, args.repeat // 2))
            report(f"run {method} x100 n={n} d={d}", res, lambda tr: tr.errors)
    kernels.set_backend("numba")


def report(label, res, values):
    (t_np, r_np), (t_nb, r_nb) = res["numpy"], res["numba"]
    diff = float(np.max(np.abs(values(r_np) - values(r_nb))))
    print(f"{label:<34} {t_np:>10.4f} {t_nb:>10.4f} {t_np / t_nb:>7.1f}x {diff:>9.1e}")
    assert diff < 1e-12, f"{label}: backends disagree by {diff}"


if __name__ == "__main__":
    main()
