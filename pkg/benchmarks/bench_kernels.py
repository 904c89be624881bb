"""Numba vs numpy timings for the verification kernels.

    python3 benchmarks/bench_kernels.py --sizes 128,256,512 --repeat 3

Each kernel runs once per backend to warm up (numba compiles on first call),
then ``--repeat`` timed runs; the best time is reported.  Outputs of the two
backends are compared so a speedup never hides a wrong answer.
"""
from __future__ import annotations

import argparse
import os
import time

import numpy as np

from ftspanner import build_spanner
from ftspanner.instances import make_instance
from ftspanner.kernels import all_pairs_shortest_paths, hop_bounded_min_hops, prim_mst_weight
from ftspanner.verify import default_hmax, spanner_csr


def best_of(fn, repeat):
    fn()
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def with_backend(flag, fn):
    old = os.environ.get("FTSPAN_NUMBA")
    os.environ["FTSPAN_NUMBA"] = flag
    try:
        return fn()
    finally:
        if old is None:
            del os.environ["FTSPAN_NUMBA"]
        else:
            os.environ["FTSPAN_NUMBA"] = old


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="128,256,512")
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--eps", type=float, default=0.5)
    ap.add_argument("--family", default="multiscale")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    print(f"{'kernel':<10}{'n':>6}{'edges':>9}{'numba s':>11}{'numpy s':>11}{'speedup':>9}  agree")
    for n in [int(s) for s in args.sizes.split(",")]:
        m = make_instance(args.family, n, 0)
        sp, *_ = build_spanner(m, args.k, args.eps, mode="full")
        csr = spanner_csr(sp)
        budget = m.dist * (1 + args.eps)
        hmax = default_hmax(n)
        kernels = {
            "mst": lambda: prim_mst_weight(m.dist),
            "apsp": lambda: all_pairs_shortest_paths(*csr),
            "hops": lambda: hop_bounded_min_hops(*csr, budget, hmax),
        }
        for name, fn in kernels.items():
            t_nb, out_nb = with_backend("1", lambda: best_of(fn, args.repeat))
            t_np, out_np = with_backend("0", lambda: best_of(fn, max(1, args.repeat // 2)))
            agree = bool(np.allclose(out_nb, out_np, rtol=1e-9, atol=1e-9))
            print(f"{name:<10}{n:>6}{len(sp):>9}{t_nb:>11.4f}{t_np:>11.4f}{t_np / max(t_nb, 1e-12):>9.1f}  {agree}")


if __name__ == "__main__":
    main()
