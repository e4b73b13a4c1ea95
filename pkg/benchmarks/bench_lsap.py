"""Time the compiled and pure-Python assignment solvers against scipy.

    python3 benchmarks/bench_lsap.py [--sizes 50x100,200x400] [--repeat 5]

Sizes are given as (local atoms) x (global slots). The fusion loop builds
one column per local atom and one row per existing or new global atom.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np
from scipy.optimize import linear_sum_assignment

from spahm import lsap


def _sizes(text):
    return [tuple(int(x) for x in item.split("x")) for item in text.split(",")]


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=_sizes, default=_sizes("25x75,50x150,100x300,200x600"))
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    solvers = {f"spahm/{b}": (lambda c, b=b: lsap.solve_min(c, backend=b)) for b in lsap.available_backends()}
    solvers["scipy"] = linear_sum_assignment
    print(f"{'size':>10}  " + "  ".join(f"{name:>14}" for name in solvers) + "   (ms, best of repeat)")
    for L, R in args.sizes:
        cost = rng.standard_normal((R, L))  # rows: global slots, columns: local atoms
        ref = linear_sum_assignment(cost)
        ref_total = cost[ref].sum()
        for b in lsap.available_backends():
            got = lsap.solve_min(cost, backend=b).total_cost
            assert abs(got - ref_total) < 1e-9 * max(1.0, abs(ref_total)), (b, got, ref_total)
        times = []
        for fn in solvers.values():
            n = 1 if L * R > 20000 else 5
            times.append(min(timeit.repeat(lambda: fn(cost), number=n, repeat=args.repeat)) / n * 1e3)
        print(f"{L:>4}x{R:<5}  " + "  ".join(f"{t:14.3f}" for t in times))


if __name__ == "__main__":
    main()
