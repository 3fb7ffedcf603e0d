#!/usr/bin/env python3
"""Time the hot kernels under the numpy and numba backends.

    python3 benchmarks/bench_kernels.py [--repeat 5]

The first numba call of each kernel is reported separately as compile time.
"""
import argparse
import statistics
import time
from fractions import Fraction

from hessweyl import _kernels as K
from hessweyl.circle import exp_sum, sqrt_fraction, weyl_solution_set
from hessweyl.counting import count_zeros_box
from hessweyl.forms import parse_form
from hessweyl.strata import rank_histogram_mod_p
from hessweyl.weyl import gamma_zero_count_naive

CUBIC = parse_form("x1^3 + 2*x2^3 - x1*x2*x3 + x3^3", 3)
QUAD = parse_form("x1^2 + x2^2 + x3^2 - x4^2 - x5^2 - x6^2", 6)
QUARTIC = parse_form("4*x1*x2^3 - x1^4", 2)
PLANE = parse_form("x1^2 + 3*x1*x2 - x2^2", 2)

WORKLOADS = {
    "rank histogram mod 211": lambda: rank_histogram_mod_p(CUBIC, 211),
    "box count P=6 (13^6 points)": lambda: count_zeros_box(QUAD, 6),
    "naive Weyl count B=6": lambda: gamma_zero_count_naive(QUARTIC, 6),
    "exp sum P=1000, rational": lambda: exp_sum(PLANE, [Fraction(3, 7919)], 1000),
    "exp sum P=1000, irrational": lambda: exp_sum(PLANE, [sqrt_fraction(2)], 1000),
    "Weyl solution set P=216": lambda: weyl_solution_set(QUARTIC, [sqrt_fraction(3)], 216, Fraction(1, 3)),
}


def timed(fn, repeat):
    out = []
    for _ in range(repeat):
        rank_histogram_mod_p.cache_clear()
        t = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t)
    return statistics.median(out)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = ["numpy"] + (["numba"] if K.HAVE_NUMBA else [])
    print("workload\tbackend\tfirst_call_s\tmedian_s")
    for name, fn in WORKLOADS.items():
        row = {}
        for b in backends:
            K.set_backend(b)
            rank_histogram_mod_p.cache_clear()
            t = time.perf_counter()
            fn()
            first = time.perf_counter() - t
            row[b] = timed(fn, args.repeat)
            print(f"{name}\t{b}\t{first:.4f}\t{row[b]:.4f}", flush=True)
        if len(row) == 2:
            print(f"{name}\tspeedup\t-\t{row['numpy'] / row['numba']:.1f}x")


if __name__ == "__main__":
    main()
