#!/usr/bin/env python3
"""Benchmark the compiled kernel against the numpy fallback.

Times the three operations the search loop lives in: full subset-value
evaluation, the analytic cogradient, and one central finite-difference
gradient.  Run from the repo root:

    python benchmarks/bench_phi.py [--repeats 200]
"""

import argparse
import time

import numpy as np

from cbsforge._kernels import available_backends
from cbsforge.cbs import weights_by_mask

CASES = [
    ((4,), 2),
    ((4,), 3),
    ((2, 3), 2),
    ((3, 3), 2),
    ((2, 2, 2), 2),
    ((3, 3, 3), 1),
    ((4, 4), 2),
]


def _blocks(dims, n, seed=0):
    rng = np.random.default_rng(seed)
    D = int(np.prod(dims))
    mk = lambda: rng.standard_normal((n, D)) + 1j * rng.standard_normal((n, D))
    return mk(), mk()


def _time(fn, repeats):
    fn()  # warm up
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=200)
    args = ap.parse_args()

    backends = available_backends()
    if "cython" not in backends:
        print("warning: compiled extension not built; fallback only")

    header = f"{'case':>16} {'op':>10}"
    for name in backends:
        header += f" {name + ' (us)':>14}"
    if len(backends) == 2:
        header += f" {'speedup':>9}"
    print(header)
    print("-" * len(header))

    for dims, n in CASES:
        xs, us = _blocks(dims, n)
        w = weights_by_mask(len(dims), n)
        plans = {name: cls(dims) for name, cls in backends.items()}
        ops = {
            "values": lambda p: p.values(xs, us),
            "cograd": lambda p: p.cogradients(w, xs, us),
            "fd_grad": lambda p: p.fd_gradient(w, xs, us, 1e-6),
        }
        for op_name, op in ops.items():
            times = {}
            for name, plan in plans.items():
                reps = args.repeats if name == "cython" else max(2, args.repeats // 50)
                if op_name == "fd_grad" and name == "python":
                    reps = 2
                times[name] = _time(lambda: op(plan), reps)
            row = f"{str(dims) + ' n=' + str(n):>16} {op_name:>10}"
            for name in backends:
                row += f" {times[name] * 1e6:>14.1f}"
            if len(times) == 2:
                row += f" {times['python'] / times['cython']:>8.1f}x"
            print(row)
        print()


if __name__ == "__main__":
    main()
