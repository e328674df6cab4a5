#!/usr/bin/env python3
"""Benchmark the compiled cascade kernel against the numpy fallback.

For each network size, runs one single-seed cascade per bank (the shape of
a profile computation) on a random impact matrix and reports the per-run
time of both backends. Usage::

    python benchmarks/bench_cascade.py [--sizes 25 50 100 200 400] [--repeat 3]
"""

import argparse
import time

import numpy as np

from multirisk import kernels


def build_case(b, density, rng):
    W = rng.uniform(0.0, 1.0, (b, b)) * (rng.random((b, b)) < density)
    return np.ascontiguousarray(W)


def time_backend(cascade, W, repeat):
    b = W.shape[0]
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        for seed in range(b):
            h0 = np.zeros(b)
            h0[seed] = 1.0
            distressed = np.zeros(b, dtype=np.uint8)
            distressed[seed] = 1
            cascade(W, h0, distressed)
        best = min(best, (time.perf_counter() - start) / b)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[25, 50, 100, 200, 400])
    parser.add_argument("--density", type=float, default=0.2)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"active backend: {kernels.BACKEND}")
    if kernels.cascade_compiled is None:
        print("compiled kernel not built; benchmarking the numpy kernel only")

    header = f"{'banks':>6}  {'numpy (us/run)':>15}"
    if kernels.cascade_compiled is not None:
        header += f"  {'compiled (us/run)':>18}  {'speedup':>8}"
    print(header)
    for b in args.sizes:
        W = build_case(b, args.density, rng)
        t_py = time_backend(kernels.cascade_python, W, args.repeat)
        line = f"{b:>6}  {t_py * 1e6:>15.1f}"
        if kernels.cascade_compiled is not None:
            t_cy = time_backend(kernels.cascade_compiled, W, args.repeat)
            line += f"  {t_cy * 1e6:>18.1f}  {t_py / t_cy:>7.1f}x"
        print(line)


if __name__ == "__main__":
    main()
