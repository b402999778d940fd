#!/usr/bin/env python3
"""Benchmark the compiled quadrature kernels against the NumPy fallback.

Times trig-polynomial evaluation and the deterministic pairwise reduction
on sizes representative of the oscillation-resolving grids, and reports
the largest deviation between the two backends on identical inputs.

Run:  python benchmarks/bench_kernels.py [--sizes 65536,1048576]
"""

import argparse
import time

import numpy as np

from scaleflow.kernels import _pykernels

try:
    from scaleflow.kernels import _ckernels
except ImportError:
    _ckernels = None


def _time(fn, *args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="16384,131072,1048576",
                        help="comma-separated point counts")
    parser.add_argument("--terms", type=int, default=8,
                        help="trig-polynomial term count")
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    if _ckernels is None:
        print("compiled backend unavailable; showing the NumPy fallback only")
    rng = np.random.default_rng(0)
    header = (f"{'kernel':<14}{'points':>10}{'numpy':>12}{'compiled':>12}"
              f"{'speedup':>9}{'max dev':>12}")
    print(header)
    print("-" * len(header))
    for n in sizes:
        freqs = rng.uniform(-4, 4, size=(args.terms, 1))
        coeffs = rng.normal(size=args.terms) + 1j * rng.normal(size=args.terms)
        pts = rng.uniform(0, 1, size=(n, 1))
        weights = rng.uniform(0.5, 1.5, size=n)
        values = rng.normal(size=n) + 1j * rng.normal(size=n)
        cases = [
            ("trig_eval", (freqs, coeffs, pts)),
            ("pairwise_dot", (weights, values)),
        ]
        for label, data in cases:
            t_py, r_py = _time(getattr(_pykernels, label), *data)
            if _ckernels is None:
                print(f"{label:<14}{n:>10}{t_py * 1e3:>10.2f}ms"
                      f"{'-':>12}{'-':>9}{'-':>12}")
                continue
            t_c, r_c = _time(getattr(_ckernels, label), *data)
            dev = float(np.max(np.abs(np.asarray(r_py) - np.asarray(r_c))))
            print(f"{label:<14}{n:>10}{t_py * 1e3:>10.2f}ms{t_c * 1e3:>10.2f}ms"
                  f"{t_py / t_c:>9.2f}{dev:>12.2e}")


if __name__ == "__main__":
    main()
