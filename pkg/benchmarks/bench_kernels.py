"""Benchmark the numba kernels against the pure-numpy fallbacks.

Usage: python benchmarks/bench_kernels.py [--trials 200000] [--steps 200]

The dispatch in cgbench._kernels honors CGBENCH_NUMBA; this script times both
implementations directly (warm numba first so compilation is excluded) and
checks the outputs are bit-identical.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from cgbench import _kernels as K


def bench(fn, *args, repeat: int = 5) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--trials", type=int, default=200_000)
    parser.add_argument("--steps", type=int, default=200)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    u = rng.random((args.trials, args.steps))
    coll = rng.random((args.trials, 8))
    ns = np.linspace(1, args.steps, 8).astype(np.int64)
    cns = np.full(8, 0.01)

    rows = []
    numpy_chain = bench(K.chain_success_counts_numpy, u, 0.1, 0.01)
    numpy_width = bench(K.width_failure_counts_numpy, u, coll, 0.1, ns, cns)
    rows.append(("chain_success_counts", "numpy", numpy_chain))
    rows.append(("width_failure_counts", "numpy", numpy_width))

    if K.HAVE_NUMBA:
        K._chain_success_counts_numba(u[:100], 0.1, 0.01)  # compile
        K._width_failure_counts_numba(u[:100], coll[:100], 0.1, ns, cns)
        numba_chain = bench(K._chain_success_counts_numba, u, 0.1, 0.01)
        numba_width = bench(K._width_failure_counts_numba, u, coll, 0.1, ns, cns)
        rows.append(("chain_success_counts", "numba", numba_chain))
        rows.append(("width_failure_counts", "numba", numba_width))
        assert np.array_equal(
            K.chain_success_counts_numpy(u, 0.1, 0.01), K._chain_success_counts_numba(u, 0.1, 0.01)
        )
        assert np.array_equal(
            K.width_failure_counts_numpy(u, coll, 0.1, ns, cns),
            K._width_failure_counts_numba(u, coll, 0.1, ns, cns),
        )
        print("outputs bit-identical across paths")
    else:
        print("numba unavailable or disabled; numpy path only")

    print(f"\n{'kernel':<24} {'path':<8} {'best (s)':>10}")
    for name, path, secs in rows:
        print(f"{name:<24} {path:<8} {secs:>10.4f}")
    if K.HAVE_NUMBA:
        print(f"\nspeedup chain: {numpy_chain / numba_chain:.2f}x, width: {numpy_width / numba_width:.2f}x")


if __name__ == "__main__":
    main()
