#!/usr/bin/env python3
"""Compare the jitted kernels against the numpy/Python fallbacks.

Run twice to see both paths:

    python3 benchmarks/bench_kernels.py
    OMISSIS_FORGE_JIT=0 python3 benchmarks/bench_kernels.py

or rely on the in-process comparison below, which times the jitted and
fallback flavors side by side when numba is available.
"""

import time

import numpy as np

from omissis_forge import kernels


def timeit(fn, *args, repeats: int = 5) -> float:
    fn(*args)  # warm-up (and JIT compile)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_minhash() -> None:
    rng = np.random.default_rng(0)
    print("minhash_scan: per-permutation minima over shingle hashes")
    print(f"{'shingles':>10} {'perms':>6} {'numpy (ms)':>12} {'numba (ms)':>12} {'speedup':>8}")
    for count in (1_000, 10_000, 100_000):
        shingles = rng.integers(0, 2**64, size=count, dtype=np.uint64)
        mults = rng.integers(0, 2**64, size=128, dtype=np.uint64) | np.uint64(1)
        adds = rng.integers(0, 2**64, size=128, dtype=np.uint64)
        plain = timeit(kernels._minhash_scan_numpy, shingles, mults, adds)
        if kernels.JIT_ENABLED:
            jitted = timeit(kernels._minhash_scan_jit, shingles, mults, adds)
            print(f"{count:>10} {128:>6} {plain * 1e3:>12.2f} {jitted * 1e3:>12.2f} "
                  f"{plain / jitted:>7.1f}x")
        else:
            print(f"{count:>10} {128:>6} {plain * 1e3:>12.2f} {'-':>12} {'-':>8}")


def bench_window_match() -> None:
    rng = np.random.default_rng(1)
    print("\nwindow_match: bounded forward scan over redacted stream")
    print(f"{'tokens':>10} {'python (ms)':>12} {'numba (ms)':>12} {'speedup':>8}")
    for count in (1_000, 10_000, 100_000):
        clear = rng.integers(1, 500, size=count).astype(np.int64)
        obf = clear.copy()
        obf[rng.random(count) < 0.01] = 0  # placeholder id
        in_common = rng.random(count) < 0.9
        plain = timeit(kernels._window_match_python, clear, obf, in_common, 0, 10)
        if kernels.JIT_ENABLED:
            jitted = timeit(
                kernels._window_match_jit, clear, obf, in_common, np.int64(0), np.int64(10)
            )
            print(f"{count:>10} {plain * 1e3:>12.2f} {jitted * 1e3:>12.2f} "
                  f"{plain / jitted:>7.1f}x")
        else:
            print(f"{count:>10} {plain * 1e3:>12.2f} {'-':>12} {'-':>8}")


if __name__ == "__main__":
    print(f"numba available: {kernels.HAS_NUMBA}; jit enabled: {kernels.JIT_ENABLED}\n")
    bench_minhash()
    bench_window_match()
