#!/usr/bin/env python3
"""Benchmark the compiled propagator kernels against the numpy fallback.

The workload mirrors the hot loop of soft-pulse integration: a chain of
small Hermitian matrix exponentials accumulated into one propagator.
Run:  python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from nmrqc.kernels import _fallback

try:
    from nmrqc.kernels import _native
except ImportError:
    _native = None


def random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def time_call(fn, repeats=5):
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    rng = np.random.default_rng(0)
    nsteps = 2000
    print(f"piecewise propagator, {nsteps} steps (best of 5)")
    header = f"{'dim':>5} {'python':>12} {'cython':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for dim in (4, 8, 16, 32, 64):
        h0 = random_hermitian(rng, dim)
        hx = random_hermitian(rng, dim)
        hy = random_hermitian(rng, dim)
        cx = rng.normal(size=nsteps)
        cy = rng.normal(size=nsteps)
        args = (h0, hx, hy, cx, cy, 1e-5)

        t_py = time_call(lambda: _fallback.piecewise_propagator(*args))
        if _native is None:
            print(f"{dim:>5} {t_py * 1e3:>10.2f}ms {'(unbuilt)':>12} {'-':>9}")
            continue
        t_cy = time_call(lambda: _native.piecewise_propagator(*args))
        check = np.abs(
            _native.piecewise_propagator(*args) - _fallback.piecewise_propagator(*args)
        ).max()
        assert check < 1e-9, f"backend mismatch at dim {dim}: {check}"
        print(f"{dim:>5} {t_py * 1e3:>10.2f}ms {t_cy * 1e3:>10.2f}ms {t_py / t_cy:>8.1f}x")

    print()
    print("single Hermitian exponential (best of 5, 2000 calls)")
    print(header)
    print("-" * len(header))
    for dim in (4, 8, 16, 32, 64):
        h = random_hermitian(rng, dim)

        def many(fn):
            def run():
                for _ in range(2000):
                    fn(h, 1e-5)
            return run

        t_py = time_call(many(_fallback.expm_hermitian))
        if _native is None:
            print(f"{dim:>5} {t_py * 1e3:>10.2f}ms {'(unbuilt)':>12} {'-':>9}")
            continue
        t_cy = time_call(many(_native.expm_hermitian))
        print(f"{dim:>5} {t_py * 1e3:>10.2f}ms {t_cy * 1e3:>10.2f}ms {t_py / t_cy:>8.1f}x")


if __name__ == "__main__":
    main()
