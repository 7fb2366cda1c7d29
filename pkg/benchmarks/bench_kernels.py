#!/usr/bin/env python3
"""Benchmark: compiled trajectory core vs the pure-Python mirror.

Times the double-well ensemble integration (with and without stability
blocks), the triple-well integration, and the 1-D grid accumulation,
then prints the speedup of the compiled core.  Run after an editable
install:

    python benchmarks/bench_kernels.py [--samples N]
"""

import argparse
import time

import numpy as np

from bosewells import kernels
from bosewells.kernels import _pure


def timed(fn, *args, repeat=1):
    best = float("inf")
    result = None
    for _ in range(repeat):
        tic = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - tic)
    return best, result


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=64,
                    help="trajectories per case (pure Python is slow)")
    args = ap.parse_args()
    n = args.samples

    if not kernels.USING_COMPILED_CORE:
        print("compiled core NOT available; benchmarking pure Python only")

    rng = np.random.default_rng(0)
    times = np.linspace(0.0, 2.0, 201)
    gamma1 = np.array([15.0])
    gamma2 = np.array([6.0, 9.0])

    cases = []
    y0 = np.column_stack([rng.normal(0, 0.3, n), rng.normal(14, 3, n)])
    par = np.array([1.0, 10.0, 50.5, 0.0, 1e-4])
    cases.append(("double well, plain", 0, par, y0, False, gamma1))
    cases.append(("double well, stability", 0, par, y0, True, gamma1))
    y0t = np.column_stack([rng.normal(0, 0.3, (n, 2)),
                           rng.normal(10, 1.5, (n, 2))])
    part = np.array([1.0, 10.0, 30.0, 0.0, 3e-5, 0.5])
    cases.append(("triple well, stability", 1, part, y0t, True, gamma2))

    print(f"{n} trajectories, {len(times)} output times\n")
    print(f"{'case':28s} {'compiled':>10s} {'pure':>10s} {'speedup':>8s}")
    for name, system, par_, y0_, stab, g in cases:
        t_pure, ref = timed(_pure.integrate_batch, system, par_, y0_, times,
                            1e-12, 1e-12, stab, g)
        if kernels.USING_COMPILED_CORE:
            t_core, got = timed(kernels.integrate_batch, system, par_, y0_,
                                times, 1e-12, 1e-12, stab, g, repeat=3)
            err = np.max(np.abs(got[0] - ref[0]))
            print(f"{name:28s} {t_core:9.3f}s {t_pure:9.3f}s "
                  f"{t_pure / t_core:7.1f}x   (max dev {err:.1e})")
        else:
            print(f"{name:28s} {'-':>10s} {t_pure:9.3f}s")

    # grid accumulation
    nt, ng = 201, 101
    qs = rng.normal(0, 1, (n, nt))
    ps = rng.normal(0, 5, (n, nt))
    coeff = np.ascontiguousarray(
        rng.normal(size=(n, nt)) + 1j * rng.normal(size=(n, nt)))
    nv = np.full(n, nt, dtype=np.int64)

    def acc(impl):
        psi = np.zeros((nt, ng), dtype=complex)
        impl.accumulate_gaussians_1d(psi, qs, ps, coeff, nv, -50.0, 1.0, 15.0)
        return psi

    t_pure, ref = timed(acc, _pure)
    if kernels.USING_COMPILED_CORE:
        t_core, got = timed(acc, kernels, repeat=3)
        err = np.max(np.abs(got - ref))
        print(f"{'grid accumulation (1d)':28s} {t_core:9.3f}s {t_pure:9.3f}s "
              f"{t_pure / t_core:7.1f}x   (max dev {err:.1e})")
    else:
        print(f"{'grid accumulation (1d)':28s} {'-':>10s} {t_pure:9.3f}s")


if __name__ == "__main__":
    main()
