#!/usr/bin/env python3
"""Benchmark the compiled stencil kernels against the numpy fallback.

Times the individual kernels on both backends, then a full minimization via
subprocesses with COEXMIN_BACKEND forced, and prints a comparison table.

    python benchmarks/bench_kernels.py [--grid-h 0.0125] [--repeats 200]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

import coexmin as cx
from coexmin._kernels import _pystencil

SOLVE_SNIPPET = """
import time
import coexmin as cx
assert cx.BACKEND == {backend!r}, cx.BACKEND
ms = [cx.make_logistic(2, 2), cx.make_logistic(2, 2)]
spec = cx.DomainSpec(
    (cx.Rect(0, 0, 1, 1), cx.Rect(2, 0, 1, 1)),
    (cx.Rect(1, 0.4, 1, 0.2),), h={h})
grid = cx.build_domain(spec)
t0 = time.time()
cont = cx.kappa_continuation(grid, ms, [1.0, 10.0, 100.0], cx.SolveOptions(tol_r=1e-6))
print(time.time() - t0, cont.stages[-1].energy)
"""


def time_callable(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(h, repeats):
    try:
        from coexmin._kernels import _stencil
    except ImportError:
        print("compiled backend not available; build it first (pip install -e .)")
        return None
    spec = cx.DomainSpec(
        (cx.Rect(0, 0, 1, 1), cx.Rect(2, 0, 1, 1)), (cx.Rect(1, 0.4, 1, 0.2),), h=h)
    grid = cx.build_domain(spec)
    rng = np.random.default_rng(0)
    u = rng.uniform(0, 1, (grid.ny, grid.nx))
    u[~grid.mask] = 0.0
    m = cx.make_logistic(2, 2)

    cases = [
        ("laplacian", lambda k: lambda: k.laplacian(u, grid.mask)),
        ("face_energy_density", lambda k: lambda: k.face_energy_density(u, grid.mask)),
        ("logistic_energy_arrays",
         lambda k: lambda: k.logistic_energy_arrays(u, 2.0, 2.0, m.A, m.FA)),
        ("logistic_grad_arrays",
         lambda k: lambda: k.logistic_grad_arrays(u, 2.0, 2.0, m.A, m.FA)),
    ]
    print(f"\ngrid {grid.nx}x{grid.ny} ({int(grid.mask.sum())} cells), "
          f"best of {repeats} runs")
    print(f"{'kernel':<24}{'numpy':>12}{'cython':>12}{'speedup':>10}")
    for name, make in cases:
        t_py = time_callable(make(_pystencil), repeats)
        t_cy = time_callable(make(_stencil), repeats)
        print(f"{name:<24}{t_py * 1e6:>10.1f}us{t_cy * 1e6:>10.1f}us"
              f"{t_py / t_cy:>9.1f}x")
    return grid


def bench_solve(h):
    print("\nfull continuation (3 stages, tol 1e-6), one subprocess per backend")
    times = {}
    for backend in ("python", "cython"):
        env = dict(os.environ, COEXMIN_BACKEND=backend)
        out = subprocess.run(
            [sys.executable, "-c", SOLVE_SNIPPET.format(backend=backend, h=h)],
            capture_output=True, text=True, env=env, check=True)
        wall, energy = out.stdout.split()
        times[backend] = float(wall)
        print(f"  {backend:<8} {float(wall):.2f}s  (final I = {float(energy):.6f})")
    print(f"  speedup {times['python'] / times['cython']:.2f}x")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid-h", type=float, default=0.0125)
    ap.add_argument("--repeats", type=int, default=200)
    args = ap.parse_args()
    if bench_kernels(args.grid_h, args.repeats) is not None:
        bench_solve(args.grid_h)


if __name__ == "__main__":
    main()
