"""Compare the compiled and pure-Python stepping kernels.

    python3 benchmarks/bench_kernels.py [--steps 2000] [--sizes 100 200 400 800]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from robinflow import _backend, _pykernels
from robinflow.grid import Grid


def _time(fn, repeat: int = 3) -> float:
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(kern, n: int, steps: int) -> tuple[float, float]:
    grid = Grid(n)
    u0 = 0.01 * np.cosh(grid.centered)
    U0 = u0 / np.sqrt(grid.inner(u0, u0) + 1.0)
    z0 = float(np.sqrt(1.0 - grid.inner(U0, U0)))

    def pde():
        kern.pde_advance(u0.copy(), steps, 1e-3, 1.0, grid.h, 1.0, 1, np.arctan, -1.0)

    def sphere():
        kern.sphere_advance(U0.copy(), z0, steps, 1e-3, 1.0, grid.h, 1.0, 1, np.arctan)

    return _time(pde) / steps * 1e6, _time(sphere) / steps * 1e6


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 200, 400, 800])
    args = ap.parse_args()
    names = _backend.available()
    print(f"backends: {', '.join(names)}; {args.steps} steps per timing, best of 3")
    print(f"{'N':>6} {'kernel':>8} " + " ".join(f"{n + ' us/step':>16}" for n in names) + "  speedup")
    for n in args.sizes:
        results = {name: bench(_backend.get(name), n, args.steps) for name in names}
        for j, label in enumerate(("pde", "sphere")):
            cells = " ".join(f"{results[name][j]:16.2f}" for name in names)
            speed = (results["python"][j] / results["cython"][j]) if "cython" in results else float("nan")
            print(f"{n:>6} {label:>8} {cells}  {speed:7.1f}x")


if __name__ == "__main__":
    main()
