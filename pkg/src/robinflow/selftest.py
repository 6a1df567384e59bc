"""Quick oracle checks behind ``robinflow selftest``."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _backend
from .equilibria import EquilibriumBranch, lambda_of_amplitude
from .grid import Grid
from .nonlinearity import builtin
from .oracles import scan_spectrum
from .spectrum import linearized_spectrum_at, robin_modes, solve_spectrum
from .steklov import SIGMA1, SIGMA2


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _steklov():
    e = math.e
    err = max(abs(SIGMA1 - (e - 1) / (e + 1)), abs(SIGMA2 - (e + 1) / (e - 1)))
    return err <= 1e-12 and abs(SIGMA1 * SIGMA2 - 1) <= 1e-14, f"max error {err:.1e}"


def _spectrum_oracle(rng):
    worst = 0.0
    for gamma in rng.uniform(-3.0, 6.0, size=3):
        ref = scan_spectrum(gamma, s_max=20.0, step=1e-3)
        got = np.array([m.mu for m in robin_modes(gamma, len(ref))])
        worst = max(worst, float(np.max(np.abs(ref - got))))
    return worst <= 1e-6, f"max |mu - scan| = {worst:.1e}"


def _degenerate():
    g = Grid(200)
    mu0 = solve_spectrum(0.0, 5, g).eigenvalues
    ref = np.array([-1 - (k - 1) ** 2 * math.pi ** 2 for k in range(1, 6)])
    e1 = float(np.max(np.abs(mu0 - ref)))
    e2 = min(abs(solve_spectrum(SIGMA1, 2, g).eigenvalues).min(), 1.0)
    e3 = float(np.min(np.abs(solve_spectrum(2.0, 3, g).eigenvalues + 1)))
    ok = e1 <= 1e-8 and e2 <= 1e-8 and e3 <= 1e-8
    return ok, f"gamma=0 {e1:.1e}, sigma1 {e2:.1e}, gamma=2 {e3:.1e}"


def _pitchfork():
    g = builtin("arctan")
    worst = 0.0
    for bid, sigma in ((1, SIGMA1), (2, SIGMA2)):
        lam0 = lambda_of_amplitude(EquilibriumBranch(bid, g), 0.0)
        mu = linearized_spectrum_at("zero", lam0, g, 2, Grid(64)).eigenvalues
        worst = max(worst, abs(lam0 - (sigma - 1)), float(np.min(np.abs(mu))))
    return worst <= 1e-8, f"max defect {worst:.1e}"


def _backends():
    from . import _pykernels
    kern = _backend.get()
    if kern is _pykernels:
        return True, "compiled kernels unavailable; python only"
    grid = Grid(64)
    u = np.cos(3 * grid.x) + 0.2
    a, b = u.copy(), u.copy()
    kern.pde_advance(a, 500, 1e-3, 1.0, grid.h, 1.0, 1, np.arctan, -1.0)
    _pykernels.pde_advance(b, 500, 1e-3, 1.0, grid.h, 1.0, 1, np.arctan, -1.0)
    err = float(np.max(np.abs(a - b)))
    return err <= 1e-12, f"cython vs python {err:.1e}"


CHECKS: list[tuple[str, Callable]] = [
    ("steklov closed forms", lambda rng: _steklov()),
    ("spectrum vs dense scan", _spectrum_oracle),
    ("degenerate spectra", lambda rng: _degenerate()),
    ("pitchfork locations", lambda rng: _pitchfork()),
    ("kernel backends agree", lambda rng: _backends()),
]


def run(seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail, time.perf_counter() - t0))
    return out


def format_table(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check'.ljust(width)}  result  detail"]
    for r in results:
        lines.append(f"{r.name.ljust(width)}  {'PASS' if r.passed else 'FAIL':6}  {r.detail} ({r.seconds:.2f}s)")
    return "\n".join(lines)
