"""Explicit equilibrium branches bifurcating from infinity.

Every equilibrium is a multiple of a Steklov profile:
    u1 = c (e^x + e^(1-x)),  boundary value k1 c with k1 = 1 + e,
    u2 = c (e^x - e^(1-x)),  boundary value k2 c with k2 = e - 1 (at x = 1),
and the boundary condition reduces to lam = sigma_i - g(k_i c)/(k_i c).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import NonHyperbolic
from .grid import Grid
from .nonlinearity import BoundaryNonlinearity
from .spectrum import linearized_spectrum_at, morse_index
from .steklov import SIGMA1, SIGMA2

E = math.e
SCALE = {1: 1.0 + E, 2: E - 1.0}


@dataclass(frozen=True)
class EquilibriumBranch:
    branch_id: int
    g: BoundaryNonlinearity

    def __post_init__(self):
        if self.branch_id not in (1, 2):
            raise ValueError(f"branch_id must be 1 or 2, got {self.branch_id!r}")

    @property
    def scale_factor(self) -> float:
        return SCALE[self.branch_id]

    @property
    def base_sigma(self) -> float:
        return SIGMA1 if self.branch_id == 1 else SIGMA2

    @property
    def pitchfork(self) -> float:
        """sigma_i - g'(0), where the branch meets u = 0."""
        return self.base_sigma - self.g.deriv_at_zero

    @property
    def parity(self) -> int:
        return 1 if self.branch_id == 1 else -1


@dataclass(frozen=True)
class BifurcationPoint:
    lam: float
    amplitude: float
    branch_id: int
    stability: str                 # "stable", "saddle(k)" or "unknown"
    morse_index: Optional[int]
    is_limit: bool = False

    def csv_row(self) -> tuple:
        return (self.lam, self.branch_id, self.amplitude, self.stability,
                "" if self.morse_index is None else self.morse_index)


def lambda_of_amplitude(branch: EquilibriumBranch, c, *, with_flag: bool = False):
    """lam(c) = sigma_i - g(k c)/(k c); c = 0 gives the limit sigma_i - g'(0).

    With ``with_flag=True`` returns (lam, is_limit).
    """
    c_arr = np.asarray(c, dtype=float)
    s = branch.scale_factor * c_arr
    zero = s == 0.0
    safe = np.where(zero, 1.0, s)
    quotient = np.where(zero, branch.g.deriv_at_zero, np.asarray(branch.g.eval(safe), dtype=float) / safe)
    lam = branch.base_sigma - quotient
    lam = float(lam) if lam.ndim == 0 else lam
    if with_flag:
        flag = bool(zero) if np.ndim(zero) == 0 else zero
        return lam, flag
    return lam


def amplitudes_at_lambda(branch: EquilibriumBranch, lam: float,
                         c_range: tuple[float, float] = (-50.0, 50.0),
                         n_scan: int = 4001) -> list[float]:
    """All amplitudes c != 0 in ``c_range`` with lam(c) = lam, ascending.

    A scan on a uniform mesh brackets the sign changes of lam(c) - lam;
    roots spaced closer than the mesh can be missed.
    """
    lo, hi = map(float, c_range)
    if not lo < hi:
        raise ValueError("c_range must be an increasing interval")
    mesh = np.linspace(lo, hi, n_scan)
    mesh = mesh[mesh != 0.0]

    def f(c):
        return lambda_of_amplitude(branch, c) - lam

    vals = f(mesh)
    roots = []
    for i in range(len(mesh) - 1):
        a, b = mesh[i], mesh[i + 1]
        if a < 0.0 < b:
            continue  # c = 0 is the trivial solution, not a branch point
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0.0:
            roots.append(float(brentq(f, a, b, xtol=1e-15, rtol=1e-15)))
    if vals[-1] == 0.0:
        roots.append(float(mesh[-1]))
    return sorted(set(roots))


def equilibrium_profile(branch: EquilibriumBranch, c: float, grid: Grid) -> np.ndarray:
    """c (e^x +- e^(1-x)) via the centred form 2 c sqrt(e) cosh/sinh(x - 1/2)."""
    t = grid.centered[: grid.half + 1]
    f = np.cosh if branch.branch_id == 1 else np.sinh
    left = 2.0 * c * math.exp(0.5) * f(t)
    return grid.mirror(left, branch.parity)


def boundary_value(branch: EquilibriumBranch, c: float) -> float:
    """u(1) of the branch profile (u(0) = +-u(1))."""
    return branch.scale_factor * c


def bc_defect(branch: EquilibriumBranch, c: float, lam: float) -> float:
    """max of |-u'(0) - lam u(0) - g(u(0))| and |u'(1) - lam u(1) - g(u(1))| for the exact profile."""
    e = E
    if branch.branch_id == 1:
        u0 = u1 = c * (1 + e)
        du0, du1 = c * (1 - e), c * (e - 1)
    else:
        u0, u1 = c * (1 - e), c * (e - 1)
        du0, du1 = c * (1 + e), c * (e + 1)
    g = branch.g.eval
    return max(abs(-du0 - lam * u0 - float(g(u0))), abs(du1 - lam * u1 - float(g(u1))))


def stability_of(branch: EquilibriumBranch, c: float, lam: float, grid: Grid,
                 n_eigs: int = 4) -> tuple[str, Optional[int]]:
    """Stability label from the linearization at u*, or "unknown" if not hyperbolic."""
    u_end = np.array([branch.parity * boundary_value(branch, c), boundary_value(branch, c)])
    try:
        m = morse_index(linearized_spectrum_at(u_end, lam, branch.g, n_eigs, grid))
    except NonHyperbolic:
        return "unknown", None
    return ("stable" if m == 0 else f"saddle({m})"), m


def bifurcation_diagram(g: BoundaryNonlinearity, branches: Iterable[int] = (1, 2),
                        lambda_range: Optional[tuple[float, float]] = None,
                        c_range: tuple[float, float] = (1e-3, 1e3), steps: int = 200,
                        grid: Optional[Grid] = None) -> list[BifurcationPoint]:
    """Sweep |c| over a log mesh, both signs, and attach stability."""
    if steps < 2:
        raise ValueError("steps must be >= 2")
    lo, hi = c_range
    if not 0 < lo < hi:
        raise ValueError("c_range must satisfy 0 < c_min < c_max")
    grid = grid or Grid(200)
    mags = np.geomspace(lo, hi, steps)
    points = []
    for bid in branches:
        br = EquilibriumBranch(int(bid), g)
        for c in np.concatenate([-mags[::-1], mags]):
            lam = lambda_of_amplitude(br, float(c))
            if lambda_range is not None and not lambda_range[0] <= lam <= lambda_range[1]:
                continue
            label, m = stability_of(br, float(c), lam, grid)
            points.append(BifurcationPoint(lam, float(c), br.branch_id, label, m))
    return points
