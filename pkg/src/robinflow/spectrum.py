"""Robin eigenvalue problem phi'' - phi = mu phi, -phi'(0) = g phi(0), phi'(1) = g phi(1).

The problem is symmetric under x -> 1 - x, so eigenfunctions are even or odd
about x = 1/2. With t = x - 1/2 the boundary condition at one end is enough:

    mu > -1, s = sqrt(1 + mu):   even  s tanh(s/2) = gamma,   odd  s coth(s/2) = gamma
    mu < -1, s = sqrt(-1 - mu):  even  s sin(s/2) + gamma cos(s/2) = 0
                                 odd   s cos(s/2) - gamma sin(s/2) = 0
    mu = -1:                     gamma = 0 (constant) or gamma = 2 (affine)

Multiplying the even and odd relations together recovers the two classical
forms e^s (s - gamma) = +-(s + gamma) and tan s = 2 gamma s / (gamma^2 - s^2).
The parity forms are entire in s, so brackets never straddle a pole.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from .errors import AsymmetricRobin, BracketingError, GridTooCoarse, NonHyperbolic
from .grid import Grid
from .nonlinearity import BoundaryNonlinearity

DEGENERATE_TOL = 1e-9
HYPERBOLIC_TOL = 1e-8
NODES_PER_HALF_WAVE = 8
_XTOL = 1e-14

EVEN, ODD = 1, -1


@dataclass(frozen=True)
class Mode:
    mu: float
    s: float
    kind: str      # "hyperbolic", "trig" or "affine"
    parity: int    # +1 even, -1 odd about x = 1/2


def _coth_term(s: float) -> float:
    """s * coth(s/2), continuous at s = 0."""
    return 2.0 + s * s / 6.0 if s < 1e-6 else s / math.tanh(0.5 * s)


def _root(f, a: float, b: float, what: str) -> float:
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0.0:
        raise BracketingError(f"no sign change for {what}", (a, b))
    return brentq(f, a, b, xtol=_XTOL, rtol=4 * np.finfo(float).eps, maxiter=200)


def _even_trig(gamma: float):
    return lambda s: s * math.sin(0.5 * s) + gamma * math.cos(0.5 * s)


def _odd_trig(gamma: float):
    return lambda s: s * math.cos(0.5 * s) - gamma * math.sin(0.5 * s)


def robin_modes(gamma: float, count: int) -> list[Mode]:
    """The ``count`` largest eigenvalues for Robin coefficient ``gamma``, decreasing."""
    if count < 1:
        raise ValueError("n_max must be >= 1")
    gamma = float(gamma)
    if not math.isfinite(gamma):
        raise ValueError("gamma must be finite")
    modes: list[Mode] = []
    even_affine = abs(gamma) <= DEGENERATE_TOL
    odd_affine = abs(gamma - 2.0) <= DEGENERATE_TOL

    if gamma > DEGENERATE_TOL:
        s = _root(lambda s: s * math.tanh(0.5 * s) - gamma, 0.0, gamma + 2.0, "even mode above -1")
        modes.append(Mode(s * s - 1.0, s, "hyperbolic", EVEN))
    if gamma > 2.0 + DEGENERATE_TOL:
        s = _root(lambda s: _coth_term(s) - gamma, 0.0, gamma, "odd mode above -1")
        modes.append(Mode(s * s - 1.0, s, "hyperbolic", ODD))
    if even_affine:
        modes.append(Mode(-1.0, 0.0, "affine", EVEN))
    if odd_affine:
        modes.append(Mode(-1.0, 0.0, "affine", ODD))

    # Below -1: the k-th even root lies in ((2k-1)pi, (2k+1)pi), the k-th odd root
    # in (2k pi, 2(k+1) pi); the k = 0 roots exist only for gamma < 0 resp. gamma < 2.
    # Sweeping k <= K finds every root with s < (2K+1) pi, at least 2K - 1 of them.
    need = count - len(modes)
    trig: list[Mode] = []
    if need > 0:
        fe, fo = _even_trig(gamma), _odd_trig(gamma)
        if gamma < -DEGENERATE_TOL:
            s = _root(fe, 0.0, math.pi, "even mode below -1")
            trig.append(Mode(-1.0 - s * s, s, "trig", EVEN))
        if gamma < 2.0 - DEGENERATE_TOL:
            def fo0(s):  # odd relation divided by s, finite at s = 0
                return math.cos(0.5 * s) - 0.5 * gamma * float(np.sinc(s / (2 * math.pi)))
            s = _root(fo0, 0.0, 2 * math.pi, "odd mode below -1")
            trig.append(Mode(-1.0 - s * s, s, "trig", ODD))
        n_sweep = (need + 2) // 2
        for k in range(1, n_sweep + 1):
            s = _root(fe, (2 * k - 1) * math.pi, (2 * k + 1) * math.pi, "even mode below -1")
            trig.append(Mode(-1.0 - s * s, s, "trig", EVEN))
            s = _root(fo, 2 * k * math.pi, 2 * (k + 1) * math.pi, "odd mode below -1")
            trig.append(Mode(-1.0 - s * s, s, "trig", ODD))
        cutoff = (2 * n_sweep + 1) * math.pi
        trig = sorted((m for m in trig if m.s < cutoff), key=lambda m: m.s)
    modes.sort(key=lambda m: -m.mu)
    modes = (modes + trig)[:count]
    return modes


def _norm_sq(mode: Mode) -> float:
    """L2(0,1) norm squared of the unnormalised parity eigenfunction."""
    s = mode.s
    if mode.kind == "affine":
        return 1.0 if mode.parity == EVEN else 1.0 / 12.0
    if mode.kind == "hyperbolic":
        if mode.parity == EVEN:
            return 0.5 * (1.0 + math.sinh(s) / s)
        # (sinh s / s - 1)/2 without cancellation for small s
        r = s * s / 6.0 * (1.0 + s * s / 20.0 * (1.0 + s * s / 42.0)) if s < 1e-2 else math.sinh(s) / s - 1.0
        return 0.5 * r
    if mode.parity == EVEN:
        return 0.5 * (1.0 + math.sin(s) / s)
    r = s * s / 6.0 * (1.0 - s * s / 20.0 * (1.0 - s * s / 42.0)) if s < 1e-2 else 1.0 - math.sin(s) / s
    return 0.5 * r


def _raw(mode: Mode, t):
    s = mode.s
    if mode.kind == "affine":
        return np.ones_like(t) if mode.parity == EVEN else t
    if mode.kind == "hyperbolic":
        return np.cosh(s * t) if mode.parity == EVEN else np.sinh(s * t)
    return np.cos(s * t) if mode.parity == EVEN else np.sin(s * t)


def _raw_deriv(mode: Mode, t):
    s = mode.s
    if mode.kind == "affine":
        return np.zeros_like(t) if mode.parity == EVEN else np.ones_like(t)
    if mode.kind == "hyperbolic":
        return s * np.sinh(s * t) if mode.parity == EVEN else s * np.cosh(s * t)
    return -s * np.sin(s * t) if mode.parity == EVEN else s * np.cos(s * t)


def _scale(mode: Mode) -> float:
    """Normalisation with sign chosen so that phi(0) > 0."""
    at0 = float(_raw(mode, np.array(-0.5)))
    if at0 == 0.0:  # cannot happen for finite gamma; keep phi'(0) > 0 convention
        at0 = float(_raw_deriv(mode, np.array(-0.5)))
    return math.copysign(1.0, at0) / math.sqrt(_norm_sq(mode))


@dataclass(frozen=True)
class RobinSpectrum:
    """Leading eigenpairs (mu_1 > mu_2 > ...) for one Robin coefficient.

    Eigenfunctions are sampled on ``grid`` from their closed forms and are
    exactly even or odd about x = 1/2 at the nodes.
    """

    gamma: float
    modes: tuple[Mode, ...]
    grid: Grid
    eigenfunctions: np.ndarray = field(repr=False)
    discrete_norms_sq: np.ndarray = field(repr=False)

    @property
    def n_max(self) -> int:
        return len(self.modes)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([m.mu for m in self.modes])

    @property
    def parities(self) -> np.ndarray:
        return np.array([m.parity for m in self.modes])

    def mu(self, n: int) -> float:
        """mu_n, 1-based."""
        return self.modes[n - 1].mu

    def phi(self, n: int) -> np.ndarray:
        return self.eigenfunctions[n - 1]

    def evaluate(self, n: int, x) -> np.ndarray:
        m = self.modes[n - 1]
        return _scale(m) * _raw(m, np.asarray(x, dtype=float) - 0.5)

    def derivative(self, n: int, x) -> np.ndarray:
        m = self.modes[n - 1]
        return _scale(m) * _raw_deriv(m, np.asarray(x, dtype=float) - 0.5)

    def coefficient(self, u: np.ndarray, n: int) -> float:
        """Modal amplitude <u, phi_n>_h / <phi_n, phi_n>_h.

        The trapezoid norm of the sampled phi_n is 1 + O(h^2); dividing by it
        makes phi_n have amplitude exactly 1. Opposite parity gives exactly 0.
        """
        m = self.modes[n - 1]
        return self.grid.fold_inner(u, self.eigenfunctions[n - 1], m.parity) / self.discrete_norms_sq[n - 1]

    def coefficients(self, u: np.ndarray, n_modes: int | None = None) -> np.ndarray:
        n_modes = self.n_max if n_modes is None else n_modes
        return np.array([self.coefficient(u, n) for n in range(1, n_modes + 1)])

    def bc_residual(self, n: int) -> tuple[float, float]:
        """Analytic boundary defects (|-phi'(0) - gamma phi(0)|, |phi'(1) - gamma phi(1)|)."""
        d0 = -self.derivative(n, 0.0) - self.gamma * self.evaluate(n, 0.0)
        d1 = self.derivative(n, 1.0) - self.gamma * self.evaluate(n, 1.0)
        return abs(float(d0)), abs(float(d1))


def solve_spectrum(gamma: float, n_max: int, grid: Grid) -> RobinSpectrum:
    if grid.n_nodes < 32:
        raise GridTooCoarse(f"grid too coarse: need at least 32 nodes, got {grid.n_nodes}")
    modes = robin_modes(gamma, n_max)
    if len(modes) < n_max:
        raise BracketingError("fewer roots than requested", (0.0, math.inf))
    s_max = max(m.s for m in modes if m.kind == "trig") if any(m.kind == "trig" for m in modes) else 0.0
    # a half wave of cos(s t) has length pi/s and must hold >= 8 nodes
    if s_max > 0.0 and math.pi / (s_max * grid.h) < NODES_PER_HALF_WAVE:
        raise GridTooCoarse(
            f"grid too coarse: mode {n_max} has {math.pi / (s_max * grid.h):.2f} nodes per half-wave "
            f"(< {NODES_PER_HALF_WAVE}); increase N above {math.ceil(NODES_PER_HALF_WAVE * s_max / math.pi)}")
    t_left = grid.centered[: grid.half + 1]
    phis = np.empty((n_max, grid.n_nodes))
    for i, m in enumerate(modes):
        phis[i] = grid.mirror(_scale(m) * _raw(m, t_left), m.parity)
    phis.setflags(write=False)
    norms = np.array([grid.inner(p, p) for p in phis])
    return RobinSpectrum(float(gamma), tuple(modes), grid, phis, norms)


def spectrum_at_infinity(lam: float, n_max: int, grid: Grid) -> RobinSpectrum:
    return solve_spectrum(lam, n_max, grid)


FieldOrSymbol = Union[str, float, np.ndarray]


def robin_coefficient(u_star: FieldOrSymbol, lam: float, g: BoundaryNonlinearity) -> float:
    """gamma = lambda + g'(u*(0)); both ends must agree."""
    if isinstance(u_star, str):
        if u_star != "zero":
            raise ValueError(f"unknown equilibrium symbol {u_star!r}")
        return lam + g.deriv_at_zero
    arr = np.atleast_1d(np.asarray(u_star, dtype=float))
    if arr.size == 1 and arr[0] == 0.0:
        return lam + g.deriv_at_zero
    d0, d1 = float(g.deriv(arr[0])), float(g.deriv(arr[-1]))
    if abs(d0 - d1) > 1e-10:
        raise AsymmetricRobin(
            f"asymmetric Robin coefficients unsupported: g'(u(0))={d0!r}, g'(u(1))={d1!r}")
    return lam + d0


def linearized_spectrum_at(u_star: FieldOrSymbol, lam: float, g: BoundaryNonlinearity,
                           n_max: int, grid: Grid) -> RobinSpectrum:
    return solve_spectrum(robin_coefficient(u_star, lam, g), n_max, grid)


def morse_index(spec: RobinSpectrum) -> int:
    mu = spec.eigenvalues
    close = np.abs(mu) <= HYPERBOLIC_TOL
    if np.any(close):
        raise NonHyperbolic(
            f"non-hyperbolic at this λ: eigenvalue {mu[close][0]!r} (gamma={spec.gamma!r})")
    return int(np.sum(mu > 0.0))


@dataclass(frozen=True)
class DiscreteSpectrum:
    """Leading eigenpairs of the ghost-node matrix A_h itself.

    A_h is self-adjoint in the trapezoid inner product, so coefficients taken
    against these vectors evolve exactly as u_n' = mu_n u_n + G_n in the
    semi-discrete system. Coefficients against sampled closed forms instead
    carry an O(h^2) share of every other mode.
    """

    gamma: float
    grid: Grid
    eigenvalues: np.ndarray
    vectors: np.ndarray = field(repr=False)

    def mu(self, n: int) -> float:
        return float(self.eigenvalues[n - 1])

    def phi(self, n: int) -> np.ndarray:
        return self.vectors[n - 1]

    def coefficient(self, u: np.ndarray, n: int) -> np.ndarray:
        """Coefficient of mode n; ``u`` may be one field or a stack of fields."""
        return np.asarray(u, dtype=float) @ (self.grid.weights * self.vectors[n - 1])

    def coefficients(self, u: np.ndarray, n_modes: int | None = None) -> np.ndarray:
        return (self.vectors[:n_modes] * self.grid.weights) @ np.asarray(u, dtype=float)


def discrete_spectrum(gamma: float, n_max: int, grid: Grid) -> DiscreteSpectrum:
    h, n = grid.h, grid.n_cells
    diag = np.full(n + 1, -2.0 / h**2 - 1.0)
    diag[[0, -1]] += 2.0 * gamma / h
    off = np.full(n, 1.0 / h**2)
    off[[0, -1]] = math.sqrt(2.0) / h**2  # symmetrised by the weight ratio sqrt(w_0 / w_1)
    mu, vec = eigh_tridiagonal(diag, off, select="i", select_range=(n + 1 - n_max, n))
    order = np.argsort(mu)[::-1]
    vec = vec[:, order] / np.sqrt(grid.weights)[:, None]  # unit trapezoid norm
    vec *= np.where(vec[0] < 0, -1.0, 1.0)
    # exact mirror parity; eigensolver round-off would otherwise seed the other parity class
    parity = np.where(vec[0] * vec[-1] > 0, 1.0, -1.0)
    vec = 0.5 * (vec + parity * vec[::-1])
    return DiscreteSpectrum(float(gamma), grid, mu[order], vec.T.copy())
