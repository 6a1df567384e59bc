"""Time integration of u_t = u_xx - u with nonlinear Robin boundary conditions.

Space: second-order finite differences with ghost nodes
u_{-1} = u_1 + 2h(lam u_0 + g(u_0)) (mirrored at x = 1). Time: theta-scheme in
the linear part (theta = 1 backward Euler, theta = 1/2 Crank-Nicolson) with g
explicit. With theta = 1 and monotone g this is a convex-concave splitting of
the discrete energy, which therefore never increases when lam <= 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import solve_banded

from . import _backend
from ._tridiag import explicit_apply
from .errors import NotInGrowthRegime, NumericalOverflow, UnclassifiedBlowup
from .grid import Grid
from .nonlinearity import BoundaryNonlinearity
from .spectrum import RobinSpectrum, robin_modes, spectrum_at_infinity

DEFAULT_N = 200
DEFAULT_DT = 1e-3
DEFAULT_THRESHOLD = 1e4
DEFAULT_SAMPLE = 0.1
DEFAULT_MODES = 6
TIE_BREAK = 1e-3


def dt_max(lam: float, g: BoundaryNonlinearity, grid: Grid, theta: float = 1.0) -> float:
    """Largest admissible step.

    The implicit factor I - theta dt A must stay well conditioned on growing
    modes (theta dt mu_1 <= 1/2, with the Robin coefficient shifted by the
    Lipschitz constant of g), and the explicit boundary term needs
    dt <= h / L.
    """
    lip = g.lipschitz_constant if g.lipschitz_constant is not None else abs(g.deriv_at_zero)
    mu1 = robin_modes(lam + lip, 1)[0].mu
    limit = math.inf
    if theta > 0 and mu1 > 0:
        limit = 0.5 / (theta * mu1)
    if lip > 0:
        limit = min(limit, grid.h / lip)
    return limit


def _check_dt(dt: float, lam: float, g: BoundaryNonlinearity, grid: Grid, theta: float):
    if not (dt > 0 and math.isfinite(dt)):
        raise ValueError(f"dt must be positive and finite, got {dt!r}")
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta!r}")
    bound = dt_max(lam, g, grid, theta)
    if dt > bound:
        raise ValueError(f"dt={dt!r} exceeds the stability bound dt_max={bound:.6g}")


def _advance(kern, u, n_steps, dt, lam, h, theta, g, threshold) -> int:
    """Kernel call; a Python-level OverflowError from a user g counts as non-finite."""
    try:
        return kern.pde_advance(u, n_steps, dt, lam, h, theta, g.kernel_code, g.eval, threshold)
    except OverflowError:
        return -1


def step(u: np.ndarray, dt: float, lam: float, g: BoundaryNonlinearity, grid: Grid,
         theta: float = 1.0, backend=None) -> np.ndarray:
    """One theta-step; returns a new array."""
    _check_dt(dt, lam, g, grid, theta)
    v = np.array(grid.check_field(u), dtype=float, copy=True)
    k = _advance(_backend.get(backend), v, 1, dt, lam, grid.h, theta, g, -1.0)
    if k < 0:
        raise NumericalOverflow("numerical overflow: switch to the compactified integrator")
    return v


def energy(u: np.ndarray, lam: float, g: BoundaryNonlinearity, grid: Grid) -> float:
    """Discrete Lyapunov functional.

    E(u) = 1/2 (|u_x|^2 + |u|^2)_{L2} - sum over x in {0, 1} of [lam u^2/2 + G(u)],
    G the primitive of g; u_x by forward differences, L2 by trapezoid.
    """
    u = np.asarray(u, dtype=float)
    du = np.diff(u)
    bulk = 0.5 * (np.dot(du, du) / grid.h + grid.inner(u, u))
    ends = sum(0.5 * lam * v * v + g.primitive(float(v)) for v in (u[0], u[-1]))
    return float(bulk - ends)


@dataclass(frozen=True)
class Event:
    type: str
    time: float
    payload: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"type": self.type, "time": self.time, **self.payload}


@dataclass(frozen=True)
class TrajectoryRecord:
    times: np.ndarray
    l2_norms: np.ndarray
    energies: np.ndarray
    modal: np.ndarray
    events: tuple[Event, ...]
    u_final: np.ndarray
    lam: float
    g: BoundaryNonlinearity
    grid: Grid
    spectrum: RobinSpectrum
    dt: float
    theta: float
    sup_norms: np.ndarray = field(default=None, repr=False)
    snapshots: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n_modes(self) -> int:
        return self.modal.shape[1]

    def event(self, kind: str) -> Optional[Event]:
        return next((e for e in self.events if e.type == kind), None)

    @property
    def blew_up(self) -> bool:
        return self.event("blowup_threshold") is not None


def simulate(u0: np.ndarray, lam: float, g: BoundaryNonlinearity, grid: Grid, t_end: float,
             dt: float = DEFAULT_DT, n_modes: int = DEFAULT_MODES,
             threshold: float = DEFAULT_THRESHOLD, sample_interval: float = DEFAULT_SAMPLE,
             theta: float = 1.0, steady_tol: Optional[float] = None,
             keep_snapshots: bool = False, backend=None) -> TrajectoryRecord:
    """Integrate to ``t_end`` or until the L2 norm reaches ``threshold``.

    Samples every ``sample_interval`` (rounded to whole steps). Events:
    ``blowup_threshold`` when the norm reaches the threshold, ``steady`` when
    the sampled time derivative drops below ``steady_tol`` (the run stops), and
    ``converged`` when t_end is reached.
    """
    _check_dt(dt, lam, g, grid, theta)
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    kern = _backend.get(backend)
    spec = spectrum_at_infinity(lam, n_modes, grid)
    u = np.array(grid.check_field(u0, "u0"), dtype=float, copy=True)
    per = max(1, int(round(sample_interval / dt)))
    total = int(round(t_end / dt))

    times, norms, sups, ens, modal, snaps = [], [], [], [], [], []

    def record(t):
        times.append(t)
        norms.append(grid.norm(u))
        sups.append(float(np.max(np.abs(u))))
        ens.append(energy(u, lam, g, grid))
        modal.append(spec.coefficients(u, n_modes))
        if keep_snapshots:
            snaps.append(u.copy())

    record(0.0)
    events: list[Event] = []
    done = 0
    while done < total:
        chunk = min(per, total - done)
        prev = u.copy()
        taken = _advance(kern, u, chunk, dt, lam, grid.h, theta, g, threshold)
        if taken < 0:
            raise NumericalOverflow(
                f"numerical overflow near t={done * dt:.6g}: switch to the compactified integrator")
        done += taken
        t = done * dt
        record(t)
        if taken < chunk:
            events.append(Event("blowup_threshold", t, {"l2_norm": norms[-1], "threshold": threshold}))
            break
        if steady_tol is not None:
            rate = grid.norm(u - prev) / (taken * dt)
            if rate < steady_tol:
                events.append(Event("steady", t, {"rate": rate}))
                break
    else:
        events.append(Event("converged", done * dt, {"t_end": t_end}))

    return TrajectoryRecord(
        times=np.array(times), l2_norms=np.array(norms), energies=np.array(ens),
        modal=np.array(modal).reshape(len(times), n_modes), events=tuple(events),
        u_final=u, lam=lam, g=g, grid=grid, spectrum=spec, dt=dt, theta=theta,
        sup_norms=np.array(sups), snapshots=np.array(snaps) if keep_snapshots else None)


def forcing_bound(spec: RobinSpectrum, g: BoundaryNonlinearity, n: int) -> float:
    """Bound on the projected boundary forcing, sup|g| (|phi_n(0)| + |phi_n(1)|)."""
    phi = spec.phi(n)
    return g.bound * (abs(phi[0]) + abs(phi[-1]))


def fit_growth_rate(record: TrajectoryRecord, n: int,
                    window: Optional[tuple[float, float]] = None) -> float:
    """Least-squares slope of ln|u_n(t)|.

    The default window is the last decade of |u_n| on which the forcing bound
    condition holds.
    """
    mu = record.spectrum.mu(n)
    un = record.modal[:, n - 1]
    t = record.times
    if mu <= 0:
        raise NotInGrowthRegime(f"mode not in growth regime: mu_{n}={mu:.6g} <= 0")
    floor = 10.0 * forcing_bound(record.spectrum, record.g, n) / mu
    if window is None:
        mask = np.abs(un) > floor
        if mask.sum() < 3:
            raise NotInGrowthRegime(f"mode not in growth regime: |u_{n}| never exceeds {floor:.3g}")
        top = np.abs(un[mask]).max()
        mask &= np.abs(un) >= top / 10.0
    else:
        mask = (t >= window[0]) & (t <= window[1])
        if mask.sum() < 3:
            raise ValueError("window holds fewer than 3 samples")
        if np.any(np.abs(un[mask]) <= floor):
            raise NotInGrowthRegime(
                f"mode not in growth regime: |u_{n}| <= {floor:.3g} inside the window")
    seg = un[mask]
    if np.any(seg == 0) or np.any(np.sign(seg) != np.sign(seg[0])):
        raise NotInGrowthRegime(f"mode not in growth regime: u_{n} crosses 0 in the window")
    slope, _ = np.polyfit(t[mask], np.log(np.abs(seg)), 1)
    return float(slope)


def fit_norm_growth_rate(record: TrajectoryRecord, decades: float = 1.0) -> float:
    """Slope of ln ||u|| over the final ``decades`` of growth."""
    y = np.log(record.l2_norms)
    mask = y >= y[-1] - decades * math.log(10.0)
    if mask.sum() < 3:
        raise NotInGrowthRegime("too few samples in the final decade")
    slope, _ = np.polyfit(record.times[mask], y[mask], 1)
    return float(slope)


@dataclass(frozen=True)
class BlowupClass:
    bounded: bool
    iota: int = 0
    mode: int = 0
    final_distance: float = math.nan
    distances: dict = field(default_factory=dict)


def blowup_distances(u: np.ndarray, spec: RobinSpectrum, grid: Grid) -> dict[int, tuple[float, int]]:
    """{N: (min over iota of ||u/||u|| - iota phi_N||, iota)} for N = 1, 2."""
    v = u / grid.norm(u)
    out = {}
    for mode in (1, 2):
        if mode > spec.n_max:
            break
        phi = spec.phi(mode)
        d = {iota: grid.norm(v - iota * phi) for iota in (1, -1)}
        iota = min(d, key=d.get)
        out[mode] = (d[iota], iota)
    return out


def detect_blowup(record: TrajectoryRecord, spectrum: Optional[RobinSpectrum] = None,
                  tol: float = 1e-2) -> BlowupClass:
    if not record.blew_up:
        return BlowupClass(bounded=True)
    spec = spectrum if spectrum is not None else record.spectrum
    dist = blowup_distances(record.u_final, spec, record.grid)
    d = {mode: v[0] for mode, v in dist.items()}
    best = min(d, key=d.get)
    if 1 in d and 2 in d and abs(d[1] - d[2]) <= TIE_BREAK:
        best = 1
    if d[best] > tol:
        raise UnclassifiedBlowup(d)
    return BlowupClass(bounded=False, iota=dist[best][1], mode=best,
                       final_distance=d[best], distances=d)


def modal_residual(record: TrajectoryRecord, n: int) -> np.ndarray:
    """du_n/dt - mu_n u_n by central differences; approximates the forcing G_n(t)."""
    un = record.modal[:, n - 1]
    if len(un) < 2:
        return np.zeros_like(un)
    if len(un) < 3:
        return np.gradient(un, record.times) - record.spectrum.mu(n) * un
    # second-order ends: a first-order edge on an exponential is off by mu^2 dt u / 2
    return np.gradient(un, record.times, edge_order=2) - record.spectrum.mu(n) * un


def operator_residual(u: np.ndarray, lam: float, g: BoundaryNonlinearity, grid: Grid) -> np.ndarray:
    """A_h u + b(u), the right-hand side of the semi-discrete system."""
    r = explicit_apply(u, grid.h, lam, 1.0) - u
    r[0] += 2.0 * float(g.eval(u[0])) / grid.h
    r[-1] += 2.0 * float(g.eval(u[-1])) / grid.h
    return r


def discrete_equilibrium(u_guess: np.ndarray, lam: float, g: BoundaryNonlinearity, grid: Grid,
                         tol: float = 1e-12, max_iter: int = 50) -> np.ndarray:
    """Newton solve of A_h u + b(u) = 0 starting at ``u_guess``."""
    u = np.array(grid.check_field(u_guess), dtype=float, copy=True)
    n, h = grid.n_cells, grid.h
    a = 1.0 / (h * h)
    for _ in range(max_iter):
        r = operator_residual(u, lam, g, grid)
        ab = np.zeros((3, n + 1))
        ab[0, 1:] = a
        ab[2, :-1] = a
        ab[1, :] = -2.0 * a - 1.0
        ab[1, 0] = ab[1, n] = (-2.0 + 2.0 * h * lam) * a - 1.0 + 0.0
        ab[0, 1] = 2.0 * a
        ab[2, n - 1] = 2.0 * a
        ab[1, 0] += 2.0 * float(g.deriv(u[0])) / h
        ab[1, n] += 2.0 * float(g.deriv(u[n])) / h
        du = solve_banded((1, 1), ab, -r)
        u += du
        if np.max(np.abs(du)) <= tol * (1.0 + np.max(np.abs(u))):
            return u
    raise NumericalOverflow("Newton iteration for the discrete equilibrium did not converge")


def initial_field(spec: str, lam: float, g: BoundaryNonlinearity, grid: Grid) -> np.ndarray:
    """Build u0 from 'zero', 'eigmode:n:amp', 'branch:i:c' or 'file:<path>'."""
    from .equilibria import EquilibriumBranch, equilibrium_profile

    kind, _, rest = spec.partition(":")
    if kind == "zero" and not rest:
        return np.zeros(grid.n_nodes)
    if kind == "eigmode":
        n_str, _, amp = rest.partition(":")
        n = int(n_str)
        if n < 1:
            raise ValueError("eigmode index must be >= 1")
        return float(amp) * spectrum_at_infinity(lam, n, grid).phi(n).copy()
    if kind == "branch":
        i_str, _, c = rest.partition(":")
        return equilibrium_profile(EquilibriumBranch(int(i_str), g), float(c), grid)
    if kind == "file":
        data = np.loadtxt(rest, delimiter=",", comments="#", ndmin=2)
        if data.shape[1] != 2:
            raise ValueError("field file must have two columns x,u")
        if data.shape[0] != grid.n_nodes or not np.allclose(data[:, 0], grid.x, rtol=0, atol=1e-12):
            raise ValueError(f"field file nodes do not match the grid with N={grid.n_cells}")
        return grid.check_field(data[:, 1])
    raise ValueError(f"unrecognised initial condition {spec!r}")
