"""Poincare projection onto the hemisphere ||U||^2 + z^2 = 1 and the flows on it.

With u = U/z the PDE becomes
    U_t = U_xx - U - <U_xx - U, U> U,   z_t = -<U_xx - U, U> z,
with boundary nonlinearity g^z(U) = z g(U/z). The equator z = 0 (the sphere
at infinity) is invariant; there g^z = 0 and the Robin coefficient is lam.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.integrate import solve_ivp

from . import _backend
from ._tridiag import flux_inner
from .errors import OutsideChart, PointAtInfinity
from .grid import Grid
from .nonlinearity import ZERO, BoundaryNonlinearity
from .pde import DEFAULT_DT, DEFAULT_MODES, DEFAULT_SAMPLE, _check_dt
from .spectrum import DiscreteSpectrum, RobinSpectrum, spectrum_at_infinity

AnySpectrum = Union[RobinSpectrum, DiscreteSpectrum]

Z_EPS = 1e-12


@dataclass(frozen=True)
class HemispherePoint:
    U: np.ndarray
    z: float

    def constraint_error(self, grid: Grid) -> float:
        return abs(grid.inner(self.U, self.U) + self.z * self.z - 1.0)


@dataclass(frozen=True)
class TangentChartPoint:
    chart: int
    xi: np.ndarray
    zeta: float


def project(u: np.ndarray, grid: Grid) -> HemispherePoint:
    u = grid.check_field(u)
    s = 1.0 / math.sqrt(1.0 + grid.inner(u, u))
    return HemispherePoint(u * s, s)


def unproject(p: HemispherePoint) -> np.ndarray:
    if p.z <= Z_EPS:
        raise PointAtInfinity("point at infinity has no preimage")
    return np.asarray(p.U) / p.z


def nonlocal_term(U: np.ndarray, lam: float, grid: Grid, g0: float = 0.0, gn: float = 0.0) -> float:
    """-<U_xx - U, U> for the discrete operator, by summation by parts.

    Equals ||U||_{H1}^2 - (U_x U)|_0^1 with the Robin flux at the ends.
    """
    return -flux_inner(np.asarray(U, dtype=float), grid.h, lam, g0, gn)


@dataclass(frozen=True)
class HemisphereTrajectory:
    times: np.ndarray
    z: np.ndarray
    modal: np.ndarray
    dist_phi1: np.ndarray
    dist_phi2: np.ndarray
    constraint: np.ndarray       # |<U,U> + z^2 - 1| after renormalisation
    max_drift: float             # largest pre-renormalisation defect of a single step
    U_final: np.ndarray
    z_final: float
    spectrum: RobinSpectrum
    lam: float
    snapshots: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def final(self) -> HemispherePoint:
        return HemispherePoint(self.U_final, self.z_final)


def _distance(U, z, phi, grid) -> float:
    """min over sign of the (L2 x R) distance from (U, z) to (+-phi, 0)."""
    return math.sqrt(min(grid.inner(U - s * phi, U - s * phi) for s in (1.0, -1.0)) + z * z)


def hemisphere_simulate(p0: HemispherePoint, lam: float, g: BoundaryNonlinearity, grid: Grid,
                        t_end: float, dt: float = DEFAULT_DT,
                        sample_interval: float = DEFAULT_SAMPLE, n_modes: int = DEFAULT_MODES,
                        theta: float = 1.0, keep_snapshots: bool = False,
                        stop_distance: Optional[tuple[int, float]] = None,
                        backend=None) -> HemisphereTrajectory:
    """Integrate the induced flow on the closed upper hemisphere.

    Each step applies the PDE step to U with g^z, multiplies (U, z) by
    exp(-dt <A U + b, U>) and renormalises onto the sphere. ``stop_distance``
    = (N, d) ends the run once the distance to +-phi_N drops below d.
    """
    _check_dt(dt, lam, g, grid, theta)
    if not 0.0 <= p0.z <= 1.0 + 1e-12:
        raise ValueError("z must lie in [0, 1]")
    if p0.constraint_error(grid) > 1e-8:
        raise ValueError("initial point is not on the unit sphere")
    kern = _backend.get(backend)
    spec = spectrum_at_infinity(lam, max(n_modes, 2), grid)
    U = np.array(grid.check_field(p0.U, "U"), dtype=float, copy=True)
    z = float(p0.z)
    per = max(1, int(round(sample_interval / dt)))
    total = int(round(t_end / dt))
    phi1, phi2 = spec.phi(1), spec.phi(2)
    rows: dict[str, list] = {k: [] for k in ("t", "z", "m", "d1", "d2", "c", "s")}

    def record(t):
        rows["t"].append(t)
        rows["z"].append(z)
        rows["m"].append(spec.coefficients(U, n_modes))
        rows["d1"].append(_distance(U, z, phi1, grid))
        rows["d2"].append(_distance(U, z, phi2, grid))
        rows["c"].append(abs(grid.inner(U, U) + z * z - 1.0))
        if keep_snapshots:
            rows["s"].append(U.copy())

    record(0.0)
    drift = 0.0
    done = 0
    while done < total:
        chunk = min(per, total - done)
        z, d = kern.sphere_advance(U, z, chunk, dt, lam, grid.h, theta, g.kernel_code, g.eval)
        drift = max(drift, d)
        done += chunk
        record(done * dt)
        if stop_distance is not None:
            key = "d1" if stop_distance[0] == 1 else "d2"
            if rows[key][-1] < stop_distance[1]:
                break
    return HemisphereTrajectory(
        times=np.array(rows["t"]), z=np.array(rows["z"]),
        modal=np.array(rows["m"]).reshape(len(rows["t"]), n_modes),
        dist_phi1=np.array(rows["d1"]), dist_phi2=np.array(rows["d2"]),
        constraint=np.array(rows["c"]), max_drift=drift, U_final=U, z_final=z,
        spectrum=spec, lam=lam,
        snapshots=np.array(rows["s"]) if keep_snapshots else None)


def infinity_flow_simulate(U0: np.ndarray, lam: float, grid: Grid, t_end: float,
                           dt: float = DEFAULT_DT, **kwargs) -> HemisphereTrajectory:
    """The flow restricted to the sphere at infinity (z = 0, linear Robin coefficient lam)."""
    U0 = grid.check_field(U0, "U0")
    if abs(grid.norm(U0) - 1.0) > 1e-8:
        raise ValueError("U0 must have unit L2 norm")
    return hemisphere_simulate(HemispherePoint(U0, 0.0), lam, ZERO, grid, t_end, dt, **kwargs)


def normalize(u: np.ndarray, grid: Grid) -> np.ndarray:
    return np.asarray(u, dtype=float) / grid.norm(u)


def chart_change(p: HemispherePoint, N: int, spectrum: AnySpectrum) -> TangentChartPoint:
    """(xi, zeta) = (U, z)/<U, phi_N>.

    Passing a DiscreteSpectrum takes the projection against the eigenvectors
    of the discrete operator, which keeps chart coordinates free of O(h^2)
    cross-talk between modes.
    """
    if N not in (1, 2):
        raise ValueError("chart index must be 1 or 2")
    c = spectrum.coefficient(np.asarray(p.U, dtype=float), N)
    if not c > 1e-10:
        raise OutsideChart(f"outside chart C_{N}: <U, phi_{N}> = {c:.3e}")
    return TangentChartPoint(N, np.asarray(p.U) / c, p.z / c)


def chart_coefficients(q: TangentChartPoint, spectrum: RobinSpectrum,
                       n_modes: Optional[int] = None) -> np.ndarray:
    return spectrum.coefficients(q.xi, n_modes)


def xi_flow_closed_form(xi0: Sequence[float], N: int, spectrum: AnySpectrum, t) -> np.ndarray:
    """xi_n(t) = xi_n(0) exp((mu_n - mu_N) t); rows follow ``t`` when it is an array."""
    xi0 = np.asarray(xi0, dtype=float)
    if abs(xi0[N - 1] - 1.0) > 1e-10:
        raise ValueError(f"xi0 must have component {N} equal to 1")
    mu = spectrum.eigenvalues[: len(xi0)]
    t_arr = np.asarray(t, dtype=float)
    out = xi0 * np.exp(np.multiply.outer(t_arr, mu - mu[N - 1]))
    out[..., N - 1] = 1.0
    return out


def modal_infinity_flow(coeffs0: Sequence[float], spectrum: RobinSpectrum, t_eval,
                        rtol: float = 1e-12, atol: float = 1e-14) -> np.ndarray:
    """Integrate the sphere-at-infinity flow in the eigenbasis.

    U_n' = mu_n U_n - (sum_k mu_k U_k^2) U_n, the Galerkin form of the flow
    at infinity. Returns coefficients at ``t_eval`` (rows).
    """
    c0 = np.asarray(coeffs0, dtype=float)
    mu = spectrum.eigenvalues[: len(c0)]

    def rhs(_, y):
        return mu * y - np.dot(mu, y * y) * y

    t_eval = np.asarray(t_eval, dtype=float)
    sol = solve_ivp(rhs, (0.0, float(t_eval[-1])), c0, method="DOP853", t_eval=t_eval,
                    rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(sol.message)
    return sol.y.T


def _ghost(u0, u1, u2, lam, h):
    """Ghost value from the cubic through u0, u1, u2 with -p'(0) = lam u0."""
    a = -lam * u0
    r1 = u1 - u0 - a * h
    r2 = u2 - u0 - 2.0 * a * h
    ch3 = 0.25 * (r2 - 4.0 * r1)
    bh2 = r1 - ch3
    return u0 - a * h + bh2 - ch3


def infinity_equilibrium_residual(phi: np.ndarray, lam: float, grid: Grid) -> float:
    """||U_xx - U + (nonlocal) U||_{L2} with a boundary-consistent ghost extension."""
    U = grid.check_field(phi, "phi")
    if abs(grid.norm(U) - 1.0) > 1e-8:
        raise ValueError("phi must have unit L2 norm")
    h = grid.h
    ext = np.empty(U.size + 2)
    ext[1:-1] = U
    ext[0] = _ghost(U[0], U[1], U[2], lam, h)
    ext[-1] = _ghost(U[-1], U[-2], U[-3], lam, h)
    lu = (ext[:-2] + ext[2:] - 2.0 * U) / (h * h) - U
    r = lu - grid.inner(lu, U) * U
    return grid.norm(r)
