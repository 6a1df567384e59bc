"""Theta-scheme operator for the ghost-node Robin discretisation, folded by symmetry.

A_h acts on nodal values u_0..u_N:
    (A u)_0 = ((-2 + 2 h lam)/h^2 - 1) u_0 + (2/h^2) u_1        (mirror at N)
    (A u)_i = (u_{i-1} + u_{i+1} - 2 u_i)/h^2 - u_i
and the boundary nonlinearity enters as b_0 = 2 g(u_0)/h, b_N = 2 g(u_N)/h.
The implicit matrix I - theta dt A is centrosymmetric, so even and odd parts
about x = 1/2 decouple into two half-size tridiagonal systems.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class HalfSystems:
    n: int
    even: tuple[np.ndarray, np.ndarray, np.ndarray]   # (sub, diag, sup)
    odd: tuple[np.ndarray, np.ndarray, np.ndarray]


def full_implicit(n: int, h: float, lam: float, dt: float, theta: float):
    """(sub, diag, sup) of I - theta dt A_h, each of length N + 1 (sub[0], sup[N] unused)."""
    a = 1.0 / (h * h)
    c = theta * dt
    diag = np.full(n + 1, 1.0 - c * (-2.0 * a - 1.0))
    diag[0] = diag[n] = 1.0 - c * ((-2.0 + 2.0 * h * lam) * a - 1.0)
    sub = np.full(n + 1, -c * a)
    sup = np.full(n + 1, -c * a)
    sup[0] = sub[n] = -2.0 * c * a
    sub[0] = sup[n] = 0.0
    return sub, diag, sup


def half_systems(n: int, h: float, lam: float, dt: float, theta: float) -> HalfSystems:
    sub, diag, sup = full_implicit(n, h, lam, dt, theta)
    if n % 2 == 0:
        m = n // 2
        es, ed, eu = sub[: m + 1].copy(), diag[: m + 1].copy(), sup[: m + 1].copy()
        es[m] += sup[m]      # u_{m+1} = u_{m-1}
        eu[m] = 0.0
        os_, od, ou = sub[:m].copy(), diag[:m].copy(), sup[:m].copy()
        ou[m - 1] = 0.0      # u_m = 0
    else:
        k = (n - 1) // 2
        es, ed, eu = sub[: k + 1].copy(), diag[: k + 1].copy(), sup[: k + 1].copy()
        os_, od, ou = es.copy(), ed.copy(), eu.copy()
        ed[k] += sup[k]      # u_{k+1} = +u_k
        od[k] -= sup[k]      # u_{k+1} = -u_k
        eu[k] = ou[k] = 0.0
    return HalfSystems(n, (es, ed, eu), (os_, od, ou))


def explicit_apply(u: np.ndarray, h: float, lam: float, coef: float) -> np.ndarray:
    """u + coef * A_h u with mirror-exact stencils."""
    a = 1.0 / (h * h)
    out = np.empty_like(u)
    out[1:-1] = u[1:-1] + coef * (a * ((u[:-2] + u[2:]) - 2.0 * u[1:-1]) - u[1:-1])
    db = (-2.0 + 2.0 * h * lam) * a - 1.0
    out[0] = u[0] + coef * (db * u[0] + 2.0 * a * u[1])
    out[-1] = u[-1] + coef * (db * u[-1] + 2.0 * a * u[-2])
    return out


def flux_inner(u: np.ndarray, h: float, lam: float, g0: float, gn: float) -> float:
    """<A_h u + b, u> in the trapezoid inner product via summation by parts."""
    du = np.diff(u)
    w_sq = h * (np.dot(u, u) - 0.5 * (u[0] * u[0] + u[-1] * u[-1]))
    return (lam * (u[0] * u[0] + u[-1] * u[-1]) + g0 * u[0] + gn * u[-1]
            - (np.dot(du, du) / h + w_sq))
