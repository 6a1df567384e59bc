"""Pure-Python stepping kernels (numpy + LAPACK gttrf/gttrs)."""
from __future__ import annotations

import math

import numpy as np
from scipy.linalg.lapack import dgttrf, dgttrs

from ._tridiag import explicit_apply, flux_inner, half_systems

NAME = "python"


class _Factor:
    def __init__(self, sub, diag, sup):
        dl, d, du, du2, ipiv, info = dgttrf(sub[1:], diag, sup[:-1])
        if info != 0:
            raise np.linalg.LinAlgError(f"singular implicit matrix (info={info})")
        self._lu = (dl, d, du, du2, ipiv)

    def solve(self, b: np.ndarray) -> np.ndarray:
        x, info = dgttrs(*self._lu, b)
        return x


class _FoldedSolver:
    def __init__(self, n, h, lam, dt, theta):
        hs = half_systems(n, h, lam, dt, theta)
        self.n = n
        self.even = _Factor(*hs.even)
        self.odd = _Factor(*hs.odd)

    def solve(self, r: np.ndarray) -> np.ndarray:
        n = self.n
        out = np.empty_like(r)
        if n % 2 == 0:
            m = n // 2
            e = self.even.solve(0.5 * (r[: m + 1] + r[n - np.arange(m + 1)]))
            o = self.odd.solve(0.5 * (r[:m] - r[n:m:-1]))
            out[:m] = e[:m] + o
            out[n:m:-1] = e[:m] - o
            out[m] = e[m]
        else:
            k = (n - 1) // 2
            e = self.even.solve(0.5 * (r[: k + 1] + r[n:k:-1]))
            o = self.odd.solve(0.5 * (r[: k + 1] - r[n:k:-1]))
            out[: k + 1] = e + o
            out[n:k:-1] = e - o
        return out


def _gvals(g_func, z, u0, un):
    if g_func is None or z <= 1e-12:
        return 0.0, 0.0
    if z == 1.0:
        return float(g_func(u0)), float(g_func(un))
    return z * float(g_func(u0 / z)), z * float(g_func(un / z))


def pde_advance(u, n_steps, dt, lam, h, theta, g_code, g_func, threshold):
    """Advance u in place by up to n_steps theta-steps.

    Returns the number of steps taken; fewer than n_steps means the trapezoid
    norm reached ``threshold`` (disabled when threshold <= 0). Returns -1 with
    u holding the last finite state if a step produced non-finite values.
    """
    n = u.shape[0] - 1
    solver = _FoldedSolver(n, h, lam, dt, theta)
    thr2 = threshold * threshold if threshold > 0 else math.inf
    ex = (1.0 - theta) * dt
    bscale = 2.0 * dt / h
    for k in range(n_steps):
        g0, gn = _gvals(g_func if g_code != 0 else None, 1.0, u[0], u[-1])
        r = explicit_apply(u, h, lam, ex)
        r[0] += bscale * g0
        r[-1] += bscale * gn
        v = solver.solve(r)
        nrm2 = h * (np.dot(v, v) - 0.5 * (v[0] * v[0] + v[-1] * v[-1]))
        if not math.isfinite(nrm2):
            return -1
        u[:] = v
        if nrm2 >= thr2:
            return k + 1
    return n_steps


def sphere_advance(U, z, n_steps, dt, lam, h, theta, g_code, g_func):
    """Advance the Poincare-hemisphere flow in place; returns (z, max pre-renormalisation drift)."""
    n = U.shape[0] - 1
    solver = _FoldedSolver(n, h, lam, dt, theta)
    ex = (1.0 - theta) * dt
    bscale = 2.0 * dt / h
    drift = 0.0
    gf = g_func if g_code != 0 else None
    for _ in range(n_steps):
        g0, gn = _gvals(gf, z, U[0], U[-1])
        q = flux_inner(U, h, lam, g0, gn)
        r = explicit_apply(U, h, lam, ex)
        r[0] += bscale * g0
        r[-1] += bscale * gn
        v = solver.solve(r)
        f = math.exp(-dt * q)
        v *= f
        w = z * f
        tot = h * (np.dot(v, v) - 0.5 * (v[0] * v[0] + v[-1] * v[-1])) + w * w
        if not math.isfinite(tot):
            raise FloatingPointError("numerical overflow in hemisphere flow")
        drift = max(drift, abs(tot - 1.0))
        s = 1.0 / math.sqrt(tot)
        U[:] = v * s
        z = w * s
    return z, drift
