"""Independent reference computations used by the self-test and the test suite.

These deliberately use the classical (squared / tangent) forms of the
eigenvalue relations and brute-force scanning, sharing no code with the
production solvers.
"""
from __future__ import annotations

import math

import numpy as np


def _scan_roots(f, s_lo: float, s_hi: float, step: float, poles=(), pole_width: float = 1e-3):
    s = np.arange(s_lo + step, s_hi, step)
    keep = np.ones_like(s, dtype=bool)
    for p in poles:
        keep &= np.abs(s - p) > pole_width
    s = s[keep]
    with np.errstate(all="ignore"):
        v = f(s)
    roots = []
    idx = np.nonzero((np.sign(v[:-1]) * np.sign(v[1:]) < 0) & (np.diff(s) < 1.5 * step))[0]
    for i in idx:
        a, b = s[i], s[i + 1]
        fa = f(np.array(a))
        for _ in range(80):
            m = 0.5 * (a + b)
            fm = f(np.array(m))
            if np.sign(fm) == np.sign(fa):
                a, fa = m, fm
            else:
                b = m
        roots.append(0.5 * (a + b))
    return roots


def scan_spectrum(gamma: float, s_max: float = 40.0, step: float = 1e-4) -> np.ndarray:
    """All eigenvalues with |1 + mu| < s_max^2 found by sign-change scanning, decreasing.

    mu > -1: roots of e^s (s - gamma) - (s + gamma) and e^s (s - gamma) + (s + gamma).
    mu < -1: roots of tan s - 2 gamma s / (gamma^2 - s^2), away from both pole sets.
    """
    mus = []
    for sign in (1.0, -1.0):
        def f(s, sign=sign):
            return np.exp(-s) * (s + gamma) * sign - (s - gamma)
        for s in _scan_roots(f, 0.0, s_max, step):
            if s > 1e-6:
                mus.append(s * s - 1.0)
    poles = [(2 * k + 1) * math.pi / 2 for k in range(int(s_max / math.pi) + 2)] + [abs(gamma)]

    def ftan(s):
        return np.tan(s) - 2.0 * gamma * s / (gamma * gamma - s * s)
    for s in _scan_roots(ftan, 0.0, s_max, step, poles=poles):
        # a sign change across a pole that survived the exclusion is not a root
        if abs(ftan(np.array(s))) < 1e-6 * (1 + abs(np.tan(s))):
            mus.append(-1.0 - s * s)
    return np.array(sorted(mus, reverse=True))


def trapezoid_energy_reference(u: np.ndarray, lam: float, G, h: float) -> float:
    """Lyapunov energy by an independent loop-based evaluation."""
    grad = 0.0
    mass = 0.0
    n = len(u) - 1
    for i in range(n):
        grad += ((u[i + 1] - u[i]) / h) ** 2 * h
        mass += 0.5 * (u[i] ** 2 + u[i + 1] ** 2) * h
    bnd = sum(lam * v * v / 2.0 + G(v) for v in (u[0], u[-1]))
    return 0.5 * (grad + mass) - bnd
