"""Closed-form Steklov pairs for 0 = Phi'' - Phi, -Phi'(0) = s Phi(0), Phi'(1) = s Phi(1)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .grid import Grid

Normalization = Literal["sup", "l2"]

SIGMA1 = math.tanh(0.5)          # (e - 1)/(e + 1)
SIGMA2 = 1.0 / math.tanh(0.5)    # (e + 1)/(e - 1)
SIGMAS = (SIGMA1, SIGMA2)


@dataclass(frozen=True)
class SteklovPair:
    sigma: float
    profile: np.ndarray
    normalization: str
    index: int


def _l2_scale(index: int) -> float:
    # int_{-1/2}^{1/2} cosh^2 t dt = (1 + sinh 1)/2, sinh^2 gives (sinh 1 - 1)/2
    return math.sqrt(0.5 * (math.sinh(1.0) + (1.0 if index == 1 else -1.0)))


def steklov_profile(index: int, x, normalization: Normalization = "sup"):
    """Evaluate Phi_index at points x.

    Phi_1 is proportional to e^x + e^(1-x) = 2 e^(1/2) cosh(x - 1/2) and
    Phi_2 to e^x - e^(1-x) = 2 e^(1/2) sinh(x - 1/2); the centred form keeps
    the reflection symmetry exact.
    """
    t = np.asarray(x, dtype=float) - 0.5
    return _profile_centered(index, t, normalization)


def _profile_centered(index: int, t, normalization: Normalization):
    if index not in (1, 2):
        raise ValueError(f"Steklov index must be 1 or 2, got {index!r}")
    if normalization == "sup":
        scale = math.cosh(0.5) if index == 1 else math.sinh(0.5)
    elif normalization == "l2":
        scale = _l2_scale(index)
    else:
        raise ValueError(f"normalization must be 'sup' or 'l2', got {normalization!r}")
    f = np.cosh if index == 1 else np.sinh
    return f(t) / scale


def steklov_eigenpairs(grid: Grid, normalization: Normalization = "sup") -> tuple[SteklovPair, SteklovPair]:
    pairs = []
    for index, sigma in ((1, SIGMA1), (2, SIGMA2)):
        left = _profile_centered(index, grid.centered[: grid.half + 1], normalization)
        profile = grid.mirror(left, 1 if index == 1 else -1)
        pairs.append(SteklovPair(sigma, profile, normalization, index))
    return pairs[0], pairs[1]


def steklov_residual(pair: SteklovPair, grid: Grid) -> tuple[float, float]:
    """(max interior |Phi'' - Phi|, max boundary-condition defect), both second order."""
    p = np.asarray(pair.profile, dtype=float)
    h = grid.h
    interior = (p[:-2] - 2.0 * p[1:-1] + p[2:]) / h**2 - p[1:-1]
    dx0 = (-3.0 * p[0] + 4.0 * p[1] - p[2]) / (2.0 * h)
    dx1 = (3.0 * p[-1] - 4.0 * p[-2] + p[-3]) / (2.0 * h)
    bc = max(abs(-dx0 - pair.sigma * p[0]), abs(dx1 - pair.sigma * p[-1]))
    return float(np.max(np.abs(interior))) if interior.size else 0.0, float(bc)
