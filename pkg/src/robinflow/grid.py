"""Uniform grid on [0, 1] with trapezoid quadrature and mirror folding."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Nodes x_i = i/N, i = 0..N."""

    n_cells: int

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise ValueError(f"n_cells must be a positive integer, got {self.n_cells!r}")
        object.__setattr__(self, "n_cells", int(self.n_cells))

    @property
    def h(self) -> float:
        return 1.0 / self.n_cells

    @property
    def n_nodes(self) -> int:
        return self.n_cells + 1

    @cached_property
    def x(self) -> np.ndarray:
        return np.arange(self.n_nodes) * self.h

    @cached_property
    def centered(self) -> np.ndarray:
        """x - 1/2, computed so that centered[N - i] == -centered[i] exactly."""
        return (np.arange(self.n_nodes) - self.n_cells / 2) * self.h

    @cached_property
    def weights(self) -> np.ndarray:
        w = np.full(self.n_nodes, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    @property
    def half(self) -> int:
        """Index of the last node in the left half (inclusive of the midpoint)."""
        return self.n_cells // 2

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        return float(np.dot(self.weights, u * v))

    def norm(self, u: np.ndarray) -> float:
        return float(np.sqrt(self.inner(u, u)))

    def mirror(self, left: np.ndarray, parity: int) -> np.ndarray:
        """Extend values on nodes 0..half to the full grid with u(1-x) = parity*u(x)."""
        n = self.n_cells
        out = np.empty(self.n_nodes)
        out[: self.half + 1] = left
        out[n - np.arange(self.half + 1)] = parity * np.asarray(left)
        if n % 2 == 0 and parity < 0:
            out[self.half] = 0.0
        elif n % 2 == 0:
            out[self.half] = left[self.half]
        return out

    def fold_inner(self, u: np.ndarray, phi: np.ndarray, parity: int) -> float:
        """Trapezoid inner product <u, phi> for phi of known parity.

        Pairs (i, N-i) are combined first, so the opposite-parity part of u
        contributes exactly zero.
        """
        n = self.n_cells
        k = (n - 1) // 2
        i = np.arange(k + 1)
        paired = (u[i] + parity * u[n - i]) * phi[i]
        total = float(np.dot(self.weights[i], paired))
        if n % 2 == 0:
            total += self.weights[self.half] * u[self.half] * phi[self.half]
        return total

    def check_field(self, u, name: str = "u") -> np.ndarray:
        arr = np.asarray(u, dtype=float)
        if arr.shape != (self.n_nodes,):
            raise ValueError(f"{name} must have {self.n_nodes} values, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"{name} contains non-finite values")
        return arr
