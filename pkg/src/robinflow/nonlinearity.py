"""Boundary nonlinearities g and checks of the standing hypotheses."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from .errors import UnknownNonlinearity

ScalarFn = Callable[[float], float]


@dataclass(frozen=True)
class BoundaryNonlinearity:
    """A boundary nonlinearity g together with g', sup|g| and declared hypotheses.

    ``bound`` is ``math.inf`` for unbounded g. The hypothesis flags are
    declared by the caller and checked by :func:`validate_hypotheses`, never
    inferred. ``kernel_code`` lets the compiled stepping kernels evaluate the
    builtins without calling back into Python (-1 means "call eval").
    """

    name: str
    eval: ScalarFn
    deriv: ScalarFn
    bound: float
    odd: bool
    monotone: bool
    bounded: bool
    lipschitz: bool
    deriv_at_zero: float
    antiderivative: Optional[ScalarFn] = field(default=None, repr=False)
    lipschitz_constant: Optional[float] = None
    kernel_code: int = -1

    @property
    def flags(self) -> dict[str, bool]:
        return {"odd": self.odd, "monotone": self.monotone,
                "bounded": self.bounded, "lipschitz": self.lipschitz}

    def __call__(self, u):
        return self.eval(u)

    def primitive(self, u: float) -> float:
        """G(u) = integral of g from 0 to u."""
        if self.antiderivative is not None:
            return float(self.antiderivative(u))
        if u == 0.0:
            return 0.0
        val, _ = quad(lambda s: float(self.eval(s)), 0.0, u, limit=200)
        return val


def _arctan_primitive(u):
    return u * np.arctan(u) - 0.5 * np.log1p(u * u)


def _sqrt_sin(u):
    return np.sqrt(np.abs(u)) * np.sin(u)


def _sqrt_sin_deriv(u):
    u = np.asarray(u, dtype=float)
    a = np.abs(u)
    safe = np.where(a > 0, a, 1.0)
    d = np.sign(u) * np.sin(u) / (2.0 * np.sqrt(safe)) + np.sqrt(a) * np.cos(u)
    d = np.where(a > 0, d, 0.0)
    return d[()] if d.ndim == 0 else d


def _sq_sin_inv(u):
    u = np.asarray(u, dtype=float)
    safe = np.where(u != 0, u, 1.0)
    v = np.where(u != 0, u * u * np.sin(1.0 / safe), 0.0)
    return v[()] if v.ndim == 0 else v


def _sq_sin_inv_deriv(u):
    u = np.asarray(u, dtype=float)
    safe = np.where(u != 0, u, 1.0)
    d = np.where(u != 0, 2.0 * u * np.sin(1.0 / safe) - np.cos(1.0 / safe), 0.0)
    return d[()] if d.ndim == 0 else d


def _builtins() -> dict[str, BoundaryNonlinearity]:
    return {
        "arctan": BoundaryNonlinearity(
            "arctan", np.arctan, lambda u: 1.0 / (1.0 + np.square(u)),
            bound=math.pi / 2, odd=True, monotone=True, bounded=True, lipschitz=True,
            deriv_at_zero=1.0, antiderivative=_arctan_primitive,
            lipschitz_constant=1.0, kernel_code=1),
        "neg_arctan": BoundaryNonlinearity(
            "neg_arctan", lambda u: -np.arctan(u), lambda u: -1.0 / (1.0 + np.square(u)),
            bound=math.pi / 2, odd=True, monotone=False, bounded=True, lipschitz=True,
            deriv_at_zero=-1.0, antiderivative=lambda u: -_arctan_primitive(u),
            lipschitz_constant=1.0, kernel_code=2),
        "sqrt_sin": BoundaryNonlinearity(
            "sqrt_sin", _sqrt_sin, _sqrt_sin_deriv,
            bound=math.inf, odd=True, monotone=False, bounded=False, lipschitz=False,
            deriv_at_zero=0.0, kernel_code=3),
        "sq_sin_inv": BoundaryNonlinearity(
            "sq_sin_inv", _sq_sin_inv, _sq_sin_inv_deriv,
            bound=math.inf, odd=True, monotone=False, bounded=False, lipschitz=True,
            deriv_at_zero=0.0, kernel_code=4),
    }


BUILTIN_NAMES = tuple(_builtins())

ZERO = BoundaryNonlinearity(
    "zero", lambda u: 0.0 * np.asarray(u, dtype=float), lambda u: 0.0 * np.asarray(u, dtype=float),
    bound=0.0, odd=True, monotone=True, bounded=True, lipschitz=True, deriv_at_zero=0.0,
    antiderivative=lambda u: 0.0, lipschitz_constant=0.0, kernel_code=0)


def builtin(name: str) -> BoundaryNonlinearity:
    try:
        return _builtins()[name]
    except KeyError:
        raise UnknownNonlinearity(
            f"unknown nonlinearity: {name!r} (choose from {', '.join(BUILTIN_NAMES)})") from None


def custom(name: str, eval: ScalarFn, deriv: ScalarFn, *, bound: float = math.inf,
           odd: bool = False, monotone: bool = False, lipschitz: bool = False,
           antiderivative: Optional[ScalarFn] = None,
           lipschitz_constant: Optional[float] = None) -> BoundaryNonlinearity:
    """Wrap a user-supplied g; flags are taken as declared."""
    return BoundaryNonlinearity(
        name, eval, deriv, bound=bound, odd=odd, monotone=monotone,
        bounded=math.isfinite(bound), lipschitz=lipschitz,
        deriv_at_zero=float(deriv(0.0)), antiderivative=antiderivative,
        lipschitz_constant=lipschitz_constant)


@dataclass(frozen=True)
class HypothesisReport:
    name: str
    checks: dict[str, bool]
    declared: dict[str, bool]

    @property
    def all_pass(self) -> bool:
        return all(self.checks.values())

    @property
    def declared_failures(self) -> list[str]:
        """Declared flags that the samples contradict."""
        return [k for k, v in self.declared.items() if v and not self.checks[k]]

    def rows(self) -> list[tuple[str, bool]]:
        return list(self.checks.items())


def validate_hypotheses(g: BoundaryNonlinearity, samples: Sequence[float],
                        *, atol: float = 1e-12) -> HypothesisReport:
    """Check odd, monotone, bounded, g(0)=0 and g'(0)=1 over ``samples``."""
    u = np.sort(np.asarray(samples, dtype=float))
    if u.size == 0:
        raise ValueError("samples must be nonempty")
    if not np.allclose(u, -u[::-1], rtol=0.0, atol=1e-12 * max(1.0, np.abs(u).max())):
        raise ValueError("samples must be symmetric about 0")
    gu = np.asarray(g.eval(u), dtype=float)
    g_neg = np.asarray(g.eval(-u), dtype=float)
    bound = g.bound if math.isfinite(g.bound) else math.inf
    checks = {
        "odd": bool(np.all(np.abs(gu + g_neg) <= atol * (1.0 + np.abs(gu)))),
        "monotone": bool(np.all(np.diff(gu) >= -atol)),
        "bounded": bool(math.isfinite(bound) and np.all(np.abs(gu) <= bound + atol)),
        "g(0)=0": abs(float(g.eval(0.0))) <= atol,
        "g'(0)=1": abs(float(g.deriv(0.0)) - 1.0) <= 1e-9,
    }
    lip = g.lipschitz_constant
    if lip is not None and u.size > 1:
        slopes = np.abs(np.diff(gu)) / np.maximum(np.diff(u), 1e-300)
        checks["lipschitz"] = bool(np.all(slopes <= lip + 1e-9))
    declared = dict(g.flags)
    declared["g(0)=0"] = True
    declared["g'(0)=1"] = True
    declared = {k: v for k, v in declared.items() if k in checks}
    return HypothesisReport(g.name, checks, declared)
