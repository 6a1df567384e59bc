"""Regime classification and compactified attractor graphs with simulation evidence."""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .compactification import hemisphere_simulate, infinity_flow_simulate, normalize, project
from .equilibria import EquilibriumBranch, amplitudes_at_lambda, equilibrium_profile
from .errors import NonHyperbolic, TransientNotObserved
from .grid import Grid
from .nonlinearity import BoundaryNonlinearity
from .pde import DEFAULT_DT, DEFAULT_THRESHOLD, simulate
from .spectrum import (RobinSpectrum, linearized_spectrum_at, morse_index,
                       spectrum_at_infinity)
from .steklov import SIGMA1, SIGMA2

REGIME_TOL = 1e-10
EDGE_TOL = 1e-2
EPSILON = 1e-2


def thread_count() -> int:
    env = os.environ.get("STEKLOV_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"STEKLOV_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def critical_values(g: BoundaryNonlinearity) -> tuple[float, float, float, float]:
    """(sigma*_1, sigma_1, sigma*_2, sigma_2) with sigma*_i = sigma_i - g'(0)."""
    d = g.deriv_at_zero
    return SIGMA1 - d, SIGMA1, SIGMA2 - d, SIGMA2


def classify_regime(lam: float, g: BoundaryNonlinearity) -> str:
    crit = critical_values(g)
    if not all(a < b for a, b in zip(crit, crit[1:])):
        raise ValueError("regime table needs sigma*_1 < sigma_1 < sigma*_2 < sigma_2 "
                         f"(0 < g'(0) < sigma_2 - sigma_1); got g'(0)={g.deriv_at_zero!r}")
    for c in crit:
        if abs(lam - c) <= REGIME_TOL:
            raise NonHyperbolic(f"non-hyperbolic parameter: λ={lam!r} is a bifurcation value {c!r}")
    return f"R{1 + sum(lam > c for c in crit)}"


@dataclass
class Node:
    id: str
    kind: str                      # "bounded" or "infinity"
    label: str
    morse_index: Optional[int]
    profile: str                   # how to rebuild the state, e.g. "branch:1:0.70095"

    def as_dict(self) -> dict:
        return {"id": self.id, "kind": self.kind, "label": self.label, "morse_index": self.morse_index}


@dataclass
class Edge:
    source: str
    target: str
    kind: str                      # "bounded", "blowup" or "at_infinity"
    evidence: object = "asserted"  # {"final_distance", "sim_time"} or "asserted"
    status: str = "asserted"       # "asserted", "verified" or "unverified"

    def as_dict(self) -> dict:
        return {"source": self.source, "target": self.target, "kind": self.kind,
                "evidence": self.evidence, "status": self.status}


@dataclass
class AttractorGraph:
    lam: float
    regime: str
    nodes: list[Node]
    edges: list[Edge]
    g_name: str = ""

    def node(self, node_id: str) -> Node:
        return next(n for n in self.nodes if n.id == node_id)

    def as_dict(self) -> dict:
        return {"lambda": self.lam, "regime": self.regime,
                "nodes": [n.as_dict() for n in self.nodes],
                "edges": [e.as_dict() for e in self.edges]}

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.as_dict(), indent=indent)

    def count(self, kind: Optional[str] = None) -> int:
        return sum(1 for e in self.edges if kind is None or e.kind == kind)


def _signed(prefix: str, sign: int) -> str:
    return f"{'+' if sign > 0 else '-'}{prefix}"


def _morse_at(u_end, lam, g, grid) -> int:
    return morse_index(linearized_spectrum_at(u_end, lam, g, 4, grid))


@dataclass
class _Context:
    lam: float
    g: BoundaryNonlinearity
    grid: Grid
    dt: float
    amplitude: dict = field(default_factory=dict)   # branch id -> positive amplitude

    def state(self, node_id: str) -> np.ndarray:
        if node_id == "0":
            return np.zeros(self.grid.n_nodes)
        sign = 1 if node_id[0] == "+" else -1
        bid = int(node_id[-1])
        if node_id[1] == "u":
            return sign * equilibrium_profile(EquilibriumBranch(bid, self.g), self.amplitude[bid], self.grid)
        return sign * spectrum_at_infinity(self.lam, 2, self.grid).phi(bid)

    def unstable_direction(self, node_id: str, parity: int) -> np.ndarray:
        """Unstable eigenfunction of the linearization at a bounded node with the given parity."""
        u = self.state(node_id)
        spec = linearized_spectrum_at(u[[0, -1]] if node_id != "0" else "zero", self.lam, self.g, 4, self.grid)
        for m, phi in zip(spec.modes, spec.eigenfunctions):
            if m.mu > 0 and m.parity == parity:
                return phi
        raise ValueError(f"no unstable direction of parity {parity:+d} at {node_id}")


def _build_nodes(regime: str, ctx: _Context) -> list[Node]:
    lam, g, grid = ctx.lam, ctx.g, ctx.grid
    nodes = [Node("0", "bounded", "0", _morse_at("zero", lam, g, grid), "zero")]
    for bid, present in ((1, regime == "R2"), (2, regime == "R4")):
        if not present:
            continue
        br = EquilibriumBranch(bid, g)
        amps = [c for c in amplitudes_at_lambda(br, lam) if c > 0]
        if not amps:
            raise ValueError(f"no branch-{bid} equilibrium found at λ={lam!r}")
        c = amps[0]
        ctx.amplitude[bid] = c
        k = br.scale_factor * c
        m = _morse_at(np.array([br.parity * k, k]), lam, g, grid)
        for s in (1, -1):
            nodes.append(Node(_signed(f"u{bid}", s), "bounded", _signed(f"u{bid}", s), m,
                              f"branch:{bid}:{s * c!r}"))
    modes = {"R3": (1,), "R4": (1,), "R5": (1, 2)}.get(regime, ())
    for n in modes:
        for s in (1, -1):
            nodes.append(Node(_signed(f"phi{n}", s), "infinity", _signed(f"phi{n}", s), None,
                              f"eigmode:{n}:{s}"))
    return nodes


def _build_edges(regime: str) -> list[Edge]:
    e: list[Edge] = []
    if regime == "R2":
        e += [Edge("0", "+u1", "bounded"), Edge("0", "-u1", "bounded")]
    elif regime == "R3":
        e += [Edge("0", "+phi1", "blowup"), Edge("0", "-phi1", "blowup")]
    elif regime == "R4":
        e += [Edge("0", "+u2", "bounded"), Edge("0", "-u2", "bounded"),
              Edge("0", "+phi1", "blowup"), Edge("0", "-phi1", "blowup")]
        for src in ("+u2", "-u2"):
            e += [Edge(src, "+phi1", "blowup"), Edge(src, "-phi1", "blowup")]
    elif regime == "R5":
        e += [Edge("0", t, "blowup") for t in ("+phi1", "-phi1", "+phi2", "-phi2")]
        e += [Edge(s, t, "at_infinity") for s in ("+phi2", "-phi2") for t in ("+phi1", "-phi1")]
    return e


def _verify(edge: Edge, ctx: _Context, eps: float, tol: float) -> Edge:
    lam, g, grid, dt = ctx.lam, ctx.g, ctx.grid, ctx.dt
    target = ctx.state(edge.target)
    if edge.kind == "at_infinity":
        tgt_n = int(edge.target[-1])
        iota = 1 if edge.target[0] == "+" else -1
        U0 = normalize(ctx.state(edge.source) + eps * target, grid)
        tr = infinity_flow_simulate(U0, lam, grid, 200.0, dt, stop_distance=(tgt_n, tol / 100))
        dist = grid.norm(tr.U_final - iota * spectrum_at_infinity(lam, 2, grid).phi(tgt_n))
        t_end = float(tr.times[-1])
    else:
        parity = 1 if edge.target[-1] == "1" else -1
        v = ctx.unstable_direction(edge.source, parity)
        sign = 1.0 if grid.inner(v, target) >= 0 else -1.0
        u0 = ctx.state(edge.source) + sign * eps * v
        if edge.kind == "bounded":
            rec = simulate(u0, lam, g, grid, 400.0, dt, n_modes=2, steady_tol=1e-9, threshold=DEFAULT_THRESHOLD)
            dist = grid.norm(rec.u_final - target)
        else:
            rec = simulate(u0, lam, g, grid, 400.0, dt, n_modes=2, threshold=DEFAULT_THRESHOLD)
            u = rec.u_final
            dist = grid.norm(u / grid.norm(u) - target) if rec.blew_up else math.inf
        t_end = float(rec.times[-1])
    ok = dist < tol
    return Edge(edge.source, edge.target, edge.kind,
                {"final_distance": float(dist), "sim_time": t_end},
                "verified" if ok else "unverified")


def build_attractor(lam: float, g: BoundaryNonlinearity, grid: Optional[Grid] = None,
                    verify: bool = False, *, dt: float = DEFAULT_DT, epsilon: float = EPSILON,
                    tol: float = EDGE_TOL, threads: Optional[int] = None) -> AttractorGraph:
    """Nodes and heteroclinic edges of the compactified attractor at ``lam``.

    With ``verify`` every edge is simulated from source + epsilon * (unstable
    eigenfunction) and annotated with the final distance to its target.
    """
    regime = classify_regime(lam, g)
    grid = grid or Grid(200)
    ctx = _Context(lam, g, grid, dt)
    nodes = _build_nodes(regime, ctx)
    edges = _build_edges(regime)
    if verify and edges:
        workers = max(1, min(threads or thread_count(), len(edges)))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            edges = list(pool.map(lambda e: _verify(e, ctx, epsilon, tol), edges))
    return AttractorGraph(lam, regime, nodes, edges, g.name)


@dataclass(frozen=True)
class ShadowingReport:
    lam: float
    epsilon: float
    t_near2: float
    t_switch: Optional[float]
    min_distance_phi2: float
    t_end: float


def shadowing_experiment(lam: float, epsilon: float, g: BoundaryNonlinearity,
                         grid: Optional[Grid] = None, t_end: float = 20.0, dt: float = DEFAULT_DT,
                         sample_interval: float = 0.01, radius: float = 0.1) -> ShadowingReport:
    """Follow u0 = 0.01 (epsilon phi_1 + phi_2) on the hemisphere.

    t_near2 is the first time the rescaled state U/||U|| is within ``radius``
    of phi_2, t_switch the first later time it is within ``radius`` of
    sign(epsilon) phi_1 (None if it never gets there before t_end).
    """
    if classify_regime(lam, g) != "R5":
        raise ValueError("shadowing experiment needs λ > sigma_2")
    grid = grid or Grid(200)
    spec = spectrum_at_infinity(lam, 2, grid)
    phi1, phi2 = spec.phi(1), spec.phi(2)
    u0 = 0.01 * (epsilon * phi1 + phi2)
    tr = hemisphere_simulate(project(u0, grid), lam, g, grid, t_end, dt,
                             sample_interval=sample_interval, n_modes=2, keep_snapshots=True)
    iota = 1.0 if epsilon >= 0 else -1.0
    d2 = np.array([grid.norm(U / grid.norm(U) - phi2) for U in tr.snapshots])
    d1 = np.array([grid.norm(U / grid.norm(U) - iota * phi1) for U in tr.snapshots])
    near = np.nonzero(d2 < radius)[0]
    if near.size == 0:
        raise TransientNotObserved(
            f"transient not observed: rescaled distance to phi_2 never below {radius} "
            f"(min {d2.min():.3g})")
    i2 = near[0]
    later = np.nonzero(d1[i2:] < radius)[0]
    t_switch = float(tr.times[i2 + later[0]]) if later.size else None
    return ShadowingReport(lam, epsilon, float(tr.times[i2]), t_switch, float(d2.min()), float(tr.times[-1]))
