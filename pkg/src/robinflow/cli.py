"""Command-line interface: ``robinflow <subcommand> [options]``."""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from typing import Iterable, Optional, Sequence

import numpy as np

from . import __version__
from .errors import RobinFlowError
from .grid import Grid
from .nonlinearity import BUILTIN_NAMES, builtin

SUBCOMMANDS = ("steklov", "spectrum", "branch", "simulate", "compactify", "attractor", "selftest")


def fmt(x) -> str:
    """Ten significant digits; integers and strings pass through."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".10g")
    return "" if x is None else str(x)


def _finite(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be finite: {text!r}")
    return v


def _positive(text: str) -> float:
    v = _finite(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _grid_size(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 32:
        raise argparse.ArgumentTypeError(f"grid must have N >= 32, got {n}")
    return n


def _count(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


class Output:
    """Collects a metadata line, a table and trailing comments; renders CSV or JSON."""

    def __init__(self, command: str, config: dict):
        self.command = command
        self.config = config
        self.comments: list[str] = []
        self.columns: list[str] = []
        self.rows: list[Sequence] = []
        self.extra: dict = {}
        self.trailer: list[str] = []

    def table(self, columns: Iterable[str], rows: Iterable[Sequence]):
        self.columns = list(columns)
        self.rows = [tuple(r) for r in rows]

    def render(self, form: str) -> str:
        if form == "json":
            doc = {"command": self.command, "config": self.config, **self.extra}
            if self.columns:
                doc["columns"] = self.columns
                doc["rows"] = [[_jsonable(v) for v in r] for r in self.rows]
            return json.dumps(doc, indent=2) + "\n"
        buf = io.StringIO()
        buf.write("# " + json.dumps({"command": self.command, **self.config}, sort_keys=True) + "\n")
        for c in self.comments:
            buf.write(f"# {c}\n")
        if self.columns:
            buf.write(",".join(self.columns) + "\n")
            for r in self.rows:
                buf.write(",".join(fmt(v) for v in r) + "\n")
        for c in self.trailer:
            buf.write(f"# {c}\n")
        return buf.getvalue()


def _jsonable(v):
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def _config(args) -> dict:
    skip = {"func", "out", "format"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# subcommands ---------------------------------------------------------------

def cmd_steklov(args, out: Output):
    from .steklov import SIGMA1, SIGMA2, steklov_eigenpairs

    grid = Grid(args.grid)
    p1, p2 = steklov_eigenpairs(grid, args.norm)
    out.comments.append(f"sigma1={SIGMA1:.10f}, sigma2={SIGMA2:.10f}")
    out.extra.update(sigma1=SIGMA1, sigma2=SIGMA2)
    out.table(("x", "phi1", "phi2"), zip(grid.x, p1.profile, p2.profile))


def _spectrum_for(args):
    from .equilibria import EquilibriumBranch, amplitudes_at_lambda
    from .spectrum import linearized_spectrum_at, solve_spectrum, spectrum_at_infinity

    grid = Grid(args.grid)
    if args.gamma is not None:
        return solve_spectrum(args.gamma, args.n_eigs, grid)
    lam, at = args.lam, args.at
    if at == "infinity":
        return spectrum_at_infinity(lam, args.n_eigs, grid)
    g = builtin(args.g)
    if at == "zero":
        return linearized_spectrum_at("zero", lam, g, args.n_eigs, grid)
    bid = 1 if at == "branch1" else 2
    br = EquilibriumBranch(bid, g)
    amps = [c for c in amplitudes_at_lambda(br, lam) if c > 0]
    if not amps:
        raise RobinFlowError(f"no branch-{bid} equilibrium at λ={lam!r} for g={g.name}")
    k = br.scale_factor * amps[0]
    return linearized_spectrum_at(np.array([br.parity * k, k]), lam, g, args.n_eigs, grid)


def cmd_spectrum(args, out: Output):
    spec = _spectrum_for(args)
    out.comments.append(f"gamma={spec.gamma:.10g}")
    out.extra["gamma"] = spec.gamma
    out.table(("index", "mu"), ((i + 1, mu) for i, mu in enumerate(spec.eigenvalues)))
    if args.emit_eigenfunctions:
        ef = Output("spectrum-eigenfunctions", out.config)
        cols = ["x"] + [f"phi{i + 1}" for i in range(spec.n_max)]
        ef.table(cols, zip(spec.grid.x, *spec.eigenfunctions))
        _write(ef.render("csv"), args.emit_eigenfunctions)


def cmd_branch(args, out: Output):
    from .equilibria import bifurcation_diagram

    if not 0 < args.c_min < args.c_max:
        raise RobinFlowError("need 0 < --c-min < --c-max")
    pts = bifurcation_diagram(builtin(args.g), (args.branch,), c_range=(args.c_min, args.c_max),
                              steps=args.steps, grid=Grid(args.grid))
    out.table(("lambda", "branch", "amplitude", "stability", "morse_index"), (p.csv_row() for p in pts))


def cmd_simulate(args, out: Output):
    from .pde import initial_field, simulate

    g, grid = builtin(args.g), Grid(args.grid)
    u0 = initial_field(args.ic, args.lam, g, grid)
    rec = simulate(u0, args.lam, g, grid, args.t_end, dt=args.dt, n_modes=args.n_modes,
                   threshold=args.threshold, sample_interval=args.sample_interval, theta=args.theta)
    cols = ["t", "l2_norm", "energy"] + [f"u{i + 1}" for i in range(rec.n_modes)]
    out.table(cols, (row for row in zip(rec.times, rec.l2_norms, rec.energies, *rec.modal.T)))
    events = [e.as_dict() for e in rec.events]
    out.extra["events"] = events
    out.trailer.append("events: " + json.dumps(events, sort_keys=True))


def cmd_compactify(args, out: Output):
    from .compactification import HemispherePoint, hemisphere_simulate, normalize, project
    from .pde import initial_field

    g, grid = builtin(args.g), Grid(args.grid)
    u0 = initial_field(args.ic, args.lam, g, grid)
    if args.at_infinity:
        if grid.norm(u0) == 0.0:
            raise RobinFlowError("--at-infinity needs a nonzero initial field")
        p0 = HemispherePoint(normalize(u0, grid), 0.0)
    else:
        p0 = project(u0, grid)
    tr = hemisphere_simulate(p0, args.lam, g, grid, args.t_end, dt=args.dt,
                             sample_interval=args.sample_interval, theta=args.theta)
    cols = ["t", "z"] + [f"U{i + 1}" for i in range(tr.modal.shape[1])] + ["dist_phi1", "dist_phi2"]
    out.table(cols, zip(tr.times, tr.z, *tr.modal.T, tr.dist_phi1, tr.dist_phi2))
    out.extra["max_drift"] = tr.max_drift
    out.trailer.append(f"max_drift={tr.max_drift:.3e}")


def cmd_attractor(args, out: Output):
    from .attractor import build_attractor

    graph = build_attractor(args.lam, builtin(args.g), Grid(args.grid), verify=args.verify, dt=args.dt)
    out.extra.update(graph.as_dict())


def cmd_selftest(args, out: Output):
    from . import selftest

    results = selftest.run(args.seed)
    out.extra["checks"] = [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results]
    out.extra["_table"] = selftest.format_table(results)
    out.extra["_ok"] = all(r.passed for r in results)


# parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=_grid_size, default=200, metavar="N", help="grid cells (default 200)")
    common.add_argument("--dt", type=_positive, default=1e-3, help="time step (default 1e-3)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=None, help="output format")

    p = argparse.ArgumentParser(prog="robinflow", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="{" + ",".join(SUBCOMMANDS) + "}")

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    gname = dict(choices=BUILTIN_NAMES, default="arctan", help="boundary nonlinearity")

    sp = add("steklov", cmd_steklov, "Steklov eigenpairs")
    sp.add_argument("--n", dest="grid", type=_grid_size, help="alias for --grid")
    sp.add_argument("--norm", choices=("sup", "l2"), default="sup")

    sp = add("spectrum", cmd_spectrum, "Robin eigenvalues")
    which = sp.add_mutually_exclusive_group(required=True)
    which.add_argument("--gamma", type=_finite)
    which.add_argument("--lambda", dest="lam", type=_finite)
    sp.add_argument("--at", choices=("zero", "infinity", "branch1", "branch2"), default="infinity")
    sp.add_argument("--n-eigs", type=_count, default=6)
    sp.add_argument("--g", **gname)
    sp.add_argument("--emit-eigenfunctions", metavar="PATH", default=None,
                    help="also write x,phi1,...,phik to PATH ('-' for stdout)")

    sp = add("branch", cmd_branch, "bifurcation-from-infinity branch table")
    sp.add_argument("--g", **gname)
    sp.add_argument("--branch", type=int, choices=(1, 2), default=1)
    sp.add_argument("--c-min", type=_positive, default=1e-3)
    sp.add_argument("--c-max", type=_positive, default=1e3)
    sp.add_argument("--steps", type=_count, default=200)

    for name, func, help_ in (("simulate", cmd_simulate, "integrate the PDE"),
                              ("compactify", cmd_compactify, "integrate the flow on the Poincare hemisphere")):
        sp = add(name, func, help_)
        sp.add_argument("--lambda", dest="lam", type=_finite, required=True)
        sp.add_argument("--g", **gname)
        sp.add_argument("--ic", default="zero", help="zero | eigmode:n:amp | branch:i:c | file:PATH")
        sp.add_argument("--t-end", type=_positive, default=10.0)
        sp.add_argument("--theta", type=_finite, default=1.0, help="1 backward Euler, 0.5 Crank-Nicolson")
        sp.add_argument("--sample-interval", type=_positive, default=0.1)
        if name == "simulate":
            sp.add_argument("--threshold", type=_positive, default=1e4)
            sp.add_argument("--n-modes", type=_count, default=6)
        else:
            sp.add_argument("--at-infinity", action="store_true")

    sp = add("attractor", cmd_attractor, "compactified attractor graph (JSON)")
    sp.add_argument("--lambda", dest="lam", type=_finite, required=True)
    sp.add_argument("--g", **gname)
    sp.add_argument("--verify", action="store_true")

    add("selftest", cmd_selftest, "run the oracle checks")
    return p


def _write(text: str, path: Optional[str]):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    out = Output(args.command, _config(args))
    try:
        args.func(args, out)
    except (RobinFlowError, ValueError, FloatingPointError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.command == "selftest":
        table = out.extra.pop("_table")
        ok = out.extra.pop("_ok")
        text = out.render("json") if args.format == "json" else table + "\n"
        _write(text, args.out)
        return 0 if ok else 1
    form = args.format or ("json" if args.command == "attractor" else "csv")
    if args.command == "attractor" and form == "csv":
        form = "json"  # graphs have no tabular form
    text = out.render(form) if args.command != "attractor" else json.dumps(out.extra, indent=2) + "\n"
    _write(text, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
