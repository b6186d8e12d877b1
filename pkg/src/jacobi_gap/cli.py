"""Command-line front end.

Examples
--------
    jacobi-gap --method series --a -1/2 --b -1/2 --N 1 --degree 50
    jacobi-gap --method compare --a 0 --b 0 --N 2 --output n2.csv

Exit codes: 0 success, 2 bad arguments, 3 solver failure, 4 compare verdict
other than ``agree``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import harness, mc_oracle, ode_solver, series_solver
from .errors import (
    BreakdownWarning,
    DomainError,
    GlueFailure,
    JacobiGapError,
    RecursionStall,
    SingularRhs,
    StepFailure,
)
from .params import SolutionGrid, derive, t_to_phi

__all__ = ["CliRequest", "build_parser", "main", "run"]

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_DISAGREE = 0, 2, 3, 4
METHODS = ("rk", "series", "mc", "compare", "glue")
_VALUE_FLAGS = ("--a", "--b", "--N")


@dataclass
class CliRequest:
    method: str
    a: str
    b: str
    N: str
    degree: int | None = None
    eps: float = 1e-7
    reltol: float = 1e-5
    abstol: float = 1e-6
    t_end: float = 0.01
    samples: int = 100_000
    seed: int = 0
    grid_points: int | None = None
    output: str = "-"
    report: str | None = None
    window: str = "default"
    threshold: float = harness.AGREE_THRESHOLD

    def ode_config(self) -> ode_solver.OdeConfig:
        return ode_solver.OdeConfig(eps=self.eps, t_end=self.t_end, reltol=self.reltol, abstol=self.abstol)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="jacobi-gap",
        description="Lowest-eigenphase distribution of Jacobi ensembles.",
    )
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--a", required=True, help="exponent a > -1, e.g. -1/2 or 0.5")
    p.add_argument("--b", required=True, help="exponent b > -1")
    p.add_argument("--N", required=True, help="number of levels N > 0")
    p.add_argument("--degree", type=int, default=None, help="series terms (default by N)")
    p.add_argument("--eps", type=float, default=1e-7, help="RK start t0 = 1 - eps")
    p.add_argument("--reltol", type=float, default=1e-5)
    p.add_argument("--abstol", type=float, default=1e-6)
    p.add_argument("--t-end", dest="t_end", type=float, default=0.01, help="RK stop abscissa")
    p.add_argument("--samples", type=int, default=100_000, help="accepted Monte Carlo samples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid-points", dest="grid_points", type=int, default=None)
    p.add_argument("--output", default="-", help="CSV path, '-' for stdout")
    p.add_argument("--report", default=None, help="report path (compare/glue)")
    p.add_argument("--window", default="default", help="compare window: default, tail or u,v")
    p.add_argument("--threshold", type=float, default=harness.AGREE_THRESHOLD)
    return p


def _join_negative_values(argv):
    # argparse takes "-1/2" for an option; bind it to its flag explicitly
    out, i = [], 0
    while i < len(argv):
        if argv[i] in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def _window(text: str):
    if text in ("default", "tail"):
        return text
    u, v = (float(x) for x in text.split(","))
    return (u, v)


def _series_grid(params, req, series=None):
    # only rows where the expansion about t = 0 is trusted; glue covers the rest
    sol = series or series_solver.solve(params, req.degree)
    n = req.grid_points or max(int(400 * params.N_f) + 1, 2000)
    lo = t_to_phi(series_solver.SERIES_TRUST_T)
    phis = lo + (math.pi - lo) * np.linspace(0.0, 1.0, n + 1)[:-1]
    return series_solver.density_grid(sol, phis)


def _rk_grid(params, req):
    cfg = req.ode_config()
    sol = ode_solver.solve(params, cfg)
    phis = None
    if req.grid_points:
        phis = np.linspace(t_to_phi(sol.t_start), t_to_phi(sol.t_stop), req.grid_points)
    return ode_solver.to_grid(sol, phis)


def _mc_grid(params, req):
    cfg = mc_oracle.McConfig(samples=req.samples, seed=req.seed)
    res = mc_oracle.sample_levels(params, cfg)
    n = req.grid_points or 200
    edges = np.linspace(0.0, math.pi, n + 1)
    first = np.min(res.levels, axis=1)
    counts, _ = np.histogram(first, bins=edges)
    centers = 0.5 * (edges[1:] + edges[:-1])
    nu = counts / (len(first) * np.diff(edges))
    E = 1.0 - mc_oracle.empirical_first_cdf(params, cfg, centers, levels=res.levels)
    meta = {"samples": req.samples, "seed": req.seed, "generator": mc_oracle.BIT_GENERATOR}
    return SolutionGrid.from_phi(centers, E, nu, "mc", params, meta)


def _write(text: str, path: str | None, fallback=None):
    if path is None or path == "-":
        (fallback or sys.stdout).write(text)
    else:
        Path(path).write_text(text)


def _report_path(req):
    if req.report:
        return req.report
    if req.output and req.output != "-":
        return str(Path(req.output).with_suffix(".report.json"))
    return None


def run(req: CliRequest) -> int:
    """Execute one request; returns the process exit code."""
    params = derive(req.a, req.b, req.N)
    report = None
    code = EXIT_OK
    if req.method == "series":
        grid = _series_grid(params, req)
    elif req.method == "rk":
        grid = _rk_grid(params, req)
    elif req.method == "mc":
        grid = _mc_grid(params, req)
    elif req.method == "compare":
        series = series_solver.solve(params, req.degree)
        rep = harness.compare(params, req.ode_config(), series=series, window=_window(req.window), threshold=req.threshold)
        if rep.verdict == "rk-failed":
            print(f"RK failed: {rep.rk_message}", file=sys.stderr)
        phis = np.asarray(rep.theta if rep.theta is not None else []) * math.pi / params.N_f
        grid = series_solver.density_grid(series, phis) if len(phis) else _series_grid(params, req, series)
        report = rep.as_record()
        code = EXIT_OK if rep.verdict == "agree" else (EXIT_SOLVER if rep.verdict == "rk-failed" else EXIT_DISAGREE)
    else:
        grid = harness.glue(params, req.ode_config(), req.degree, points=req.grid_points)
        report = {
            "a": str(params.a),
            "b": str(params.b),
            "N": str(params.N),
            "method": "glue",
            **{k: v for k, v in grid.meta.items()},
        }
    _write(grid.to_csv(), req.output)
    if report is not None:
        text = json.dumps(report, sort_keys=True) + "\n"
        _write(text, _report_path(req), fallback=sys.stderr)
    return code


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        ns = parser.parse_args(_join_negative_values(argv))
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    req = CliRequest(**vars(ns))
    warnings.simplefilter("always", BreakdownWarning)
    try:
        return run(req)
    except (DomainError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SingularRhs, StepFailure) as exc:
        where = getattr(exc, "t", None) if isinstance(exc, SingularRhs) else exc.t_last
        print(f"solver failure at t={where}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (RecursionStall, GlueFailure, JacobiGapError) as exc:
        where = f" at k={exc.k}" if isinstance(exc, RecursionStall) else ""
        print(f"solver failure{where}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
