"""Cross-validation of the Runge-Kutta and series methods.

The Runge-Kutta run starts near phi = 0 and drifts as phi grows; the series
about t = 0 is exact near phi = pi and degrades toward phi = 0.  If the two
agree on an overlap window the numerical run is taken to be sound.  The same
pieces, plus the small-phi expansion, are stitched into one grid by
:func:`glue`.

All thresholds here (agreement 5e-3, seam gap 1e-2, trust radius t <= 0.9)
are package defaults rather than derived bounds, and reports say so.
"""

from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import mc_oracle, ode_solver, series_solver
from .errors import BreakdownWarning, DomainError, GlueFailure, SingularRhs, StepFailure
from .params import EnsembleParams, SolutionGrid, derive, phi_to_t, t_to_phi
from .special import TaylorE

__all__ = [
    "AGREE_THRESHOLD",
    "ComparisonReport",
    "SEAM_TOLERANCE",
    "compare",
    "glue",
    "overlap_window",
    "run_rk",
    "series_E_nu",
    "sweep",
    "validate_mc",
]

AGREE_THRESHOLD = 5e-3
SEAM_TOLERANCE = 1e-2
PER_THETA = 400
REPORT_KEYS = (
    "a",
    "b",
    "N",
    "overlap_theta",
    "sup_diff_nu",
    "l2_diff_nu",
    "rk_status",
    "rk_message",
    "series_degree",
    "verdict",
    "threshold",
    "window",
    "threshold_source",
)


@dataclass
class ComparisonReport:
    """Agreement of the two methods on an overlap window in theta.

    ``verdict`` is ``"agree"`` exactly when ``sup_diff_nu <= threshold`` and
    the Runge-Kutta run finished without warnings.
    """

    params: EnsembleParams
    overlap_theta: tuple
    sup_diff_nu: float
    l2_diff_nu: float
    rk_status: str  # ok | warned | failed
    series_degree: int
    verdict: str  # agree | disagree | rk-failed
    threshold: float = AGREE_THRESHOLD
    window: str = "default"
    rk_message: str = ""
    theta: np.ndarray = field(default=None, repr=False)
    diff: np.ndarray = field(default=None, repr=False)

    def as_record(self) -> dict:
        u, v = self.overlap_theta
        return {
            "a": str(self.params.a),
            "b": str(self.params.b),
            "N": str(self.params.N),
            "overlap_theta": [float(u), float(v)],
            "sup_diff_nu": float(self.sup_diff_nu),
            "l2_diff_nu": float(self.l2_diff_nu),
            "rk_status": self.rk_status,
            "rk_message": self.rk_message,
            "series_degree": int(self.series_degree),
            "verdict": self.verdict,
            "threshold": float(self.threshold),
            "window": self.window,
            "threshold_source": "package default (not derived)",
        }

    def to_json(self) -> str:
        """One-line JSON record with the keys in ``REPORT_KEYS``."""
        return json.dumps(self.as_record(), sort_keys=False)


def series_E_nu(sol, phi):
    """E and unscaled nu from the series at ``phi`` in [0, pi], without the endpoint guard.

    At phi = pi (t = 0) the limits are used: E = 0 and nu = C/2 when the
    leading exponent is 1/2, otherwise 0 (or inf when it is below 1/2).
    """
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    t = phi_to_t(phi)
    E = np.empty_like(t)
    nu = np.empty_like(t)
    inner = (t > 0.0) & (t < 1.0)
    if np.any(inner):
        Ei, Epi = series_solver.evaluate(sol, t[inner])
        E[inner] = Ei
        nu[inner] = np.sqrt(t[inner] * (1.0 - t[inner])) * Epi
    L = float(sol.lead_exp)
    at0 = t <= 0.0
    E[at0] = 0.0
    nu[at0] = sol.lead_coef * L if L == 0.5 else (0.0 if L > 0.5 else math.inf)
    at1 = t >= 1.0
    if np.any(at1):
        E[at1] = series_solver.evaluate(sol, 1.0 - 1e-12)[0]
        nu[at1] = math.nan
    return E, nu


def run_rk(params: EnsembleParams, config: ode_solver.OdeConfig):
    """Run the integrator, returning (solution or None, status, message)."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", BreakdownWarning)
        try:
            sol = ode_solver.solve(params, config)
        except (SingularRhs, StepFailure) as exc:
            where = getattr(exc, "t", None) or getattr(exc, "t_last", None)
            return None, "failed", f"{type(exc).__name__} at t={where}: {exc}"
    warned = [w for w in caught if issubclass(w.category, BreakdownWarning)]
    for w in warned:  # re-emit so callers still see it
        warnings.warn(w.message, BreakdownWarning, stacklevel=2)
    if warned:
        return sol, "warned", str(warned[0].message)
    return sol, "ok", ""


def _theta(params, phi):
    return params.N_f * phi / math.pi


def overlap_window(params, window, trust_t=series_solver.SERIES_TRUST_T, rk_t_stop=None):
    """Clip a window policy to where the series is trusted and the RK run reached."""
    N = params.N_f
    if window == "default":
        u, v = 0.25 * N, 0.75 * N
    elif window == "tail":
        u, v = 0.75 * N, N
    else:
        u, v = (float(x) for x in window)
    u = max(u, _theta(params, t_to_phi(trust_t)))
    v = min(v, _theta(params, math.pi - 1e-6))
    if rk_t_stop is not None:
        v = min(v, _theta(params, t_to_phi(rk_t_stop)))
    if not u < v:
        raise DomainError(f"empty overlap window after clipping: ({u}, {v})")
    return u, v


def compare(
    params: EnsembleParams,
    ode_cfg: ode_solver.OdeConfig = ode_solver.OdeConfig(),
    D: int | None = None,
    window="default",
    threshold: float = AGREE_THRESHOLD,
    trust_t: float = series_solver.SERIES_TRUST_T,
    series=None,
    theta_grid=None,
) -> ComparisonReport:
    """Run both methods and measure |nu_rk - nu_series| on the overlap window.

    ``window`` is ``"default"`` (theta in [N/4, 3N/4]), ``"tail"`` (theta in
    [3N/4, N]) or an explicit (u, v).  ``series`` may be a precomputed
    :class:`~jacobi_gap.series_solver.SeriesSolution`.  ``nu`` is compared
    unscaled, as -dE/dphi.
    """
    if series is None:
        series = series_solver.solve(params, D)
    rk, status, message = run_rk(params, ode_cfg)
    name = window if isinstance(window, str) else "explicit"
    if rk is None:
        u, v = overlap_window(params, window, trust_t)
        return ComparisonReport(
            params, (u, v), math.inf, math.inf, status, series.degree, "rk-failed", threshold, name, message
        )
    u, v = overlap_window(params, window, trust_t, rk.t_stop)
    if theta_grid is None:
        n = max(int(math.ceil(PER_THETA * (v - u))) + 1, 50)
        theta = np.linspace(u, v, n)
    else:
        theta = np.asarray(theta_grid, dtype=float)
        theta = theta[(theta >= u) & (theta <= v)]
    phi = theta * math.pi / params.N_f
    _, nu_s = series_E_nu(series, phi)
    rk_grid = ode_solver.to_grid(rk, _rk_phis(params, ode_cfg, rk))
    nu_r = np.interp(theta, rk_grid.theta, rk_grid.nu)
    diff = nu_r - nu_s
    sup = float(np.max(np.abs(diff))) if diff.size else math.inf
    order = np.argsort(theta)
    l2 = float(math.sqrt(np.trapezoid(diff[order] ** 2, theta[order]))) if diff.size > 1 else 0.0
    if not np.isfinite(sup):
        sup = math.inf
    verdict = "agree" if (sup <= threshold and status == "ok") else "disagree"
    return ComparisonReport(
        params, (u, v), sup, l2, status, series.degree, verdict, threshold, name, message, theta, diff
    )


def _rk_phis(params, cfg, rk):
    lo = t_to_phi(rk.t_start)
    hi = t_to_phi(rk.t_stop)
    n = max(int(math.ceil(PER_THETA * _theta(params, hi - lo))) + 1, 200)
    return np.linspace(lo, hi, n)


def _argmin_seam(phi, left, right, lo, hi):
    mask = (phi >= lo) & (phi <= hi) & np.isfinite(left) & np.isfinite(right)
    if not np.any(mask):
        return None, math.inf
    idx = np.flatnonzero(mask)
    gaps = np.abs(left[idx] - right[idx])
    k = int(np.argmin(gaps))
    return int(idx[k]), float(gaps[k])


def glue(
    params: EnsembleParams,
    ode_cfg: ode_solver.OdeConfig = ode_solver.OdeConfig(),
    D: int | None = None,
    trust_t: float = series_solver.SERIES_TRUST_T,
    seam_tol: float = SEAM_TOLERANCE,
    series=None,
    asym_theta_max: float | None = None,
    points: int | None = None,
    series_reach_t: float | None = None,
) -> SolutionGrid:
    """One grid over [0, pi]: small-phi expansion, then RK, then series.

    Each seam sits where the adjacent pieces differ least within their
    common domain.  The RK piece is used only when its run finished with
    status ``ok``; otherwise the expansion meets the series directly, with
    the series allowed out to ``series_reach_t`` (default
    max(trust_t, 1 - 1/D)).  Seam locations and gaps are in ``meta``.
    """
    if series is None:
        series = series_solver.solve(params, D)
    N = params.N_f
    if points is None:
        points = max(int(PER_THETA * N) + 1, 2001)
    start = 0.0 if params.alpha >= 0 else 1e-6
    phi = np.linspace(start, math.pi, points)
    tay = TaylorE.from_params(params)
    with np.errstate(over="ignore", invalid="ignore"):
        E_a = np.asarray(tay.E(phi), dtype=float)
        nu_a = -np.asarray(tay.Ep(phi), dtype=float)
    E_s, nu_s = series_E_nu(series, phi)
    if asym_theta_max is None:
        asym_theta_max = 0.5 * N
    asym_hi = asym_theta_max * math.pi / N
    phi_trust = t_to_phi(trust_t)

    rk, status, message = run_rk(params, ode_cfg)
    seams = []
    E = np.array(E_s)
    nu = np.array(nu_s)
    if status == "ok":
        lo_r, hi_r = t_to_phi(rk.t_start), t_to_phi(rk.t_stop)
        inside = (phi >= lo_r) & (phi <= hi_r)
        E_r = np.full_like(phi, math.nan)
        nu_r = np.full_like(phi, math.nan)
        g = ode_solver.to_grid(rk, phi[inside])
        E_r[inside], nu_r[inside] = g.E, g.nu
        i1, gap1 = _argmin_seam(phi, nu_a, nu_r, lo_r, min(asym_hi, hi_r))
        i2, gap2 = (None, math.inf)
        if i1 is not None:
            i2, gap2 = _argmin_seam(phi, nu_r, nu_s, max(phi[i1], phi_trust), hi_r)
        if i1 is not None and i2 is not None and i2 > i1:
            seams = [("asymptotic", "rk", i1, gap1), ("rk", "series", i2, gap2)]
            E[: i1 + 1], nu[: i1 + 1] = E_a[: i1 + 1], nu_a[: i1 + 1]
            E[i1 + 1 : i2 + 1], nu[i1 + 1 : i2 + 1] = E_r[i1 + 1 : i2 + 1], nu_r[i1 + 1 : i2 + 1]
    if not seams:
        # without RK the expansion must reach the series directly; allow the
        # series out to t = 1 - 1/D, where its truncation error is still O(1/e)
        # of the coefficient scale
        reach = series_reach_t if series_reach_t is not None else max(trust_t, 1.0 - 1.0 / series.degree)
        i1, gap1 = _argmin_seam(phi, nu_a, nu_s, t_to_phi(reach), asym_hi)
        if i1 is None:
            raise GlueFailure("the expansion and series domains do not overlap")
        seams = [("asymptotic", "series", i1, gap1)]
        E[: i1 + 1], nu[: i1 + 1] = E_a[: i1 + 1], nu_a[: i1 + 1]

    seam_meta = [
        {"left": l, "right": r, "phi": float(phi[i]), "theta": float(_theta(params, phi[i])), "gap": g}
        for l, r, i, g in seams
    ]
    worst = max(s["gap"] for s in seam_meta)
    if worst > seam_tol:
        raise GlueFailure(f"seam gap {worst:.3e} exceeds {seam_tol:.1e}: {seam_meta}")
    meta = {
        "seams": seam_meta,
        "pieces": [seams[0][0]] + [s[1] for s in seams],
        "rk_status": status,
        "rk_message": message,
        "degree": series.degree,
        "trust_t": trust_t,
        "seam_tol": seam_tol,
    }
    return SolutionGrid.from_phi(phi, E, nu, "glue", params, meta)


def validate_mc(
    params: EnsembleParams,
    cfg: mc_oracle.McConfig,
    phis=None,
    series=None,
    D: int | None = None,
    trust_t: float = series_solver.SERIES_TRUST_T,
) -> float:
    """sup over ``phis`` of |empirical first-phase CDF - (1 - E_series)|.

    The default ``phis`` cover the range where the series is trusted,
    phi in [phi(trust_t), pi].
    """
    if series is None:
        series = series_solver.solve(params, D)
    if phis is None:
        phis = np.linspace(t_to_phi(trust_t), math.pi, 512)
    phis = np.asarray(phis, dtype=float)
    E, _ = series_E_nu(series, phis)
    emp = mc_oracle.empirical_first_cdf(params, cfg, phis)
    return float(np.max(np.abs(emp - (1.0 - E))))


def _sweep_one(args):
    a, b, N, cfg, D, window = args
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BreakdownWarning)
        return compare(derive(a, b, N), cfg, D, window)


def sweep(triples, ode_cfg=ode_solver.OdeConfig(), D=None, window="default", workers: int = 1):
    """Compare over many (a, b, N) triples; each comparison is independent."""
    jobs = [(a, b, N, ode_cfg, D, window) for a, b, N in triples]
    if workers <= 1:
        return [_sweep_one(j) for j in jobs]
    with ProcessPoolExecutor(workers) as pool:
        return list(pool.map(_sweep_one, jobs))
