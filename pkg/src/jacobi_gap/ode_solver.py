"""Runge-Kutta solution of the Painleve VI system from t0 = 1 - eps toward 0.

The state is H = (E~(t), h(t), h'(t)).  Initial values come from the
small-phi expansion of E_N(phi) pushed through the Okamoto relation; the
system is then integrated with an embedded Dormand-Prince 5(4) pair.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BreakdownWarning, DomainError, SingularRhs, StepFailure
from .params import EnsembleParams, HamiltonianState, SolutionGrid, phi_to_t, t_to_phi
from .special import TaylorE

__all__ = [
    "DormandPrince",
    "OdeConfig",
    "OdeSolution",
    "initial_state",
    "integrate",
    "rhs",
    "solve",
]


@dataclass(frozen=True)
class OdeConfig:
    """Integration settings (start offset, stop abscissa, tolerances, step budget)."""

    eps: float = 1e-7
    t_end: float = 0.01
    reltol: float = 1e-5
    abstol: float = 1e-6
    max_steps: int = 200_000
    radicand_clamp: float = 1e-12

    def __post_init__(self):
        if not 0 < self.eps < 0.1:
            raise DomainError(f"eps must lie in (0, 0.1), got {self.eps}")
        if not 0 < self.t_end < 1 - self.eps:
            raise DomainError(f"t_end must lie in (0, 1 - eps), got {self.t_end}")
        if not (self.reltol > 0 and self.abstol > 0):
            raise DomainError("tolerances must be positive")
        if self.max_steps < 1:
            raise DomainError("max_steps must be positive")
        if self.radicand_clamp < 0:
            raise DomainError("radicand_clamp must be non-negative")

    @property
    def t0(self) -> float:
        return 1.0 - self.eps


def _warn_if_unreliable(params: EnsembleParams):
    if params.a > 0:
        warnings.warn(
            f"a = {params.a} > 0: the Runge-Kutta method is known to break down "
            "for positive a; compare against the series solution",
            BreakdownWarning,
            stacklevel=3,
        )


def initial_state(params: EnsembleParams, config: OdeConfig = OdeConfig()) -> HamiltonianState:
    """H(t0) from the truncated small-phi expansion of E_N."""
    _warn_if_unreliable(params)
    t0 = config.t0
    phi0 = t_to_phi(t0)
    tay = TaylorE.from_params(params)
    E, Ep, Epp = float(tay.E(phi0)), float(tay.Ep(phi0)), float(tay.Epp(phi0))
    e2, e2p = float(params.e2), float(params.e2p)
    root = math.sqrt(t0 * (1.0 - t0))
    ratio = Ep / E
    h = t0 * e2p - 0.5 * e2 + root * ratio
    hp = e2p + (1.0 - 2.0 * t0) / (2.0 * root) * ratio - Epp / E + ratio * ratio
    return HamiltonianState(t=t0, E=E, h=h, hp=hp)


_ROUNDOFF_SLACK = 64.0 * np.finfo(float).eps


class _Rhs:
    """F_t(H) with the constants of one parameter set bound in."""

    def __init__(self, params: EnsembleParams, clamp: float):
        b1, b2, b3, b4 = (float(x) for x in params.bvec)
        self.bsq = (b1 * b1, b2 * b2, b3 * b3, b4 * b4)
        self.b1234 = b1 * b2 * b3 * b4
        self.e2 = float(params.e2)
        self.e2p = float(params.e2p)
        self.clamp = clamp

    def __call__(self, t, y):
        E, h, hp = y
        if hp == 0.0:
            raise SingularRhs("h' vanished", t=t)
        q1, q2, q3, q4 = self.bsq
        prod = (hp + q1) * (hp + q2) * (hp + q3) * (hp + q4)
        cross = hp * (2.0 * h - (2.0 * t - 1.0) * hp) + self.b1234
        ratio = (prod - cross * cross) / hp
        if ratio < 0.0:
            # prod and cross^2 nearly cancel near a double root; forgive roundoff
            scale = max(abs(prod), cross * cross) / abs(hp)
            if ratio < -max(self.clamp, _ROUNDOFF_SLACK * scale):
                raise SingularRhs(f"negative radicand {ratio:.3e}", t=t)
            ratio = 0.0
        dE = E * (h - t * self.e2p + 0.5 * self.e2) / (t * (t - 1.0))
        dhp = math.sqrt(ratio) / (t * (1.0 - t))
        return np.array((dE, hp, dhp))


def rhs(t: float, H, params: EnsembleParams, radicand_clamp: float = 1e-12):
    """Right-hand side (dE, dh, dh') of the Painleve VI system at ``t``.

    ``H`` may be a :class:`HamiltonianState` or a sequence (E, h, h').
    """
    if not 0 < t < 1:
        raise DomainError("rhs needs 0 < t < 1")
    if isinstance(H, HamiltonianState):
        H = (H.E, H.h, H.hp)
    dE, dh, dhp = _Rhs(params, radicand_clamp)(t, tuple(float(x) for x in H))
    return float(dE), float(dh), float(dhp)


class DormandPrince:
    """Adaptive Dormand-Prince 5(4) integrator with PI step control.

    Works in either direction of t.  Accepted steps keep the coefficients of
    the fourth-order continuous extension so the solution can be sampled
    anywhere in the covered interval.
    """

    C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
    A = (
        (),
        (1 / 5,),
        (3 / 40, 9 / 40),
        (44 / 45, -56 / 15, 32 / 9),
        (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
        (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
        (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
    )
    E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
    DENSE = (
        -12715105075 / 11282082432,
        0.0,
        87487479700 / 32700410799,
        -10690763975 / 1880347072,
        701980252875 / 199316789632,
        -1453857185 / 822651844,
        69997945 / 29380423,
    )
    SAFETY = 0.9
    BETA = 0.04
    MIN_FACTOR = 0.2
    MAX_FACTOR = 10.0

    def __init__(self, f, reltol, abstol, max_steps=200_000):
        self.f = f
        self.reltol = reltol
        self.abstol = abstol
        self.max_steps = max_steps
        self.n_rejected = 0
        self.n_singular = 0

    def _norm(self, err, y, ynew):
        scale = self.abstol + self.reltol * np.maximum(np.abs(y), np.abs(ynew))
        return float(np.max(np.abs(err) / scale))

    def _initial_step(self, t0, y0, f0, direction, span):
        scale = self.abstol + self.reltol * np.abs(y0)
        d0 = np.max(np.abs(y0) / scale)
        d1 = np.max(np.abs(f0) / scale)
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        h0 = min(h0, span)
        try:
            f1 = self.f(t0 + direction * h0, y0 + direction * h0 * f0)
            d2 = np.max(np.abs(f1 - f0) / scale) / h0
        except SingularRhs:
            return h0 * 1e-3
        if max(d1, d2) <= 1e-15:
            h1 = max(1e-6, h0 * 1e-3)
        else:
            h1 = (0.01 / max(d1, d2)) ** 0.2
        return min(100 * h0, h1, span)

    def _stages(self, t, y, h, k1):
        ks = [k1]
        for i in range(1, 7):
            yi = y + h * sum(a * k for a, k in zip(self.A[i], ks) if a)
            ks.append(self.f(t + self.C[i] * h, yi))
        return ks

    def run(self, t0, y0, t1):
        """Integrate from ``t0`` to ``t1``; returns the list of accepted steps.

        Each step is ``(t, h, rcont)`` with ``rcont`` the five dense-output
        coefficient vectors.
        """
        y = np.asarray(y0, dtype=float)
        t = float(t0)
        direction = 1.0 if t1 > t0 else -1.0
        span = abs(t1 - t0)
        k1 = self.f(t, y)
        habs = self._initial_step(t, y, k1, direction, span)
        expo = 0.2 - 0.75 * self.BETA
        facold = 1e-4
        steps = []
        for _ in range(self.max_steps):
            hmin = 16.0 * np.finfo(float).eps * max(abs(t), 1.0)
            remaining = abs(t1 - t)
            if remaining <= hmin:
                break
            if habs >= remaining:
                habs = remaining
            if habs < hmin:
                raise StepFailure(f"step size underflow at t={t!r}", t_last=t)
            h = direction * habs
            try:
                ks = self._stages(t, y, h, k1)
            except SingularRhs as exc:
                self.n_singular += 1
                if habs * 0.25 < hmin:
                    raise SingularRhs(f"{exc} (no smaller step avoids it)", t=exc.t) from exc
                habs *= 0.25
                continue
            ynew = y + h * sum(a * k for a, k in zip(self.A[6], ks) if a)
            err = self._norm(h * sum(e * k for e, k in zip(self.E, ks) if e), y, ynew)
            if not math.isfinite(err):
                self.n_rejected += 1
                habs *= 0.25
                continue
            fac11 = err**expo
            if err <= 1.0:
                fac = fac11 / facold**self.BETA
                fac = min(1.0 / self.MIN_FACTOR, max(1.0 / self.MAX_FACTOR, fac / self.SAFETY))
                facold = max(err, 1e-4)
                k7 = ks[6]
                ydiff = ynew - y
                bspl = h * ks[0] - ydiff
                rcont = (
                    y,
                    ydiff,
                    bspl,
                    ydiff - h * k7 - bspl,
                    h * sum(d * k for d, k in zip(self.DENSE, ks) if d),
                )
                steps.append((t, h, rcont))
                t = t + h
                y = ynew
                k1 = k7
                habs = habs / fac
            else:
                self.n_rejected += 1
                habs = habs / min(1.0 / self.MIN_FACTOR, fac11 / self.SAFETY)
        else:
            raise StepFailure(f"max_steps={self.max_steps} exhausted at t={t!r}", t_last=t)
        return steps


@dataclass
class OdeSolution:
    """Piecewise dense output of an integration run."""

    params: EnsembleParams
    config: OdeConfig
    t_steps: np.ndarray
    h_steps: np.ndarray
    rcont: np.ndarray  # (n_steps, 5, 3)
    n_rejected: int
    n_singular: int

    @property
    def t_start(self) -> float:
        return float(self.t_steps[0])

    @property
    def t_stop(self) -> float:
        return float(self.t_steps[-1] + self.h_steps[-1])

    def __call__(self, t):
        """Dense-output state at ``t`` (scalar or array), shape (..., 3)."""
        t = np.asarray(t, dtype=float)
        lo, hi = sorted((self.t_start, self.t_stop))
        if np.any(t < lo - 1e-15) or np.any(t > hi + 1e-15):
            raise DomainError(f"t outside the integrated range [{lo}, {hi}]")
        # steps run toward smaller t; search on the reversed (ascending) starts
        order = -self.t_steps if self.h_steps[0] < 0 else self.t_steps
        key = -t if self.h_steps[0] < 0 else t
        idx = np.clip(np.searchsorted(order, key, side="right") - 1, 0, len(order) - 1)
        theta = (t - self.t_steps[idx]) / self.h_steps[idx]
        r = self.rcont[idx]
        th = theta[..., None]
        th1 = 1.0 - th
        return r[..., 0, :] + th * (r[..., 1, :] + th1 * (r[..., 2, :] + th * (r[..., 3, :] + th1 * r[..., 4, :])))


def solve(params: EnsembleParams, config: OdeConfig = OdeConfig()) -> OdeSolution:
    """Integrate the Painleve VI system from t0 = 1 - eps down to t_end."""
    state = initial_state(params, config)
    f = _Rhs(params, config.radicand_clamp)
    dp = DormandPrince(f, config.reltol, config.abstol, config.max_steps)
    steps = dp.run(state.t, state.as_array(), config.t_end)
    return OdeSolution(
        params=params,
        config=config,
        t_steps=np.array([s[0] for s in steps]),
        h_steps=np.array([s[1] for s in steps]),
        rcont=np.array([s[2] for s in steps]),
        n_rejected=dp.n_rejected,
        n_singular=dp.n_singular,
    )


def default_phi_grid(params: EnsembleParams, config: OdeConfig, per_theta: int = 400) -> np.ndarray:
    """Uniform phi grid over the integrated range, >= ``per_theta`` points per unit theta."""
    phi_lo = t_to_phi(config.t0)
    phi_hi = t_to_phi(config.t_end)
    span_theta = params.N_f * (phi_hi - phi_lo) / math.pi
    n = max(int(math.ceil(per_theta * span_theta)) + 1, 200)
    return np.linspace(phi_lo, phi_hi, n)


def to_grid(sol: OdeSolution, phis=None) -> SolutionGrid:
    """Sample the dense output and convert to (phi, theta, E, nu)."""
    params = sol.params
    if phis is None:
        phis = default_phi_grid(params, sol.config)
    phi = np.sort(np.asarray(phis, dtype=float))
    t = phi_to_t(phi)
    # t0 itself maps to a phi that may round just outside the covered span
    lo, hi = sorted((sol.t_start, sol.t_stop))
    t = np.clip(t, lo, hi)
    H = sol(t)
    E, h = H[:, 0], H[:, 1]
    e2, e2p = float(params.e2), float(params.e2p)
    nu = np.sqrt(t * (1.0 - t)) * E * (h - e2p * t + 0.5 * e2) / (t * (t - 1.0))
    meta = {
        "t0": sol.config.t0,
        "t_end": sol.config.t_end,
        "reltol": sol.config.reltol,
        "abstol": sol.config.abstol,
        "steps": len(sol.t_steps),
        "rejected": sol.n_rejected,
        "singular_retries": sol.n_singular,
    }
    return SolutionGrid.from_phi(phi, E, nu, "rk", params, meta)


def integrate(params: EnsembleParams, config: OdeConfig = OdeConfig(), phis=None) -> SolutionGrid:
    """Run the Runge-Kutta method and sample nu on ``phis`` (default grid if None)."""
    return to_grid(solve(params, config), phis)
