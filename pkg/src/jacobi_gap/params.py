"""Ensemble parameters, derived constants and the shared grid type.

Everything that both solution methods need to agree on lives here: the
four-vector ``bvec`` of the Painleve VI system, the symmetric functions
``e2``/``e2p`` of it, the leading exponent ``N(N+b)`` of the gap probability
at t = 0, and the change of variables t = (1 + cos phi) / 2.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import DomainError

__all__ = [
    "EnsembleParams",
    "HamiltonianState",
    "SolutionGrid",
    "derive",
    "parse_rational",
    "phi_to_t",
    "t_to_phi",
]


def parse_rational(value) -> tuple[Fraction, bool]:
    """Convert ``value`` to a Fraction and report whether it was exact.

    Strings may be ``"p/q"`` or decimals (``"-0.5"``, ``"1e-3"``) and are read
    as the exact rational they denote.  Integers and ``Rational`` instances
    are exact.  Floats are converted through their shortest repr, so ``0.1``
    becomes ``1/10``, but they are flagged as inexact.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not valid ensemble parameters")
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text), True
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot parse {value!r} as a rational") from exc
    if isinstance(value, (int, Rational)):
        return Fraction(value), True
    if isinstance(value, float):
        if not math.isfinite(value):
            raise DomainError(f"non-finite parameter {value!r}")
        return Fraction(repr(value)), False
    # gmpy2.mpq and friends
    try:
        return Fraction(str(value)), True
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"cannot interpret {value!r} as a number") from exc


@dataclass(frozen=True)
class EnsembleParams:
    """Parameters of the Jacobi ensemble J_N^(a,b) with derived constants.

    All constants are stored as exact Fractions; use the ``*_f`` properties
    or ``float()`` for floating-point work.
    """

    a: Fraction
    b: Fraction
    N: Fraction
    alpha: Fraction
    beta: Fraction
    bvec: tuple[Fraction, Fraction, Fraction, Fraction]
    e2: Fraction
    e2p: Fraction
    lead_exp: Fraction
    rational_mode: bool

    @property
    def b1234(self) -> Fraction:
        b1, b2, b3, b4 = self.bvec
        return b1 * b2 * b3 * b4

    @property
    def N_is_integer(self) -> bool:
        return self.N.denominator == 1

    @property
    def a_f(self) -> float:
        return float(self.a)

    @property
    def b_f(self) -> float:
        return float(self.b)

    @property
    def N_f(self) -> float:
        return float(self.N)

    @property
    def alpha_f(self) -> float:
        return float(self.alpha)

    @property
    def beta_f(self) -> float:
        return float(self.beta)

    def as_dict(self) -> dict:
        return {"a": str(self.a), "b": str(self.b), "N": str(self.N)}

    def __str__(self) -> str:
        return f"J_{self.N}^({self.a},{self.b})"


def derive(a, b, N) -> EnsembleParams:
    """Build :class:`EnsembleParams` from ``a``, ``b`` and ``N``.

    Raises
    ------
    DomainError
        If ``a <= -1``, ``b <= -1`` or ``N <= 0``.
    """
    fa, ea = parse_rational(a)
    fb, eb = parse_rational(b)
    fN, eN = parse_rational(N)
    if fa <= -1:
        raise DomainError(f"a must exceed -1, got {fa}")
    if fb <= -1:
        raise DomainError(f"b must exceed -1, got {fb}")
    if fN <= 0:
        raise DomainError(f"N must be positive, got {fN}")

    half = Fraction(1, 2)
    s = (fa + fb) / 2
    bvec = (fN + s, (fa - fb) / 2, -s, -fN - s)
    b1, b2, b3, b4 = bvec
    e2p = b1 * b3 + b1 * b4 + b3 * b4
    e2 = e2p + b2 * (b1 + b3 + b4)
    return EnsembleParams(
        a=fa,
        b=fb,
        N=fN,
        alpha=fa + half,
        beta=fb + half,
        bvec=bvec,
        e2=e2,
        e2p=e2p,
        lead_exp=fN * (fN + fb),
        rational_mode=ea and eb and eN,
    )


def phi_to_t(phi):
    """Map an eigenphase in [0, pi] to the abscissa t = (1 + cos phi)/2."""
    arr = np.asarray(phi, dtype=float)
    if np.any(arr < 0) or np.any(arr > math.pi) or np.any(np.isnan(arr)):
        raise DomainError("phi must lie in [0, pi]")
    # cos^2(phi/2) avoids cancellation near pi; float cos(pi/2) is 6e-17, so pin t(pi) = 0
    t = np.where(arr == math.pi, 0.0, np.cos(0.5 * arr) ** 2)
    return float(t) if np.ndim(t) == 0 else t


def t_to_phi(t):
    """Inverse of :func:`phi_to_t`; t in [0, 1]."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0) or np.any(arr > 1) or np.any(np.isnan(arr)):
        raise DomainError("t must lie in [0, 1]")
    # arccos(2t - 1) loses digits near both ends; the half-angle form does not
    phi = 2.0 * np.arctan2(np.sqrt(1.0 - arr), np.sqrt(arr))
    return float(phi) if np.ndim(phi) == 0 else phi


@dataclass(frozen=True)
class HamiltonianState:
    """The triple (E~(t), h(t), h'(t)) at abscissa ``t``."""

    t: float
    E: float
    h: float
    hp: float

    def as_array(self) -> np.ndarray:
        return np.array([self.E, self.h, self.hp])


@dataclass
class SolutionGrid:
    """Sampled gap probability and first-eigenphase density.

    Columns are numpy arrays of equal length ordered by increasing ``phi``.
    ``nu`` is the unscaled density -dE/dphi on [0, pi]; the density of the
    rescaled variable theta = N phi / pi is ``nu_scaled``.
    """

    t: np.ndarray
    phi: np.ndarray
    theta: np.ndarray
    E: np.ndarray
    nu: np.ndarray
    method: str
    params: EnsembleParams
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_phi(cls, phi, E, nu, method, params, meta=None):
        phi = np.asarray(phi, dtype=float)
        order = np.argsort(phi, kind="stable")
        phi = phi[order]
        t = phi_to_t(phi)
        theta = params.N_f * phi / math.pi
        return cls(
            t=t,
            phi=phi,
            theta=theta,
            E=np.asarray(E, dtype=float)[order],
            nu=np.asarray(nu, dtype=float)[order],
            method=method,
            params=params,
            meta=dict(meta or {}),
        )

    def __len__(self) -> int:
        return len(self.phi)

    @property
    def nu_scaled(self) -> np.ndarray:
        return self.nu * math.pi / self.params.N_f

    def integral(self, tails: bool = False) -> float:
        """Trapezoid integral of nu over the sampled phi range.

        With ``tails=True`` the mass outside the sampled range is added from
        the E column: 1 - E on [0, phi_min] and E on [phi_max, pi].
        """
        mass = float(np.trapezoid(self.nu, self.phi))
        if tails and len(self):
            mass += (1.0 - float(self.E[0])) + float(self.E[-1])
        return mass

    def to_csv(self, stream=None) -> str:
        """Write ``theta,phi,t,E,nu`` rows with 15 significant digits."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["theta", "phi", "t", "E", "nu"])
        for row in zip(self.theta, self.phi, self.t, self.E, self.nu):
            writer.writerow([f"{x:.15g}" for x in row])
        text = buf.getvalue()
        if stream is not None:
            stream.write(text)
        return text
