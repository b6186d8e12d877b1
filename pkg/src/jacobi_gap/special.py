"""Gamma-type special functions, Selberg/Aomoto integrals and the small-phi
expansion of the gap probability.

All products of gamma functions are accumulated in log space so that the
constants stay finite for N in the hundreds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .params import EnsembleParams

__all__ = [
    "TaylorE",
    "aomoto",
    "h1_h2",
    "log_barnes_g",
    "log_gamma",
    "log_normalization",
    "log_selberg",
    "log_selberg_noninteger",
    "normalization",
    "selberg",
    "selberg_noninteger",
    "taylor_E",
]

# zeta'(-1) = 1/12 - log(Glaisher's constant)
_ZETA_PRIME_M1 = -0.16542114370045092921
_LOG_2PI = math.log(2.0 * math.pi)
# B_{2g+2} for g = 1..9
_BERNOULLI = (
    Fraction(-1, 30),
    Fraction(1, 42),
    Fraction(-1, 30),
    Fraction(5, 66),
    Fraction(-691, 2730),
    Fraction(7, 6),
    Fraction(-3617, 510),
    Fraction(43867, 798),
    Fraction(-174611, 330),
)
_G_ASYMPTOTIC = tuple(
    float(B / (4 * g * (g + 1))) for g, B in enumerate(_BERNOULLI, start=1)
)
_G_SHIFT_TARGET = 10.0


def log_gamma(x: float) -> float:
    """log Gamma(x) for x > 0.

    Reflection is deliberately not supported; every gamma argument that
    arises for alpha, beta > -1/2 is positive.
    """
    x = float(x)
    if not x > 0:
        raise DomainError(f"log_gamma needs x > 0, got {x}")
    return math.lgamma(x)


def _log_g_asymptotic(z: float) -> float:
    # log G(z + 1) for large z
    logz = math.log(z)
    s = (0.5 * z * z - 1.0 / 12.0) * logz - 0.75 * z * z + 0.5 * z * _LOG_2PI
    s += _ZETA_PRIME_M1
    zinv2 = 1.0 / (z * z)
    p = zinv2
    for c in _G_ASYMPTOTIC:
        s += c * p
        p *= zinv2
    return s


def log_barnes_g(x: float) -> float:
    """Logarithm of the Barnes G-function for real x > 0.

    Uses G(x + 1) = Gamma(x) G(x) to shift the argument until the
    asymptotic expansion of log G is accurate, then steps back down.
    """
    x = float(x)
    if not x > 0:
        raise DomainError(f"log_barnes_g needs x > 0, got {x}")
    m = max(0, math.ceil(_G_SHIFT_TARGET + 1.0 - x))
    # G(x) = G(x + m) / prod_{j<m} Gamma(x + j)
    acc = _log_g_asymptotic(x + m - 1.0)
    for j in range(m):
        acc -= math.lgamma(x + j)
    return acc


def _check_selberg_args(Ncal, rho, eta, gamma_exp):
    if isinstance(Ncal, bool) or int(Ncal) != Ncal or Ncal < 1:
        raise DomainError(f"Selberg dimension must be a positive integer, got {Ncal}")
    if not (rho > 0 and eta > 0):
        raise DomainError(f"Selberg integral needs rho, eta > 0, got {rho}, {eta}")
    Ncal = int(Ncal)
    bound = 1.0 / Ncal
    if Ncal > 1:
        bound = min(bound, rho / (Ncal - 1), eta / (Ncal - 1))
    if not gamma_exp > -bound:
        raise DomainError(f"Selberg integral diverges for gamma={gamma_exp}")
    return Ncal


def log_selberg(Ncal: int, rho: float, eta: float, gamma_exp: float = 1.0) -> float:
    """log of the Selberg integral S_Ncal(rho, eta; gamma) by its product formula."""
    Ncal = _check_selberg_args(Ncal, rho, eta, gamma_exp)
    rho, eta, g = float(rho), float(eta), float(gamma_exp)
    lg1 = math.lgamma(1.0 + g)
    acc = 0.0
    for j in range(Ncal):
        acc += (
            math.lgamma(1.0 + g + j * g)
            + math.lgamma(rho + j * g)
            + math.lgamma(eta + j * g)
            - lg1
            - math.lgamma(rho + eta + (Ncal + j - 1) * g)
        )
    return acc


def selberg(Ncal: int, rho: float, eta: float, gamma_exp: float = 1.0) -> float:
    r"""Selberg's integral

    .. math::
        \int_{[0,1]^N} \prod_l x_l^{\rho-1}(1-x_l)^{\eta-1}
        \prod_{j<k} |x_k - x_j|^{2\gamma}\, dx

    evaluated through the Gamma-product formula.
    """
    return math.exp(log_selberg(Ncal, rho, eta, gamma_exp))


def log_selberg_noninteger(N: float, rho: float, eta: float) -> float:
    """log S_N(rho, eta; 1) for real N > 0 via Barnes G.

    The gamma product over j = 0..N-1 telescopes through
    prod_j Gamma(x + j) = G(x + N) / G(x).
    """
    N, rho, eta = float(N), float(rho), float(eta)
    if not (N > 0 and rho > 0 and eta > 0):
        raise DomainError(f"need N, rho, eta > 0, got {N}, {rho}, {eta}")
    s = rho + eta
    return (
        log_barnes_g(N + 2.0)
        + log_barnes_g(rho + N)
        - log_barnes_g(rho)
        + log_barnes_g(eta + N)
        - log_barnes_g(eta)
        + log_barnes_g(s + N - 1.0)
        - log_barnes_g(s + 2.0 * N - 1.0)
    )


def selberg_noninteger(N: float, rho: float, eta: float) -> float:
    """S_N(rho, eta; 1) for real N > 0."""
    return math.exp(log_selberg_noninteger(N, rho, eta))


def aomoto(Ncal: int, R: int, rho: float, eta: float) -> float:
    """Aomoto's extension (gamma = 1): Selberg integrand times x_1 ... x_R."""
    Ncal = _check_selberg_args(Ncal, rho, eta, 1.0)
    if int(R) != R or not 0 <= R <= Ncal:
        raise DomainError(f"R must be an integer in [0, {Ncal}], got {R}")
    pref = 1.0
    for j in range(1, int(R) + 1):
        pref *= (rho + Ncal - j) / (rho + eta + 2 * Ncal - j - 1)
    return pref * selberg(Ncal, rho, eta, 1.0)


def _log_selberg_any(N, rho, eta):
    if float(N).is_integer():
        return log_selberg(int(N), rho, eta, 1.0)
    return log_selberg_noninteger(N, rho, eta)


def log_normalization(params: EnsembleParams) -> float:
    """log of the normalization constant C_N of the angular joint density."""
    N, al, be = params.N_f, params.alpha_f, params.beta_f
    log_inv = N * (N + al + be - 1.0) * math.log(2.0) + _log_selberg_any(
        N, al + 0.5, be + 0.5
    )
    return -log_inv


def normalization(params: EnsembleParams) -> float:
    """Normalization constant C_N of the angular joint density on (0, pi)^N."""
    return math.exp(log_normalization(params))


def h1_h2(params: EnsembleParams) -> tuple[float, float]:
    """Gamma-ratio constants H1, H2 of the small-phi expansion of I(1)."""
    al, be, N = params.alpha_f, params.beta_f, params.N_f
    if not (al > -0.5 and be > -0.5 and N >= 1):
        raise DomainError("h1_h2 needs alpha, beta > -1/2 and N >= 1")
    lg = math.lgamma
    common = lg(al + N + 0.5) - lg(N + 1.0) - lg(be + N - 0.5) - lg(al + 0.5)
    log_h1 = common + lg(al + be + N) - 2 * al * math.log(2) - lg(al + 1.5)
    log_h2 = common + lg(al + be + N + 1) - (2 * al + 1) * math.log(2) - lg(al + 2.5)
    return math.exp(log_h1), math.exp(log_h2)


@dataclass(frozen=True)
class TaylorE:
    """Truncated small-phi expansion of E_N(phi) and its phi-derivatives.

    E(phi) = 1 - N (H1 phi^p / p - K phi^(p+2) / (p+2)),  p = 2 alpha + 1,
    K = (N-1) H2 + (alpha/12 + beta/4) H1.
    """

    H1: float
    H2: float
    alpha: float
    beta: float
    N: float

    @classmethod
    def from_params(cls, params: EnsembleParams) -> "TaylorE":
        H1, H2 = h1_h2(params)
        return cls(H1, H2, params.alpha_f, params.beta_f, params.N_f)

    @property
    def K(self) -> float:
        return (self.N - 1.0) * self.H2 + (self.alpha / 12.0 + self.beta / 4.0) * self.H1

    def E(self, phi):
        phi = np.asarray(phi, dtype=float)
        p = 2.0 * self.alpha + 1.0
        return 1.0 - self.N * (
            self.H1 * phi**p / p - self.K * phi ** (p + 2.0) / (p + 2.0)
        )

    def Ep(self, phi):
        phi = np.asarray(phi, dtype=float)
        p = 2.0 * self.alpha
        return -self.N * self.H1 * phi**p + self.N * self.K * phi ** (p + 2.0)

    def Epp(self, phi):
        phi = np.asarray(phi, dtype=float)
        p = 2.0 * self.alpha - 1.0
        first = -2.0 * self.alpha * self.N * self.H1 * _pow_or_zero(phi, p, self.alpha)
        return first + self.N * (p + 3.0) * self.K * phi ** (p + 2.0)


def _pow_or_zero(phi, p, coeff):
    # phi^(2 alpha - 1) is multiplied by alpha; keep 0 * inf from leaking a nan
    if coeff == 0:
        return np.zeros_like(phi)
    with np.errstate(divide="ignore"):
        return phi**p


def taylor_E(params: EnsembleParams, phi):
    """Return ``(E, E', E'')`` of the small-phi expansion at ``phi``."""
    tay = TaylorE.from_params(params)
    out = tay.E(phi), tay.Ep(phi), tay.Epp(phi)
    if np.ndim(phi) == 0:
        return tuple(float(v) for v in out)
    return out
