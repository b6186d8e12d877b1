"""Exact power-series solution of the sigma-form Painleve VI equation at t = 0.

The auxiliary Hamiltonian h(t) = h_0 + h_1 t + ... is determined one
coefficient at a time: with h_0..h_{k-1} fixed, the t^k coefficient of the
residual

    PEZ(h) = h' (t(1-t) h'')^2 + (h'(2h - (2t-1)h') + b1 b2 b3 b4)^2
             - prod_k (h' + b_k^2)

is a polynomial p_k(X) in the unknown X = h_k, and h_k is its nontrivial
rational root.  From h we rebuild E~(t) = C t^{N(N+b)} F(t) and the density
of the first eigenphase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import gmpy2
import numpy as np
from gmpy2 import mpq

from .errors import DomainError, RecursionStall
from .params import EnsembleParams, SolutionGrid, phi_to_t
from .ratseries import RationalSeries, UnknownSeries, XPoly, to_mpq
from .special import log_selberg, log_selberg_noninteger

__all__ = [
    "SERIES_TRUST_T",
    "SeriesSolution",
    "default_degree",
    "density_grid",
    "evaluate",
    "export_coefficients",
    "from_coefficients",
    "heine_F",
    "h0_h1",
    "leading_constant",
    "load_coefficients",
    "pez_residual",
    "reconstruct_F",
    "solve",
    "solve_coefficients",
]

# beyond this abscissa the expansion about t = 0 is flagged as untrusted
SERIES_TRUST_T = 0.9
_ENDPOINT_GUARD = 1e-6


def default_degree(params: EnsembleParams) -> int:
    N = params.N
    if N <= 2:
        return 100
    if N <= 5:
        return 300
    raise DomainError(f"no default series degree for N={N} > 5; pass one explicitly")


def h0_h1(params: EnsembleParams) -> tuple[mpq, mpq]:
    """Leading coefficients of h(t) from the t -> 0 boundary condition."""
    a, b, N = (to_mpq(x) for x in (params.a, params.b, params.N))
    if 2 * N + b == 0:
        raise DomainError("boundary condition is singular for 2N + b = 0")
    e2, e2p = to_mpq(params.e2), to_mpq(params.e2p)
    h0 = -e2 / 2 - N * (b + N)
    h1 = e2p + N * (N + b) * (2 * N + a + b) / (2 * N + b)
    return h0, h1


def pez_residual(h, params: EnsembleParams):
    """RHS - LHS of the sigma form evaluated on the truncated series ``h``.

    Works for :class:`RationalSeries` and :class:`UnknownSeries`; a series
    known modulo t^D gives a residual known modulo t^(D-1).
    """
    if h.trunc < 3:
        raise DomainError("pez_residual needs h known to at least t^2")
    b1, b2, b3, b4 = (to_mpq(x) for x in params.bvec)
    u = h.derivative()
    hpp = u.derivative()
    v = hpp.shift(1) - hpp.shift(2)
    w = 2 * h - (2 * u.shift(1) - u)
    lhs_sq = u * (v * v)
    cross = u * w + b1 * b2 * b3 * b4
    rhs = (u + b1 * b1) * (u + b2 * b2) * ((u + b3 * b3) * (u + b4 * b4))
    return lhs_sq + cross * cross - rhs


def _rational_sqrt(q: mpq):
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    if gmpy2.is_square(n) and gmpy2.is_square(d):
        return mpq(gmpy2.isqrt(n), gmpy2.isqrt(d))
    return None


def _select_root(p: XPoly, k: int) -> mpq | None:
    """Root of p_k used as h_k; ``None`` when p_k vanishes identically."""
    deg = p.degree
    if deg < 0:
        return None
    if deg == 0:
        raise RecursionStall(f"p_{k}(X) is a nonzero constant", k=k)
    if deg == 1:
        c0, c1 = p.c
        return -c0 / c1
    if deg == 2 and k == 2:
        c0, c1, c2 = p.c
        if c0 == 0:
            # trivial root X = 0; the other root (0 again if c1 == 0)
            return -c1 / c2
        s = _rational_sqrt(c1 * c1 - 4 * c0 * c2)
        if s is None:
            raise RecursionStall(f"p_{k}(X) has no rational root", k=k)
        r1, r2 = (-c1 + s) / (2 * c2), (-c1 - s) / (2 * c2)
        if r1 == r2:
            return r1
        raise RecursionStall(f"p_{k}(X) has two nonzero roots {r1}, {r2}", k=k)
    raise RecursionStall(f"p_{k}(X) has X-degree {deg}", k=k)


def heine_F(params: EnsembleParams, D: int) -> RationalSeries:
    """F(t) modulo t^D for integer N, without the differential equation.

    Scaling the levels by t turns E~(t) into C t^(N(N+b)) <prod_j (1 - t y_j)^a>
    over the density prod_j y_j^b Delta(y)^2 on [0, 1]^N.  By Andreief's
    identity that average is det M(t) / det M(0) with
    M_il(t) = int_0^1 y^(i+l+b) (1 - t y)^a dy.
    """
    if not params.rational_mode or not params.N_is_integer:
        raise DomainError("heine_F needs exact a, b and integer N")
    n = int(params.N)
    a, b = to_mpq(params.a), to_mpq(params.b)
    # (-1)^m binom(a, m)
    c = [mpq(1)]
    for m in range(1, D):
        c.append(-c[-1] * (a - m + 1) / m)
    M = [
        [RationalSeries([c[m] / (i + l + b + m + 1) for m in range(D)], D) for l in range(n)]
        for i in range(n)
    ]
    det = RationalSeries([1] + [0] * (D - 1), D)
    # leading minors of M(0) are Gram determinants, so no pivoting is needed
    for col in range(n):
        piv = M[col][col]
        det = det * piv
        inv = piv.inverse()
        for r in range(col + 1, n):
            f = M[r][col] * inv
            for l in range(col + 1, n):
                M[r][l] = M[r][l] - f * M[col][l]
    return det * (1 / det[0])


class _Resonance:
    """Supplies h_k at steps where p_k(X) vanishes identically.

    The local solutions differ by a multiple of t^(2N+b+1), so for integer
    2N + b the recursion leaves that coefficient free.  For a = 0 the answer
    is 0 (F = 1); for integer N it is read off the Heine determinant;
    otherwise the step is reported as a stall.
    """

    def __init__(self, params: EnsembleParams, D: int):
        self.params = params
        self.D = D
        self._logF = None

    def __call__(self, k: int, g: list) -> mpq:
        p = self.params
        if p.a == 0:
            return mpq(0)
        if not p.N_is_integer:
            raise RecursionStall(f"p_{k}(X) vanishes identically and N is not an integer", k=k)
        if self._logF is None or self._logF.trunc <= k:
            order = min(self.D, max(2 * k + 2, 16))
            self._logF = heine_F(p, max(order, k + 1)).log()
        # (log F)_k = -(1/k) sum_{i<k} gam_i, gam_0 = h_1 - e2' - L, gam_i = h_(i+1)
        gam0 = g[1] - to_mpq(p.e2p) - to_mpq(p.lead_exp)
        known = gam0 + sum(g[2:k], mpq(0))
        return -k * self._logF[k] - known


def _solve_direct(params, D, h0, h1, degenerate):
    g = [h0, h1]
    X = XPoly.X()
    resolve = _Resonance(params, D)
    for k in range(2, D):
        # coefficient of t^(k+1) is left at 0: h known only mod t^(k+2)
        h = UnknownSeries(list(g) + [X, 0], k + 2)
        pk = pez_residual(h, params)[k]
        g.append(_pick(pk, k, degenerate, resolve, g))
    return g


def _pick(pk, k, degenerate, resolve, g):
    root = _select_root(pk, k)
    if root is None:
        degenerate.append(k)
        return resolve(k, g)
    return root


class _Incremental:
    """Coefficient-at-a-time evaluation of the residual's t^k coefficient.

    Every intermediate series (h', t(1-t)h'', products, ...) keeps the
    entries that no longer depend on the unknown.  At step k those are
    indices 0..k-2; indices k-1 and k are recomputed per trial value of X,
    and only the convolution terms touching them differ between trials.
    """

    PRODUCTS = (
        # name, left, right
        ("P", "U", "W"),
        ("Q", "P", "P"),
        ("V2", "V", "V"),
        ("T1", "U", "V2"),
        ("R12", "R1", "R2"),
        ("R34", "R3", "R4"),
        ("R", "R12", "R34"),
    )

    def __init__(self, params: EnsembleParams, g: list[mpq]):
        self.g = g
        bv = [to_mpq(x) for x in params.bvec]
        self.bsq = [x * x for x in bv]
        self.b1234 = bv[0] * bv[1] * bv[2] * bv[3]
        names = ["U", "V", "W", "R1", "R2", "R3", "R4"] + [p[0] for p in self.PRODUCTS]
        self.fin = {n: [] for n in names}

    # -- linear pieces -------------------------------------------------
    def _hpp(self, i, hh):
        if i < 0:
            return mpq(0)
        return (i + 2) * (i + 1) * hh(i + 2)

    def _linear(self, j, hh):
        u = (j + 1) * hh(j + 1)
        u_prev = j * hh(j) if j >= 1 else mpq(0)
        v = self._hpp(j - 1, hh) - self._hpp(j - 2, hh)
        w = 2 * hh(j) + u - 2 * u_prev
        return u, v, w

    @staticmethod
    def _conv(a, b, n):
        acc = mpq(0)
        for i in range(n + 1):
            x = a[i]
            if x:
                y = b[n - i]
                if y:
                    acc += x * y
        return acc

    def finalize(self, j):
        """Append the entry at index j (must be independent of the unknown)."""
        g = self.g
        hh = lambda i: g[i]  # noqa: E731
        fin = self.fin
        u, v, w = self._linear(j, hh)
        fin["U"].append(u)
        fin["V"].append(v)
        fin["W"].append(w)
        for r, bsq in zip(("R1", "R2", "R3", "R4"), self.bsq):
            fin[r].append(u + bsq if j == 0 else u)
        for name, left, right in self.PRODUCTS:
            c = self._conv(fin[left], fin[right], j)
            if name == "P" and j == 0:
                c += self.b1234
            fin[name].append(c)

    def tail_coefficients(self, k, trials):
        """Residual coefficients at t^(k-1) and t^k for each trial X."""
        fin = self.fin
        hi = k - 2
        common = {}
        for name, left, right in self.PRODUCTS:
            a, b = fin[left], fin[right]
            for n in (k - 1, k):
                lo = n - hi
                acc = mpq(0)
                for i in range(lo, hi + 1):
                    x = a[i]
                    if x:
                        y = b[n - i]
                        if y:
                            acc += x * y
                common[name, n] = acc

        out = []
        g = self.g
        for X in trials:
            def hh(i, X=X):
                if i < k:
                    return g[i]
                return X if i == k else mpq(0)

            ext = {}
            for name, seq in fin.items():
                ext[name] = {}
            for j in (k - 1, k):
                u, v, w = self._linear(j, hh)
                ext["U"][j], ext["V"][j], ext["W"][j] = u, v, w
                for r in ("R1", "R2", "R3", "R4"):
                    ext[r][j] = u

            def val(name, i):
                return fin[name][i] if i <= hi else ext[name][i]

            for name, left, right in self.PRODUCTS:
                for n in (k - 1, k):
                    lo = n - hi
                    acc = common[name, n]
                    for i in range(n + 1):
                        if lo <= i <= hi:
                            continue
                        acc += val(left, i) * val(right, n - i)
                    ext[name][n] = acc
            pez = tuple(
                ext["T1"][n] + ext["Q"][n] - ext["R"][n] for n in (k - 1, k)
            )
            out.append(pez)
        return out


def _solve_incremental(params, D, h0, h1, degenerate):
    g = [h0, h1]
    inc = _Incremental(params, g)
    resolve = _Resonance(params, D)
    one = mpq(1)
    for k in range(2, D):
        inc.finalize(k - 2)
        (l0, p0), (l1, p1), (lm, pm) = inc.tail_coefficients(k, (mpq(0), one, -one))
        # degree <= 2 in X at t^k, so three samples determine p_k exactly
        c2 = (p1 + pm) / 2 - p0
        c1 = (p1 - pm) / 2
        pk = XPoly((p0, c1, c2))
        hk = _pick(pk, k, degenerate, resolve, g)
        # the t^(k-1) coefficient must vanish whatever X is
        if l0 != 0 or l1 != 0 or lm != 0:
            raise RecursionStall(f"residual at t^{k - 1} is nonzero; earlier coefficients inconsistent", k=k)
        g.append(hk)
    return g


def solve_coefficients(
    params: EnsembleParams, D: int, method: str = "incremental", degenerate: list | None = None
) -> RationalSeries:
    """Exact coefficients h_0..h_{D-1} of the auxiliary Hamiltonian at t = 0.

    Parameters
    ----------
    method
        ``"incremental"`` (default) updates a single new coefficient of every
        intermediate series per step.  ``"direct"`` rebuilds the residual in
        Q[X][[t]] modulo t^(k+2) at every step; it is slower and exists as an
        independent check.
    degenerate
        If given, receives every k at which p_k(X) vanished identically.
        There h_k is 0 when a = 0 and otherwise comes from :func:`heine_F`
        (integer N only; a :class:`RecursionStall` is raised for other N).
    """
    if not params.rational_mode:
        raise DomainError("the series method needs exact rational a, b, N")
    if D < 3:
        raise DomainError("series degree must be at least 3")
    h0, h1 = h0_h1(params)
    if degenerate is None:
        degenerate = []
    if method == "incremental":
        g = _solve_incremental(params, D, h0, h1, degenerate)
    elif method == "direct":
        g = _solve_direct(params, D, h0, h1, degenerate)
    else:
        raise ValueError(f"unknown method {method!r}")
    return RationalSeries(g, D)


def reconstruct_F(h: RationalSeries, params: EnsembleParams) -> RationalSeries:
    """Regular factor F(t) = exp int_0^t (h^(1) - e2' - N(N+b)) / (tau - 1)."""
    h1 = RationalSeries(h.coeffs[1:], h.trunc - 1)
    shift = to_mpq(params.e2p) + to_mpq(params.lead_exp)
    return (h1 - shift).div_by_t_minus_1().integrate().exp()


def leading_constant(params: EnsembleParams, route: str = "auto") -> float:
    """C = S_N(1, b+1; 1) / S_N(a+1, b+1; 1).

    ``route`` is ``"product"`` (integer N only), ``"barnes"`` or ``"auto"``.
    """
    a, b, N = params.a_f, params.b_f, params.N_f
    if route == "auto":
        route = "product" if params.N_is_integer else "barnes"
    if route == "product":
        if not params.N_is_integer:
            raise DomainError("the Selberg product needs integer N")
        n = int(params.N)
        return math.exp(log_selberg(n, 1.0, b + 1.0) - log_selberg(n, a + 1.0, b + 1.0))
    if route == "barnes":
        return math.exp(
            log_selberg_noninteger(N, 1.0, b + 1.0) - log_selberg_noninteger(N, a + 1.0, b + 1.0)
        )
    raise ValueError(f"unknown route {route!r}")


@dataclass
class SeriesSolution:
    params: EnsembleParams
    degree: int
    h: RationalSeries
    F: RationalSeries
    lead_coef: float
    lead_exp: mpq
    htilde: RationalSeries
    degenerate_steps: tuple = ()
    _F_f: np.ndarray = field(init=False, repr=False)
    _ht_f: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self._F_f = np.array(self.F.to_floats())
        self._ht_f = np.array(self.htilde.to_floats())


def solve(params: EnsembleParams, D: int | None = None, method: str = "incremental") -> SeriesSolution:
    """Run the full series method: coefficients, F, and the leading constant."""
    if D is None:
        D = default_degree(params)
    degenerate = []
    h = solve_coefficients(params, D, method=method, degenerate=degenerate)
    return from_coefficients(params, h, degenerate)


def from_coefficients(params: EnsembleParams, h: RationalSeries, degenerate=()) -> SeriesSolution:
    """Build a solution from already computed (e.g. reloaded) coefficients h_0..h_{D-1}."""
    D = h.trunc
    if D < 3:
        raise DomainError("need at least three coefficients")
    F = reconstruct_F(h, params)
    htilde = RationalSeries(h.coeffs[1:], D - 1) - to_mpq(params.e2p)
    return SeriesSolution(
        params=params,
        degree=D,
        h=h,
        F=F,
        lead_coef=leading_constant(params),
        lead_exp=to_mpq(params.lead_exp),
        htilde=htilde,
        degenerate_steps=tuple(degenerate),
    )


def _horner(coeffs: np.ndarray, t):
    acc = np.zeros_like(t)
    for c in coeffs[::-1]:
        acc = acc * t + c
    return acc


def evaluate(sol: SeriesSolution, t):
    """E~(t) and E~'(t) from the truncated series; ``t`` in (0, 1)."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr <= 0) or np.any(arr >= 1):
        raise DomainError("series evaluation needs 0 < t < 1")
    L = float(sol.lead_exp)
    E = sol.lead_coef * arr**L * _horner(sol._F_f, arr)
    Ep = (_horner(sol._ht_f, arr) / (arr - 1.0) + L / (arr * (1.0 - arr))) * E
    if np.ndim(t) == 0:
        return float(E), float(Ep)
    return E, Ep


def density_grid(sol: SeriesSolution, phis) -> SolutionGrid:
    """Sample E and nu(phi) = sqrt(t(1-t)) E~'(t) on ``phis``."""
    phi = np.sort(np.asarray(phis, dtype=float))
    if np.any(phi <= 0) or np.any(phi >= math.pi):
        raise DomainError("density_grid needs phi in (0, pi)")
    t = phi_to_t(phi)
    E, Ep = evaluate(sol, t)
    nu = np.sqrt(t * (1.0 - t)) * Ep
    guard = (phi < _ENDPOINT_GUARD) | (phi > math.pi - _ENDPOINT_GUARD)
    nu = np.where(guard, 0.0, nu)
    meta = {
        "degree": sol.degree,
        "trust_t": SERIES_TRUST_T,
        "trusted": t <= SERIES_TRUST_T,
    }
    return SolutionGrid.from_phi(phi, E, nu, "series", sol.params, meta)


def export_coefficients(h: RationalSeries, path) -> None:
    """Write one ``k p/q`` line per coefficient."""
    lines = [f"{k} {c.numerator}/{c.denominator}" for k, c in enumerate(h.coeffs)]
    Path(path).write_text("\n".join(lines) + "\n")


def load_coefficients(path) -> RationalSeries:
    coeffs = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        k, frac = line.split()
        if int(k) != len(coeffs):
            raise ValueError(f"coefficient file out of order at k={k}")
        coeffs.append(mpq(frac))
    return RationalSeries(coeffs)
