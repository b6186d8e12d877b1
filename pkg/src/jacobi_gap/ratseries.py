"""Truncated power series in t with exact rational coefficients.

A :class:`RationalSeries` holds c_0..c_{D-1} and is known modulo t^D.
Binary operations follow the min rule: the result is known only as far as
both operands are.  Coefficients are ``gmpy2.mpq``; nothing is ever rounded
until :meth:`RationalSeries.eval` is called.

:class:`UnknownSeries` is the same object over Q[X]: each coefficient is a
polynomial in a single indeterminate X.  The series recursion uses it to
read off the polynomial p_k(X) that fixes the next coefficient.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from gmpy2 import mpq

from .errors import DomainError

__all__ = ["RationalSeries", "UnknownSeries", "XPoly", "to_mpq"]


def to_mpq(value) -> mpq:
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    return mpq(value)


class _SeriesBase:
    """Arithmetic shared by rational and Q[X] coefficient series."""

    __slots__ = ("coeffs", "trunc")

    zero = None  # coefficient zero, set by subclasses

    def __init__(self, coeffs, trunc: int | None = None):
        coeffs = [self._coerce(c) for c in coeffs]
        if trunc is None:
            trunc = len(coeffs)
        if trunc < 0:
            raise ValueError("truncation order must be non-negative")
        coeffs = coeffs[:trunc]
        coeffs.extend([self.zero] * (trunc - len(coeffs)))
        self.coeffs = coeffs
        self.trunc = trunc

    @classmethod
    def _coerce(cls, c):
        raise NotImplementedError

    @classmethod
    def _raw(cls, coeffs, trunc):
        obj = cls.__new__(cls)
        obj.coeffs = coeffs
        obj.trunc = trunc
        return obj

    def __len__(self):
        return self.trunc

    def __getitem__(self, k):
        return self.coeffs[k]

    def __repr__(self):
        head = ", ".join(str(c) for c in self.coeffs[:6])
        more = ", ..." if self.trunc > 6 else ""
        return f"{type(self).__name__}([{head}{more}], trunc={self.trunc})"

    def __eq__(self, other):
        if not isinstance(other, _SeriesBase):
            return NotImplemented
        return self.trunc == other.trunc and self.coeffs == other.coeffs

    def _lift(self, other):
        if isinstance(other, _SeriesBase):
            return other
        # scalars are exact: known to all orders
        return type(self)._raw([self._coerce(other)] + [self.zero] * (self.trunc - 1), self.trunc)

    def _result_type(self, other):
        if isinstance(other, UnknownSeries) or isinstance(self, UnknownSeries):
            return UnknownSeries
        return type(self)

    def __add__(self, other):
        other = self._lift(other)
        cls = self._result_type(other)
        D = min(self.trunc, other.trunc)
        return cls._raw([cls._coerce(self.coeffs[i]) + cls._coerce(other.coeffs[i]) for i in range(D)], D)

    __radd__ = __add__

    def __neg__(self):
        return type(self)._raw([-c for c in self.coeffs], self.trunc)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, _SeriesBase):
            c = self._coerce(other)
            return type(self)._raw([c * x for x in self.coeffs], self.trunc)
        cls = self._result_type(other)
        D = min(self.trunc, other.trunc)
        a = [cls._coerce(x) for x in self.coeffs[:D]]
        b = [cls._coerce(x) for x in other.coeffs[:D]]
        out = []
        for n in range(D):
            acc = cls.zero
            for i in range(n + 1):
                ai = a[i]
                if ai:
                    bi = b[n - i]
                    if bi:
                        acc = acc + ai * bi
            out.append(acc)
        return cls._raw(out, D)

    __rmul__ = __mul__

    def shift(self, m: int = 1):
        """Multiply by t^m (exact, so the truncation order rises by m)."""
        return type(self)._raw([self.zero] * m + list(self.coeffs), self.trunc + m)

    def derivative(self):
        """d/dt; known to one order less."""
        return type(self)._raw(
            [k * self.coeffs[k] for k in range(1, self.trunc)], max(self.trunc - 1, 0)
        )

    def truncate(self, D: int):
        D = min(D, self.trunc)
        return type(self)._raw(self.coeffs[:D], D)


class RationalSeries(_SeriesBase):
    """Power series over Q known modulo t^trunc."""

    __slots__ = ()
    zero = mpq(0)

    @classmethod
    def _coerce(cls, c):
        if isinstance(c, XPoly):
            raise TypeError("cannot store a polynomial in X in a RationalSeries")
        return to_mpq(c)

    @classmethod
    def zeros(cls, D: int) -> "RationalSeries":
        return cls._raw([mpq(0)] * D, D)

    @classmethod
    def monomial(cls, k: int, D: int, c=1) -> "RationalSeries":
        s = [mpq(0)] * D
        if k < D:
            s[k] = to_mpq(c)
        return cls._raw(s, D)

    def integrate(self) -> "RationalSeries":
        """Antiderivative with zero constant term; known to one order more."""
        return RationalSeries._raw(
            [mpq(0)] + [c / (k + 1) for k, c in enumerate(self.coeffs)], self.trunc + 1
        )

    def div_by_t_minus_1(self) -> "RationalSeries":
        """Quotient q with q (t - 1) = self, valid because t - 1 is a unit."""
        q = []
        prev = mpq(0)
        for c in self.coeffs:
            prev = prev - c
            q.append(prev)
        return RationalSeries._raw(q, self.trunc)

    def exp(self) -> "RationalSeries":
        """exp of a series with zero constant term, via n e_n = sum k a_k e_{n-k}."""
        if self.trunc == 0:
            return RationalSeries._raw([], 0)
        if self.coeffs[0] != 0:
            raise DomainError("exp needs a series with zero constant term")
        a = self.coeffs
        ka = [k * a[k] for k in range(self.trunc)]
        e = [mpq(1)]
        for n in range(1, self.trunc):
            acc = mpq(0)
            for k in range(1, n + 1):
                if ka[k]:
                    acc += ka[k] * e[n - k]
            e.append(acc / n)
        return RationalSeries._raw(e, self.trunc)

    def inverse(self) -> "RationalSeries":
        """1 / self, defined when the constant term is nonzero."""
        if self.trunc == 0:
            return RationalSeries._raw([], 0)
        a = self.coeffs
        if a[0] == 0:
            raise DomainError("series with zero constant term is not invertible")
        inv0 = 1 / a[0]
        q = [inv0]
        for n in range(1, self.trunc):
            acc = mpq(0)
            for k in range(1, n + 1):
                if a[k]:
                    acc += a[k] * q[n - k]
            q.append(-acc * inv0)
        return RationalSeries._raw(q, self.trunc)

    def __truediv__(self, other):
        if isinstance(other, _SeriesBase):
            return self * other.inverse()
        return self * (1 / to_mpq(other))

    def log(self) -> "RationalSeries":
        """log of a series with constant term 1, as the integral of a'/a."""
        if self.trunc == 0:
            return RationalSeries._raw([], 0)
        if self.coeffs[0] != 1:
            raise DomainError("log needs a series with constant term 1")
        d = self.derivative()
        return (d * self.truncate(d.trunc).inverse()).integrate()

    def eval(self, t0) -> float:
        """Floating-point Horner evaluation of the retained polynomial."""
        acc = 0.0
        x = float(t0)
        for c in reversed(self.coeffs):
            acc = acc * x + float(c)
        return acc

    def eval_exact(self, t0) -> mpq:
        """Exact Horner evaluation at a rational point."""
        acc = mpq(0)
        x = to_mpq(t0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def to_floats(self) -> list[float]:
        return [float(c) for c in self.coeffs]

    def to_fractions(self) -> list[Fraction]:
        return [Fraction(int(c.numerator), int(c.denominator)) for c in self.coeffs]

    def dumps(self) -> str:
        """Comma-separated exact ``p/q`` coefficients."""
        return ",".join(_fmt(c) for c in self.coeffs)

    @classmethod
    def loads(cls, text: str, trunc: int | None = None) -> "RationalSeries":
        parts = [p for p in text.strip().split(",") if p]
        return cls([mpq(p) for p in parts], trunc)


def _fmt(c: mpq) -> str:
    return f"{c.numerator}/{c.denominator}"


class XPoly:
    """Polynomial in one indeterminate X with mpq coefficients (low to high)."""

    __slots__ = ("c",)

    def __init__(self, coeffs: Sequence = (0,)):
        c = [to_mpq(x) for x in coeffs]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        self.c = tuple(c) if c else (mpq(0),)

    @classmethod
    def X(cls) -> "XPoly":
        return cls((0, 1))

    @property
    def degree(self) -> int:
        if len(self.c) == 1 and self.c[0] == 0:
            return -1
        return len(self.c) - 1

    def __bool__(self):
        return self.degree >= 0

    def __eq__(self, other):
        if not isinstance(other, XPoly):
            other = XPoly((other,))
        return self.c == other.c

    def __hash__(self):
        return hash(self.c)

    def __repr__(self):
        return f"XPoly({[str(x) for x in self.c]})"

    def __add__(self, other):
        if not isinstance(other, XPoly):
            other = XPoly((other,))
        n = max(len(self.c), len(other.c))
        a = self.c + (mpq(0),) * (n - len(self.c))
        b = other.c + (mpq(0),) * (n - len(other.c))
        return XPoly([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return XPoly([-x for x in self.c])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, XPoly):
            o = to_mpq(other)
            return XPoly([o * x for x in self.c])
        out = [mpq(0)] * (len(self.c) + len(other.c) - 1)
        for i, x in enumerate(self.c):
            if x:
                for j, y in enumerate(other.c):
                    out[i + j] += x * y
        return XPoly(out)

    __rmul__ = __mul__

    def __call__(self, x):
        acc = mpq(0)
        x = to_mpq(x)
        for c in reversed(self.c):
            acc = acc * x + c
        return acc


class UnknownSeries(_SeriesBase):
    """Power series whose coefficients lie in Q[X]."""

    __slots__ = ()
    zero = XPoly()

    @classmethod
    def _coerce(cls, c):
        return c if isinstance(c, XPoly) else XPoly((c,))

    def x_degree(self) -> int:
        return max((c.degree for c in self.coeffs), default=-1)

    def substitute(self, x) -> RationalSeries:
        return RationalSeries._raw([c(x) for c in self.coeffs], self.trunc)

