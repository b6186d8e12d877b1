from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from jacobi_gap.errors import DomainError
from jacobi_gap.ratseries import RationalSeries, UnknownSeries, XPoly

F = Fraction

coef = st.fractions(min_value=-5, max_value=5, max_denominator=12)


def series(min_size=1, max_size=8):
    return st.lists(coef, min_size=min_size, max_size=max_size).map(RationalSeries)


def unit_series(max_size=8):
    return st.lists(coef, min_size=0, max_size=max_size - 1).map(lambda c: RationalSeries([1] + c))


def _brute_mul(a, b):
    D = min(len(a), len(b))
    return [sum((a[i] * b[n - i] for i in range(n + 1)), mpq(0)) for n in range(D)]


@given(series(), series(), series())
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == RationalSeries.zeros(len(a))


@given(series(), series())
def test_mul_matches_convolution(a, b):
    prod = a * b
    assert prod.trunc == min(a.trunc, b.trunc)
    assert list(prod.coeffs) == _brute_mul(a, b)


@given(series(), coef)
def test_scalar_ops_keep_truncation(a, c):
    assert (a * c).trunc == a.trunc
    assert (a + c)[0] == a[0] + c
    assert (c - a) == -(a - c)


@given(series())
def test_integrate_then_differentiate(a):
    assert a.integrate().derivative() == a


@given(series(min_size=2))
def test_shift_and_derivative(a):
    s = a.shift(2)
    assert s.trunc == a.trunc + 2
    assert s[0] == 0 and s[1] == 0 and s[2] == a[0]
    assert a.derivative()[0] == a[1]


@given(series())
def test_div_by_t_minus_1_multiplies_back(a):
    q = a.div_by_t_minus_1()
    assert q * RationalSeries([-1, 1] + [0] * a.trunc) == a


@given(series(max_size=7).map(lambda s: RationalSeries([0] + list(s.coeffs))))
@settings(max_examples=50)
def test_exp_of_negation_is_inverse(a):
    one = RationalSeries.monomial(0, a.trunc)
    assert a.exp() * (-a).exp() == one


@given(series(max_size=7).map(lambda s: RationalSeries([0] + list(s.coeffs))))
@settings(max_examples=50)
def test_exp_derivative(a):
    e = a.exp()
    assert e.derivative() == (a.derivative() * e).truncate(a.trunc - 1)


@given(unit_series())
@settings(max_examples=50)
def test_inverse_and_log(a):
    one = RationalSeries.monomial(0, a.trunc)
    assert a * a.inverse() == one
    assert (a / a) == one
    assert a.log().exp().truncate(a.trunc) == a


def test_log_of_one_minus_t():
    s = RationalSeries([1, -1, 0, 0, 0, 0])
    assert s.log().to_fractions()[: 6] == [0, -1, F(-1, 2), F(-1, 3), F(-1, 4), F(-1, 5)]


def test_exp_and_log_domain():
    with pytest.raises(DomainError):
        RationalSeries([1, 2]).exp()
    with pytest.raises(DomainError):
        RationalSeries([2, 1]).log()
    with pytest.raises(DomainError):
        RationalSeries([0, 1]).inverse()


def test_exp_known_coefficients():
    e = RationalSeries([0, 1, 0, 0, 0, 0]).exp()
    assert e.to_fractions() == [1, 1, F(1, 2), F(1, 6), F(1, 24), F(1, 120)]


def test_horner_example():
    s = RationalSeries([1, F(1, 2), F(1, 4)])
    assert s.eval_exact(F(1)) == mpq(7, 4)
    assert s.eval(1.0) == 1.75


@given(st.lists(coef, min_size=21, max_size=21), st.fractions(min_value=-1, max_value=1, max_denominator=16))
def test_float_eval_matches_exact(c, t0):
    s = RationalSeries(c)
    assert s.trunc == 21
    exact = float(s.eval_exact(t0))
    assert s.eval(float(t0)) == pytest.approx(exact, abs=1e-12 * max(1.0, abs(exact)))


@given(series())
def test_dumps_loads_round_trip(a):
    assert RationalSeries.loads(a.dumps()) == a


def test_dumps_format():
    assert RationalSeries([F(-3, 8), 2]).dumps() == "-3/8,2/1"


def test_min_truncation_rule():
    a = RationalSeries([1, 2, 3, 4])
    b = RationalSeries([1, 1])
    assert (a + b).trunc == 2
    assert (a * b).trunc == 2


def test_xpoly_arithmetic():
    X = XPoly.X()
    p = (X + 1) * (X - 1)
    assert p == XPoly((-1, 0, 1))
    assert p.degree == 2
    assert p(3) == 8
    assert not XPoly()
    assert XPoly((0, 0)).degree == -1


def test_unknown_series_substitution():
    X = XPoly.X()
    u = UnknownSeries([1, X, X * X])
    r = RationalSeries([2, 3, 4])
    prod = u * r
    assert isinstance(prod, UnknownSeries)
    assert prod.x_degree() == 2
    assert prod.substitute(5) == RationalSeries([1, 5, 25]) * r


def test_rational_series_rejects_polynomials():
    with pytest.raises(TypeError):
        RationalSeries([XPoly.X()])
