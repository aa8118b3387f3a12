from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdquant import (ContextMismatch, NotUnit, OrderedScalar, Scalar, Sign, TruncationContext,
                     ordered_sign, scalar_conj, scalar_from_json, scalar_invert, scalar_mul,
                     scalar_to_json)
from oracles import fraction_series_mul, scalar_to_sympy, series_sign, truncate
from strategies import ordered_scalars, scalars

N2 = TruncationContext(2)


def S(*coeffs, order=2):
    return Scalar.series(coeffs, order)


def test_unit_is_neutral():
    s = S(3, (1, 2), -1)
    assert scalar_mul(Scalar.one(2), s, N2) == s


def test_difference_of_squares():
    assert scalar_mul(S(1, 1), S(1, -1), N2) == S(1, 0, -1)


def test_truncation_drops_high_terms():
    a = S(0, 1, 1)
    assert scalar_mul(a, a, N2) == S(0, 0, 1)


def test_context_mismatch():
    with pytest.raises(ContextMismatch):
        S(1, order=2) + S(1, order=3)
    with pytest.raises(ContextMismatch):
        scalar_mul(S(1, order=3), S(1, order=3), N2)


def test_conjugation():
    assert scalar_conj(S(0, (0, 1))) == S(0, (0, -1))
    real = S(1, 2, 3)
    assert scalar_conj(real) == real


def test_ordered_sign_examples():
    assert ordered_sign(OrderedScalar([0, 0, 0])) is Sign.ZERO
    assert ordered_sign(OrderedScalar([0, 2, -3])) is Sign.POSITIVE
    assert ordered_sign(OrderedScalar([-1, 100])) is Sign.NEGATIVE


def test_inverse_examples():
    assert scalar_invert(Scalar.one(2), N2) == Scalar.one(2)
    inv = scalar_invert(S(1, 1), N2)
    assert inv == S(1, -1, 1)
    assert inv * S(1, 1) == Scalar.one(2)
    with pytest.raises(NotUnit):
        scalar_invert(Scalar.lam(2), N2)


def test_inverse_of_complex_unit():
    a = S((1, 1), 3, (0, -2))
    assert a * a.inverse() == Scalar.one(2)


def test_sqrt_real_unit():
    a = S(1, 3, -1, order=4)
    r = a.sqrt_real_unit()
    assert r * r == a


def test_divide_by():
    a = Scalar.lam(3, 2) * S(2, 1, order=3)
    q = a.divide_by(S(0, 1, 5, order=3))
    assert q * S(0, 1, 5, order=3) == a


def test_json_roundtrip_and_validation():
    s = S(Fraction(1, 3), (0, -2), Fraction(-5, 7))
    assert scalar_from_json(scalar_to_json(s)) == s
    with pytest.raises(ValueError):
        scalar_from_json([[2, 4, 0, 1]])
    with pytest.raises(ValueError):
        scalar_from_json([[1, 0, 0, 1]])
    with pytest.raises(ValueError):
        scalar_from_json([])


def test_text_rendering():
    assert str(S(0, 2, -1)) == "2*lam - lam^2"
    assert str(S((0, Fraction(1, 2)), 0, 0)) == "1/2*i"
    assert str(Scalar.zero(2)) == "0"


# -- ordered-ring laws --------------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(ordered_scalars(), ordered_scalars(), ordered_scalars())
def test_order_axioms(a, b, c):
    # trichotomy
    assert sum([a < b, a == b, a > b]) == 1
    # compatibility with addition and with multiplication by positives
    if a <= b:
        assert a + c <= b + c
        if c >= 0:
            assert a * c <= b * c
    # squares are non-negative
    assert a * a >= 0


@settings(max_examples=200, deadline=None)
@given(scalars(), scalars())
def test_conj_times_self_is_nonnegative(s, t):
    assert s.abs2() >= 0
    assert (s.conj() * s).is_real()
    assert (s * t).conj() == t.conj() * s.conj()


@settings(max_examples=100, deadline=None)
@given(ordered_scalars(), ordered_scalars())
def test_multiplication_matches_fraction_oracle(a, b):
    fa = [Fraction(int(c.numerator), int(c.denominator)) for c in a.coeffs]
    fb = [Fraction(int(c.numerator), int(c.denominator)) for c in b.coeffs]
    expect = fraction_series_mul(fa, fb)
    got = [Fraction(int(c.numerator), int(c.denominator)) for c in (a * b).coeffs]
    assert got == expect
    assert series_sign(got) == {Sign.POSITIVE: 1, Sign.NEGATIVE: -1, Sign.ZERO: 0}[(a * b).sign()]


@settings(max_examples=50, deadline=None)
@given(scalars(order=3), scalars(order=3))
def test_complex_multiplication_matches_sympy(s, t):
    assert scalar_to_sympy(s * t) == truncate(scalar_to_sympy(s) * scalar_to_sympy(t), 3)


@settings(max_examples=100, deadline=None)
@given(scalars(order=4))
def test_inverse_property(s):
    if s.re[0] == 0 and s.im[0] == 0:
        with pytest.raises(NotUnit):
            s.inverse()
    else:
        assert s * s.inverse() == Scalar.one(4)


@given(st.integers(min_value=0, max_value=6), st.integers(min_value=0, max_value=8))
def test_lambda_powers(order, k):
    s = Scalar.lam(order, k)
    assert s.valuation() == (k if k <= order else None)
