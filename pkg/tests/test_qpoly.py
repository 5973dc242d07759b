"""Ring and evaluation properties of the exact q-polynomials."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qwalklab.qpoly import QPolynomial

coeff_lists = st.lists(st.integers(min_value=-50, max_value=50), max_size=8)
rationals = st.fractions(
    max_denominator=20,
).filter(lambda f: abs(f) <= 50)


def test_normalization_strips_trailing_zeros():
    p = QPolynomial((1, 2, 0, 0))
    assert p.coeffs == (1, 2)
    assert p.degree == 1
    assert QPolynomial((0, 0)).is_zero()
    assert QPolynomial().degree == -1


def test_leading_coefficient_nonzero_unless_zero():
    assert QPolynomial((0, 0, 7)).leading_coefficient == 7
    assert QPolynomial().leading_coefficient == 0


def test_monomial_and_indexing():
    m = QPolynomial.monomial(3, 4)
    assert m[4] == 3 and m[0] == 0 and m[10] == 0
    with pytest.raises(ValueError):
        QPolynomial.monomial(1, -1)


def test_rejects_non_integer_coefficients():
    with pytest.raises(TypeError):
        QPolynomial((1.5,))


def test_str_rendering():
    p = QPolynomial((-4, 0, 4))
    assert str(p) == "4q^2 - 4"
    assert str(QPolynomial()) == "0"
    assert str(QPolynomial((2, 2, 2))) == "2q^2 + 2q + 2"
    assert str(QPolynomial((0, 1))) == "q"


def test_arithmetic_examples():
    q = QPolynomial.q()
    assert (q + 1) * (q - 1) == q**2 - 1
    assert (q + 1) ** 2 == q**2 + 2 * q + 1
    assert 2 * q - q == q


@given(coeff_lists, coeff_lists)
def test_addition_commutes(a, b):
    pa, pb = QPolynomial(a), QPolynomial(b)
    assert pa + pb == pb + pa


@given(coeff_lists, coeff_lists, coeff_lists)
def test_multiplication_distributes(a, b, c):
    pa, pb, pc = QPolynomial(a), QPolynomial(b), QPolynomial(c)
    assert pa * (pb + pc) == pa * pb + pa * pc


@given(coeff_lists, coeff_lists, rationals)
def test_evaluation_is_a_ring_homomorphism(a, b, x):
    pa, pb = QPolynomial(a), QPolynomial(b)
    assert (pa + pb)(x) == pa(x) + pb(x)
    assert (pa * pb)(x) == pa(x) * pb(x)


@given(coeff_lists, st.integers(min_value=-30, max_value=30))
def test_integer_evaluation_is_exact_bigint(a, x):
    p = QPolynomial(a)
    expected = sum(c * x**i for i, c in enumerate(a))
    assert p(x) == expected
    assert isinstance(p(x), int)


def test_exact_rational_evaluation():
    p = QPolynomial((1, 1))  # q + 1
    assert p(Fraction(5, 2)) == Fraction(7, 2)
