from fractions import Fraction

import gmpy2
import pytest
from gmpy2 import mpfr
from hypothesis import given, settings, strategies as st

from belyi.numfield import (FieldPolynomial, NumberField, decimal_string, exact_digits,
                            format_complex, parse_complex, poly_gcd, squarefree_decomposition)

FIELDS = [NumberField((0, 1)), NumberField((7, -1, 1)), NumberField((13, 0, 13, 0, 1)),
          NumberField((-2, 0, 0, 1))]

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)


@st.composite
def elements(draw, fld):
    return fld.element([draw(rationals) for _ in range(fld.degree)])


@pytest.mark.parametrize("fld", FIELDS, ids=lambda f: str(list(f.minpoly)))
@settings(max_examples=30, deadline=None)
@given(data=st.data())
def test_field_axioms(fld, data):
    a, b, c = (data.draw(elements(fld)) for _ in range(3))
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == fld.zero
    assert a * fld.one == a
    if not a.is_zero():
        assert a * a.inverse() == fld.one
        assert (b / a) * a == b


def test_generator_satisfies_minpoly():
    for fld in FIELDS[1:]:
        acc = fld.zero
        for c in reversed(fld.minpoly):
            acc = acc * fld.gen + c
        assert acc.is_zero()


def test_minpoly_content_normalized():
    assert NumberField((-14, 2, -2)).minpoly == (7, -1, 1)
    with pytest.raises(ValueError):
        NumberField((3,))


def test_reducible_minpoly_zero_divisor():
    fld = NumberField((-1, 0, 1))  # z^2 - 1 = (z-1)(z+1)
    with pytest.raises(ZeroDivisionError):
        (fld.gen - 1).inverse()


def test_inverse_of_zero():
    with pytest.raises(ZeroDivisionError):
        FIELDS[1].zero.inverse()


def test_embedding_value():
    fld = NumberField((7, -1, 1), "(0.5 2.6)")
    r = fld.embed_root(50)
    with gmpy2.context(precision=200):
        assert abs(r * r - r + 7) < 1e-45
        assert abs(r.imag - gmpy2.sqrt(mpfr(27)) / 2) < 1e-45


def _poly(fld, coeffs):
    return FieldPolynomial(fld, [fld(c) for c in coeffs])


def test_polynomial_arithmetic():
    fld = FIELDS[0]
    f = _poly(fld, [1, 1])  # z + 1
    g = _poly(fld, [-1, 1])  # z - 1
    assert f * g == _poly(fld, [-1, 0, 1])
    q, r = (f * g + fld(3)).divmod(g)
    assert q == f and r == _poly(fld, [3])
    assert (f ** 3).derivative() == f * f * 3


def test_gcd_and_squarefree():
    fld = FIELDS[1]
    a = fld.gen
    f = FieldPolynomial(fld, [-a, fld.one])  # z - a
    g = FieldPolynomial(fld, [fld(2), fld.one])  # z + 2
    h = f ** 3 * g ** 2 * FieldPolynomial(fld, [fld(5), fld.one])
    assert poly_gcd(h, f * g) == f * g
    dec = squarefree_decomposition(h)
    assert set(dec) == {1, 2, 3}
    assert dec[3] == f and dec[2] == g


def test_compose_affine():
    fld = FIELDS[0]
    f = _poly(fld, [0, 0, 1])  # z^2
    assert f.compose_affine(fld(2), fld(1)) == _poly(fld, [1, 4, 4])


@settings(max_examples=50, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False, width=64), st.integers(53, 800))
def test_decimal_string_round_trip(x, prec):
    with gmpy2.context(precision=prec):
        v = mpfr(x) * gmpy2.const_pi() if x else mpfr(0)
        text = decimal_string(v)
        assert mpfr(text) == v


def test_format_and_parse_complex():
    with gmpy2.context(precision=300):
        z = gmpy2.mpc(gmpy2.const_pi(), -gmpy2.sqrt(mpfr(2)))
        assert parse_complex(format_complex(z)) == z
    assert exact_digits(53) == 17
