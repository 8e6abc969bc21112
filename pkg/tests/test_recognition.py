import random
from fractions import Fraction

import gmpy2
import pytest
from gmpy2 import mpc, mpfr
from hypothesis import given, settings, strategies as st

from belyi.recognition import (DependentRowsError, IntegerLattice, RecognitionError, algdep,
                               exactify, gram_determinant, integer_relation, lll_reduce,
                               polynomial_roots, unify_field)
from belyi.series import bits
from belyi.verify import affine_match, find_entry, identity_check

from helpers import numeric_from_exact


def _half_one_plus_sqrt(v, digits):
    """``(1 + sqrt(v)) / 2`` at ``digits`` digits."""
    with gmpy2.context(precision=bits(digits) + 32):
        return (1 + gmpy2.sqrt(mpc(v))) / 2


def test_lll_identity_is_fixed():
    L = IntegerLattice(((1, 0, 0), (0, 1, 0), (0, 0, 1)))
    assert lll_reduce(L) == L


def test_lll_two_dimensional():
    red = lll_reduce(IntegerLattice(((1, 0), (4, 1))), Fraction(3, 4))
    assert sum(v * v for v in red.rows[0]) <= 2


def test_lll_rejects_dependent_rows():
    with pytest.raises(DependentRowsError):
        lll_reduce(IntegerLattice(((1, 2, 3), (2, 4, 6))))


def test_lll_rejects_bad_delta():
    with pytest.raises(ValueError):
        lll_reduce(IntegerLattice(((1, 0),)), Fraction(1, 5))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(-50, 50), min_size=4, max_size=4), min_size=4, max_size=4))
def test_lll_properties(rows):
    L = IntegerLattice(tuple(map(tuple, rows)))
    det = gram_determinant(L)
    if det == 0:
        return
    red = lll_reduce(L)
    # unimodular change of basis: same covolume
    assert gram_determinant(red) == det
    # the reduced basis lies in the original lattice: solving in rationals gives integers
    M = [[Fraction(v) for v in r] for r in rows]
    for r in red.rows:
        coeffs = _solve_rational(M, [Fraction(v) for v in r])
        assert all(c.denominator == 1 for c in coeffs)
    # size-reduced first vector is no longer than the shortest input row times 2^(n/2)
    first = sum(v * v for v in red.rows[0])
    assert first <= 2 ** 3 * min(sum(v * v for v in r) for r in rows)


def _solve_rational(M, target):
    """Solve ``sum_i x_i M[i] = target`` exactly (M square, invertible)."""
    n = len(M)
    A = [[M[i][j] for i in range(n)] + [target[j]] for j in range(n)]
    for c in range(n):
        p = next(r for r in range(c, n) if A[r][c] != 0)
        A[c], A[p] = A[p], A[c]
        for r in range(n):
            if r != c and A[r][c]:
                f = A[r][c] / A[c][c]
                A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    return [A[i][n] / A[i][i] for i in range(n)]


def test_integer_relation_pi():
    with gmpy2.context(precision=300):
        pi = gmpy2.const_pi()
        m = integer_relation([pi, 3 * pi + 1, mpfr(1)], 80)
    assert abs(m[0] + 3 * m[1]) == 0 and m[1] + m[2] == 0 and m[1] != 0


def test_algdep_golden_ratio():
    with gmpy2.context(precision=400):
        phi = (1 + gmpy2.sqrt(mpfr(5))) / 2
    assert algdep(phi, 4, 100).poly == (-1, -1, 1)


def test_algdep_sqrt_minus_23():
    x = _half_one_plus_sqrt(-23, 100)
    assert algdep(x, 6, 100).poly == (6, -1, 1)


def test_algdep_eisenstein_integer():
    x = _half_one_plus_sqrt(-3, 80)
    assert algdep(x, 6, 80).poly == (1, -1, 1)


def test_algdep_rational():
    with gmpy2.context(precision=300):
        x = mpfr(-22) / 7
    assert algdep(x, 6, 60).poly == (22, 7)


def test_algdep_gives_up_on_transcendental():
    with gmpy2.context(precision=300):
        x = gmpy2.const_pi()
    with pytest.raises(RecognitionError):
        algdep(x, 4, 60)


def test_algdep_random_round_trip():
    rng = random.Random(2024)
    for _ in range(10):
        while True:
            f = [rng.randint(-10, 10) for _ in range(rng.randint(2, 5))] + [rng.randint(1, 10)]
            if f[0] != 0:
                break
        root = polynomial_roots(f, 100)[0]
        g = algdep(root, 6, 100).poly
        # g divides f over Q: the minimal polynomial of a root of f
        assert _divides(g, f)


def _divides(g, f):
    f = [Fraction(v) for v in f]
    while len(f) >= len(g):
        q = f[-1] / g[-1]
        shift = len(f) - len(g)
        for i, c in enumerate(g):
            f[shift + i] -= q * c
        f.pop()
    return all(v == 0 for v in f)


def test_polynomial_roots():
    roots = polynomial_roots([6, -5, 1], 40)
    assert sorted(round(float(r.real), 12) for r in roots) == [2.0, 3.0]


def test_unify_field_rational():
    with gmpy2.context(precision=300):
        vals = [mpfr(1) / 3, mpfr(-5), mpfr(7) / 11]
    uf = unify_field(vals, 4, 60)
    assert uf.field.is_rational
    assert uf.coords == [(Fraction(1, 3),), (Fraction(-5),), (Fraction(7, 11),)]


@pytest.mark.parametrize("label,degree", [("7.1", 2), ("13.1", 4)])
def test_unify_field_catalog(label, degree):
    exact, num = numeric_from_exact(find_entry(label), 150)
    uf = unify_field(num.vector(), 8, 150)
    assert uf.field.degree == degree


def test_unify_field_grows_primitive_element():
    # sqrt2 and sqrt3 each have degree 2; the common field has degree 4
    with gmpy2.context(precision=500):
        vals = [gmpy2.sqrt(mpfr(2)), gmpy2.sqrt(mpfr(3))]
    uf = unify_field(vals, 4, 120)
    assert uf.field.degree == 4


@pytest.mark.parametrize("label", ["6.1", "7.1", "9.2"])
def test_exactify_round_trip(label):
    entry = find_entry(label)
    exact, num = numeric_from_exact(entry, 80)
    ans, report = exactify(num, 8)
    assert identity_check(ans)
    assert report.max_deviation < -40
    assert affine_match(ans, entry.ansatz) is not None
