import gmpy2
import numpy as np
import pytest
from gmpy2 import mpc, mpfr

from belyi.dessin import load_fixture, parse_dessin, passport
from belyi.domain import Side, coset_domain, membership_check
from belyi.series import (SeriesError, TruncatedSeries, assemble_system, evaluate_series,
                          held_out_residual, sample_arcs, series_from_text, series_schedule,
                          series_to_text, solve_dessin_series, solve_series, vertex_estimates,
                          zeta)
from belyi.verify import find_entry
from belyi.recognition import polynomial_roots

from oracles import j_coefficients, j_value

TRIVIAL = parse_dessin("n=1; a=(); b=()")


@pytest.fixture(scope="module")
def trivial_series():
    dom = coset_domain(TRIVIAL)
    return dom, solve_dessin_series(dom, passport(TRIVIAL), 24, 60)


@pytest.fixture(scope="module")
def series_6_1():
    d = load_fixture("6.1")
    dom = coset_domain(d)
    s, est, hist = series_schedule(dom, passport(d), digits=60)
    return d, dom, s, est, hist


def test_trivial_sampling_on_unit_circle():
    dom = coset_domain(TRIVIAL)
    samples = sample_arcs(dom, 2, 30)
    # translations T^j hold identically for a series in z, so only the
    # S-paired arc |tau| = 1 is sampled
    assert len(samples) == 2
    for s in samples:
        assert s.side in (Side.ARC_LEFT_HALF, Side.ARC_RIGHT_HALF)
        assert abs(abs(s.tau) - 1) < 1e-25
        assert -0.5 <= float(s.tau.real) <= 0.5


def test_sampling_k1_is_arc_midpoint():
    dom = coset_domain(TRIVIAL)
    (s,) = sample_arcs(dom, 1, 30)
    # hyperbolic midpoint of the arc from i to rho on the unit circle
    angle = float(gmpy2.atan2(s.tau.imag, s.tau.real))
    # u = log tan(theta/2) is arclength on the geodesic |tau| = 1
    assert abs(angle - 2 * np.arctan(3 ** 0.25)) < 1e-12


def test_6_1_samples_use_subgroup_pairings():
    d = load_fixture("6.1")
    dom = coset_domain(d)
    samples = sample_arcs(dom, 3, 30)
    assert len(samples) % 3 == 0
    for s in samples:
        assert membership_check(s.pairing, d, dom.root)
        assert s.tau.imag > 0


def test_trivial_normalization_rows():
    dom = coset_domain(TRIVIAL)
    samples = sample_arcs(dom, 8, 40)
    N = 6
    A, rhs = assemble_system(dom, samples, N, passport(TRIVIAL), 40)
    assert A.shape == (len(samples) + 2, N + 2)
    with gmpy2.context(precision=160):
        rho = mpc(mpfr(-0.5), gmpy2.sqrt(mpfr(3)) / 2)
        z = zeta(rho, 1, 40)
        for k in range(N + 2):
            assert abs(A[-2, k] - z ** (k - 1)) < 1e-30
        z = zeta(mpc(0, 1), 1, 40)
        for k in range(N + 2):
            assert abs(A[-1, k] - z ** (k - 1)) < 1e-30
    assert rhs[-2] == 0 and rhs[-1] == 1


def test_pasting_rows_are_power_differences():
    d = load_fixture("6.1")
    dom = coset_domain(d)
    samples = sample_arcs(dom, 3, 40)
    N = 10
    A, _ = assemble_system(dom, samples, N, passport(d), 40)
    s = samples[0]
    m = dom.cusp_width_root
    with gmpy2.context(precision=200):
        z1 = zeta(s.tau, m, 40)
        z2 = zeta(s.pairing.apply(s.tau), m, 40)
        row = [z1 ** (k - 1) - z2 ** (k - 1) for k in range(N + 2)]
        scale = max(abs(v) for v in row)
        assert max(abs(a - v / scale) for a, v in zip(A[0], row)) < 1e-30


def test_trivial_series_matches_j(trivial_series):
    _, s = trivial_series
    ref = j_coefficients(s.N + 2)
    for k in range(s.N // 2):
        assert abs(complex(s.coeffs[k]) - ref[k] / 1728) < 1e-10 * max(1, ref[k] / 1728)
    # the top coefficients are only determined on the scale of their terms
    # at the lowest point of the cell, |z| = exp(-pi sqrt 3)
    r = np.exp(-np.pi * np.sqrt(3))
    for k in range(s.N - 1):
        assert abs(complex(s.coeffs[k]) - ref[k] / 1728) * r ** k < 1e-10


def test_trivial_series_value_at_2i(trivial_series):
    _, s = trivial_series
    value = evaluate_series(s, mpc(0, 2))
    assert abs(complex(value) - complex(j_value(2j)) / 1728) < 1e-8


def test_rhs_scaling_is_linear():
    d = load_fixture("6.1")
    dom = coset_domain(d)
    samples = sample_arcs(dom, 6, 50)
    A, rhs = assemble_system(dom, samples, 24, passport(d), 50)
    s1 = solve_series(A, rhs, dom.cusp_width_root, 50)
    s2 = solve_series(A, 2 * rhs, dom.cusp_width_root, 50)
    with gmpy2.context(precision=200):
        for a, b in zip(s1.coeffs, s2.coeffs):
            assert abs(2 * a - b) <= 1e-30 * max(1, abs(b))


def test_evaluate_pure_pole():
    s = TruncatedSeries(1, (mpc(1), mpc(0), mpc(0)), 40)
    with gmpy2.context(precision=160):
        assert abs(evaluate_series(s, mpc(0, 1)) - gmpy2.exp(2 * gmpy2.const_pi())) < 1e-25


def test_periodicity(series_6_1):
    _, _, s, _, _ = series_6_1
    with gmpy2.context(precision=300):
        tau = mpc(mpfr("0.123"), mpfr("0.9"))
        shifted = tau + s.m  # exact at this precision
    assert evaluate_series(s, tau) == evaluate_series(s, shifted)


def test_evaluate_rejects_lower_half_plane(trivial_series):
    _, s = trivial_series
    with pytest.raises(ValueError):
        evaluate_series(s, mpc(0, -1))


def test_held_out_pasting_6_1(series_6_1):
    _, dom, s, _, _ = series_6_1
    assert held_out_residual(dom, s) < 1e-15


def test_residuals_decrease_with_n():
    d = load_fixture("6.1")
    dom = coset_domain(d)
    res = [held_out_residual(dom, solve_dessin_series(dom, passport(d), N, 60)) for N in (8, 16, 24, 32)]
    assert all(b < a for a, b in zip(res, res[1:]))


def test_trivial_vertex_estimates(trivial_series):
    dom, s = trivial_series
    est = vertex_estimates(dom, s, passport(TRIVIAL))
    (black,) = est.black1
    (white,) = est.white1
    assert abs(complex(black)) < 1e-20
    assert abs(complex(white) - 1) < 1e-20


def test_6_1_vertex_sums(series_6_1):
    _, _, _, est, hist = series_6_1
    assert len(est.black3) == 2 and len(est.white2) == 2
    with gmpy2.context(precision=200):
        # the normalization rows hold to working precision
        assert abs(sum(est.black3)) < 1e-50
        assert abs(sum(est.white2) - 1) < 1e-50
    assert est.spread < 1e-10 and hist[-1][1] == est.spread


def test_6_1_vertices_are_affine_image_of_catalog(series_6_1):
    _, _, _, est, _ = series_6_1
    y = find_entry("6.1").ansatz
    p3 = [complex(r) for r in polynomial_roots([c.coords[0] for c in y.p3.coeffs], 30)]
    q2 = [complex(r) for r in polynomial_roots([c.coords[0] for c in y.q2.coeffs], 30)]
    b = [complex(v) for v in est.black3]
    w = [complex(v) for v in est.white2]
    # the affine map fixed by the black pair must carry the white pair over
    for u0, u1 in ((p3[0], p3[1]), (p3[1], p3[0])):
        A = (b[1] - b[0]) / (u1 - u0)
        B = b[0] - A * u0
        image = sorted((A * u + B for u in q2), key=lambda z: (round(z.real, 6), round(z.imag, 6)))
        target = sorted(w, key=lambda z: (round(z.real, 6), round(z.imag, 6)))
        if all(abs(x - y) < 1e-8 for x, y in zip(image, target)):
            return
    raise AssertionError("no affine map matches the vertex estimates")


def test_series_text_round_trip(series_6_1):
    d, _, s, _, _ = series_6_1
    n, t = series_from_text(series_to_text(s, d.n))
    assert n == d.n and t.m == s.m and t.N == s.N
    assert t.coeffs == s.coeffs


def test_too_few_samples():
    dom = coset_domain(TRIVIAL)
    with pytest.raises(SeriesError):
        assemble_system(dom, sample_arcs(dom, 1, 30), 6, passport(TRIVIAL), 30)
