"""Truncated expansion of the Hauptmodul of ``G_D`` at the cusp ``i*inf``.

The unknown function ``t(tau) = c_{-1}/z + c_0 + c_1 z + ... + c_N z^N`` with
``z = exp(2 pi i tau / m)`` must take equal values at paired boundary points
of the fundamental domain. Two more rows fix the affine freedom: the black
vertices of degree 3 sum to 0 and the white vertices of degree 2 sum to 1.

Big numbers are ``gmpy2.mpc`` values; matrices are numpy object arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from .dessin import Passport
from .domain import FundamentalDomain, Side, UnimodularMap
from .numfield import decimal_string
from .linalg import SingularMatrixError, solve, constrained_lstsq


def bits(digits: int) -> int:
    return int(math.ceil(digits * 3.3219280948873626)) + 8


@dataclass(frozen=True)
class Sample:
    tau: mpc
    pairing: UnimodularMap
    cell: int
    side: Side


@dataclass(frozen=True)
class TruncatedSeries:
    """Coefficients ``c_{-1}, c_0, ..., c_N`` in ``z = exp(2 pi i tau/m)``."""

    m: int
    coeffs: tuple
    digits: int
    condition: float = float("nan")

    @property
    def N(self) -> int:
        return len(self.coeffs) - 2

    def __call__(self, tau):
        return evaluate_series(self, tau)


class SeriesError(RuntimeError):
    pass


def reduce_mod_width(tau, m: int):
    """``tau - k m`` with ``0 <= Re < m``, computed exactly at the input's
    precision so that ``tau`` and ``tau + m`` give bit-identical results."""
    if not isinstance(tau, type(mpc(0))):
        return tau
    prec = max(tau.precision)
    k = int(gmpy2.floor(tau.real / m))
    if k == 0:
        return tau
    with gmpy2.context(precision=prec + 64):
        return mpc(tau.real - k * m, tau.imag)


def zeta(tau, m, digits):
    tau = reduce_mod_width(tau, m)
    with gmpy2.context(precision=bits(digits)):
        return gmpy2.exp(2 * gmpy2.const_pi() * mpc(0, 1) * mpc(tau) / m)


def _apply(g: UnimodularMap, tau):
    return (g.p * tau + g.q) / (g.r * tau + g.s)


def _base_point(side: Side, frac, top):
    """Point at hyperbolic fraction ``frac`` along a side of the standard cell."""
    lo_y = gmpy2.sqrt(mpfr(3)) / 2
    if side in (Side.LEFT, Side.RIGHT):
        y = gmpy2.exp(gmpy2.log(lo_y) + frac * (gmpy2.log(mpfr(top)) - gmpy2.log(lo_y)))
        x = mpfr(-1) / 2 if side is Side.LEFT else mpfr(1) / 2
        return mpc(x, y)
    # along |tau| = 1 the parameter u = log tan(theta/2) is hyperbolic arclength
    u_mid = mpfr(0)
    u_end = gmpy2.log(gmpy2.tan(gmpy2.const_pi() / 3))
    if side is Side.ARC_LEFT_HALF:
        u = u_mid + frac * (u_end - u_mid)
    else:
        u = u_mid - frac * (u_end - u_mid)
    theta = 2 * gmpy2.atan(gmpy2.exp(u))
    return mpc(gmpy2.cos(theta), gmpy2.sin(theta))


def _is_translation(m: UnimodularMap, width: int) -> bool:
    p, q, r, s = m.normalized()
    return r == 0 and q % width == 0


def sample_arcs(dom: FundamentalDomain, k: int, digits: int = 50,
                top: float = 3.0, zeta_max: float = 0.995) -> list[Sample]:
    """``k`` points per boundary pairing, placed at equal hyperbolic steps.

    Only one arc of each partner pair is sampled, since the pairing maps the
    partner's points onto the same equations. Pairings by translations
    ``T^(jm)`` hold identically for the expansion and are skipped. A point
    whose ``|z|`` (or its image's) exceeds ``zeta_max`` is pulled towards the
    elliptic end of its side.
    """
    if k < 1:
        raise ValueError("need at least one point per arc")
    m = dom.cusp_width_root
    out: list[Sample] = []
    with gmpy2.context(precision=bits(digits)):
        for arc in dom.arcs:
            own = (arc.triangle, arc.side.value)
            other = (arc.partner[0], arc.partner[1].value)
            if other < own or _is_translation(arc.pairing, m):
                continue
            g = dom.reps[arc.triangle]
            for i in range(k):
                frac = mpfr(2 * i + 1) / (2 * k)
                for _ in range(60):
                    tau = _apply(g, _base_point(arc.side, frac, top))
                    img = _apply(arc.pairing, tau)
                    worst = max(abs(zeta(tau, m, 15)), abs(zeta(img, m, 15)))
                    if worst <= zeta_max:
                        break
                    frac /= 2
                out.append(Sample(tau, arc.pairing, arc.triangle, arc.side))
    return out


def points_per_arc(dom: FundamentalDomain, N: int, k_min: int = 3,
                   oversample: float = 1.5) -> int:
    pairs = sum(1 for arc in dom.arcs
                if (arc.partner[0], arc.partner[1].value) > (arc.triangle, arc.side.value)
                and not _is_translation(arc.pairing, dom.cusp_width_root))
    if pairs == 0:
        return k_min
    return max(k_min, math.ceil(oversample * N / pairs))


def _power_row(z, N):
    row = [None] * (N + 2)
    row[0] = 1 / z
    row[1] = mpc(1)
    p = mpc(1)
    for j in range(N):
        p = p * z
        row[j + 2] = p
    return row


def black_points(dom: FundamentalDomain, degree: int | None = None):
    """Per black-vertex class: (class size, representative points ``g_e rho``)."""
    rho = mpc(-mpfr(1) / 2, gmpy2.sqrt(mpfr(3)) / 2)
    return [(len(c), [_apply(dom.reps[k], rho) for k in c]) for c in dom.black_classes
            if degree is None or len(c) == degree]


def white_points(dom: FundamentalDomain, degree: int | None = None):
    i = mpc(0, 1)
    return [(len(c), [_apply(dom.reps[k], i) for k in c]) for c in dom.white_classes
            if degree is None or len(c) == degree]


def _normalization_classes(dom, passport: Passport):
    black = black_points(dom, 3) if passport.p3 else black_points(dom)
    white = white_points(dom, 2) if passport.q2 else white_points(dom)
    return black, white


def assemble_system(dom: FundamentalDomain, samples: list[Sample], N: int,
                    passport: Passport, digits: int = 50):
    """Pasting rows followed by the two normalization rows.

    Returns ``(A, rhs)`` with ``A`` of shape ``(P + 2, N + 2)``; columns are
    ``c_{-1}, c_0, ..., c_N``. When ``P == N`` the system is square.
    """
    if len(samples) < N:
        raise SeriesError(f"{len(samples)} samples cannot determine N={N} coefficients")
    m = dom.cusp_width_root
    rows = []
    with gmpy2.context(precision=bits(digits)):
        for smp in samples:
            z1 = zeta(smp.tau, m, digits)
            z2 = zeta(_apply(smp.pairing, smp.tau), m, digits)
            r1 = _power_row(z1, N)
            r2 = _power_row(z2, N)
            row = [x - y for x, y in zip(r1, r2)]
            scale = max(abs(v) for v in row)
            if scale == 0:
                raise SeriesError(f"all-zero pasting row at tau={smp.tau}")
            rows.append([v / scale for v in row])
        black, white = _normalization_classes(dom, passport)
        for classes in (black, white):
            acc = [mpc(0)] * (N + 2)
            for _, pts in classes:
                for tau in pts:
                    r = _power_row(zeta(tau, m, digits), N)
                    acc = [a + v / len(pts) for a, v in zip(acc, r)]
            rows.append(acc)
        A = np.array(rows, dtype=object)
        rhs = np.array([mpc(0)] * len(samples) + [mpc(0), mpc(1)], dtype=object)
    return A, rhs


def solve_series(A, rhs, m: int, digits: int = 50) -> TruncatedSeries:
    """Solve the assembled system at ``digits`` precision.

    Square systems use pivoted Gaussian elimination. Taller ones treat the
    last two rows as exact constraints and the rest in the least-squares
    sense.
    """
    if digits < 30:
        raise ValueError("series solve needs at least 30 digits")
    nrows, ncols = A.shape
    with gmpy2.context(precision=bits(digits)):
        # column equilibration; high powers of z are tiny but carry full
        # relative precision
        colscale = [max(abs(v) for v in A[:, j]) or mpfr(1) for j in range(ncols)]
        As = A / np.array(colscale, dtype=object)
        try:
            if nrows == ncols:
                x, cond = solve(As, rhs)
            else:
                x, cond = constrained_lstsq(As[:-2], rhs[:-2], As[-2:], rhs[-2:])
            x = x / np.array(colscale, dtype=object)
        except SingularMatrixError as exc:
            raise SeriesError(f"numerically singular system ({exc}); "
                              "increase N or change the sampling") from None
    coeffs = tuple(x)
    with gmpy2.context(precision=bits(digits)):
        # compare c_{-1}/z with the other terms at the lowest point of the
        # root cell, |z| = exp(-pi sqrt(3)/m); raw c_k grow like exp(4 pi sqrt(k))
        r = gmpy2.exp(-gmpy2.const_pi() * gmpy2.sqrt(3) / m)
        size = max(abs(c) * r ** k for k, c in enumerate(coeffs))
        if abs(coeffs[0]) <= mpfr(10) ** (-digits // 2) * size:
            raise SeriesError("leading coefficient c_{-1} vanished")
    return TruncatedSeries(m, coeffs, digits, cond)


def evaluate_series(s: TruncatedSeries, tau, check: bool = True):
    """``sum c_k z^k`` with ``z = exp(2 pi i tau / m)``."""
    tau = reduce_mod_width(tau, s.m)
    with gmpy2.context(precision=bits(s.digits)):
        tau = mpc(tau)
        if tau.imag <= 0:
            raise ValueError("tau must lie in the upper half-plane")
        z = zeta(tau, s.m, s.digits)
        if check and abs(z) >= 1:
            raise SeriesError(f"|z| >= 1 at tau={tau}")
        acc = mpc(0)
        for c in reversed(s.coeffs[2:]):
            acc = acc * z + c
        return acc * z + s.coeffs[1] + s.coeffs[0] / z


@dataclass(frozen=True)
class VertexEstimates:
    """Vertex coordinates by colour and degree, with per-class spreads."""

    black3: tuple
    black1: tuple
    white2: tuple
    white1: tuple
    spread: float

    def classes(self):
        return {"black3": self.black3, "black1": self.black1,
                "white2": self.white2, "white1": self.white1}


def vertex_estimates(dom: FundamentalDomain, s: TruncatedSeries,
                     passport: Passport | None = None,
                     tolerance: float | None = None) -> VertexEstimates:
    """Average of the series over each elliptic-point class."""
    spread = 0.0
    out = {"black": {1: [], 3: []}, "white": {1: [], 2: []}}
    with gmpy2.context(precision=bits(s.digits)):
        for colour, classes in (("black", black_points(dom)), ("white", white_points(dom))):
            for size, pts in classes:
                vals = [evaluate_series(s, tau) for tau in pts]
                mean = sum(vals, mpc(0)) / len(vals)
                for v in vals:
                    spread = max(spread, float(abs(v - mean)))
                out[colour][size].append(mean)
    if passport is not None:
        counts = (len(out["black"][3]), len(out["black"][1]),
                  len(out["white"][2]), len(out["white"][1]))
        if counts != (passport.p3, passport.p1, passport.q2, passport.q1):
            raise SeriesError(f"vertex classes {counts} do not match passport {passport}")
    if tolerance is not None and spread > tolerance:
        raise SeriesError(f"class spread {spread:.3g} exceeds {tolerance:.3g}; "
                          "increase N or precision")
    return VertexEstimates(tuple(out["black"][3]), tuple(out["black"][1]),
                           tuple(out["white"][2]), tuple(out["white"][1]), spread)


def held_out_residual(dom: FundamentalDomain, s: TruncatedSeries, k: int = 2) -> float:
    """Max pasting mismatch at points offset from the solve's sample grid."""
    worst = 0.0
    m = dom.cusp_width_root
    with gmpy2.context(precision=bits(s.digits)):
        for arc in dom.arcs:
            if _is_translation(arc.pairing, m):
                continue
            g = dom.reps[arc.triangle]
            for i in range(k):
                frac = mpfr(i + 1) / (k + 1) * mpfr("0.97")
                tau = _apply(g, _base_point(arc.side, frac, 1.2))
                img = _apply(arc.pairing, tau)
                worst = max(worst, float(abs(evaluate_series(s, tau)
                                             - evaluate_series(s, img))))
    return worst


def solve_dessin_series(dom: FundamentalDomain, passport: Passport, N: int,
                        digits: int = 50, k_min: int = 3) -> TruncatedSeries:
    k = points_per_arc(dom, N, k_min)
    samples = sample_arcs(dom, k, digits)
    A, rhs = assemble_system(dom, samples, N, passport, digits)
    return solve_series(A, rhs, dom.cusp_width_root, digits)


def series_schedule(dom: FundamentalDomain, passport: Passport, N_start: int | None = None,
                    digits: int = 50, spread_target: float = 1e-10,
                    N_max: int = 1024, k_min: int = 3):
    """Double ``N`` from ``N_start`` (default ``4n``) until the class spread is small."""
    N = N_start or 4 * dom.n
    history = []
    while True:
        s = solve_dessin_series(dom, passport, N, digits, k_min)
        est = vertex_estimates(dom, s, passport)
        history.append((N, est.spread))
        if est.spread < spread_target:
            return s, est, history
        if 2 * N > N_max:
            raise SeriesError(f"series did not converge: spread history {history}")
        N *= 2
        digits = max(digits, N // 2)


def series_to_text(s: TruncatedSeries, n: int) -> str:
    # coefficients are printed exactly, so a reloaded series is bit-identical
    prec = max((c.precision[0] for c in s.coeffs), default=bits(s.digits))
    lines = [f"n={n} m={s.m} N={s.N} digits={s.digits} bits={prec}"]
    for c in s.coeffs:
        lines.append(f"{decimal_string(c.real)} {decimal_string(c.imag)}")
    return "\n".join(lines) + "\n"


def series_from_text(text: str) -> tuple[int, TruncatedSeries]:
    lines = text.strip().splitlines()
    head = dict(tok.split("=") for tok in lines[0].split())
    digits = int(head["digits"])
    with gmpy2.context(precision=int(head.get("bits", bits(digits)))):
        coeffs = tuple(mpc(mpfr(re), mpfr(im)) for re, im in (ln.split() for ln in lines[1:]))
    s = TruncatedSeries(int(head["m"]), coeffs, digits)
    if s.N != int(head["N"]):
        raise ValueError("coefficient count does not match header")
    return int(head["n"]), s
