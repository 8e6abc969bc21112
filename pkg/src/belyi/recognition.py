"""Recognizing high-precision numbers as algebraic numbers.

Integer relations are found with an integral (fraction-free) LLL
reduction. ``algdep`` finds minimal polynomials; ``unify_field`` puts a
list of numbers into one number field ``Q(a)`` and returns rational
coordinates in the power basis of ``a``; ``exactify`` does this for a whole
numeric Belyi ansatz.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
from gmpy2 import mpc, mpfr

from .newton import POLY_NAMES, NumericAnsatz
from .numfield import FieldElement, FieldPolynomial, NumberField, format_complex
from .series import bits

log = logging.getLogger(__name__)

DEFAULT_DELTA = Fraction(99, 100)


class RecognitionError(ArithmeticError):
    pass


class DependentRowsError(RecognitionError):
    pass


# ---------------------------------------------------------------------------
# LLL


@dataclass(frozen=True)
class IntegerLattice:
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in r) for r in self.rows)
        if rows and any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("lattice rows have different lengths")
        object.__setattr__(self, "rows", rows)

    @property
    def dim(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def gram(self) -> list[list[int]]:
        return [[_dot(a, b) for b in self.rows] for a in self.rows]


def _dot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))


def gram_determinant(L: IntegerLattice) -> int:
    """Exact determinant of the Gram matrix (fraction-free elimination)."""
    G = L.gram()
    n = len(G)
    sign, prev = 1, 1
    for k in range(n - 1):
        if G[k][k] == 0:
            for i in range(k + 1, n):
                if G[i][k]:
                    G[k], G[i] = G[i], G[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                G[i][j] = (G[i][j] * G[k][k] - G[i][k] * G[k][j]) // prev
        prev = G[k][k]
    return sign * G[n - 1][n - 1] if n else 1


def lll_reduce(L: IntegerLattice, delta: Fraction = DEFAULT_DELTA) -> IntegerLattice:
    """LLL-reduce the rows of ``L`` in exact integer arithmetic.

    The fraction-free formulation keeps ``d_i`` (leading Gram minors) and
    ``lam[k][j] = d_{j+1} mu_{k,j}`` as integers. Raises
    :class:`DependentRowsError` if the rows are linearly dependent.
    """
    delta = Fraction(delta)
    if not Fraction(1, 4) < delta <= 1:
        raise ValueError("delta must lie in (1/4, 1]")
    num, den = delta.numerator, delta.denominator
    b = [list(r) for r in L.rows]
    n = len(b)
    if n == 0:
        return L
    d = [1] + [0] * n
    lam = [[0] * n for _ in range(n)]
    d[1] = _dot(b[0], b[0])
    if d[1] == 0:
        raise DependentRowsError("zero row")

    def red(k, l):
        if 2 * abs(lam[k][l]) > d[l + 1]:
            q = (2 * lam[k][l] + d[l + 1]) // (2 * d[l + 1])
            b[k] = [x - q * y for x, y in zip(b[k], b[l])]
            lam[k][l] -= q * d[l + 1]
            for i in range(l):
                lam[k][i] -= q * lam[l][i]

    def swap(k, kmax):
        b[k], b[k - 1] = b[k - 1], b[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lk = lam[k][k - 1]
        B = (d[k - 1] * d[k + 1] + lk * lk) // d[k]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - lk * t) // d[k]
            lam[i][k - 1] = (B * t + lk * lam[i][k]) // d[k + 1]
        d[k] = B

    k, kmax = 1, 0
    while k < n:
        if k > kmax:
            kmax = k
            for j in range(k + 1):
                u = _dot(b[k], b[j])
                for i in range(j):
                    u = (d[i + 1] * u - lam[k][i] * lam[j][i]) // d[i]
                if j < k:
                    lam[k][j] = u
                else:
                    d[k + 1] = u
            if d[k + 1] == 0:
                raise DependentRowsError(f"row {k} depends on the previous rows")
        red(k, k - 1)
        if den * d[k + 1] * d[k - 1] < num * d[k] * d[k] - den * lam[k][k - 1] ** 2:
            swap(k, kmax)
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                red(k, l)
            k += 1
    return IntegerLattice(tuple(tuple(r) for r in b))


# ---------------------------------------------------------------------------
# integer relations


def _scale_bits(digits: int) -> int:
    return max(8, int(3.32 * (digits - 10)))


def _to_int(v, scale) -> int:
    return int(gmpy2.rint(v * scale))


def integer_relation(values, digits: int, delta: Fraction = DEFAULT_DELTA) -> list[int]:
    """Short integer vector ``m`` with ``sum m_k values_k`` close to 0.

    Rows ``[e_k | round(2^B Re v_k), round(2^B Im v_k)]`` (the imaginary
    column is dropped when all values are real); the first row of the
    reduced basis is returned.
    """
    B = _scale_bits(digits)
    with gmpy2.context(precision=bits(digits) + 32):
        scale = mpfr(2) ** B
        vs = [mpc(v) for v in values]
        real = all(abs(v.imag) <= abs(v) * mpfr(10) ** (-(digits - 5)) + mpfr(10) ** (-(digits - 5))
                   for v in vs)
        rows = []
        for k, v in enumerate(vs):
            e = [0] * len(vs)
            e[k] = 1
            tail = [_to_int(v.real, scale)]
            if not real:
                tail.append(_to_int(v.imag, scale))
            rows.append(e + tail)
    red = lll_reduce(IntegerLattice(rows), delta)
    return list(red.rows[0][:len(vs)])


def _plausible_height(m, digits: int, complex_values: bool, margin: float = 5.0) -> bool:
    """Whether ``m`` is clearly shorter than a generic lattice vector.

    A random lattice of this shape has shortest vectors of size about
    ``2^(B k / dim)`` (``k`` = 1 or 2 constraint columns); a relation that
    is not at least ``margin`` digits below that is indistinguishable from
    noise.
    """
    h = max(abs(v) for v in m)
    if h == 0:
        return False
    k = 2 if complex_values else 1
    generic = _scale_bits(digits) * math.log10(2) * k / len(m)
    return math.log10(h) <= generic - margin


def _is_real(x, digits: int) -> bool:
    return abs(x.imag) <= max(mpfr(1), abs(x)) * mpfr(10) ** (-(digits - 5))


def _poly_eval(g, x):
    acc = mpc(0)
    for c in reversed(g):
        acc = acc * x + c
    return acc


def _poly_scale(g, x) -> mpfr:
    ax = abs(x)
    return max(mpfr(1), sum((abs(c) * ax ** k for k, c in enumerate(g)), mpfr(0)))


def _normalize_poly(g) -> tuple[int, ...]:
    g = list(g)
    while len(g) > 1 and g[-1] == 0:
        g.pop()
    cont = 0
    for c in g:
        cont = math.gcd(cont, c)
    if cont == 0:
        return (0,)
    if g[-1] < 0:
        cont = -cont
    return tuple(c // cont for c in g)


@dataclass(frozen=True)
class AlgdepResult:
    poly: tuple[int, ...]  # low to high, content 1, positive leader
    residual: float  # log10 of |g(x)| relative to the size of the terms

    @property
    def degree(self) -> int:
        return len(self.poly) - 1

    @property
    def height(self) -> int:
        return max(abs(c) for c in self.poly)


def algdep(x, maxdeg: int, digits: int, delta: Fraction = DEFAULT_DELTA,
           mindeg: int = 1) -> AlgdepResult:
    """Minimal polynomial candidate of ``x`` of degree at most ``maxdeg``.

    Degrees are tried in increasing order, so the first accepted relation is
    irreducible up to the working precision. A relation is accepted when
    ``|g(x)| < 10^-(digits/2)`` relative to ``sum |g_k| |x|^k``.
    """
    with gmpy2.context(precision=bits(digits) + 32):
        x = mpc(x)
        powers = [mpc(1)]
        for _ in range(maxdeg):
            powers.append(powers[-1] * x)
        threshold = mpfr(10) ** (-(digits // 2))
        cplx = not _is_real(x, digits)
        best = None
        for deg in range(mindeg, maxdeg + 1):
            g = _normalize_poly(integer_relation(powers[:deg + 1], digits, delta))
            if len(g) < 2:
                continue
            rel = abs(_poly_eval(g, x)) / max(mpfr(1), abs(x)) ** (len(g) - 1)
            exp = float(gmpy2.log10(rel)) if rel > 0 else -float(digits)
            if best is None or exp < best.residual:
                best = AlgdepResult(g, exp)
            if rel < threshold and _plausible_height(g, digits, cplx):
                return AlgdepResult(g, exp)
    raise RecognitionError(
        f"not algebraic of degree <= {maxdeg} at {digits} digits "
        f"(best residual 1e{best.residual:.1f})" if best else "no relation found")


# ---------------------------------------------------------------------------
# number fields


def polynomial_roots(f, digits: int) -> list:
    """All complex roots of an integer polynomial (Durand-Kerner + polish)."""
    f = list(f)
    d = len(f) - 1
    with gmpy2.context(precision=bits(digits) + 32):
        lead = mpc(f[-1])
        monic = [mpc(c) / lead for c in f]
        radius = 1 + max(abs(c) for c in monic[:-1])
        seed = mpc(mpfr("0.4"), mpfr("0.9"))
        roots = [seed ** k * radius for k in range(d)]
        tol = mpfr(10) ** (-digits)
        for _ in range(2000):
            moved = mpfr(0)
            new = []
            for i, r in enumerate(roots):
                den = mpc(1)
                for j, s in enumerate(roots):
                    if i != j:
                        den *= r - s
                step = _poly_eval(monic, r) / den
                new.append(r - step)
                moved = max(moved, abs(step))
            roots = new
            if moved < tol * radius:
                break
        return roots


@dataclass
class CoefficientReport:
    name: str
    degree: int | None
    minpoly: tuple[int, ...] | None
    residual: float | None
    coords: tuple[Fraction, ...] = ()
    relation_residual: float | None = None

    def line(self) -> str:
        mp = ",".join(map(str, self.minpoly)) if self.minpoly else "-"
        deg = self.degree if self.degree is not None else "-"
        res = f"{self.residual:.1f}" if self.residual is not None else "-"
        rel = f"{self.relation_residual:.1f}" if self.relation_residual is not None else "-"
        coords = ",".join(str(c) for c in self.coords)
        return f"{self.name} degree={deg} minpoly={mp} residual={res} fit={rel} coords={coords}"


def _express(a, d: int, x, digits: int, delta) -> tuple[tuple[Fraction, ...], float]:
    """Rational coordinates of ``x`` in the power basis of ``a`` (degree ``d``)."""
    with gmpy2.context(precision=bits(digits) + 32):
        basis = [mpc(1)]
        for _ in range(d - 1):
            basis.append(basis[-1] * a)
        m = integer_relation(basis + [mpc(x)], digits, delta)
        if m[-1] == 0:
            raise RecognitionError("relation does not involve the value")
        if not _plausible_height(m, digits, not (_is_real(mpc(x), digits) and _is_real(a, digits))):
            raise RecognitionError("relation is not shorter than a generic lattice vector")
        coords = tuple(Fraction(-c, m[-1]) for c in m[:-1])
        approx = sum((mpc(gmpy2.mpq(c.numerator, c.denominator)) * b
                      for c, b in zip(coords, basis)), mpc(0))
        err = abs(approx - x)
        scale = max(mpfr(1), abs(x), sum((abs(b) for b in basis), mpfr(0)))
        rel = err / scale
        exp = float(gmpy2.log10(rel)) if rel > 0 else -float(digits)
        return coords, exp


def express_in_field(fld: NumberField, value, digits: int, root=None,
                     delta: Fraction = DEFAULT_DELTA) -> FieldElement:
    """The element of ``fld`` whose embedding is ``value`` (via an integer relation)."""
    with gmpy2.context(precision=bits(digits) + 32):
        if root is None:
            root = fld.embed_root(digits) if not fld.is_rational else mpc(0)
        coords, exp = _express(mpc(root), fld.degree, mpc(value), digits, delta)
    if exp > -(digits / 2):
        raise RecognitionError(f"value does not lie in Q(a), a root of {list(fld.minpoly)}")
    return fld.element(coords)


@dataclass
class UnifiedField:
    field: NumberField
    coords: list[tuple[Fraction, ...]]
    reports: list[CoefficientReport]


def unify_field(values, maxdeg: int, digits: int, names=None,
                delta: Fraction = DEFAULT_DELTA) -> UnifiedField:
    """Put every value into one number field and return power-basis coordinates.

    The primitive element is the value whose minimal polynomial has the
    largest degree (smallest height on ties). If some value does not fit,
    sums ``a + k v`` are tried as new primitive elements.
    """
    names = list(names) if names is not None else [f"v{k}" for k in range(len(values))]
    threshold = -(digits / 2)
    reports = []
    recognized = []
    for name, v in zip(names, values):
        try:
            r = algdep(v, maxdeg, digits, delta)
            reports.append(CoefficientReport(name, r.degree, r.poly, r.residual))
            recognized.append(r)
        except RecognitionError:
            reports.append(CoefficientReport(name, None, None, None))
            recognized.append(None)
    candidates = [(r.degree, r.height, i) for i, r in enumerate(recognized) if r is not None]
    if not candidates:
        raise RecognitionError("no coefficient is algebraic of bounded degree: "
                               + "; ".join(r.line() for r in reports))
    top = max(c[0] for c in candidates)
    if top == 1:
        fld = NumberField((0, 1), "0")
        coords = []
        for rep, v, r in zip(reports, values, recognized):
            if r is None:
                raise RecognitionError(f"{rep.name} not recognized")
            c = (Fraction(-r.poly[0], r.poly[1]),)
            rep.coords, rep.relation_residual = c, r.residual
            coords.append(c)
        return UnifiedField(fld, coords, reports)

    _, _, idx = min((c for c in candidates if c[0] == top), key=lambda c: (c[1], c[2]))
    prim_poly = recognized[idx].poly
    with gmpy2.context(precision=bits(digits) + 32):
        a = mpc(values[idx])
    tried = set()
    order = [i for _, _, i in sorted(candidates, key=lambda c: (-c[0], c[1], c[2]))]
    for attempt in range(len(order) + 4):
        coords, failed = [], None
        for rep, v in zip(reports, values):
            try:
                c, exp = _express(a, len(prim_poly) - 1, v, digits, delta)
            except RecognitionError:
                c, exp = (), 0.0
            if exp > threshold:
                failed = rep.name
                break
            coords.append(c)
        if failed is None:
            fld = NumberField(prim_poly, _format_complex(a, digits))
            for rep, (c, v) in zip(reports, zip(coords, values)):
                rep.coords = c
                rep.relation_residual = _express(a, fld.degree, v, digits, delta)[1]
            return UnifiedField(fld, coords, reports)
        # grow the primitive element with the failing value and retry
        j = names.index(failed)
        tried.add(j)
        grown = None
        for k in (1, 2, 3, 5, 7):
            with gmpy2.context(precision=bits(digits) + 32):
                cand = a + k * mpc(values[j])
            try:
                r = algdep(cand, maxdeg, digits, delta, mindeg=len(prim_poly))
            except RecognitionError:
                continue
            grown = (cand, r.poly)
            break
        if grown is None:
            raise RecognitionError(f"{failed} does not lie in Q(a), a root of {prim_poly}, "
                                   f"and no field of degree <= {maxdeg} contains both")
        a, prim_poly = grown
    raise RecognitionError("could not find a common field")


def _format_complex(z, digits: int, shown: int = 40) -> str:
    """Short text form of an embedding; components at noise level become 0."""
    with gmpy2.context(precision=bits(digits) + 32):
        noise = max(mpfr(1), abs(z)) * mpfr(10) ** (-(digits // 2))
        re = z.real if abs(z.real) > noise else mpfr(0)
        im = z.imag if abs(z.imag) > noise else mpfr(0)
        return format_complex(mpc(re, im), shown)


# ---------------------------------------------------------------------------
# exact ansatz


@dataclass(frozen=True)
class ExactAnsatz:
    """Exact Belyi data ``P3^3 P1 - Q2^2 Q1 = c R`` over ``field``."""

    field: NumberField
    p3: FieldPolynomial
    p1: FieldPolynomial
    q2: FieldPolynomial
    q1: FieldPolynomial
    rr: FieldPolynomial
    c: FieldElement

    def polys(self) -> dict[str, FieldPolynomial]:
        return {name: getattr(self, name) for name in POLY_NAMES}

    def map(self, fn, field: NumberField) -> "ExactAnsatz":
        return ExactAnsatz(field, *(getattr(self, k).map_coeffs(fn, field) for k in POLY_NAMES),
                           fn(self.c))


@dataclass
class RecognitionReport:
    field: NumberField
    coefficients: list[CoefficientReport]
    max_deviation: float  # log10 of the largest |embedded - numeric|

    def to_text(self) -> str:
        lines = [f"minpoly={','.join(map(str, self.field.minpoly))}",
                 f"degree={self.field.degree}",
                 f"embedding={self.field.embedding}",
                 f"max_deviation={self.max_deviation:.1f}"]
        lines += [r.line() for r in self.coefficients]
        return "\n".join(lines) + "\n"


def exactify(x: NumericAnsatz, maxdeg: int = 8, digits: int | None = None,
             delta: Fraction = DEFAULT_DELTA) -> tuple[ExactAnsatz, RecognitionReport]:
    """Recognize all free coefficients of ``x`` and ``c`` in one number field."""
    digits = digits or x.digits
    names = [f"{n}[{k}]" if n != "c" else "c" for n, k in x.layout.unknowns]
    values = x.vector()
    uf = unify_field(values, maxdeg, digits, names, delta)
    fld = uf.field
    exact = dict(zip(x.layout.unknowns, (fld.element(c) for c in uf.coords)))
    polys = {}
    for name in POLY_NAMES:
        deg = x.layout.degrees[name]
        coeffs = []
        for k in range(deg):
            if (name, k) in exact:
                coeffs.append(exact[(name, k)])
            else:
                coeffs.append(fld(x.layout.pins[(name, k)]))
        coeffs.append(fld.one)
        polys[name] = FieldPolynomial(fld, coeffs)
    ans = ExactAnsatz(fld, *(polys[k] for k in POLY_NAMES), exact[("c", 0)])
    # embed back and compare
    with gmpy2.context(precision=bits(digits) + 32):
        root = fld.embed_root(digits) if not fld.is_rational else mpc(0)
        worst = mpfr(0)
        for (key, v) in zip(x.layout.unknowns, values):
            e = exact[key].embed(digits, root)
            worst = max(worst, abs(e - v) / max(mpfr(1), abs(v)))
        dev = float(gmpy2.log10(worst)) if worst > 0 else -float(digits)
    if dev > -(digits / 2):
        raise RecognitionError(f"exact coefficients deviate by 1e{dev:.1f} from the numeric solution")
    return ans, RecognitionReport(fld, uf.reports, dev)
