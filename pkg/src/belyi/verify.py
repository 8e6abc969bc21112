"""Exact certification of Belyi data and the catalog of known orbits.

``identity_check`` proves ``P3^3 P1 - Q2^2 Q1 = c R`` over the number
field together with the root-separation conditions; ``symbolic_passport``
recomputes the ramification data from exact squarefree decompositions;
``affine_match`` decides whether two Belyi functions differ by
``z -> A z + B`` and possibly a Galois conjugation.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import gmpy2
from gmpy2 import mpc, mpfr

from .dessin import DessinError, Passport, parse_passport
from .newton import POLY_NAMES
from .numfield import FieldElement, FieldPolynomial, NumberField, poly_gcd, squarefree_decomposition
from .recognition import ExactAnsatz, RecognitionError, express_in_field, polynomial_roots
from .series import bits

CATALOG_HEADER = "belyi-catalog v1"
FILE_KEYS = {"p3": "P3", "p1": "P1", "q2": "Q2", "q1": "Q1", "rr": "R"}


class VerificationError(ArithmeticError):
    pass


class CatalogError(ValueError):
    pass


# ---------------------------------------------------------------------------
# identity and passport


@dataclass
class CheckResult:
    ok: bool
    message: str = ""

    def __bool__(self):
        return self.ok


def _coprime(f: FieldPolynomial, g: FieldPolynomial) -> bool:
    if f.degree <= 0 or g.degree <= 0:
        return True
    return poly_gcd(f, g).degree == 0


def _squarefree(f: FieldPolynomial) -> bool:
    return _coprime(f, f.derivative())


def identity_check(x: ExactAnsatz) -> CheckResult:
    """Exact check of ``P3^3 P1 - Q2^2 Q1 = c R`` and of root separation.

    ``P3``, ``P1``, ``Q2``, ``Q1`` must be monic (``R`` may carry a leading
    coefficient); ``P3 P1``, ``Q2 Q1`` and ``R`` must be squarefree and ``c``
    nonzero. Returns a falsy :class:`CheckResult` naming the first failure.
    """
    if x.c.is_zero():
        return CheckResult(False, "c = 0")
    for name in ("p3", "p1", "q2", "q1"):
        poly = getattr(x, name)
        if poly.is_zero() or poly.lead() != x.field.one:
            return CheckResult(False, f"{FILE_KEYS[name]} is not monic")
    if x.rr.is_zero():
        return CheckResult(False, "R = 0")
    diff = x.p3 ** 3 * x.p1 - x.q2 ** 2 * x.q1 - x.rr * x.c
    if not diff.is_zero():
        k = next(i for i, v in enumerate(diff.coeffs) if not v.is_zero())
        return CheckResult(False, f"coefficient of z^{k} in P3^3 P1 - Q2^2 Q1 - c R is "
                                  f"{diff.coeffs[k].to_text()}, not 0")
    if not _squarefree(x.p3 * x.p1):
        return CheckResult(False, "P3 P1 has a repeated root")
    if not _squarefree(x.q2 * x.q1):
        return CheckResult(False, "Q2 Q1 has a repeated root")
    if not _squarefree(x.rr):
        return CheckResult(False, "R has a repeated root")
    return CheckResult(True, "ok")


def _multiplicities(f: FieldPolynomial) -> list[int]:
    parts = []
    for k, g in sorted(squarefree_decomposition(f).items()):
        parts.extend([k] * g.degree)
    return parts


def symbolic_passport(x: ExactAnsatz) -> Passport:
    """Ramification over 0, 1 and infinity from exact squarefree structure."""
    black = _multiplicities(x.p3 ** 3 * x.p1)
    white = _multiplicities(x.q2 ** 2 * x.q1)
    finite_poles = _multiplicities(x.rr)
    n = (x.p3 ** 3 * x.p1).degree
    if sum(black) != n or sum(white) != n:
        raise VerificationError("numerator degrees disagree")
    faces = [n - x.rr.degree] + finite_poles
    if any(v not in (1, 3) for v in black) or any(v not in (1, 2) for v in white):
        raise VerificationError(f"ramification {black} | {white} is not of (2,3)-type")
    return Passport(tuple(black), tuple(white), tuple(faces))


# ---------------------------------------------------------------------------
# normal form and affine matching


def substitute(x: ExactAnsatz, A: FieldElement, B: FieldElement) -> ExactAnsatz:
    """The ansatz of ``beta(A z + B)``, with the polynomials made monic again."""
    n = (x.p3 ** 3 * x.p1).degree
    polys = {}
    for name in POLY_NAMES:
        p = getattr(x, name).compose_affine(A, B)
        polys[name] = p * (A ** p.degree).inverse() if name != "rr" else p
    lead = polys["rr"].lead()
    rr = polys["rr"] * lead.inverse()
    # R(Az+B) = lead * Rmonic, and the left side picks up A^n
    c = x.c * lead * (A ** n).inverse()
    return ExactAnsatz(x.field, polys["p3"], polys["p1"], polys["q2"], polys["q1"], rr, c)


def _root_sum(p: FieldPolynomial) -> FieldElement:
    return -p[p.degree - 1] if p.degree >= 1 else p.field.zero


def normal_form(x: ExactAnsatz) -> tuple[ExactAnsatz, FieldElement, FieldElement]:
    """Unique affine representative with monic ``R``.

    ``B`` puts the centre of the degree-3 black vertices (all black vertices
    if there are none) at 0; ``A`` scales the root sum of the first of
    ``Q2, Q1, P1, R, P3`` whose centred sum is nonzero to 1. Returns the
    normalized ansatz and ``(A, B)`` with ``normal(z) = x(A z + B)``.
    """
    fld = x.field
    centre = x.p3 if x.p3.degree > 0 else x.p1
    B = _root_sum(centre) / centre.degree
    A = None
    for name in ("q2", "q1", "p1", "rr", "p3"):
        p = getattr(x, name)
        if p.degree <= 0:
            continue
        s = _root_sum(p) - B * p.degree
        if not s.is_zero():
            A = s
            break
    if A is None:
        raise VerificationError("no affine normalization: all centred root sums vanish")
    return substitute(x, A, B), A, B


@dataclass
class AffineMatch:
    """``x(z) = y(A z + B)`` after mapping ``y`` into ``field`` by ``a_y -> image``."""

    A: FieldElement
    B: FieldElement
    field: NumberField
    image: FieldElement
    conjugate: bool
    direction: str  # "y->x" or "x->y": which field received the other's coefficients

    def describe(self) -> str:
        conj = "conjugate" if self.conjugate else "same embedding"
        return (f"A={self.A.to_text()} B={self.B.to_text()} over {list(self.field.minpoly)} "
                f"({conj}, generator -> {self.image.to_text()})")


def _coeff_list(x: ExactAnsatz) -> list[FieldElement]:
    out = []
    for name in POLY_NAMES:
        out.extend(getattr(x, name).coeffs)
    out.append(x.c)
    return out


def _shape(x: ExactAnsatz):
    return tuple(getattr(x, name).degree for name in POLY_NAMES)


def _embed_all(values, root, digits):
    return [v.embed(digits, root) for v in values]


def _map_element(v: FieldElement, image: FieldElement) -> FieldElement:
    acc = image.field.zero
    for c in reversed(v.coords):
        acc = acc * image + c
    return acc


def _field_roots(fld: NumberField, digits: int):
    if fld.is_rational:
        return [mpc(0)]
    return polynomial_roots(fld.minpoly, digits)


def _preferred_root(fld: NumberField, digits: int):
    if fld.is_rational:
        return mpc(0)
    if fld.embedding is not None:
        return fld.embed_root(digits)
    return _field_roots(fld, digits)[0]


def _try_map(src_vals, src_field, dst_vals, dst_field, src_root, dst_root, digits):
    """Map ``src_field`` into ``dst_field`` sending ``src_root`` to an element
    numerically equal to it under ``dst_root``; certify and compare exactly."""
    if src_field.is_rational:
        image = dst_field.zero
    else:
        try:
            image = express_in_field(dst_field, src_root, digits, root=dst_root)
        except RecognitionError:
            return None
        f_at = dst_field.zero
        for c in reversed(src_field.minpoly):
            f_at = f_at * image + c
        if not f_at.is_zero():
            return None
    mapped = [_map_element(v, image) if not src_field.is_rational
              else dst_field(v.coords[0]) for v in src_vals]
    if mapped != list(dst_vals):
        return None
    return image


def affine_match(x: ExactAnsatz, y: ExactAnsatz, digits: int = 60) -> AffineMatch | None:
    """Find ``A, B`` (and a field embedding) with ``x(z) = y(A z + B)``.

    Both sides are brought to :func:`normal_form`; every complex root of
    ``y``'s minimal polynomial is tried numerically, and a candidate
    embedding is certified exactly in whichever direction it exists.
    Returns ``None`` if there is no match.
    """
    if _shape(x) != _shape(y):
        return None
    xn, Ax, Bx = normal_form(x)
    yn, Ay, By = normal_form(y)
    xv, yv = _coeff_list(xn), _coeff_list(yn)
    with gmpy2.context(precision=bits(digits) + 32):
        x_root = _preferred_root(x.field, digits)
        y_pref = _preferred_root(y.field, digits)
        xnum = _embed_all(xv, x_root, digits)
        tol = mpfr(10) ** (-(digits // 3))
        for theta in _field_roots(y.field, digits):
            ynum = _embed_all(yv, theta, digits)
            if any(abs(a - b) > tol * max(mpfr(1), abs(a)) for a, b in zip(xnum, ynum)):
                continue
            conj = abs(theta - y_pref) > tol
            # y's generator into x's field
            image = _try_map(yv, y.field, xv, x.field, theta, x_root, digits)
            if image is not None:
                ay = _map_element(Ay, image) if not y.field.is_rational else x.field(Ay.coords[0])
                by = _map_element(By, image) if not y.field.is_rational else x.field(By.coords[0])
                A = ay / Ax
                return AffineMatch(A, by - A * Bx, x.field, image, conj, "y->x")
            # x's generator into y's field
            image = _try_map(xv, x.field, yv, y.field, x_root, theta, digits)
            if image is not None:
                ax = _map_element(Ax, image) if not x.field.is_rational else y.field(Ax.coords[0])
                bx = _map_element(Bx, image) if not x.field.is_rational else y.field(Bx.coords[0])
                A = Ay / ax
                return AffineMatch(A, By - A * bx, y.field, image, conj, "x->y")
    return None


# ---------------------------------------------------------------------------
# catalog files


@dataclass
class CatalogEntry:
    orbit: str
    passport: Passport
    ansatz: ExactAnsatz
    group: str = ""
    note: str = ""

    def to_text(self) -> str:
        return format_entry(self)


def _fmt_coords(v: FieldElement) -> str:
    return ",".join(str(c) for c in v.coords)


def _fmt_poly(p: FieldPolynomial) -> str:
    return ";".join(_fmt_coords(c) for c in p.coeffs)


def format_entry(e: CatalogEntry) -> str:
    x = e.ansatz
    lines = [CATALOG_HEADER, f"orbit={e.orbit}", f"passport={e.passport}"]
    if e.group:
        lines.append(f"group={e.group}")
    if e.note:
        lines.append(f"note={e.note}")
    lines.append("minpoly=" + ",".join(map(str, x.field.minpoly)))
    if x.field.embedding is not None and not x.field.is_rational:
        lines.append(f"embedding={x.field.embedding}")
    for name in POLY_NAMES:
        lines.append(f"{FILE_KEYS[name]}={_fmt_poly(getattr(x, name))}")
    lines.append(f"c={_fmt_coords(x.c)}")
    return "\n".join(lines) + "\n"


def _parse_element(fld: NumberField, text: str) -> FieldElement:
    try:
        coords = [Fraction(t) for t in text.split(",")]
    except (ValueError, ZeroDivisionError) as exc:
        raise CatalogError(f"bad coordinates {text!r}: {exc}") from None
    if len(coords) != fld.degree:
        raise CatalogError(f"{text!r} has {len(coords)} coordinates, field degree is {fld.degree}")
    return fld.element(coords)


def parse_entry(text: str) -> CatalogEntry:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != CATALOG_HEADER:
        raise CatalogError(f"missing header {CATALOG_HEADER!r}")
    kv = {}
    for ln in lines[1:]:
        if "=" not in ln:
            raise CatalogError(f"malformed line {ln!r}")
        k, v = ln.split("=", 1)
        kv[k.strip()] = v.strip()
    missing = [k for k in ("orbit", "passport", "minpoly", "P3", "P1", "Q2", "Q1", "R", "c") if k not in kv]
    if missing:
        raise CatalogError(f"missing keys: {', '.join(missing)}")
    try:
        passport = parse_passport(kv["passport"])
        fld = NumberField(tuple(int(t) for t in kv["minpoly"].split(",")), kv.get("embedding"))
    except (DessinError, ValueError) as exc:
        raise CatalogError(str(exc)) from None
    polys = {}
    for name, key in FILE_KEYS.items():
        body = kv[key]
        coeffs = [_parse_element(fld, t) for t in body.split(";")] if body else []
        polys[name] = FieldPolynomial(fld, coeffs)
    c = _parse_element(fld, kv["c"])
    ans = ExactAnsatz(fld, *(polys[k] for k in POLY_NAMES), c)
    return CatalogEntry(kv["orbit"], passport, ans, kv.get("group", ""), kv.get("note", ""))


def read_entry(path) -> CatalogEntry:
    return parse_entry(Path(path).read_text())


def catalog_dir() -> Path:
    return Path(__file__).with_name("data") / "catalog"


def _orbit_key(label: str):
    return tuple(int(t) for t in label.split("."))


def load_catalog(directory=None) -> list[CatalogEntry]:
    d = Path(directory) if directory is not None else catalog_dir()
    entries = [read_entry(p) for p in sorted(d.glob("*.txt"))]
    return sorted(entries, key=lambda e: _orbit_key(e.orbit))


def find_entry(label: str, directory=None) -> CatalogEntry:
    for e in load_catalog(directory):
        if e.orbit == label:
            return e
    raise CatalogError(f"no catalog entry {label!r}")


# ---------------------------------------------------------------------------
# catalog sweep


@dataclass
class CatalogRow:
    orbit: str
    identity: bool
    passport: bool
    seconds: float
    message: str

    @property
    def ok(self) -> bool:
        return self.identity and self.passport

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"{self.orbit:<6} {status}  identity={'ok' if self.identity else 'no'}  " \
               f"passport={'ok' if self.passport else 'no'}  {self.seconds:6.3f}s  {self.message}"


@dataclass
class CatalogReport:
    rows: list[CatalogRow] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def to_text(self) -> str:
        lines = [r.line() for r in self.rows]
        passed = sum(r.ok for r in self.rows)
        lines.append(f"{passed}/{len(self.rows)} entries pass")
        return "\n".join(lines) + "\n"


def verify_entry(e: CatalogEntry) -> CatalogRow:
    t0 = time.perf_counter()
    res = identity_check(e.ansatz)
    pp_ok, msg = False, res.message
    if res:
        try:
            pp = symbolic_passport(e.ansatz)
            pp_ok = pp == e.passport
            msg = str(pp) if pp_ok else f"passport {pp} differs from {e.passport}"
        except VerificationError as exc:
            msg = str(exc)
    return CatalogRow(e.orbit, bool(res), pp_ok, time.perf_counter() - t0, msg)


def run_catalog(entries, strict: bool = False) -> CatalogReport:
    """Verify every entry; with ``strict`` the first failure raises."""
    report = CatalogReport()
    for e in entries:
        row = verify_entry(e)
        report.rows.append(row)
        if strict and not row.ok:
            raise VerificationError(f"catalog entry {e.orbit} fails: {row.message}")
    return report
