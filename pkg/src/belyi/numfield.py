"""Exact arithmetic in a number field ``Q(a) = Q[z]/(f)``.

Elements are rational coordinate vectors in the power basis
``1, a, ..., a^(d-1)``. The field ``Q`` itself is the degree-1 field with
minimal polynomial ``z`` (so ``a = 0`` and every element is a plain rational).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd

import gmpy2
from gmpy2 import mpc, mpfr


def _content_normalize(coeffs) -> tuple[int, ...]:
    coeffs = [int(c) for c in coeffs]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    g = 0
    for c in coeffs:
        g = gcd(g, c)
    if g == 0:
        raise ValueError("zero polynomial")
    if coeffs[-1] < 0:
        g = -g
    return tuple(c // g for c in coeffs)


def exact_digits(precision: int) -> int:
    """Decimal digits that make a ``precision``-bit float round-trip exactly."""
    return int(precision * 0.30102999566398120) + 2


def decimal_string(x, digits: int | None = None) -> str:
    """``x`` (an ``mpfr``) in scientific notation with ``digits`` significant
    digits; ``None`` prints enough digits to read the value back exactly at
    its own precision."""
    if not isinstance(x, type(mpfr(0))):
        x = mpfr(x)  # note: mpfr(mpfr) would round to the context precision
    if x == 0:
        return "0"
    if digits is None:
        digits = exact_digits(x.precision)
    mant, exp, _ = x.digits(10, digits)
    sign = ""
    if mant.startswith("-"):
        sign, mant = "-", mant[1:]
    mant = mant.rstrip("0") or "0"
    frac = mant[1:]
    return f"{sign}{mant[0]}{'.' + frac if frac else ''}e{exp - 1}"


def format_complex(z, digits: int | None = None) -> str:
    """``(re im)`` text form read back by :func:`parse_complex`."""
    return f"({decimal_string(z.real, digits)} {decimal_string(z.imag, digits)})"


def parse_complex(text: str):
    """Parse ``"re"`` or ``"(re im)"`` into an ``mpc`` at the current precision."""
    parts = text.strip().strip("()").split()
    if len(parts) == 1:
        return mpc(mpfr(parts[0]))
    return mpc(mpfr(parts[0]), mpfr(parts[1]))


@dataclass(frozen=True, eq=False)
class NumberField:
    """``Q(a)`` with ``f(a) = 0``; ``minpoly`` is integral, low to high.

    ``embedding`` is a decimal string approximating the chosen complex root
    (``None`` means "unspecified", which is fine for exact work).
    """

    minpoly: tuple[int, ...]
    embedding: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "minpoly", _content_normalize(self.minpoly))
        if len(self.minpoly) < 2:
            raise ValueError("minimal polynomial must have degree >= 1")

    @property
    def degree(self) -> int:
        return len(self.minpoly) - 1

    @property
    def is_rational(self) -> bool:
        return self.degree == 1

    @cached_property
    def _monic(self) -> tuple[Fraction, ...]:
        lead = self.minpoly[-1]
        return tuple(Fraction(c, lead) for c in self.minpoly)

    def __eq__(self, other):
        return isinstance(other, NumberField) and self.minpoly == other.minpoly

    def __hash__(self):
        return hash(self.minpoly)

    def __repr__(self):
        return f"NumberField({list(self.minpoly)})"

    # -- element constructors -------------------------------------------------

    def element(self, coords) -> "FieldElement":
        coords = [Fraction(c) for c in coords]
        if len(coords) > self.degree:
            return self.reduce(coords)
        coords += [Fraction(0)] * (self.degree - len(coords))
        return FieldElement(self, tuple(coords))

    def __call__(self, value) -> "FieldElement":
        """The rational ``value`` as a field element."""
        return self.element([value])

    @cached_property
    def zero(self) -> "FieldElement":
        return self(0)

    @cached_property
    def one(self) -> "FieldElement":
        return self(1)

    @cached_property
    def gen(self) -> "FieldElement":
        if self.is_rational:
            # root of c1 z + c0
            return self(Fraction(-self.minpoly[0], self.minpoly[1]))
        return self.element([0, 1])

    def reduce(self, coeffs) -> "FieldElement":
        """Reduce a polynomial in ``a`` modulo ``f``."""
        c = [Fraction(v) for v in coeffs]
        d = self.degree
        f = self._monic
        for k in range(len(c) - 1, d - 1, -1):
            t = c[k]
            if t:
                for i in range(d):
                    c[k - d + i] -= t * f[i]
            c[k] = Fraction(0)
        c = c[:d] + [Fraction(0)] * (d - len(c))
        if self.is_rational:
            # power basis {1}: the generator is -f0/f1, already folded in
            return FieldElement(self, (c[0],))
        return FieldElement(self, tuple(c))

    def embed_root(self, digits: int = 50):
        """The embedding as an ``mpc`` (refined by Newton on ``f``)."""
        if self.embedding is None:
            raise ValueError("field has no embedding")
        with gmpy2.context(precision=int(digits * 3.33) + 16):
            x = parse_complex(self.embedding)
            f = self.minpoly
            for _ in range(200):
                val = sum((c * x ** k for k, c in enumerate(f)), mpc(0))
                der = sum((k * c * x ** (k - 1) for k, c in enumerate(f) if k), mpc(0))
                if der == 0:
                    break
                step = val / der
                x -= step
                if abs(step) <= abs(x) * gmpy2.mpfr(10) ** (-digits - 5) or step == 0:
                    break
            return x

    def with_embedding(self, embedding) -> "NumberField":
        return NumberField(self.minpoly, embedding)


@dataclass(frozen=True, eq=False)
class FieldElement:
    field: NumberField
    coords: tuple[Fraction, ...]

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise ValueError(f"mixed fields {self.field} and {other.field}")
            return other
        return self.field(other)

    def __add__(self, other):
        if isinstance(other, FieldPolynomial):
            return NotImplemented
        other = self._coerce(other)
        return FieldElement(self.field, tuple(a + b for a, b in zip(self.coords, other.coords)))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, tuple(-a for a in self.coords))

    def __sub__(self, other):
        if isinstance(other, FieldPolynomial):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, FieldPolynomial):
            return NotImplemented
        if not isinstance(other, FieldElement):
            k = Fraction(other)
            return FieldElement(self.field, tuple(a * k for a in self.coords))
        other = self._coerce(other)
        if self.field.is_rational:
            return FieldElement(self.field, (self.coords[0] * other.coords[0],))
        prod = [Fraction(0)] * (2 * self.field.degree - 1)
        for i, a in enumerate(self.coords):
            if a:
                for j, b in enumerate(other.coords):
                    if b:
                        prod[i + j] += a * b
        return self.field.reduce(prod)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out, base = self.field.one, self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __truediv__(self, other):
        if isinstance(other, FieldPolynomial):
            return NotImplemented
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def is_zero(self) -> bool:
        return not any(self.coords)

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field == other.field and self.coords == other.coords
        try:
            return self.coords == self.field(other).coords
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash((self.field, self.coords))

    def is_rational(self) -> bool:
        return not any(self.coords[1:])

    def inverse(self) -> "FieldElement":
        """Inverse through the extended Euclidean algorithm over ``Q``."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in a number field")
        if self.is_rational():
            return self.field(1 / self.coords[0])
        # find u with u*g = 1 mod f
        f = list(self.field._monic)
        g = list(self.coords)
        r0, r1 = _trim(f), _trim(g)
        s0, s1 = [Fraction(0)], [Fraction(1)]
        while len(r1) > 1 or r1[0] == 0:
            q, r = _qdivmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _trim(_psub(s0, _pmul(q, s1)))
            if len(r1) == 1 and r1[0] == 0:
                raise ZeroDivisionError("element is a zero divisor: minimal polynomial is reducible")
        inv = [v / r1[0] for v in s1]
        return self.field.reduce(inv)

    def embed(self, digits: int = 50, root=None):
        with gmpy2.context(precision=int(digits * 3.33) + 16):
            a = root if root is not None else (self.field.embed_root(digits)
                                               if not self.field.is_rational else mpc(0))
            acc = mpc(0)
            for c in reversed(self.coords):
                acc = acc * a + mpc(gmpy2.mpq(c.numerator, c.denominator))
            return acc

    def to_text(self) -> str:
        return ",".join(str(c) for c in self.coords)

    def __repr__(self):
        return f"FieldElement({self.to_text()})"


def _trim(p):
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p or [Fraction(0)]


def _psub(a, b):
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)]


def _pmul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _qdivmod(a, b):
    a = list(a)
    b = _trim(b)
    q = [Fraction(0)] * max(1, len(a) - len(b) + 1)
    lead = b[-1]
    for k in range(len(a) - len(b), -1, -1):
        t = a[k + len(b) - 1] / lead
        q[k] = t
        if t:
            for i, v in enumerate(b):
                a[k + i] -= t * v
    return _trim(q), _trim(a[:len(b) - 1] or [Fraction(0)])


class FieldPolynomial:
    """Dense polynomial over a :class:`NumberField`, coefficients low to high."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: NumberField, coeffs):
        self.field = field
        cs = [c if isinstance(c, FieldElement) else field(c) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def monomial(cls, field, k, coeff=1):
        return cls(field, [field.zero] * k + [coeff if isinstance(coeff, FieldElement) else field(coeff)])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def is_zero(self) -> bool:
        return not self.coeffs

    def lead(self) -> FieldElement:
        return self.coeffs[-1] if self.coeffs else self.field.zero

    def __getitem__(self, k) -> FieldElement:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else self.field.zero

    def __eq__(self, other):
        return isinstance(other, FieldPolynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def _lift(self, other) -> "FieldPolynomial":
        if isinstance(other, FieldPolynomial):
            if other.field != self.field:
                raise ValueError(f"mixed fields {self.field} and {other.field}")
            return other
        if not isinstance(other, FieldElement):
            other = self.field(other)
        return FieldPolynomial(self.field, [other])

    def __add__(self, other):
        other = self._lift(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return FieldPolynomial(self.field, [self[i] + other[i] for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return FieldPolynomial(self.field, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, FieldPolynomial):
            return FieldPolynomial(self.field, [c * other for c in self.coeffs])
        if self.is_zero() or other.is_zero():
            return FieldPolynomial(self.field, [])
        out = [self.field.zero] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                if not b.is_zero():
                    out[i + j] = out[i + j] + a * b
        return FieldPolynomial(self.field, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = FieldPolynomial(self.field, [self.field.one])
        for _ in range(k):
            out = out * self
        return out

    def derivative(self):
        return FieldPolynomial(self.field, [c * k for k, c in enumerate(self.coeffs)][1:])

    def monic(self):
        if self.is_zero():
            return self
        inv = self.lead().inverse()
        return FieldPolynomial(self.field, [c * inv for c in self.coeffs])

    def divmod(self, other):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return FieldPolynomial(self.field, []), self
        inv = other.lead().inverse()
        q = [self.field.zero] * (dq + 1)
        for k in range(dq, -1, -1):
            t = rem[k + len(other.coeffs) - 1] * inv
            q[k] = t
            if not t.is_zero():
                for i, v in enumerate(other.coeffs):
                    rem[k + i] = rem[k + i] - t * v
        return FieldPolynomial(self.field, q), FieldPolynomial(self.field, rem[:len(other.coeffs) - 1])

    def __call__(self, x):
        acc = self.field.zero if isinstance(x, FieldElement) or not self.coeffs else 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def compose_affine(self, A: FieldElement, B: FieldElement) -> "FieldPolynomial":
        """``p(A z + B)`` by Horner's rule."""
        lin = FieldPolynomial(self.field, [B, A])
        acc = FieldPolynomial(self.field, [])
        for c in reversed(self.coeffs):
            acc = acc * lin + FieldPolynomial(self.field, [c])
        return acc

    def map_coeffs(self, fn, field=None) -> "FieldPolynomial":
        return FieldPolynomial(field or self.field, [fn(c) for c in self.coeffs])

    def __repr__(self):
        return f"FieldPolynomial({[c.to_text() for c in self.coeffs]})"


def poly_gcd(f: FieldPolynomial, g: FieldPolynomial) -> FieldPolynomial:
    """Monic gcd by the Euclidean algorithm (monic remainders keep sizes tame)."""
    a, b = f.monic(), g.monic()
    while not b.is_zero():
        _, r = a.divmod(b)
        a, b = b, r.monic()
    return a.monic()


def squarefree_decomposition(f: FieldPolynomial) -> dict[int, FieldPolynomial]:
    """Yun's algorithm: ``f = lead * prod_k g_k^k`` with ``g_k`` squarefree, coprime.

    Returns ``{k: g_k}`` for the non-constant factors. Characteristic zero.
    """
    out: dict[int, FieldPolynomial] = {}
    if f.degree <= 0:
        return out
    fp = f.derivative()
    a = poly_gcd(f, fp)
    b, _ = f.divmod(a)
    c, _ = fp.divmod(a)
    d = c - b.derivative()
    k = 1
    while b.degree > 0:
        g = poly_gcd(b, d)
        if g.degree > 0:
            out[k] = g
        b, _ = b.divmod(g)
        c, _ = d.divmod(g)
        d = c - b.derivative()
        k += 1
    return out
