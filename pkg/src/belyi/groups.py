"""Permutation generators of a few groups acting on projective lines.

These serve as ambient groups for the randomized realization search when a
passport is too large for exhaustive enumeration. Points of ``P^1(F_q)``
are numbered ``0 .. q-1`` for the field elements and ``q`` for infinity.
"""

from __future__ import annotations

from .dessin import Permutation


class GF:
    """The finite field with ``p^k`` elements for ``k = 1`` or ``p = 2``.

    Elements are integers ``0 .. q-1``; for ``2^k`` they encode polynomials
    over ``F_2`` reduced modulo a fixed primitive polynomial.
    """

    _PRIMITIVE = {2: 0b111, 3: 0b1011, 4: 0b10011, 5: 0b100101}

    def __init__(self, p: int, k: int = 1):
        if k > 1 and p != 2:
            raise ValueError("only prime fields and binary extension fields are supported")
        if k > 1 and k not in self._PRIMITIVE:
            raise ValueError(f"no primitive polynomial stored for 2^{k}")
        self.p, self.k, self.q = p, k, p ** k

    def add(self, x: int, y: int) -> int:
        return x ^ y if self.k > 1 else (x + y) % self.p

    def neg(self, x: int) -> int:
        return x if self.k > 1 else (-x) % self.p

    def mul(self, x: int, y: int) -> int:
        if self.k == 1:
            return x * y % self.p
        out = 0
        mod = self._PRIMITIVE[self.k]
        while y:
            if y & 1:
                out ^= x
            y >>= 1
            x <<= 1
            if x >> self.k:
                x ^= mod
        return out

    def power(self, x: int, e: int) -> int:
        out = 1
        while e:
            if e & 1:
                out = self.mul(out, x)
            x = self.mul(x, x)
            e >>= 1
        return out

    def inv(self, x: int) -> int:
        if x == 0:
            raise ZeroDivisionError("0 has no inverse")
        return self.power(x, self.q - 2)

    def primitive_element(self) -> int:
        for g in range(2, self.q):
            if all(self.power(g, (self.q - 1) // r) != 1 for r in _prime_factors(self.q - 1)):
                return g
        return 1  # q = 2


def _prime_factors(m: int) -> list[int]:
    out, d = [], 2
    while d * d <= m:
        if m % d == 0:
            out.append(d)
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        out.append(m)
    return out


def _mobius(F: GF, a: int, b: int, c: int, d: int) -> Permutation:
    """``x -> (a x + b)/(c x + d)`` on ``P^1(F)``."""
    inf = F.q
    img = []
    for x in range(F.q + 1):
        if x == inf:
            num, den = a, c
        else:
            num = F.add(F.mul(a, x), b)
            den = F.add(F.mul(c, x), d)
        img.append(inf if den == 0 else F.mul(num, F.inv(den)))
    return Permutation(tuple(img))


def projective_line_group(p: int, k: int = 1, full: bool = False) -> list[Permutation]:
    """Generators of ``PSL2(q)`` (or ``PGL2(q)`` with ``full``) on ``q + 1`` points."""
    F = GF(p, k)
    g = F.primitive_element()
    scale = g if full or p == 2 else F.mul(g, g)
    minus_one = F.neg(1)
    return [_mobius(F, 1, 1, 0, 1), _mobius(F, scale, 0, 0, 1), _mobius(F, 0, minus_one, 1, 0)]


def mathieu24() -> list[Permutation]:
    """``M24`` on ``P^1(F_23)``: ``PSL2(23)`` together with the map fixing
    0 and infinity that sends ``x`` to ``x^3/9`` on squares and ``9 x^3`` on
    non-squares."""
    F = GF(23)
    gens = projective_line_group(23)
    squares = {F.mul(x, x) for x in range(1, 23)}
    img = []
    for x in range(24):
        if x in (0, 23):
            img.append(x)
        elif x in squares:
            img.append(F.mul(F.power(x, 3), F.inv(9)))
        else:
            img.append(F.mul(9, F.power(x, 3)))
    return gens + [Permutation(tuple(img))]


AMBIENT_GROUPS = {
    "PSL2(16)": lambda: projective_line_group(2, 4),
    "PGL2(19)": lambda: projective_line_group(19, full=True),
    "PSL2(23)": lambda: projective_line_group(23),
    "M24": mathieu24,
}
