"""Permutation combinatorics of dessins d'enfants.

A dessin with ``n`` edges is a pair of permutations ``(a, b)`` of the edges:
``a`` rotates edges around black vertices, ``b`` around white vertices.
Points are 1-indexed in every external format and 0-indexed internally.

Products are read left to right: ``a * b`` means "apply ``a``, then ``b``",
so the face permutation is ``a * b`` and ``(a * b)(x) == b(a(x))``.
"""

from __future__ import annotations

import re
import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence


class DessinError(ValueError):
    """Raised for malformed or inconsistent dessin input."""


@dataclass(frozen=True)
class Permutation:
    """A permutation of ``{0, ..., degree-1}`` stored as its image tuple."""

    images: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.images) != list(range(len(self.images))):
            raise DessinError(f"not a bijection: {self.images}")

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def from_cycles(cls, n: int, cycles: Iterable[Sequence[int]]) -> "Permutation":
        """Build from 1-indexed cycles; unlisted points are fixed."""
        img = list(range(n))
        seen = set()
        for cyc in cycles:
            for p in cyc:
                if not 1 <= p <= n:
                    raise DessinError(f"point {p} out of range 1..{n}")
                if p in seen:
                    raise DessinError(f"point {p} repeated")
                seen.add(p)
            for x, y in zip(cyc, list(cyc[1:]) + [cyc[0]]):
                img[x - 1] = y - 1
        return cls(tuple(img))

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, x: int) -> int:
        return self.images[x]

    def __mul__(self, other: "Permutation") -> "Permutation":
        # apply self first, then other
        return Permutation(tuple(other.images[i] for i in self.images))

    def inverse(self) -> "Permutation":
        inv = [0] * self.degree
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(tuple(inv))

    def __pow__(self, k: int) -> "Permutation":
        base = self if k >= 0 else self.inverse()
        result = Permutation.identity(self.degree)
        for _ in range(abs(k)):
            result = result * base
        return result

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))

    def cycles(self) -> list[tuple[int, ...]]:
        """All cycles (0-indexed), fixed points included, by smallest point."""
        seen = [False] * self.degree
        out = []
        for start in range(self.degree):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = True
            x = self.images[start]
            while x != start:
                seen[x] = True
                cyc.append(x)
                x = self.images[x]
            out.append(tuple(cyc))
        return out

    def cycle_type(self) -> tuple[int, ...]:
        return tuple(sorted((len(c) for c in self.cycles()), reverse=True))

    def order(self) -> int:
        from math import lcm
        return lcm(*self.cycle_type()) if self.degree else 1

    def to_cycle_string(self) -> str:
        parts = ["(" + " ".join(str(x + 1) for x in c) + ")"
                 for c in self.cycles() if len(c) > 1]
        return "".join(parts) if parts else "()"

    def __str__(self):
        return self.to_cycle_string()


_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def parse_cycles(text: str, n: int) -> Permutation:
    """Parse disjoint-cycle notation such as ``(1 2 3)(4 5)`` or ``()``."""
    text = text.strip()
    if not text:
        return Permutation.identity(n)
    leftover = _CYCLE_RE.sub("", text).strip()
    if leftover:
        raise DessinError(f"malformed cycles: {text!r}")
    cycles = []
    for body in _CYCLE_RE.findall(text):
        tokens = body.replace(",", " ").split()
        try:
            cyc = [int(t) for t in tokens]
        except ValueError:
            raise DessinError(f"malformed cycle: ({body})") from None
        if cyc:
            cycles.append(cyc)
    return Permutation.from_cycles(n, cycles)


@dataclass(frozen=True)
class Passport:
    """Black, white and face partitions of ``n`` (parts sorted descending)."""

    lambda0: tuple[int, ...]
    lambda1: tuple[int, ...]
    lambda2: tuple[int, ...]

    def __post_init__(self):
        sums = {sum(self.lambda0), sum(self.lambda1), sum(self.lambda2)}
        if len(sums) != 1:
            raise DessinError(f"partitions of different sizes: {self}")
        for lam in (self.lambda0, self.lambda1, self.lambda2):
            if any(p <= 0 for p in lam):
                raise DessinError(f"non-positive part in {lam}")
        object.__setattr__(self, "lambda0", tuple(sorted(self.lambda0, reverse=True)))
        object.__setattr__(self, "lambda1", tuple(sorted(self.lambda1, reverse=True)))
        object.__setattr__(self, "lambda2", tuple(sorted(self.lambda2, reverse=True)))

    @property
    def n(self) -> int:
        return sum(self.lambda0)

    @property
    def p3(self) -> int:
        return self.lambda0.count(3)

    @property
    def p1(self) -> int:
        return self.lambda0.count(1)

    @property
    def q2(self) -> int:
        return self.lambda1.count(2)

    @property
    def q1(self) -> int:
        return self.lambda1.count(1)

    @property
    def r(self) -> int:
        """Number of degree-1 faces besides the distinguished pole."""
        if len(self.lambda2) == 1:
            return 0
        return self.lambda2[1:].count(1) if self.lambda2[0] > 1 else len(self.lambda2) - 1

    @property
    def pole_order(self) -> int:
        return self.lambda2[0]

    def __str__(self):
        return "(" + " | ".join(_fmt_partition(lam) for lam in
                                (self.lambda0, self.lambda1, self.lambda2)) + ")"


def _fmt_partition(lam: Sequence[int]) -> str:
    counts = Counter(lam)
    return " ".join(f"{k}^{counts[k]}" for k in sorted(counts, reverse=True))


def parse_partition(text: str) -> tuple[int, ...]:
    """Parse ``3^2 1^1``, ``3^2 1`` or ``5 1`` style partitions."""
    parts: list[int] = []
    for tok in text.replace(",", " ").split():
        if "^" in tok:
            base, exp = tok.split("^")
            parts.extend([int(base)] * int(exp))
        else:
            parts.append(int(tok))
    if not parts:
        raise DessinError(f"empty partition: {text!r}")
    return tuple(parts)


def parse_passport(text: str) -> Passport:
    """Parse ``(3^2 | 2^2 1^2 | 5 1)``."""
    body = text.strip().strip("()")
    fields = body.split("|")
    if len(fields) != 3:
        raise DessinError(f"passport needs three partitions: {text!r}")
    return Passport(*(parse_partition(f) for f in fields))


@dataclass(frozen=True)
class Dessin:
    a: Permutation
    b: Permutation
    label: str | None = None

    def __post_init__(self):
        if self.a.degree != self.b.degree:
            raise DessinError("a and b act on different numbers of points")
        if not is_transitive([self.a, self.b], self.a.degree):
            raise DessinError("the pair (a, b) is not transitive")

    @property
    def n(self) -> int:
        return self.a.degree

    @property
    def face(self) -> Permutation:
        return self.a * self.b

    def to_text(self) -> str:
        lines = []
        if self.label:
            lines.append(f"# orbit={self.label}")
        lines += [f"n={self.n}", f"a={self.a}", f"b={self.b}"]
        return "\n".join(lines) + "\n"


def parse_dessin(text: str) -> Dessin:
    """Parse the line-based dessin format.

    Lines (or ``;``-separated fields) ``n=<int>``, ``a=<cycles>``,
    ``b=<cycles>``; an optional ``# orbit=<label>`` comment names the orbit.
    """
    fields: dict[str, str] = {}
    label = None
    for raw in re.split(r"[;\n]", text):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = re.match(r"#\s*orbit\s*=\s*(\S+)", line)
            if m:
                label = m.group(1)
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or key not in ("n", "a", "b"):
            raise DessinError(f"unexpected line: {line!r}")
        if key in fields:
            raise DessinError(f"duplicate field {key!r}")
        fields[key] = value.strip()
    missing = {"n", "a", "b"} - fields.keys()
    if missing:
        raise DessinError(f"missing fields: {sorted(missing)}")
    try:
        n = int(fields["n"])
    except ValueError:
        raise DessinError(f"bad n: {fields['n']!r}") from None
    if n < 1:
        raise DessinError("n must be positive")
    return Dessin(parse_cycles(fields["a"], n), parse_cycles(fields["b"], n), label)


def fixtures_dir() -> Path:
    """Directory of the bundled dessin files, one per catalog orbit."""
    return Path(__file__).with_name("data") / "fixtures"


def load_fixture(label: str) -> Dessin:
    """The bundled dessin for orbit ``label`` (e.g. ``"6.1"``)."""
    path = fixtures_dir() / f"orbit-{label}.txt"
    if not path.exists():
        raise DessinError(f"no bundled dessin for orbit {label!r}")
    return parse_dessin(path.read_text())


def is_transitive(gens: Sequence[Permutation], n: int) -> bool:
    return len(orbit(0, gens)) == n if n else True


def orbit(x: int, gens: Sequence[Permutation]) -> list[int]:
    seen = {x}
    out = [x]
    for y in out:
        for g in gens:
            z = g.images[y]
            if z not in seen:
                seen.add(z)
                out.append(z)
    return out


def passport(d: Dessin) -> Passport:
    return Passport(d.a.cycle_type(), d.b.cycle_type(), d.face.cycle_type())


def genus(d: Dessin) -> int:
    chi = len(d.a.cycles()) + len(d.b.cycles()) + len(d.face.cycles()) - d.n
    if chi % 2 or chi > 2:
        raise DessinError(f"Euler characteristic {chi} is impossible")
    return (2 - chi) // 2


def is_23_type(d: Dessin) -> bool:
    return (all(len(c) in (1, 3) for c in d.a.cycles())
            and all(len(c) in (1, 2) for c in d.b.cycles()))


def is_weighted_tree(d: Dessin) -> bool:
    return genus(d) == 0 and sum(1 for p in passport(d).lambda2 if p > 1) <= 1


# ---------------------------------------------------------------------------
# Stabilizer chains


class StabilizerChain:
    """Deterministic Schreier-Sims stabilizer chain for a permutation group.

    Level ``l`` holds a base point, the strong generators fixing the earlier
    base points, and a transversal mapping each orbit point ``y`` to a group
    element sending the base point to ``y``.
    """

    def __init__(self, gens: Sequence[Permutation], n: int):
        self.n = n
        self.ident = tuple(range(n))
        gens = [tuple(g.images) for g in gens if not g.is_identity()]
        self.base: list[int] = []
        for g in gens:
            if all(g[b] == b for b in self.base):
                self.base.append(next(i for i, x in enumerate(g) if i != x))
        self.gens = [[g for g in gens if all(g[b] == b for b in self.base[:lvl])]
                     for lvl in range(len(self.base))]
        self.trans = [self._transversal(lvl) for lvl in range(len(self.base))]
        self._complete()

    @staticmethod
    def _mul(p, q):
        return tuple(q[i] for i in p)

    @staticmethod
    def _inv(p):
        inv = [0] * len(p)
        for i, j in enumerate(p):
            inv[j] = i
        return tuple(inv)

    def _transversal(self, lvl):
        b = self.base[lvl]
        trans = {b: self.ident}
        queue = [b]
        for x in queue:
            for g in self.gens[lvl]:
                y = g[x]
                if y not in trans:
                    trans[y] = self._mul(trans[x], g)
                    queue.append(y)
        return trans

    def _strip(self, g, start):
        for lvl in range(start, len(self.base)):
            t = self.trans[lvl].get(g[self.base[lvl]])
            if t is None:
                return g, lvl
            g = self._mul(g, self._inv(t))
        return g, len(self.base)

    def _complete(self):
        lvl = len(self.base) - 1
        while lvl >= 0:
            changed = False
            for x, u in list(self.trans[lvl].items()):
                for s in list(self.gens[lvl]):
                    y = self._mul(self._mul(u, s), self._inv(self.trans[lvl][s[x]]))
                    h, j = self._strip(y, lvl + 1)
                    if h == self.ident:
                        continue
                    if j == len(self.base):
                        self.base.append(next(i for i, v in enumerate(h) if i != v))
                        self.gens.append([])
                        self.trans.append({})
                    for k in range(lvl + 1, j + 1):
                        self.gens[k].append(h)
                        self.trans[k] = self._transversal(k)
                    lvl = j
                    changed = True
                    break
                if changed:
                    break
            if not changed:
                lvl -= 1

    def order(self) -> int:
        out = 1
        for t in self.trans:
            out *= len(t)
        return out

    def contains(self, p: Permutation) -> bool:
        g, lvl = self._strip(tuple(p.images), 0)
        return lvl == len(self.base) and g == self.ident


def group_order(d: Dessin) -> int:
    """Order of the edge rotation group ``<a, b>``."""
    return StabilizerChain([d.a, d.b], d.n).order()


def minimal_block(gens: Sequence[Permutation], n: int, x: int, y: int) -> list[int]:
    """Smallest block of imprimitivity containing points ``x`` and ``y``."""
    parent = list(range(n))

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    pending = [(x, y)]
    while pending:
        u, v = pending.pop()
        ru, rv = find(u), find(v)
        if ru == rv:
            continue
        parent[rv] = ru
        for g in gens:
            pending.append((g.images[u], g.images[v]))
    root = find(x)
    return [p for p in range(n) if find(p) == root]


def is_primitive(d: Dessin) -> bool:
    return is_primitive_group([d.a, d.b], d.n)


def is_primitive_group(gens: Sequence[Permutation], n: int) -> bool:
    if not is_transitive(gens, n):
        return False
    return all(len(minimal_block(gens, n, 0, y)) == n for y in range(1, n))


# ---------------------------------------------------------------------------
# Canonical forms and realizations


def _relabel_from(a: tuple[int, ...], b: tuple[int, ...], start: int):
    n = len(a)
    label = [-1] * n
    label[start] = 0
    order = [start]
    for x in order:
        for g in (a, b):
            y = g[x]
            if label[y] < 0:
                label[y] = len(order)
                order.append(y)
    if len(order) != n:
        return None
    na = [0] * n
    nb = [0] * n
    for x in range(n):
        na[label[x]] = label[a[x]]
        nb[label[x]] = label[b[x]]
    return tuple(na), tuple(nb)


def canonical_pair(a: Permutation, b: Permutation) -> tuple[Permutation, Permutation]:
    """Lexicographically least simultaneous conjugate among BFS relabelings.

    For a transitive pair, relabelings by breadth-first search from each base
    point realize every conjugate that can win, so the minimum is a complete
    conjugacy invariant.
    """
    best = None
    for s in range(a.degree):
        cand = _relabel_from(a.images, b.images, s)
        if cand is None:
            raise DessinError("canonical form needs a transitive pair")
        key = cand[0] + cand[1]
        if best is None or key < best[0]:
            best = (key, cand)
    na, nb = best[1]
    return Permutation(na), Permutation(nb)


def canonical_dessin(d: Dessin) -> Dessin:
    a, b = canonical_pair(d.a, d.b)
    return Dessin(a, b, d.label)


def _perm_with_cycle_type(lam: Sequence[int]) -> Permutation:
    img = []
    start = 0
    for k in sorted(lam, reverse=True):
        img += [start + (i + 1) % k for i in range(k)]
        start += k
    return Permutation(tuple(img))


Filter = Callable[[Dessin], bool]


def make_filters(genus0: bool = True, primitive: bool = False,
                 order: int | None = None) -> list[Filter]:
    out: list[Filter] = []
    if genus0:
        out.append(lambda d: genus(d) == 0)
    if primitive:
        out.append(is_primitive)
    if order is not None:
        out.append(lambda d: group_order(d) == order)
    return out


class SearchLimitExceeded(RuntimeError):
    pass


EXHAUSTIVE_LIMIT = 14


def _enumerate_partners(a: tuple[int, ...], lam1: Sequence[int],
                        lam2: Counter) -> Iterator[tuple[int, ...]]:
    """All ``b`` of cycle type ``lam1`` such that ``a*b`` has type ``lam2``.

    Backtracking fills ``b`` cycle by cycle from the smallest free point and
    prunes as soon as a closed face cycle has a length no longer available.
    """
    n = len(a)
    ainv = [0] * n
    for i, j in enumerate(a):
        ainv[j] = i
    b = [-1] * n
    need = Counter(lam1)
    faces = Counter(lam2)

    def closed_face(x):
        # face map f(x) = b(a(x)); return cycle length if closed, else 0
        y = x
        k = 0
        while True:
            z = b[a[y]]
            if z < 0:
                return 0
            k += 1
            y = z
            if y == x:
                return k

    def faces_ok(points):
        used = Counter()
        checked = set()
        for p in points:
            # new arcs of the face map start at a^{-1}(p)
            x = ainv[p]
            if x in checked:
                continue
            length = closed_face(x)
            if length:
                y = x
                for _ in range(length):
                    checked.add(y)
                    y = b[a[y]]
                used[length] += 1
        for k, v in used.items():
            if faces[k] < v:
                return None
        return used

    def rec():
        try:
            start = b.index(-1)
        except ValueError:
            yield tuple(b)
            return
        for k in sorted(need):
            if need[k] == 0:
                continue
            need[k] -= 1
            yield from place_cycle(k, [start])
            need[k] += 1

    def place_cycle(k, cyc):
        if len(cyc) == k:
            for x, y in zip(cyc, cyc[1:] + cyc[:1]):
                b[x] = y
            used = faces_ok(cyc)
            if used is not None:
                faces.subtract(used)
                yield from rec()
                faces.update(used)
            for x in cyc:
                b[x] = -1
            return
        for p in range(cyc[0] + 1, n):
            if b[p] < 0 and p not in cyc:
                yield from place_cycle(k, cyc + [p])

    yield from rec()


def realizations_of_passport(p: Passport, filters: Sequence[Filter] = (),
                             randomized: bool = False, tries: int = 200000,
                             seed: int = 0,
                             ambient: Sequence[Permutation] | None = None) -> list[Dessin]:
    """Conjugacy classes of dessins with passport ``p`` passing ``filters``.

    Exhaustive for ``n <= 14``. With ``randomized`` the partner ``b`` is drawn
    at random (``tries`` draws, fixed ``seed``); with ``ambient`` generators
    both ``a`` and ``b`` are drawn from the group they generate, which is the
    practical route for large sporadic groups. Each class is returned as its
    canonical representative, sorted.
    """
    n = p.n
    if not randomized and ambient is None and n > EXHAUSTIVE_LIMIT:
        raise SearchLimitExceeded(
            f"exhaustive search is limited to n <= {EXHAUSTIVE_LIMIT}; use randomized mode")
    lam2 = Counter(p.lambda2)
    found: dict[tuple, Dessin] = {}

    def consider(a_img, b_img):
        a, b = Permutation(a_img), Permutation(b_img)
        if (a * b).cycle_type() != p.lambda2 or not is_transitive([a, b], n):
            return
        ca, cb = canonical_pair(a, b)
        key = ca.images + cb.images
        if key in found:
            return
        d = Dessin(ca, cb)
        if all(f(d) for f in filters):
            found[key] = d
        else:
            found[key] = None

    if ambient is not None:
        _ambient_search(p, ambient, consider, tries, seed)
    elif randomized:
        a = _perm_with_cycle_type(p.lambda0)
        rng = random.Random(seed)
        b0 = _perm_with_cycle_type(p.lambda1)
        for _ in range(tries):
            pts = list(range(n))
            rng.shuffle(pts)
            # conjugate the standard b by a random relabeling
            img = [0] * n
            for i in range(n):
                img[pts[i]] = pts[b0.images[i]]
            consider(a.images, tuple(img))
    else:
        a = _perm_with_cycle_type(p.lambda0)
        for b_img in _enumerate_partners(a.images, p.lambda1, lam2):
            consider(a.images, b_img)
    out = [d for d in found.values() if d is not None]
    out.sort(key=lambda d: d.a.images + d.b.images)
    return out


def _ambient_search(p, gens, consider, tries, seed):
    n = p.n
    rng = random.Random(seed)
    # product replacement for near-uniform random elements
    state = [tuple(g.images) for g in gens] * 3 + [tuple(range(n))]
    mul = StabilizerChain._mul

    def rand_elt():
        i, j = rng.sample(range(len(state) - 1), 2)
        state[i] = mul(state[i], state[j])
        state[-1] = mul(state[-1], state[i])
        return state[-1]

    for _ in range(50):
        rand_elt()
    want_a, want_b = p.lambda0, p.lambda1

    def power_to(ct_target):
        # random element, powered down to the target cycle type if possible
        for _ in range(200):
            g = Permutation(rand_elt())
            o = g.order()
            for k in range(1, o + 1):
                if o % k == 0:
                    h = g ** (o // k)
                    if h.cycle_type() == ct_target:
                        return h
        return None

    for _ in range(tries):
        a = power_to(want_a)
        b = power_to(want_b)
        if a is None or b is None:
            continue
        consider(a.images, b.images)
