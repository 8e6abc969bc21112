"""Coset geometry of the index-n subgroup attached to a (2,3)-dessin.

The modular group acts on edges on the right through ``S -> b`` and
``ST -> a``, hence ``T -> b*a`` (apply ``b``, then ``a``). The subgroup
``G_D`` is the stabilizer of the root edge; its fundamental domain is the
union of translates ``g_e F`` of the standard cell
``F = {|Re t| <= 1/2, |t| >= 1}``, one for each edge ``e``.

Corner conventions: black vertices sit at ``rho = exp(2 pi i/3)``, the fixed
point of ``ST``; white vertices at ``i``, the fixed point of ``S``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .dessin import Dessin, DessinError, Permutation, is_23_type


class Side(str, Enum):
    LEFT = "L"
    RIGHT = "R"
    ARC_LEFT_HALF = "AL"
    ARC_RIGHT_HALF = "AR"


@dataclass(frozen=True)
class UnimodularMap:
    """Element ``(p q; r s)`` of PSL2(Z); equality ignores the global sign."""

    p: int
    q: int
    r: int
    s: int

    def __post_init__(self):
        if self.p * self.s - self.q * self.r != 1:
            raise ValueError(f"determinant is not 1: {self}")

    def __mul__(self, o: "UnimodularMap") -> "UnimodularMap":
        return UnimodularMap(self.p * o.p + self.q * o.r, self.p * o.q + self.q * o.s,
                             self.r * o.p + self.s * o.r, self.r * o.q + self.s * o.s)

    def inverse(self) -> "UnimodularMap":
        return UnimodularMap(self.s, -self.q, -self.r, self.p)

    def normalized(self) -> tuple[int, int, int, int]:
        t = (self.p, self.q, self.r, self.s)
        for v in t:
            if v:
                return t if v > 0 else tuple(-x for x in t)
        return t

    def __eq__(self, o):
        return isinstance(o, UnimodularMap) and self.normalized() == o.normalized()

    def __hash__(self):
        return hash(self.normalized())

    def is_identity(self) -> bool:
        return self.normalized() == (1, 0, 0, 1)

    def apply(self, tau):
        return (self.p * tau + self.q) / (self.r * tau + self.s)

    def __str__(self):
        return f"({self.p},{self.q},{self.r},{self.s})"


IDENTITY = UnimodularMap(1, 0, 0, 1)
S = UnimodularMap(0, -1, 1, 0)
T = UnimodularMap(1, 1, 0, 1)
T_INV = T.inverse()


def st_word(m: UnimodularMap) -> list[str]:
    """Write ``m`` as a word in ``S`` and ``T^{+-1}`` (Euclid on the bottom row).

    Returns letters ``'S'``, ``'T'``, ``'t'`` (for ``T^-1``) whose product,
    read left to right, equals ``m`` in PSL2(Z).
    """
    word: list[str] = []
    p, q, r, s = m.p, m.q, m.r, m.s
    while r != 0:
        if abs(p) >= abs(r):
            k = p // r
            p, q = p - k * r, q - k * s
            word.extend("T" * k if k >= 0 else "t" * -k)
        else:
            # peel off S on the left: S^-1 (p q; r s) = (r s; -p -q)
            p, q, r, s = r, s, -p, -q
            word.append("S")
    k = q * p  # p = s = +-1 here
    word.extend("T" * k if k >= 0 else "t" * -k)
    return word


def word_to_map(word: list[str]) -> UnimodularMap:
    out = IDENTITY
    for ch in word:
        out = out * {"S": S, "T": T, "t": T_INV}[ch]
    return out


def monodromy(d: Dessin) -> tuple[Permutation, Permutation]:
    """Images of ``S`` and ``T`` on edges: ``sigma_S = b``, ``sigma_T = b*a``."""
    if not is_23_type(d):
        raise DessinError("dessin is not of (2,3)-type")
    sig_s = d.b
    sig_t = d.b * d.a
    if not (sig_s * sig_s).is_identity() or not ((sig_s * sig_t) ** 3).is_identity():
        raise DessinError("monodromy violates S^2 = (ST)^3 = 1")
    return sig_s, sig_t


def act(m: UnimodularMap, edge: int, sig_s: Permutation, sig_t: Permutation) -> int:
    """Right action of ``m`` on an edge via its S,T word."""
    for ch in st_word(m):
        if ch == "S":
            edge = sig_s(edge)
        elif ch == "T":
            edge = sig_t(edge)
        else:
            edge = sig_t.inverse()(edge)
    return edge


@dataclass(frozen=True)
class BoundaryArc:
    triangle: int
    side: Side
    pairing: UnimodularMap
    partner: tuple[int, Side]


@dataclass(frozen=True)
class FundamentalDomain:
    """Cells ``reps[k] F`` for edges ``edges[k]`` plus side pairings.

    ``moves[k]`` is ``(parent cell, generator)`` of the spanning tree
    (``None`` for the root). Each entry of ``arcs`` maps its own side onto
    its partner side by ``pairing``, an element of the subgroup.
    """

    n: int
    root: int
    edges: tuple[int, ...]
    reps: tuple[UnimodularMap, ...]
    moves: tuple
    arcs: tuple[BoundaryArc, ...]
    cusp_classes: tuple[tuple[int, ...], ...]
    cusp_width_root: int
    black_classes: tuple[tuple[int, ...], ...] = field(default=())
    white_classes: tuple[tuple[int, ...], ...] = field(default=())

    def cell_of_edge(self, e: int) -> int:
        return self.edges.index(e)

    def dump(self) -> str:
        lines = []
        for k, (e, g, mv) in enumerate(zip(self.edges, self.reps, self.moves)):
            parent, gen = mv if mv else ("-", "-")
            lines.append(f"{k}  {g}  {parent}  {gen}")
        for arc in self.arcs:
            lines.append(f"{arc.triangle}.{arc.side.value} ~ "
                         f"{arc.partner[0]}.{arc.partner[1].value} via {arc.pairing}")
        return "\n".join(lines) + "\n"


def _root_edge(sig_t: Permutation) -> int:
    cyc = max(sig_t.cycles(), key=lambda c: (len(c), -min(c)))
    return min(cyc)


def coset_domain(d: Dessin, root: int | None = None) -> FundamentalDomain:
    """Spanning-tree construction of the fundamental domain.

    Starting from the root edge the whole ``T``-cycle is walked first, and
    every cell reached through ``S`` has its ``T``-cycle walked next, so the
    cells hang as close to ``i*inf`` as possible. The default root is the
    smallest edge of the longest ``T``-cycle, which puts the widest cusp at
    ``i*inf``.
    """
    sig_s, sig_t = monodromy(d)
    n = d.n
    if root is None:
        root = _root_edge(sig_t)
    cell = {root: 0}
    edges = [root]
    reps = [IDENTITY]
    moves: list = [None]
    tree = set()
    queue = [0]

    def add(parent_cell, gen, e):
        k = len(edges)
        cell[e] = k
        edges.append(e)
        reps.append(reps[parent_cell] * (T if gen == "T" else S))
        moves.append((parent_cell, gen))
        tree.add((parent_cell, gen))
        queue.append(k)
        return k

    def walk_t(k):
        while True:
            e = sig_t(edges[k])
            if e in cell:
                return
            k = add(k, "T", e)

    walk_t(0)
    for k in queue:
        e = sig_s(edges[k])
        if e not in cell:
            walk_t(add(k, "S", e))
    if len(edges) != n:
        raise DessinError("dessin is not transitive")

    arcs: list[BoundaryArc] = []
    for k in range(n):
        j = cell[sig_t(edges[k])]
        if (k, "T") not in tree:
            h = reps[k] * T * reps[j].inverse()  # maps LEFT(j) onto RIGHT(k)
            arcs.append(BoundaryArc(k, Side.RIGHT, h.inverse(), (j, Side.LEFT)))
            arcs.append(BoundaryArc(j, Side.LEFT, h, (k, Side.RIGHT)))
    for k in range(n):
        j = cell[sig_s(edges[k])]
        if j == k:
            h = reps[k] * S * reps[k].inverse()
            arcs.append(BoundaryArc(k, Side.ARC_LEFT_HALF, h, (k, Side.ARC_RIGHT_HALF)))
            arcs.append(BoundaryArc(k, Side.ARC_RIGHT_HALF, h, (k, Side.ARC_LEFT_HALF)))
        elif k < j and (k, "S") not in tree and (j, "S") not in tree:
            h = reps[k] * S * reps[j].inverse()  # maps cell j onto the S-image of cell k
            arcs.append(BoundaryArc(j, Side.ARC_LEFT_HALF, h, (k, Side.ARC_RIGHT_HALF)))
            arcs.append(BoundaryArc(k, Side.ARC_RIGHT_HALF, h.inverse(), (j, Side.ARC_LEFT_HALF)))
            arcs.append(BoundaryArc(j, Side.ARC_RIGHT_HALF, h, (k, Side.ARC_LEFT_HALF)))
            arcs.append(BoundaryArc(k, Side.ARC_LEFT_HALF, h.inverse(), (j, Side.ARC_RIGHT_HALF)))

    a_perm = sig_s * sig_t  # equals a
    cusp_classes = tuple(tuple(cell[e] for e in c) for c in sig_t.cycles())
    black = tuple(tuple(cell[e] for e in c) for c in a_perm.cycles())
    white = tuple(tuple(cell[e] for e in c) for c in sig_s.cycles())
    width_root = next(len(c) for c in sig_t.cycles() if root in c)
    return FundamentalDomain(n, root, tuple(edges), tuple(reps), tuple(moves),
                             tuple(arcs), cusp_classes, width_root, black, white)


def cusp_widths(d: Dessin) -> tuple[int, ...]:
    _, sig_t = monodromy(d)
    return sig_t.cycle_type()


def membership_check(m: UnimodularMap, d: Dessin, root: int = 0) -> bool:
    """Whether ``m`` lies in the stabilizer of ``root`` (default: edge 1)."""
    sig_s, sig_t = monodromy(d)
    return act(m, root, sig_s, sig_t) == root
