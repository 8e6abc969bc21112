import pytest

from belyi.dessin import DessinError, load_fixture, parse_dessin, passport
from belyi.domain import (IDENTITY, S, T, Side, UnimodularMap, coset_domain, cusp_widths,
                          membership_check, monodromy, st_word, word_to_map)

from test_dessin import ALL_ORBITS

TRIVIAL = parse_dessin("n=1; a=(); b=()")
STACK3 = parse_dessin("n=3; a=(1 2 3); b=()")


def test_unimodular_basics():
    assert S * S == IDENTITY  # PSL2: -1 is identified with 1
    assert (S * T) * (S * T) * (S * T) == IDENTITY
    with pytest.raises(ValueError):
        UnimodularMap(1, 1, 1, 1)


@pytest.mark.parametrize("m", [UnimodularMap(1, 0, 0, 1), UnimodularMap(2, 1, 1, 1),
                               UnimodularMap(5, -3, -3, 2), UnimodularMap(7, 3, 2, 1),
                               UnimodularMap(0, -1, 1, 5), UnimodularMap(-8, 13, 3, -5)])
def test_st_word_round_trip(m):
    assert word_to_map(st_word(m)) == m


def test_monodromy_trivial_and_stack():
    s, t = monodromy(TRIVIAL)
    assert s.is_identity() and t.is_identity()
    s, t = monodromy(STACK3)
    assert s.is_identity()
    assert t == STACK3.a


def test_monodromy_rejects_non_23():
    with pytest.raises(DessinError):
        monodromy(parse_dessin("n=4; a=(1 2 3 4); b=()"))


def test_monodromy_6_1():
    _, t = monodromy(load_fixture("6.1"))
    assert t.cycle_type() == (5, 1)


def test_trivial_domain_is_standard_cell():
    dom = coset_domain(TRIVIAL)
    assert dom.n == 1 and dom.reps == (IDENTITY,)
    pairings = {a.pairing for a in dom.arcs}
    assert T in pairings or T.inverse() in pairings
    assert S in pairings


def test_stack_domain():
    dom = coset_domain(STACK3)
    assert len(dom.reps) == 3
    assert dom.cusp_width_root == 3
    for arc in dom.arcs:
        assert membership_check(arc.pairing, STACK3, dom.root)
    pairings = {a.pairing for a in dom.arcs}
    assert T * T * T in pairings or (T * T * T).inverse() in pairings


def test_cusp_widths():
    assert cusp_widths(TRIVIAL) == (1,)
    assert cusp_widths(load_fixture("6.1")) == (5, 1)
    assert cusp_widths(load_fixture("24.1")) == (23, 1)


def test_membership():
    assert membership_check(IDENTITY, TRIVIAL)
    assert membership_check(T, TRIVIAL)
    assert not membership_check(T, STACK3)
    assert membership_check(T * T * T, STACK3)


def _schreier_generators(d, dom):
    """Non-trivial Schreier generators of the spanning tree, up to inversion."""
    sig_s, sig_t = monodromy(d)
    cell = {e: k for k, e in enumerate(dom.edges)}
    out = set()
    for k, e in enumerate(dom.edges):
        for g, sig in ((S, sig_s), (T, sig_t)):
            j = cell[sig(e)]
            h = dom.reps[k] * g * dom.reps[j].inverse()
            if not h.is_identity():
                out.add(frozenset([h, h.inverse()]))
    return out


@pytest.mark.parametrize("label", ALL_ORBITS)
def test_domain_invariants(label):
    d = load_fixture(label)
    dom = coset_domain(d)
    p = passport(d)
    assert len(dom.reps) == d.n
    # every pairing lies in the subgroup
    for arc in dom.arcs:
        assert membership_check(arc.pairing, d, dom.root)
    # each boundary arc appears once, and partners point back
    keys = [(a.triangle, a.side) for a in dom.arcs]
    assert len(keys) == len(set(keys))
    by_key = {(a.triangle, a.side): a for a in dom.arcs}
    for a in dom.arcs:
        back = by_key[a.partner]
        assert back.partner == (a.triangle, a.side)
        if a.partner == (a.triangle, a.side):
            raise AssertionError("arc paired with itself")
    # within one cell: S swaps arc halves at fixed points of b, and a
    # width-1 cusp pairs the cell's own vertical sides
    sig_s, sig_t = monodromy(d)
    for a in dom.arcs:
        if a.partner[0] == a.triangle:
            e = dom.edges[a.triangle]
            if a.side in (Side.ARC_LEFT_HALF, Side.ARC_RIGHT_HALF):
                assert sig_s(e) == e
            else:
                assert sig_t(e) == e
    # class counts
    assert sum(len(c) for c in dom.cusp_classes) == d.n
    assert sorted(len(c) for c in dom.cusp_classes) == sorted(p.lambda2)
    assert sorted(len(c) for c in dom.black_classes) == sorted(p.lambda0)
    assert sorted(len(c) for c in dom.white_classes) == sorted(p.lambda1)
    # the pairings are the Reidemeister-Schreier generators of the tree
    pairs = {frozenset([a.pairing, a.pairing.inverse()]) for a in dom.arcs}
    assert pairs == _schreier_generators(d, dom)
    # ... and there are at least rank(G_D) of them
    e2 = p.lambda1.count(1)
    e3 = p.lambda0.count(1)
    assert len(pairs) >= e2 + e3 + len(p.lambda2) - 1
