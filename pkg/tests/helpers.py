"""Shared helpers: numeric images of exact catalog data."""

import gmpy2
from gmpy2 import mpc

from belyi.newton import POLY_NAMES, NumericAnsatz, unknown_layout
from belyi.recognition import polynomial_roots
from belyi.series import bits
from belyi.verify import normal_form


def field_root(fld, digits):
    if fld.is_rational:
        return mpc(0)
    if fld.embedding is not None:
        return fld.embed_root(digits)
    return polynomial_roots(fld.minpoly, digits)[0]


def numeric_from_exact(entry, digits):
    """The catalog function in the solver normalization, embedded numerically."""
    x, _, _ = normal_form(entry.ansatz)
    layout = unknown_layout(entry.passport)
    with gmpy2.context(precision=bits(digits) + 32):
        root = field_root(x.field, digits)
        polys = {name: tuple(c.embed(digits, root) for c in getattr(x, name).coeffs)
                 for name in POLY_NAMES}
        c = x.c.embed(digits, root)
    return x, NumericAnsatz(layout, polys, c, digits)
