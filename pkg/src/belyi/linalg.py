"""Dense linear algebra over ``gmpy2`` numbers held in numpy object arrays.

Callers set the working precision with a ``gmpy2.context``.
"""

from __future__ import annotations

import gmpy2
import numpy as np


class SingularMatrixError(ArithmeticError):
    pass


def _digits():
    return gmpy2.get_context().precision * 0.30103


def solve(A, b, pivot_digits: float | None = None):
    """Gaussian elimination with partial pivoting.

    Returns ``(x, cond)`` where ``cond`` is the ratio of the largest to the
    smallest pivot magnitude, a cheap conditioning indicator. A pivot below
    ``10^-(digits-5) * max|A|`` raises :class:`SingularMatrixError`.
    """
    M = np.array(A, dtype=object, copy=True)
    rhs = np.array(b, dtype=object, copy=True)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError("solve needs a square matrix")
    scale = max(abs(v) for v in M.flat) if n else 0
    if n and scale == 0:
        raise SingularMatrixError("zero matrix")
    digits = pivot_digits if pivot_digits is not None else _digits()
    tiny = scale * gmpy2.mpfr(10) ** (-(digits - 5))
    pivots = []
    for k in range(n):
        col = [abs(v) for v in M[k:, k]]
        p = k + max(range(len(col)), key=col.__getitem__)
        if col[p - k] <= tiny:
            raise SingularMatrixError(f"pivot {float(col[p - k]):.3g} in column {k}")
        if p != k:
            M[[k, p]] = M[[p, k]]
            rhs[[k, p]] = rhs[[p, k]]
        piv = M[k, k]
        pivots.append(abs(piv))
        if k + 1 < n:
            f = M[k + 1:, k] / piv
            M[k + 1:, k:] -= np.outer(f, M[k, k:])
            rhs[k + 1:] -= f * rhs[k]
    x = np.empty(n, dtype=object)
    for k in range(n - 1, -1, -1):
        acc = rhs[k]
        if k + 1 < n:
            acc = acc - M[k, k + 1:].dot(x[k + 1:])
        x[k] = acc / M[k, k]
    cond = float(max(pivots) / min(pivots)) if pivots else 1.0
    return x, cond


def conj(M):
    return np.vectorize(lambda v: v.conjugate() if hasattr(v, "conjugate") else v,
                        otypes=[object])(M)


def constrained_lstsq(A, b, C, d):
    """Minimize ``|A x - b|`` subject to ``C x = d`` through the KKT system."""
    AH = conj(A).T
    G = AH.dot(A)
    g = AH.dot(b)
    n = A.shape[1]
    k = C.shape[0]
    zero = gmpy2.mpc(0)
    K = np.full((n + k, n + k), zero, dtype=object)
    K[:n, :n] = G
    K[:n, n:] = conj(C).T
    K[n:, :n] = C
    rhs = np.concatenate([g, np.array(d, dtype=object)])
    x, cond = solve(K, rhs)
    return x[:n], cond
