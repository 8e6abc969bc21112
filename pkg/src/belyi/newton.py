"""Polynomial system for a genus-0 (2,3) weighted tree and its Newton solve.

With the big pole at infinity the Belyi function is

    beta = P3^3 P1 / (c R) = Q2^2 Q1 / (c R) + 1,

so the unknown coefficients satisfy ``P3^3 P1 - Q2^2 Q1 - c R = 0``
coefficientwise in degrees ``0..n-1``. All polynomials are monic; two
coefficients are pinned to fix the affine freedom in ``z``:
``coeff_{p3-1}(P3) = 0`` and ``coeff_{q2-1}(Q2) = -1``. When there are no
degree-3 black (degree-2 white) vertices the pin moves to ``P1`` (``Q1``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import gmpy2
from gmpy2 import mpc, mpfr

from .dessin import DessinError, Passport
from .linalg import SingularMatrixError, solve
from .series import VertexEstimates, bits

log = logging.getLogger(__name__)

POLY_NAMES = ("p3", "p1", "q2", "q1", "rr")


class NewtonError(RuntimeError):
    pass


@dataclass(frozen=True)
class Layout:
    """Which coefficients are free unknowns, and which are pinned."""

    degrees: dict
    pins: dict  # (poly, index) -> pinned value
    unknowns: tuple  # ("p3", k) ... plus ("c", 0)

    @property
    def n(self) -> int:
        return len(self.unknowns)


def unknown_layout(p: Passport) -> Layout:
    """Free unknowns of the system for passport ``p``.

    The passport must be that of a genus-0 weighted tree of (2,3)-type:
    black parts in {1, 3}, white parts in {1, 2}, faces ``(n-r) 1^r``.
    """
    if any(x not in (1, 3) for x in p.lambda0) or any(x not in (1, 2) for x in p.lambda1):
        raise DessinError(f"passport {p} is not of (2,3)-type")
    if any(x != 1 for x in p.lambda2[1:]):
        raise DessinError(f"passport {p} is not a weighted tree")
    n = p.n
    deg = {"p3": p.p3, "p1": p.p1, "q2": p.q2, "q1": p.q1, "rr": len(p.lambda2) - 1}
    if sum(deg.values()) != n + 1:
        raise DessinError(f"passport {p} does not have genus 0")
    pins = {}
    black = "p3" if deg["p3"] else "p1"
    white = "q2" if deg["q2"] else "q1"
    if deg[black] == 0 or deg[white] == 0:
        raise DessinError(f"passport {p} leaves the normalization undefined")
    pins[(black, deg[black] - 1)] = 0
    pins[(white, deg[white] - 1)] = -1
    unknowns = [(name, k) for name in POLY_NAMES for k in range(deg[name])
                if (name, k) not in pins]
    unknowns.append(("c", 0))
    if len(unknowns) != n:
        raise DessinError(f"layout has {len(unknowns)} unknowns for {n} equations")
    return Layout(deg, pins, tuple(unknowns))


@dataclass(frozen=True)
class NumericAnsatz:
    """Monic polynomials (coefficient lists, low to high) and the constant."""

    layout: Layout
    polys: dict
    c: object
    digits: int

    def vector(self):
        return [self.c if name == "c" else self.polys[name][k]
                for name, k in self.layout.unknowns]

    def with_vector(self, vec, digits=None) -> "NumericAnsatz":
        polys = {name: list(coeffs) for name, coeffs in self.polys.items()}
        c = self.c
        for (name, k), v in zip(self.layout.unknowns, vec):
            if name == "c":
                c = v
            else:
                polys[name][k] = v
        return replace(self, polys={k: tuple(v) for k, v in polys.items()}, c=c,
                       digits=digits or self.digits)


def poly_mul(f, g):
    """Product of coefficient lists; works for ``mpc`` and exact rationals alike."""
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a == 0:
            continue
        for j, b in enumerate(g):
            out[i + j] += a * b
    return out


def poly_from_roots(roots):
    out = [mpc(1)]
    for r in roots:
        out = poly_mul(out, [-r, mpc(1)])
    return out


def _pad(f, n):
    f = list(f)
    return f[:n] + [0] * (n - len(f))


def residual(x: NumericAnsatz) -> list:
    """Coefficients ``z^0 .. z^{n-1}`` of ``P3^3 P1 - Q2^2 Q1 - c R``."""
    n = x.layout.n
    with gmpy2.context(precision=bits(x.digits)):
        P3, P1, Q2, Q1, R = (x.polys[k] for k in POLY_NAMES)
        left = poly_mul(poly_mul(poly_mul(P3, P3), P3), P1)
        right = poly_mul(poly_mul(Q2, Q2), Q1)
        left, right, R = _pad(left, n), _pad(right, n), _pad(R, n)
        return [a - b - x.c * r for a, b, r in zip(left, right, R)]


def jacobian(x: NumericAnsatz) -> list:
    """Analytic Jacobian: rows are equations, columns the free unknowns."""
    n = x.layout.n
    with gmpy2.context(precision=bits(x.digits)):
        P3, P1, Q2, Q1, R = (x.polys[k] for k in POLY_NAMES)
        P3sq = poly_mul(P3, P3)
        d = {
            "p3": [3 * v for v in poly_mul(P3sq, P1)],
            "p1": poly_mul(P3sq, P3),
            "q2": [-2 * v for v in poly_mul(Q2, Q1)],
            "q1": [-v for v in poly_mul(Q2, Q2)],
            "rr": [-x.c],
        }
        cols = []
        for name, k in x.layout.unknowns:
            if name == "c":
                cols.append(_pad([-v for v in R], n))
            else:
                cols.append(_pad([mpc(0)] * k + list(d[name]), n))
        return [[mpc(cols[j][i]) for j in range(n)] for i in range(n)]


def _norm(v):
    return max((abs(t) for t in v), default=mpfr(0))


def residual_norm(x: NumericAnsatz):
    with gmpy2.context(precision=bits(x.digits)):
        return _norm(residual(x)) / max(mpfr(1), abs(x.c))


class SeedError(NewtonError):
    pass


def seed(est: VertexEstimates, p: Passport, digits: int = 60,
         tail_tolerance: float = 1e-3) -> NumericAnsatz:
    """Initial ansatz from approximate vertex positions.

    Roots give the monic polynomials; ``D = P3^3 P1 - Q2^2 Q1`` then yields
    ``c`` as its ``z^r`` coefficient and ``R = D / c`` truncated to degree r.
    """
    layout = unknown_layout(p)
    deg = layout.degrees
    groups = {"p3": est.black3, "p1": est.black1, "q2": est.white2, "q1": est.white1}
    for name, roots in groups.items():
        if len(roots) != deg[name]:
            raise SeedError(f"{len(roots)} estimates for {name}, passport wants {deg[name]}")
    with gmpy2.context(precision=bits(digits)):
        polys = {}
        for name, roots in groups.items():
            roots = [mpc(r) for r in roots]
            polys[name] = poly_from_roots(roots)
        for (name, k), value in layout.pins.items():
            if name == "p3" or name == "p1":
                # re-centre the roots so the pinned sum holds exactly
                roots = [mpc(r) for r in groups[name]]
                mean = sum(roots, mpc(0)) / len(roots)
                polys[name] = poly_from_roots([r - mean for r in roots])
            polys[name][k] = mpc(value)
        n = p.n
        r = deg["rr"]
        D = _pad(poly_mul(poly_mul(poly_mul(polys["p3"], polys["p3"]), polys["p3"]), polys["p1"]), n + 1)
        E = _pad(poly_mul(poly_mul(polys["q2"], polys["q2"]), polys["q1"]), n + 1)
        D = [a - b for a, b in zip(D, E)]
        scale = _norm(D)
        tail = _norm(D[r + 1:])
        if tail > tail_tolerance * scale:
            raise SeedError(f"seed tail {float(tail):.3g} is not small against {float(scale):.3g}; "
                            "improve the series convergence")
        c = D[r]
        if c == 0:
            raise SeedError("seed constant vanished")
        polys["rr"] = [v / c for v in D[:r]] + [mpc(1)]
    return NumericAnsatz(layout, {k: tuple(v) for k, v in polys.items()}, c, digits)


@dataclass
class IterationRecord:
    step: int
    digits: int
    residual: float
    step_norm: float
    damping: float

    def line(self) -> str:
        def fmt(v):
            return "0" if v == 0 else f"{v:.6e}"
        return (f"step={self.step} digits={self.digits} residual={fmt(self.residual)} "
                f"step_norm={fmt(self.step_norm)} damping={self.damping:g}")


def _log10(v) -> float:
    if v == 0:
        return float("-inf")
    return float(gmpy2.log10(v))


def newton_solve(x0: NumericAnsatz, target_digits: int = 240,
                 start_digits: int | None = None, max_steps: int = 200,
                 log_records: list | None = None) -> NumericAnsatz:
    """Damped Newton iteration with doubling working precision.

    Precision starts at ``start_digits`` (default the seed's) and doubles
    once the residual reaches ``10^-(digits/2)``, capped at
    ``target_digits + 20``. Iteration stops when both residual and step
    are below ``10^-target_digits``. Every step is appended to
    ``log_records`` as an :class:`IterationRecord`.
    """
    records = log_records if log_records is not None else []
    final_digits = target_digits + 20
    digits = min(start_digits or x0.digits, final_digits)
    x = replace(x0, digits=digits)
    tol = mpfr(10) ** (-target_digits)
    res = residual_norm(x)
    seed_res = res
    last_step = None
    step = 0
    while True:
        if digits < final_digits and res < mpfr(10) ** (-(digits // 2)):
            digits = min(2 * digits, final_digits)
            x = replace(x, digits=digits)
            res = residual_norm(x)
            continue
        if digits >= final_digits and res < tol and (last_step is None or last_step < tol):
            return x
        if step >= max_steps:
            raise NewtonError(f"no convergence in {max_steps} steps (residual "
                              f"{float(res):.3g}, seed residual {float(seed_res):.3g})")
        with gmpy2.context(precision=bits(digits)):
            F = residual(x)
            J = jacobian(x)
            try:
                dx, _ = solve(J, F)
            except SingularMatrixError as exc:
                raise NewtonError(f"singular Jacobian at step {step}: {exc}") from None
            vec = x.vector()
            lam = mpfr(1)
            for _attempt in range(10):
                trial = x.with_vector([v - lam * d for v, d in zip(vec, dx)])
                tres = residual_norm(trial)
                if tres < res or tres == 0 or res < tol:
                    break
                lam /= 2
            else:
                raise NewtonError(f"divergence at step {step}: residual {float(res):.3g} "
                                  "did not decrease after 10 damped attempts")
            last_step = _norm(dx) * lam
        x, res = trial, tres
        records.append(IterationRecord(step, digits, float(res), float(last_step), float(lam)))
        log.debug(records[-1].line())
        step += 1


def iteration_log_text(records) -> str:
    return "".join(r.line() + "\n" for r in records)


def parse_iteration_log(text: str) -> list[IterationRecord]:
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        kv = dict(tok.split("=") for tok in line.split())
        out.append(IterationRecord(int(kv["step"]), int(kv["digits"]), float(kv["residual"]),
                                   float(kv["step_norm"]), float(kv["damping"])))
    return out
