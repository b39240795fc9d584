"""First-order differential operators representing the Virasoro action on
polynomials in the germ coefficients.

Four families are built, all on truncated polynomial rings: two for
deformations near the origin, acting on polynomials in f_1, f_2, ... (one
from pairings against G_f, one against G_f^{-1}), and two near infinity on
polynomials in f_{-1}, f_{-2}, ....  The convention f_0 = 1 and f_m = 0
for out-of-range m applies inside every convolution sum.

The near-infinity G_f family carries the martingale structure: words in
the lowering operators applied to the constant polynomial 1 span the
irreducible quotient, and at the degenerate (c, h) every element of that
span is annihilated by 2*S_2 + (kappa/2)*S_1^2 from the inverse family.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
import json

from ._poly import Poly, Q, rref
from . import series as S
from .series import ORIGIN, INFINITY, fvar

_C = Poly.var("c")
_H = Poly.var("h")

FPolynomial = Poly


def f_grading(poly: Poly) -> int:
    """Grading of a polynomial in the f variables: sum |m| * exponent."""
    def weight(name):
        return abs(int(name[1:])) if name.startswith("f") else 0
    return poly.weighted_degree(weight)


def monomials_of_grading(g, side, max_parts=None):
    """All f-monomials of a given grading for one side (+1 or -1)."""
    from .verma import partitions
    out = []
    for p in partitions(g):
        counts = {}
        for a in p:
            counts[fvar(side * a)] = counts.get(fvar(side * a), 0) + 1
        out.append(tuple(sorted(counts.items())))
    return sorted(out)


class DiffOperator:
    """A first-order operator: a zeroth-order part plus sum_m b_m d/df_m."""

    __slots__ = ("zeroth", "first")

    def __init__(self, zeroth=None, first=None):
        self.zeroth = Poly.coerce(zeroth if zeroth is not None else 0)
        self.first = {}
        for m, b in (first or {}).items():
            b = Poly.coerce(b)
            if b:
                self.first[m] = b

    def apply(self, poly: Poly) -> Poly:
        poly = Poly.coerce(poly)
        out = self.zeroth * poly
        for m, b in self.first.items():
            d = poly.diff(fvar(m))
            if d:
                out = out + b * d
        return out

    def __add__(self, other):
        first = dict(self.first)
        for m, b in other.first.items():
            s = first.get(m, Poly.const(0)) + b
            if s:
                first[m] = s
            else:
                first.pop(m, None)
        return DiffOperator(self.zeroth + other.zeroth, first)

    def scale(self, value):
        return DiffOperator(self.zeroth * value,
                            {m: b * value for m, b in self.first.items()})

    def __sub__(self, other):
        return self + other.scale(-1)

    def commutator(self, other) -> "DiffOperator":
        """[self, other]; first order again since vector fields close."""
        def vec_apply(op, poly):
            out = Poly.const(0)
            for m, b in op.first.items():
                d = poly.diff(fvar(m))
                if d:
                    out = out + b * d
            return out

        zeroth = vec_apply(self, other.zeroth) - vec_apply(other, self.zeroth)
        first = {}
        for m, b in other.first.items():
            s = vec_apply(self, b)
            if s:
                first[m] = first.get(m, Poly.const(0)) + s
        for m, b in self.first.items():
            s = vec_apply(other, b)
            if s:
                first[m] = first.get(m, Poly.const(0)) - s
        first = {m: b for m, b in first.items() if b}
        return DiffOperator(zeroth, first)

    def subs(self, assignment) -> "DiffOperator":
        return DiffOperator(self.zeroth.subs(assignment),
                            {m: b.subs(assignment) for m, b in self.first.items()})

    def __eq__(self, other):
        if not isinstance(other, DiffOperator):
            return NotImplemented
        if self.zeroth != other.zeroth:
            return False
        keys = set(self.first) | set(other.first)
        return all(self.first.get(m, Poly.const(0)) == other.first.get(m, Poly.const(0))
                   for m in keys)

    def __repr__(self):
        bits = []
        if self.zeroth:
            bits.append(str(self.zeroth))
        for m in sorted(self.first, key=abs):
            bits.append("(%s)*d/d%s" % (self.first[m], fvar(m)))
        return "<DiffOperator %s>" % (" + ".join(bits) or "0")


# -- residue helpers on the formal germ -----------------------------------------


@lru_cache(maxsize=None)
def _formal(basepoint, depth):
    return S.formal_germ(basepoint, depth)


def _resid(series, shift_exp):
    return Poly.coerce(series.shift(shift_exp).residue())


@lru_cache(maxsize=None)
def _fpow(basepoint, depth, n):
    f = _formal(basepoint, depth)
    return f.to_series().pow_int(n)


@lru_cache(maxsize=None)
def _fprime(basepoint, depth):
    return _formal(basepoint, depth).to_series().derivative()


@lru_cache(maxsize=None)
def _fprime_inv(basepoint, depth):
    return _fprime(basepoint, depth).inverse()


# -- the four families ------------------------------------------------------------


@lru_cache(maxsize=None)
def p_rep(n: int, N: int) -> DiffOperator:
    """Action transported through pairings against G_f at the origin."""
    depth = N + abs(n) + 2
    if n >= 1:
        first = {}
        fpow = _fpow(ORIGIN, depth, n + 1)
        for m in range(n, N + 1):
            c = fpow.coefficient(m + 1)
            if c:
                first[m] = Poly.coerce(c) * -1
        return DiffOperator(0, first)
    # n <= 0: central and weight terms plus the corrected derivative kernel
    f = _formal(ORIGIN, depth)
    sf = S.schwarzian(f)
    fpow = _fpow(ORIGIN, depth, n + 1)
    fpinv = _fprime_inv(ORIGIN, depth)
    c_term = _resid(fpow * sf * fpinv, 0)
    h_term = _resid(fpow * fpinv, -2)
    zeroth = c_term * _C / -12 + h_term * _H
    fp = _fprime(ORIGIN, depth)
    first = {}
    for m in range(n, 1):
        outer = _resid(fpow * fpinv, -(m + 2))
        if not outer:
            continue
        for j in range(1, N + 1):
            total = Poly.var(fvar(j - m)) * (j - m + 1)
            for k in range(m, 1):
                a = _resid(fp * fp * _fpow(ORIGIN, depth, -(k + 2)), m + 1)
                if not a:
                    continue
                b = _fpow(ORIGIN, depth, k + 1).coefficient(j + 1)
                if not b:
                    continue
                total = total - a * b
            if total:
                first[j] = first.get(j, Poly.const(0)) + outer * total
    first = {m: b for m, b in first.items() if b}
    return DiffOperator(zeroth, first)


@lru_cache(maxsize=None)
def q_rep(n: int, N: int) -> DiffOperator:
    """Action transported through pairings against G_f^{-1} at the origin."""
    depth = N + abs(n) + 2
    f = _formal(ORIGIN, depth)
    fp = _fprime(ORIGIN, depth)
    first = {}
    if n >= 1:
        for m in range(max(1, n), N + 1):
            d = m - n
            coef = Poly.var(fvar(d)) * (d + 1) if d >= 1 else Poly.const(1)
            first[m] = coef
        return DiffOperator(0, first)
    sf = S.schwarzian(f)
    c_term = _resid(sf, n + 1)
    h_term = _resid(fp * fp * _fpow(ORIGIN, depth, -2), n + 1)
    zeroth = c_term * _C / 12 + h_term * _H
    for m in range(max(1, n), N + 1):
        d = m - n
        if d >= 1:
            coef = Poly.var(fvar(d)) * (d + 1)
        elif d == 0:
            coef = Poly.const(1)
        else:
            coef = Poly.const(0)
        for l in range(n, 1):
            a = _resid(fp * fp * _fpow(ORIGIN, depth, -(l + 2)), n + 1)
            if not a:
                continue
            b = _fpow(ORIGIN, depth, l + 1).coefficient(m + 1)
            if not b:
                continue
            coef = coef - a * b
        if coef:
            first[m] = coef
    return DiffOperator(zeroth, first)


@lru_cache(maxsize=None)
def r_rep(n: int, N: int) -> DiffOperator:
    """Action transported through pairings against G_f at infinity."""
    depth = N + abs(n) + 2
    f = _formal(INFINITY, depth)
    fp = _fprime(INFINITY, depth)
    first = {}
    if n >= 1:
        # -sum_{m<=0} (m+1) f_m d/df_{m-n}
        for m in range(0, -(N - n) - 1, -1):
            coef = Poly.const(1) if m == 0 else Poly.var(fvar(m))
            if m + 1 == 0:
                continue
            tgt = m - n
            if tgt < -N:
                continue
            first[tgt] = coef * -(m + 1)
        return DiffOperator(0, first)
    sf = S.schwarzian(f)
    c_term = _resid(sf, 1 - n)
    h_term = _resid(fp * fp * _fpow(INFINITY, depth, -2), 1 - n)
    zeroth = c_term * _C / 12 + h_term * _H
    for m in range(min(-1, -n), -N - 1, -1):
        d = m + n
        if d <= -1:
            coef = Poly.var(fvar(d)) * (d + 1)
        elif d == 0:
            coef = Poly.const(1)
        else:
            coef = Poly.const(0)
        for l in range(n, 1):
            a = _resid(fp * fp * _fpow(INFINITY, depth, -(2 - l)), 1 - n)
            if not a:
                continue
            b = _fpow(INFINITY, depth, 1 - l).coefficient(m + 1)
            if not b:
                continue
            coef = coef - a * b
        if coef:
            first[m] = coef * -1
    return DiffOperator(zeroth, first)


@lru_cache(maxsize=None)
def s_rep(n: int, N: int) -> DiffOperator:
    """The inverse-pairing family at infinity (raising part only)."""
    if n < 1:
        raise ValueError("only the raising part n >= 1 is constructed")
    depth = N + abs(n) + 2
    first = {}
    fpow = _fpow(INFINITY, depth, 1 - n)
    for m in range(-n, -N - 1, -1):
        c = fpow.coefficient(m + 1)
        if c:
            first[m] = Poly.coerce(c)
    return DiffOperator(0, first)


def singular_annihilator(kappa, N: int) -> "callable":
    """The operator 2*S_2 + (kappa/2)*S_1^2 as a polynomial map."""
    kappa = Q(kappa)
    s1 = s_rep(1, N)
    s2 = s_rep(2, N)

    def apply(poly):
        return s2.apply(poly) * 2 + s1.apply(s1.apply(poly)) * (kappa / 2)

    return apply


# -- martingale space ---------------------------------------------------------------


def martingale_basis(kappa, level_max: int):
    """Basis polynomials of the martingale submodule through level_max.

    Words in the two lowest lowering operators of the infinity family are
    applied to the constant 1 at the degenerate (c, h), then reduced level
    by level with graded-lexicographic pivoting.
    """
    from .verma import VermaParams
    params = VermaParams(kappa=kappa)
    assign = {"c": params.c, "h": params.h}
    rm1 = r_rep(-1, level_max).subs(assign)
    rm2 = r_rep(-2, level_max).subs(assign)

    produced = {0: [Poly.const(1)]}
    frontier = {(): Poly.const(1)}
    for _ in range(level_max):
        nxt = {}
        for word, poly in frontier.items():
            for step, op in ((1, rm1), (2, rm2)):
                lvl = sum(word) + step
                if lvl > level_max:
                    continue
                p = op.apply(poly)
                nxt[word + (step,)] = p
                produced.setdefault(lvl, []).append(p)
        frontier = nxt

    basis = {0: [Poly.const(1)]}
    for lvl in range(1, level_max + 1):
        monos = monomials_of_grading(lvl, -1)
        rows = []
        for p in produced.get(lvl, []):
            rows.append([p.coefficient(mono) for mono in monos])
        if not rows:
            basis[lvl] = []
            continue
        reduced, _ = rref(rows)
        polys = []
        for row in reduced:
            terms = {mono: c for mono, c in zip(monos, row) if c}
            polys.append(Poly(terms))
        basis[lvl] = polys
    return basis


def basis_to_json(basis) -> str:
    records = []
    for lvl in sorted(basis):
        for poly in basis[lvl]:
            records.append({"level": lvl, "polynomial": poly_to_json(poly)})
    return json.dumps(records, indent=1)


def basis_from_json(text):
    records = json.loads(text)
    out = {}
    for rec in records:
        out.setdefault(rec["level"], []).append(poly_from_json(rec["polynomial"]))
    return out


def poly_to_json(poly: Poly) -> dict:
    out = {}
    for mono, c in sorted(poly.terms.items()):
        key = "*".join("%s^%d" % (n, e) if e > 1 else n for n, e in mono) or "1"
        out[key] = str(c)
    return out


def poly_from_json(obj) -> Poly:
    total = Poly.const(0)
    for key, c in obj.items():
        term = Poly.const(Q(c))
        if key != "1":
            for factor in key.split("*"):
                if "^" in factor:
                    name, e = factor.split("^")
                    term = term * Poly.var(name, int(e))
                else:
                    term = term * Poly.var(factor)
        total = total + term
    return total


# -- dual-pairing polynomials (cross-checks against the algebra route) ------------


def dual_polynomial(kind: str, word, N: int) -> Poly:
    """<...> pairings on the formal germ, as polynomials in the f variables.

    kind is one of "P", "Q" (origin; the operator is transposed onto the
    ket side), "R", "S" (infinity; the operator acts on the ket directly);
    word is the lowering word labelling the dual basis vector.
    """
    from .verma import VermaParams, VermaVector, DualVector
    from .deform import build_G
    params = VermaParams.formal()
    x = VermaVector.highest_weight(params)
    y = DualVector.dual_basis_vector(params, word)
    if kind in ("P", "Q"):
        f = _formal(ORIGIN, N)
        g = build_G(f, N) if kind == "P" else build_G(S.invert(f), N)
        state = x.act_element(g.unipotent.transpose())
    else:
        f = _formal(INFINITY, N)
        g = build_G(f, N) if kind == "R" else build_G(S.invert(f), N)
        state = x.act_element(g.unipotent)
    return Poly.coerce(y.pair(state))
