"""Deformation operators G_f implementing germs in the enveloping algebra.

G_f is assembled from the multi-index tables P_I defined by
G_f = sum_I ((-1)^{|I|} / I!) f_I P_I, which obey the difference equation

    P_{K+E_m} = sum_{I+J=K} K!/(I!J!) C_J(m, m + d(J)) P_I L_{m+d(J)},

with connection coefficients C_J(m,n) read off from the residue
resid(w^{m+1} f'(w) / f(w)^{n+2}) on a formal germ.  The same recursion,
with all indices mirrored, builds the lowering-side operators for germs at
infinity.  An independent construction integrates the defining first-order
system along the straight line from the identity germ; the two routes are
compared in the test suite.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial

from ._poly import Poly, Q
from . import series as S
from .pbw import AlgebraElement, multiply, dilation_conjugate
from .series import ORIGIN, INFINITY, PowerSeriesGerm, SeriesWindowError

_C = Poly.var("c")


# -- connection coefficients -----------------------------------------------------


@lru_cache(maxsize=None)
def _connection_poly(basepoint, m, n):
    """resid(w^{m+1} f'/f^{n+2}) on the formal germ, as a polynomial in f."""
    depth = abs(n - m) + 1
    f = S.formal_germ(basepoint, max(depth, 1))
    return Poly.coerce(S.lagrange_weight(f, m, n))


def _mono_of(multiindex):
    counts = {}
    for i in multiindex:
        counts[S.fvar(i)] = counts.get(S.fvar(i), 0) + 1
    return tuple(sorted(counts.items()))


@lru_cache(maxsize=None)
def connection_coefficient(basepoint, J, m, n) -> Fraction:
    """C_J(m, n): vanishes unless d(J) = n - m."""
    dj = sum(J)
    if dj != n - m:
        return Q(0)
    sign = -1 if len(J) % 2 else 1
    jfact = 1
    counts = {}
    for i in J:
        counts[i] = counts.get(i, 0) + 1
    for e in counts.values():
        jfact *= factorial(e)
    w = _connection_poly(basepoint, m, n)
    return sign * jfact * w.coefficient(_mono_of(J))


# -- multi-index bookkeeping -------------------------------------------------------


def _multiindex_factorial(I):
    counts = {}
    for i in I:
        counts[i] = counts.get(i, 0) + 1
    out = 1
    for e in counts.values():
        out *= factorial(e)
    return out


def _sub_multiindices(K):
    """All splittings K = I + J, yielding (I, J, K!/(I! J!))."""
    from math import comb
    counts = sorted({i: K.count(i) for i in set(K)}.items())

    def rec(idx):
        if idx == len(counts):
            yield (), (), 1
            return
        value, mult = counts[idx]
        for i_part, j_part, w in rec(idx + 1):
            for take in range(mult + 1):
                yield ((value,) * (mult - take) + i_part,
                       (value,) * take + j_part, w * comb(mult, take))

    for i_part, j_part, w in rec(0):
        yield tuple(sorted(i_part)), tuple(sorted(j_part)), w


def gradings_multiindices(g, side):
    """Multi-indices of grading g for one side; side is +1 or -1."""
    from .verma import partitions
    for p in partitions(g):
        yield tuple(sorted(side * a for a in p))


# -- the P_I tables -------------------------------------------------------------


@lru_cache(maxsize=None)
def p_table(I: tuple) -> AlgebraElement:
    """P_I for a sorted multi-index (all positive or all negative)."""
    if not I:
        return AlgebraElement.one()
    if I[0] > 0:
        m = I[0]          # peel the smallest raising index
        K = I[1:]
        basepoint = ORIGIN
    else:
        m = I[-1]         # mirror: peel the index of smallest depth
        K = I[:-1]
        basepoint = INFINITY
    return _p_step(basepoint, K, m)


def _p_step(basepoint, K, m) -> AlgebraElement:
    out = AlgebraElement.zero()
    for I, J, w in _sub_multiindices(K):
        dj = sum(J)
        cj = connection_coefficient(basepoint, J, m, m + dj)
        if not cj:
            continue
        term = multiply(p_table(I), AlgebraElement.generator(m + dj))
        out = out + term.scale(Q(w) * cj)
    return out


def p_table_text(max_grading: int, side: int = 1) -> str:
    """Canonical text rendering of the P_I tables (golden-file export)."""
    lines = []
    for g in range(1, max_grading + 1):
        for I in sorted(gradings_multiindices(g, side)):
            lines.append("P[%s] = %s" % (
                ",".join(str(i) for i in I), p_table(I).render()))
    return "\n".join(lines) + "\n"


# -- the deformation operator ------------------------------------------------------


class DeformationOperator:
    """The operator of a germ: a unipotent factor and a dilation factor.

    For an origin germ f the operator is G_{f/f'(0)} * f'(0)^{-L0}; the
    unipotent factor lives in the completed raising algebra (lowering for
    infinity germs) truncated at the requested grading.
    """

    __slots__ = ("unipotent", "dilation", "source", "side")

    def __init__(self, unipotent, dilation, source, side):
        self.unipotent = unipotent
        self.dilation = dilation
        self.source = source
        self.side = side

    def element_with_dilation(self) -> AlgebraElement:
        if self.dilation != 1:
            raise ValueError(
                "dilation factor present; handle the diagonal factor at the "
                "pairing site")
        return self.unipotent

    def grading_cap(self):
        return (self.unipotent.hi if self.side == "plus"
                else -(self.unipotent.lo or 0))

    def __repr__(self):
        extra = "" if self.dilation == 1 else " * (%s)^-L0" % (self.dilation,)
        return "<G[%s side] %s%s>" % (self.side, self.unipotent.render(), extra)


def _coeff_product(f: PowerSeriesGerm, I):
    out = Q(1)
    for i in I:
        c = f.coefficient(i)
        if not c:
            return None
        out = out * c
    return out


def build_G(f: PowerSeriesGerm, N: int) -> DeformationOperator:
    """G_f through grading N (the dilation factor is carried separately)."""
    if N > f.truncation:
        raise ValueError("truncation %d exceeds the germ window %d"
                         % (N, f.truncation))
    side = +1 if f.basepoint == ORIGIN else -1
    caps = {"max_pos": N, "hi": N} if side > 0 else {"max_neg": N, "lo": -N}
    total = AlgebraElement.one(**caps)
    for g in range(1, N + 1):
        for I in gradings_multiindices(g, side):
            fI = _coeff_product(f, I)
            if fI is None:
                continue
            sign = -1 if len(I) % 2 else 1
            coef = fI * Q(sign, _multiindex_factorial(I))
            contrib = AlgebraElement(p_table(I).terms, **caps)
            total = total + contrib.scale(coef)
    return DeformationOperator(total, f.scale,
                               f, "plus" if side > 0 else "minus")


def build_G_inverse(f: PowerSeriesGerm, N: int, verify: bool = True) -> DeformationOperator:
    """G_f^{-1} = G_{f^{-1}}, optionally checking the group law."""
    g = build_G(S.invert(f), N)
    if verify:
        gf = build_G(f, N)
        prod = multiply(gf.unipotent, _conjugate_unipotent(g, gf.dilation))
        if not prod == AlgebraElement.one():
            raise AssertionError("G_f * G_{f^-1} != 1 within the window")
    return g


def _conjugate_unipotent(op: DeformationOperator, lam) -> AlgebraElement:
    """lam^{-L0} G lam^{L0} for combining dilation factors."""
    if lam == 1:
        return op.unipotent
    return dilation_conjugate(op.unipotent, 1 / Q(lam))


def build_G_path(f: PowerSeriesGerm, N: int) -> DeformationOperator:
    """Independent construction: integrate dG/ds = -G V(s) along f_s = z + s(f-z).

    V(s) collects sum_m f_m A_m(f_s); at grading g it reduces to L_g times a
    polynomial in s, so the system solves grading by grading with exact
    polynomial integrals.
    """
    side = +1 if f.basepoint == ORIGIN else -1
    svar = "s"
    fs = PowerSeriesGerm(f.basepoint, f.truncation,
                         {m: Poly.var(svar) * c for m, c in f.coeffs.items()})
    if f.scale != 1:
        raise ValueError("path construction expects a unit-derivative germ")
    # v_g(s) = sum_m f_m * resid(w^{m+1} fs'/fs^{(g)+2}) at generator grading g
    v = {}
    for g in range(1, N + 1):
        total = Poly.const(0)
        for m in (range(1, g + 1) if side > 0 else range(-1, g * side - 1, -1)):
            fm = f.coefficient(m)
            if not fm:
                continue
            total = total + Poly.coerce(S.lagrange_weight(fs, m, side * g)) * fm
        if total:
            v[side * g] = total
    caps = {"max_pos": N, "hi": N} if side > 0 else {"max_neg": N, "lo": -N}
    comps = {0: AlgebraElement.one(**caps)}
    for g in range(1, N + 1):
        deriv = AlgebraElement.zero(**caps)
        for gp in range(0, g):
            gen = side * (g - gp)
            if gen not in v:
                continue
            term = multiply(comps[gp], AlgebraElement.generator(gen, **caps))
            deriv = deriv + term.scale(v[gen])
        deriv = deriv.scale(Q(-1))
        comps[g] = deriv.map_coefficients(lambda p: _integrate_s(p, svar))
    total = AlgebraElement.zero(**caps)
    for g, el in comps.items():
        total = total + el.map_coefficients(lambda p: p.subs({svar: Q(1)}))
    return DeformationOperator(total, Q(1), f, "plus" if side > 0 else "minus")


def _integrate_s(p: Poly, svar: str) -> Poly:
    terms = {}
    for mono, c in p.terms.items():
        d = dict(mono)
        e = d.get(svar, 0) + 1
        d[svar] = e
        terms[tuple(sorted(d.items()))] = c / e
    return Poly(terms)


# -- conjugation of generators ------------------------------------------------------


def conjugate_Ln(f: PowerSeriesGerm, m: int, N: int) -> AlgebraElement:
    """L_m(f) = G_f^{-1} L_m G_f via the residue formula.

    The result is (c/12) resid(w^{m+1} Sf) plus sum_n L_n *
    resid(w^{m+1} f'^2 / f^{n+2}) over n >= m (origin) or n <= m
    (infinity), truncated at the germ window.
    """
    side = +1 if f.basepoint == ORIGIN else -1
    sf = S.schwarzian(f)
    central = sf.shift(m + 1).residue()
    terms = []
    reach = m - side
    for k in range(0, N + 1):
        n = m + side * k
        try:
            w = S.lagrange_weight(f, m, n, power=2)
        except SeriesWindowError:
            break
        reach = n
        if w:
            terms.append((n, w))
    caps = {"hi": reach} if side > 0 else {"lo": reach}
    out = AlgebraElement.scalar(Poly.coerce(central) * _C / 12, **caps)
    for n, w in terms:
        out = out + AlgebraElement.generator(n).scale(w)
    return out


def zero_curvature_residual(k: int, l: int, N: int,
                            basepoint=ORIGIN) -> AlgebraElement:
    """dA_l/df_k - dA_k/df_l - [A_k, A_l] on the formal germ, grading <= N."""
    f = S.formal_germ(basepoint, N + max(abs(k), abs(l)) + 1)
    side = +1 if basepoint == ORIGIN else -1

    def connection(m):
        out = AlgebraElement.zero(
            **({"max_pos": N, "hi": N} if side > 0 else {"max_neg": N, "lo": -N}))
        for step in range(0, N + 1):
            n = m + side * step
            w = S.lagrange_weight(f, m, n)
            if w:
                out = out + AlgebraElement.generator(n).scale(Poly.coerce(w))
        return out

    ak, al = connection(k), connection(l)
    d_al = al.map_coefficients(lambda p: p.diff(S.fvar(k)))
    d_ak = ak.map_coefficients(lambda p: p.diff(S.fvar(l)))
    bracket = multiply(ak, al) - multiply(al, ak)
    return d_al - d_ak - bracket


# -- translations -------------------------------------------------------------------


def _unit_poly_inverse(p: Poly, var: str, order: int) -> Poly:
    """Inverse of a univariate unit polynomial modulo var^{order+1}."""
    c0 = p.constant_term()
    if not c0:
        raise ValueError("not a unit in the formal variable")
    tail = (p / c0 - 1)
    out = Poly.const(1)
    power = Poly.const(1)
    sign = 1
    for _ in range(order):
        power = (power * tail).truncate_weighted(lambda n: 1 if n == var else 0,
                                                order)
        sign = -sign
        out = out + power * sign
    return (out / c0).truncate_weighted(lambda n: 1 if n == var else 0, order)


def _truncate_var(p: Poly, var: str, order: int) -> Poly:
    return p.truncate_weighted(lambda n: 1 if n == var else 0, order)


def shifted_germ(f: PowerSeriesGerm, a, tvar="t", order=None):
    """The germ f_a(z) = f(a + z) - f(a) with a = a0 * t, t formal.

    Returns (germ with polynomial coefficients in t, dilation f'(a), f(a)).
    """
    if f.basepoint != ORIGIN:
        raise ValueError("translations are set up for origin germs")
    a0 = Q(a)
    order = order if order is not None else f.truncation
    at = Poly.var(tvar) * a0
    # polynomial coefficients of f(a+z) in z
    full = {}
    deg = f.truncation + 1
    coeffs = {1: f.scale}
    for m, c in f.coeffs.items():
        coeffs[m + 1] = f.scale * c
    from math import comb
    for j, cj in coeffs.items():
        for i in range(0, j + 1):
            term = cj * comb(j, i) * at ** (j - i)
            if i in full:
                full[i] = full[i] + term
            else:
                full[i] = Poly.coerce(term)
    fa_value = _truncate_var(Poly.coerce(full.get(0, Poly.const(0))), tvar, order)
    dilation = _truncate_var(Poly.coerce(full.get(1)), tvar, order)
    inv_dil = _unit_poly_inverse(dilation, tvar, order)
    germ_coeffs = {}
    for i in range(2, deg + 1):
        c = full.get(i)
        if c:
            c = _truncate_var(Poly.coerce(c) * inv_dil, tvar, order)
            if c:
                germ_coeffs[i - 1] = c
    germ = PowerSeriesGerm(ORIGIN, f.truncation, germ_coeffs,
                           scale=dilation)
    return germ, dilation, fa_value


def translation_conjugate(f: PowerSeriesGerm, a, levels: int,
                          params=None, t_order=None):
    """Matrix-element tables of e^{-a L_{-1}} G_f e^{f(a) L_{-1}} and G_{f_a}.

    The translation amount is treated as a0 * t with t a formal order
    parameter (entries are polynomials in t, truncated), which keeps every
    entry a finite exact sum.  The conformal weight must be an integer so
    the dilation factor of f_a pairs rationally.  Returns (table_lhs,
    table_rhs) keyed by the dual-basis words of level <= levels.
    """
    from .verma import VermaParams, VermaVector

    if params is None:
        params = VermaParams(c=Poly.var("c"), h=2)
    hval = params.h
    if isinstance(hval, Poly) or hval.denominator != 1:
        raise ValueError("integer conformal weight required for exact tables")
    h_int = int(hval)
    t_order = t_order if t_order is not None else levels + 4
    tvar = "t"

    def tcut(p):
        return _truncate_var(Poly.coerce(p), tvar, t_order)

    fa_germ, dilation, fa_value = shifted_germ(f, a, tvar, t_order)
    at = Poly.var(tvar) * Q(a)

    n_build = levels + t_order
    gf = build_G(_pad(f, n_build), min(n_build, _pad(f, n_build).truncation))
    x = VermaVector.highest_weight(params)

    def exp_lower(state, amount):
        # e^{amount * L_{-1}} applied to the state, t-truncated
        total = state
        term = state
        k = 0
        while True:
            k += 1
            term = term.act_generator(-1).scale(tcut(amount) / k)
            term = VermaVector(params, {w: tcut(c) for w, c in term.terms.items()})
            if term.is_zero() or all(not c for c in term.terms.values()):
                break
            total = total + term
            if min(sum(w) for w in term.terms) > levels + n_build:
                break
        return VermaVector(params, {w: tcut(c) for w, c in total.terms.items()})

    # left side: e^{-a L_{-1}} G_u lam^{-L0} e^{f(a) L_{-1}} x
    lam = f.scale
    state = exp_lower(x, fa_value)
    state = VermaVector(params, {w: c * lam ** (-(h_int + sum(w)))
                                 for w, c in state.terms.items()})
    state = state.act_element(gf.unipotent)
    state = exp_lower(state, -at)
    table_lhs = _read_table(state, levels, tcut)

    # right side: G_{u_a} dil^{-L0} x with dil = f'(a); the raising factor
    # acts trivially on the highest weight, so the table collapses to the
    # dilation power at level zero -- the left side must reproduce that.
    ga = build_G(_pad(fa_germ.unit_part(), n_build), n_build)
    inv_dil = _unit_poly_inverse(dilation, tvar, t_order)
    state = VermaVector(params, {(): tcut(inv_dil ** h_int if h_int >= 0
                                          else dilation ** (-h_int))})
    state = state.act_element(ga.unipotent)
    table_rhs = _read_table(state, levels, tcut)
    return table_lhs, table_rhs


def _pad(f: PowerSeriesGerm, n: int) -> PowerSeriesGerm:
    """Extend the window of an exact polynomial germ by zero coefficients."""
    if f.truncation >= n:
        return f
    return PowerSeriesGerm(f.basepoint, n, f.coeffs, f.scale)


def _read_table(state, levels, tcut):
    from .verma import partitions
    out = {}
    for lvl in range(0, levels + 1):
        for w in sorted(set(partitions(lvl))):
            out[w] = tcut(Poly.coerce(state.terms.get(w, Q(0))))
    return out


# -- vertex operators ----------------------------------------------------------------


def vertex_operator(origin_germ: PowerSeriesGerm,
                    infinity_germ: PowerSeriesGerm, N: int):
    """The two one-sided factors of the vertex-like factorization of a map
    regular at both 0 and infinity: (G_{A+} f'(0)^{-L0}, G_{A-} f'(inf)^{-L0})."""
    if origin_germ.basepoint != ORIGIN or infinity_germ.basepoint != INFINITY:
        raise ValueError("need the origin and infinity expansions of the map")
    plus = build_G(origin_germ.unit_part(), N)
    plus = DeformationOperator(plus.unipotent, origin_germ.scale,
                               origin_germ, "plus")
    minus = build_G(infinity_germ.unit_part(), N)
    minus = DeformationOperator(minus.unipotent, infinity_germ.scale,
                                infinity_germ, "minus")
    return plus, minus


def vertex_matrix_table(plus: DeformationOperator, minus: DeformationOperator,
                        params, levels: int):
    """Matrix elements of G_{A-} (f'(0)/f'(inf))^{L0} G_{A+}^{-1} on the
    PBW basis through the level cap; needs an integer conformal weight."""
    from .verma import VermaParams, VermaVector, partitions

    hval = params.h
    if isinstance(hval, Poly) or Q(hval).denominator != 1:
        raise ValueError("integer conformal weight required")
    h_int = int(hval)
    ratio = Q(plus.dilation) / Q(minus.dilation)
    ginv = build_G(S.invert(plus.source.unit_part()), plus.source.truncation)
    table = {}
    words = [w for lvl in range(levels + 1) for w in sorted(set(partitions(lvl)))]
    for w in words:
        x = VermaVector.highest_weight(params)
        state = x.act_word([-a for a in w])
        state = state.act_element(ginv.unipotent)
        state = VermaVector(params, {ww: c * ratio ** (h_int + sum(ww))
                                     for ww, c in state.terms.items()})
        state = state.act_element(minus.unipotent)
        for w2 in words:
            table[(w2, w)] = state.terms.get(w2, Q(0))
    return table
