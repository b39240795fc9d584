"""Two-hull uniformization, the factorization identity, and Z(A,B).

Given an origin germ f_A (a hull attached away from infinity) and an
infinity germ f_B, the commuting pair (f_Atil, f_Btil) solves
f_Btil . f_A = f_Atil . f_B order by order.  Orders are counted by a
bookkeeping weight: the coefficient f_m of either germ carries weight |m|,
which makes the mixed expansion finite at every order, and the solve is
diagonal with only rational divisions.

The partition function Z(A,B) = <Omega| G_{f_A}^{-1} G_{f_B} |Omega> is a
polynomial in the central charge once truncated; for the two closed-form
hull families its logarithm integrates to
    two slits:        L(A,B) = -(3/2) log(1 - b^2/a^2)
    slit + half-disc: L(A,B) = (3/4) log[(1+b^2/a^2)/(1-b^2/a^2)^3]
with log Z = (c/12) L.  The numerical route integrates the reduced
one-parameter form: a quadrature over the interpolation parameter of a
formal residue, never a contour.
"""

from __future__ import annotations

from fractions import Fraction
import math

from ._poly import Poly, Q
from . import series as S
from .series import ORIGIN, INFINITY, PowerSeriesGerm
from .deform import build_G
from .verma import (VermaParams, VermaVector, vacuum_expectation,
                    central_charge, conformal_weight)

_EPS = "eps"


class GenericityError(ArithmeticError):
    """The order-by-order uniformization solve became inconsistent."""


class HullPair:
    """f_A, f_B and the solved pair f_Atil, f_Btil with f_Btil.f_A = f_Atil.f_B."""

    __slots__ = ("fA", "fB", "fAt", "fBt", "order")

    def __init__(self, fA, fB, fAt, fBt, order):
        self.fA = fA
        self.fB = fB
        self.fAt = fAt
        self.fBt = fBt
        self.order = order

    def dilation(self):
        """f_Atil'(0), exact."""
        s = self.fAt.scale
        if isinstance(s, Poly):
            return s.as_fraction() if s.is_constant() else s
        return s

    def __repr__(self):
        return "<HullPair order=%d dilation=%s>" % (self.order, self.dilation())


def _weighted_dict(f: PowerSeriesGerm):
    """z-coefficient dict of the germ with the order weights attached."""
    out = {1: Poly.coerce(f.scale)}
    for m, c in f.coeffs.items():
        out[m + 1] = Poly.coerce(f.scale) * Poly.coerce(c) * Poly.var(_EPS, abs(m))
    return out


def _trunc(p: Poly, cap: int) -> Poly:
    return p.truncate_weighted(lambda n: 1 if n == _EPS else 0, cap)


def _dmul(a: dict, b: dict, cap: int) -> dict:
    out = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            c = _trunc(c1 * c2, cap)
            if not c:
                continue
            e = e1 + e2
            s = out.get(e)
            out[e] = c if s is None else s + c
    return {e: c for e, c in out.items() if c}


def _dadd(a: dict, b: dict, scale=1) -> dict:
    out = dict(a)
    for e, c in b.items():
        s = out.get(e, Poly.const(0)) + c * scale
        if s:
            out[e] = s
        else:
            out.pop(e, None)
    return out


def _dinvert(a: dict, cap: int) -> dict:
    """1/a for a = lead*z^o*(1 + nilpotent tail); exact under the weight cap."""
    lead_exp = None
    for e in sorted(a):
        if Poly.coerce(a[e]).constant_term():
            lead_exp = e
            break
    if lead_exp is None:
        raise GenericityError("no invertible leading term")
    lead = Poly.coerce(a[lead_exp]).constant_term()
    tail = {}
    for e, c in a.items():
        c = Poly.coerce(c) / lead
        if e == lead_exp:
            c = c - 1
        if c:
            tail[e - lead_exp] = c
    out = {0: Poly.const(1)}
    power = {0: Poly.const(1)}
    sign = 1
    for _ in range(cap):
        power = _dmul(power, tail, cap)
        if not power:
            break
        sign = -sign
        out = _dadd(out, power, scale=sign)
    return {e - lead_exp: c / lead for e, c in out.items() if c}


def _dpow(a: dict, n: int, cap: int, cache=None) -> dict:
    if n == 0:
        return {0: Poly.const(1)}
    if cache is not None and n in cache:
        return cache[n]
    if n > 0:
        out = a
        for _ in range(n - 1):
            out = _dmul(out, a, cap)
    else:
        inv = _dinvert(a, cap)
        out = inv
        for _ in range(-n - 1):
            out = _dmul(out, inv, cap)
    if cache is not None:
        cache[n] = out
    return out


def commutative_diagram(fA: PowerSeriesGerm, fB: PowerSeriesGerm,
                        N: int, keep_weights: bool = False) -> HullPair:
    """Solve f_Btil . f_A = f_Atil . f_B through mixed order N."""
    if fA.basepoint != ORIGIN or fB.basepoint != INFINITY:
        raise ValueError("need an origin germ and an infinity germ")
    if min(fA.truncation, fB.truncation) < N:
        raise ValueError("input truncations below the requested order")
    lamA = Q(fA.scale) if not isinstance(fA.scale, Poly) else fA.scale.as_fraction()
    A = _weighted_dict(fA)
    B = _weighted_dict(fB)
    apow, bpow = {}, {}
    for j in range(1, N + 1):
        apow[j] = _dpow(A, 1 - j, N, cache=None)
        bpow[j] = _dpow(B, j + 1, N, cache=None)

    atil = {m: Poly.const(0) for m in range(1, N + 1)}
    btil = {j: Poly.const(0) for j in range(1, N + 1)}  # b-tilde_{-j}
    u = Poly.const(0)  # f_Atil scale = lamA * (1 + u)

    def residual():
        left = dict(A)
        for j in range(1, N + 1):
            if btil[j]:
                left = _dadd(left, {e: _trunc(c * btil[j], N)
                                    for e, c in apow[j].items()})
        right = dict(B)
        for m in range(1, N + 1):
            if atil[m]:
                right = _dadd(right, {e: _trunc(c * atil[m], N)
                                      for e, c in bpow[m].items()})
        factor = (Poly.const(1) + u) * lamA
        right = {e: _trunc(c * factor, N) for e, c in right.items()}
        return _dadd(left, right, scale=-1)

    def eps_part(p: Poly, k: int) -> Poly:
        terms = {}
        for mono, c in p.terms.items():
            d = dict(mono)
            if d.get(_EPS, 0) == k:
                del d[_EPS]
                terms[tuple(sorted(d.items()))] = c
        return Poly(terms)

    for k in range(1, N + 1):
        res = residual()
        for e, c in res.items():
            rk = eps_part(Poly.coerce(c), k)
            if not rk:
                continue
            if e == 1:
                u = u + Poly.var(_EPS, k) * rk / lamA
            elif e > 1:
                if e - 1 <= N:
                    atil[e - 1] = atil[e - 1] + Poly.var(_EPS, k) * rk / lamA
            else:
                j = 1 - e
                if j <= N:
                    btil[j] = btil[j] - Poly.var(_EPS, k) * rk * lamA ** (j - 1)

    res = residual()
    for e, c in res.items():
        for k in range(0, N + 1):
            rk = eps_part(Poly.coerce(c), k)
            if rk and (1 - N <= e <= N + 1):
                raise GenericityError(
                    "residual did not vanish at order %d, exponent %d" % (k, e))

    def finish(poly):
        p = Poly.coerce(poly)
        if keep_weights:
            return p
        p = p.subs({_EPS: Q(1)})
        return p.as_fraction() if p.is_constant() else p

    at_coeffs = {}
    for m in range(1, N + 1):
        v = finish(atil[m])
        if v:
            at_coeffs[m] = v
    scale_at = finish((Poly.const(1) + u) * lamA)
    if not isinstance(scale_at, Poly):
        scale_at = Q(scale_at)
    fAt = PowerSeriesGerm(ORIGIN, N, at_coeffs, scale_at)
    bt_coeffs = {}
    for j in range(1, N + 1):
        v = finish(btil[j])
        if v:
            bt_coeffs[-j] = v
    fBt = PowerSeriesGerm(INFINITY, N, bt_coeffs)
    return HullPair(fA, fB, fAt, fBt, N)


# -- the partition function ---------------------------------------------------------


def z_truncated(fA: PowerSeriesGerm, fB: PowerSeriesGerm, c=None, N=None):
    """<Omega| G_{f_A}^{-1} G_{f_B} |Omega> through grading N.

    The dilation of f_A acts trivially on the vacuum, so only the unit
    parts enter.  Returns a polynomial in the central charge unless c is
    given.
    """
    N = N if N is not None else min(fA.truncation, fB.truncation)
    gi = build_G(S.invert(fA.unit_part()), N)
    gb = build_G(fB, N)
    return vacuum_expectation(gi.unipotent, gb.unipotent, c=c)


def wick_residual_elements(pair: HullPair, N: int, level: int, params=None,
                           value_map=None):
    """Matrix elements of G_{fA}^{-1} G_{fB} - Z * G_{fBt} G_{fAt}^{-1}.

    Exercises the factorization identity on a Verma module through the
    given level; the dilation of f_Atil contributes the diagonal factor
    lam^{-(h + level)} on the right factor's input states.
    """
    from .verma import partitions
    params = params or VermaParams(c=Poly.var("c"), h=1)
    z = z_truncated(pair.fA, pair.fB, N=N)
    gi = build_G(S.invert(pair.fA.unit_part()), N)
    gb = build_G(pair.fB, N)
    git = build_G(S.invert(pair.fAt.unit_part()), N)
    gbt = build_G(pair.fBt, N)
    lamA = pair.fA.scale
    lamAt = pair.dilation()
    value_map = value_map or (lambda p: p)
    x = VermaVector.highest_weight(params)
    out = {}
    hvar = params.h
    words = [w for lvl in range(level + 1) for w in sorted(set(partitions(lvl)))]
    for w in words:
        v = x.act_word([-a for a in w])
        # G_{fA}^{-1} G_{fB} = lamA^{L0} G_{uA}^{-1} G_{fB}; rightmost first
        lhs_state = v.act_element(gb.unipotent).act_element(gi.unipotent)
        lhs_state = VermaVector(params,
                                {ww: value_map(cc * _lam_pow(lamA, hvar, sum(ww), value_map))
                                 for ww, cc in lhs_state.terms.items()})
        # Z G_{fBt} G_{fAt}^{-1} = Z G_{fBt} lamAt^{L0} G_{uAt}^{-1}
        rhs_state = v.act_element(git.unipotent)
        rhs_state = VermaVector(params,
                                {ww: value_map(cc * _lam_pow(lamAt, hvar, sum(ww), value_map))
                                 for ww, cc in rhs_state.terms.items()})
        rhs_state = rhs_state.act_element(gbt.unipotent)
        for w2 in words:
            le = Poly.coerce(lhs_state.terms.get(w2, Q(0)))
            re = Poly.coerce(rhs_state.terms.get(w2, Q(0))) * z
            out[(w2, w)] = value_map(le - re)
    return out


def _lam_pow(lam, hvar, level, value_map=None):
    # lam^{L0} on a level state of weight h gives lam^{h + level}; an exact
    # power needs an integer weight unless the dilation is trivial.
    if lam == 1:
        return Q(1)
    if isinstance(hvar, Poly) or Q(hvar).denominator != 1:
        raise ValueError("dilation with non-integer weight has no exact power")
    e = int(hvar) + level
    if isinstance(lam, Poly):
        out = Poly.const(1)
        base = lam if e >= 0 else None
        if e < 0:
            raise ValueError("negative power of a polynomial dilation")
        for _ in range(e):
            out = out * lam
            if value_map is not None:
                out = value_map(out)
        return out
    return Q(lam) ** e


# -- closed forms -----------------------------------------------------------------


def l_closed_form(example: str, a, b) -> dict:
    """Exact interaction term for the two worked hull families."""
    a, b = Q(a), Q(b)
    if not (0 < b < a):
        raise ValueError("need 0 < b < a (the hulls must not touch)")
    q = b * b / (a * a)
    if example == "two_slits":
        return {
            "example": example,
            "form": "-(3/2)*log(1 - b^2/a^2)",
            "log_arguments": {str(1 - q): Q(-3, 2)},
            "value": -1.5 * math.log(float(1 - q)),
        }
    if example == "slit_halfdisc":
        return {
            "example": example,
            "form": "(3/4)*log((1 + b^2/a^2)/(1 - b^2/a^2)^3)",
            "log_arguments": {str(1 + q): Q(3, 4), str(1 - q): Q(-9, 4)},
            "value": 0.75 * math.log(float(1 + q)) - 2.25 * math.log(float(1 - q)),
        }
    raise ValueError("unknown example %r" % (example,))


# -- numerical route -----------------------------------------------------------------


def _legendre_nodes(order):
    import numpy as np
    x, w = np.polynomial.legendre.leggauss(order)
    return [(float(xi), float(wi)) for xi, wi in zip(x, w)]


def _slit_sigma_origin(sigma, N):
    """f(z) = z (1 + sigma z^2)^(-1/2): the slit family in sigma = 1/alpha^2."""
    sigma = Q(sigma)
    if sigma == 0:
        return PowerSeriesGerm.identity(ORIGIN, N)
    u = S.LaurentSeries(ORIGIN, {0: Q(1), 2: sigma}, N)
    return S._series_to_germ(S.pow_fraction(u, Q(-1, 2)).shift(1), N)


def _halfdisc_vector_field(beta, depth):
    """Expansion coefficients of (z - sqrt(z^2 - 4 beta^2))/beta at infinity.

    Returns {exponent: coefficient} over exponents 1-2k, k = 1.. .
    """
    beta = Q(beta)
    from math import comb
    out = {}
    ck = Q(1, 2)
    for k in range(1, depth + 1):
        # binomial expansion of 1 - sqrt(1-x) at x = 4 beta^2 / z^2
        out[1 - 2 * k] = ck * 4 ** k * beta ** (2 * k - 1)
        ck = ck * Q(2 * k - 1, 2 * (k + 1))
    return out


def l_numeric(example: str, a, b, N: int = 28, rel_tol: float = 1e-10,
              order: int = 16, reparam=None, max_panels: int = 64,
              side: str = "A") -> dict:
    """Quadrature of log Z / (c/12) over an interpolation parameter.

    One hull is grown from nothing to its final shape; at each parameter
    value the commuting pair is solved exactly and the integrand is a
    formal residue pairing the deformation vector field against the
    Schwarzian of the transported other map.  side="A" grows the slit
    from infinity down (parameter sigma = 1/alpha^2, vector field
    -w^3/2); side="B" grows the B hull (vector field beta/w for the slit,
    the square-root field for the half-disc).  Both give the same number:
    only the final hulls matter.  Composite Gauss-Legendre panels are
    doubled until the relative change drops below rel_tol, with a final
    Richardson extrapolation of the refinement sequence.
    """
    a, b = Q(a), Q(b)
    if not (0 < b < a):
        raise ValueError("need 0 < b < a")
    if example == "two_slits":
        fB_final = lambda beta: S.slit_map_infinity(beta, N)
    elif example == "slit_halfdisc":
        fB_final = lambda beta: S.halfdisc_map_infinity(beta, N)
    else:
        raise ValueError("unknown example %r" % (example,))

    if side == "A":
        # L = + int_0^{1/a^2} dsigma resid((-w^3/2) Sf_Btil)
        hi_q = 1 / (a * a)
        fB = fB_final(b)

        def integrand(sigma):
            pair = commutative_diagram(_slit_sigma_origin(sigma, N), fB, N)
            sfb = S.schwarzian(pair.fBt.to_series())
            return -float(sfb.coefficient(-4)) / 2.0
        orientation = +1.0
    elif side == "B":
        # L = - int_0^b dbeta resid(v_B Sf_Atil)
        hi_q = b
        fA = S.slit_map_origin(a, N)
        if example == "two_slits":
            def integrand(beta):
                # the slit family field has a simple pole: beta * Sf_Atil(0)
                pair = commutative_diagram(fA, fB_final(beta), N)
                sfa = S.schwarzian(pair.fAt.unit_part())
                return float(beta * sfa.coefficient(0))
        else:
            def integrand(beta):
                pair = commutative_diagram(fA, fB_final(beta), N)
                sfa = S.schwarzian(pair.fAt.unit_part())
                v = _halfdisc_vector_field(beta, N // 2 + 1)
                total = Q(0)
                for e, ve in sorted(v.items(), reverse=True):
                    exp = -1 - e
                    if not sfa.known(exp):
                        break
                    total += ve * sfa.coefficient(exp)
                return float(total)
        orientation = -1.0
    else:
        raise ValueError("side must be 'A' or 'B'")

    lo, hi = 0.0, float(hi_q)

    def eval_at(t):
        # reparameterizations fix the endpoints; they only reshuffle the
        # pseudo-time, so the integral is unchanged
        s = reparam(t) if reparam else t
        ds = 1.0 if reparam is None else _numeric_derivative(reparam, t)
        s_q = Fraction(s).limit_denominator(1 << 48)
        if s_q <= 0:
            return 0.0
        if s_q >= hi_q:
            s_q = hi_q - Q(1, 1 << 52)
        return orientation * integrand(s_q) * ds

    nodes = _legendre_nodes(order)
    results = []
    panels = 1
    prev = None
    while panels <= max_panels:
        total = 0.0
        width = (hi - lo) / panels
        for p in range(panels):
            x0 = lo + p * width
            for xi, wi in nodes:
                t = x0 + (xi + 1.0) * width / 2.0
                total += wi * eval_at(t) * width / 2.0
        results.append(total)
        if prev is not None and abs(total - prev) <= rel_tol * max(abs(total), 1e-30):
            break
        prev = total
        panels *= 2
    value = results[-1]
    if len(results) >= 3:
        d1, d2 = results[-2] - results[-3], results[-1] - results[-2]
        if d1 != d2 and abs(d2) < abs(d1):
            # Aitken step on the refinement sequence
            value = results[-1] - d2 * d2 / (d2 - d1)
    closed = l_closed_form(example, a, b)["value"]
    return {
        "example": example, "a": str(a), "b": str(b), "side": side,
        "L_numeric": value, "L_closed": closed,
        "abs_error": abs(value - closed), "panels": panels,
        "refinements": len(results),
    }


def _numeric_derivative(fn, t, h=1e-6):
    return (fn(t + h) - fn(t - h)) / (2 * h)


# -- highest-weight sandwiches ---------------------------------------------------------


def _order_tracked(germ: PowerSeriesGerm, var: str) -> PowerSeriesGerm:
    """Attach the bookkeeping order weight |m| to every coefficient."""
    coeffs = {m: Poly.coerce(c) * Poly.var(var, abs(m))
              for m, c in germ.coeffs.items()}
    return PowerSeriesGerm(germ.basepoint, germ.truncation, coeffs, germ.scale)


def omega_expectation(fA: PowerSeriesGerm, fB: PowerSeriesGerm,
                      kappa, N: int) -> dict:
    """Both evaluations of the boundary-state sandwich of G_{fA}^{-1} G_{fB}.

    The direct route pairs in the level-2 quotient module at the
    degenerate (c, h); the factorized route multiplies the vacuum
    partition function by the dilation power of the transported A map.
    With an integer weight the two are compared exactly through mixed
    order N (tracked with an internal order variable); otherwise the
    dilation power is irrational and the comparison falls back to floats.
    """
    kappa = Q(kappa)
    params = VermaParams(kappa=kappa)
    c_k, h_k = params.c, params.h
    track = "_ord"

    def cut(p):
        return Poly.coerce(p).truncate_weighted(
            lambda n: 1 if n == track else 0, N)

    fa_t = _order_tracked(fA, track)
    fb_t = _order_tracked(fB, track)
    omega = VermaVector.highest_weight(params, quotient=True)
    gb = build_G(fb_t, N)
    gi = build_G(S.invert(fa_t.unit_part()), N)
    state = omega.act_element(gb.unipotent).act_element(gi.unipotent)
    direct = Poly.coerce(state.coefficient(()))

    pair = commutative_diagram(fa_t, fb_t, N)
    z = Poly.coerce(z_truncated(fa_t, fb_t, c=c_k, N=N))
    lamA = Q(fA.scale)
    lam_ratio = Poly.coerce(pair.dilation()) / lamA

    def value(p):
        return Poly.coerce(p).subs({track: Q(1)})

    out = {
        "kappa": kappa, "c": c_k, "h": h_k,
        "direct_reduced": value(direct).as_fraction(),
        "z_vacuum": value(z).as_fraction(),
        "dilation_ratio": value(lam_ratio).as_fraction(),
        "agreement_order": N,
    }
    if h_k.denominator == 1 and h_k >= 0:
        rhs = z * lam_ratio ** int(h_k)
        out["factorized_reduced"] = value(rhs).as_fraction()
        out["equal"] = not cut(direct - rhs)
    else:
        rhs = float(value(z).as_fraction()) * \
            float(value(lam_ratio).as_fraction()) ** float(h_k)
        out["factorized_reduced"] = rhs
        scale_gap = 2.0 ** (-(N + 1))
        out["equal"] = abs(float(out["direct_reduced"]) - rhs) <= \
            max(abs(rhs), 1.0) * scale_gap
    return out
