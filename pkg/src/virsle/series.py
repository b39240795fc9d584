"""Exact truncated power-series germs at 0 and at infinity.

A germ at the origin is f(z) = scale*(z + sum_{1<=m<=N} f_m z^{m+1});
a germ at infinity is f(z) = scale*(z + sum_{-N<=m<=-1} f_m z^{m+1}),
so f_{-1} is the additive constant at infinity.  Coefficients are exact
rationals (or sparse polynomials for formal computations); every contour
integral in this module is a formal residue, i.e. coefficient extraction
at w^{-1}, for both basepoints.

Truncation is a hard window: a LaurentSeries knows up to which exponent
its coefficients are exact, and reading past the window raises instead of
zero-filling.
"""

from __future__ import annotations

from fractions import Fraction
import json

from ._poly import Poly, Q

ORIGIN = "origin"
INFINITY = "infinity"

_WIDE = 10 ** 9  # window sentinel for exact scalars


class SeriesWindowError(ArithmeticError):
    """Raised when a computation needs coefficients beyond the window."""


class BasepointMismatch(ValueError):
    pass


def fvar(m: int) -> str:
    """Name of the formal coefficient variable f_m."""
    return "f%d" % m


def _direction(basepoint):
    if basepoint == ORIGIN:
        return 1
    if basepoint == INFINITY:
        return -1
    raise ValueError("unknown basepoint %r" % (basepoint,))


class LaurentSeries:
    """A one-sided Laurent series with an explicit validity window.

    For an origin series, coefficients are exact for exponents <= cut;
    for an infinity series, for exponents >= cut.  Everything outside the
    window is unknown (not zero).
    """

    __slots__ = ("basepoint", "coeffs", "cut")

    def __init__(self, basepoint, coeffs, cut):
        self.basepoint = basepoint
        d = _direction(basepoint)
        self.cut = cut
        if d > 0:
            self.coeffs = {e: c for e, c in coeffs.items() if e <= cut and c}
        else:
            self.coeffs = {e: c for e, c in coeffs.items() if e >= cut and c}

    @staticmethod
    def constant(basepoint, value):
        d = _direction(basepoint)
        return LaurentSeries(basepoint, {0: value}, d * _WIDE)

    # -- accessors ---------------------------------------------------------

    def known(self, exp) -> bool:
        d = _direction(self.basepoint)
        return exp <= self.cut if d > 0 else exp >= self.cut

    def coefficient(self, exp):
        if not self.known(exp):
            raise SeriesWindowError(
                "coefficient at exponent %d is outside the window (cut=%d, %s)"
                % (exp, self.cut, self.basepoint))
        return self.coeffs.get(exp, Q(0))

    def residue(self):
        """Formal residue: the coefficient of z^-1."""
        return self.coefficient(-1)

    def order(self):
        """Leading exponent (lowest at 0, highest at infinity); None if zero."""
        if not self.coeffs:
            return None
        return min(self.coeffs) if self.basepoint == ORIGIN else max(self.coeffs)

    def _ord_or_edge(self):
        o = self.order()
        if o is not None:
            return o
        return self.cut + _direction(self.basepoint)

    def is_zero(self):
        return not self.coeffs

    # -- arithmetic ----------------------------------------------------------

    def _check(self, other):
        if self.basepoint != other.basepoint:
            raise BasepointMismatch("cannot mix series at 0 and at infinity")

    def __add__(self, other):
        if not isinstance(other, LaurentSeries):
            raise TypeError("can only add LaurentSeries to LaurentSeries")
        self._check(other)
        d = _direction(self.basepoint)
        cut = min(self.cut, other.cut) if d > 0 else max(self.cut, other.cut)
        coeffs = dict(self.coeffs)
        for e, c in other.coeffs.items():
            s = coeffs.get(e, Q(0)) + c
            if s:
                coeffs[e] = s
            else:
                coeffs.pop(e, None)
        return LaurentSeries(self.basepoint, coeffs, cut)

    def __neg__(self):
        return LaurentSeries(self.basepoint,
                             {e: -c for e, c in self.coeffs.items()}, self.cut)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, LaurentSeries):
            if not other:
                return LaurentSeries(self.basepoint, {}, self.cut)
            return LaurentSeries(self.basepoint,
                                 {e: c * other for e, c in self.coeffs.items()},
                                 self.cut)
        self._check(other)
        d = _direction(self.basepoint)
        oa, ob = self._ord_or_edge(), other._ord_or_edge()
        if d > 0:
            cut = min(self.cut + ob, other.cut + oa)
        else:
            cut = max(self.cut + ob, other.cut + oa)
        coeffs = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = e1 + e2
                if (d > 0 and e > cut) or (d < 0 and e < cut):
                    continue
                s = coeffs.get(e, Q(0)) + c1 * c2
                if s:
                    coeffs[e] = s
                else:
                    coeffs.pop(e, None)
        return LaurentSeries(self.basepoint, coeffs, cut)

    __rmul__ = __mul__

    def shift(self, k):
        """Multiply by z^k."""
        return LaurentSeries(self.basepoint,
                             {e + k: c for e, c in self.coeffs.items()},
                             self.cut + k)

    def derivative(self):
        coeffs = {}
        for e, c in self.coeffs.items():
            if e != 0:
                coeffs[e - 1] = c * e
        return LaurentSeries(self.basepoint, coeffs, self.cut - 1)

    def inverse(self):
        """Multiplicative inverse; the leading coefficient must be rational."""
        o = self.order()
        if o is None:
            raise ZeroDivisionError("inverting the zero series")
        lead = self.coeffs[o]
        if isinstance(lead, Poly):
            lead = lead.as_fraction()
        d = _direction(self.basepoint)
        rel = (self.cut - o) * d  # number of exact unit-tail coefficients
        t = {}
        for e, c in self.coeffs.items():
            j = (e - o) * d
            if j > 0:
                t[j] = c / lead
        v = {0: Q(1)}
        for n in range(1, rel + 1):
            s = Q(0)
            for j, tj in t.items():
                if j <= n and (n - j) in v:
                    s = s - tj * v[n - j]
            if s:
                v[n] = s
        coeffs = {-o + d * n: c / lead for n, c in v.items()}
        return LaurentSeries(self.basepoint, coeffs, -o + d * rel)

    def pow_int(self, n: int):
        if n == 0:
            return LaurentSeries.constant(self.basepoint, Q(1))
        base = self if n > 0 else self.inverse()
        out = base
        for _ in range(abs(n) - 1):
            out = out * base
        return out

    def map_coefficients(self, fn):
        coeffs = {}
        for e, c in self.coeffs.items():
            v = fn(c)
            if v:
                coeffs[e] = v
        return LaurentSeries(self.basepoint, coeffs, self.cut)

    def __eq__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return (self.basepoint == other.basepoint and self.cut == other.cut
                and self.coeffs == other.coeffs)

    def __repr__(self):
        items = sorted(self.coeffs.items())
        body = " + ".join("(%s)*z^%d" % (c, e) for e, c in items) or "0"
        return "<%s series %s; cut=%d>" % (self.basepoint, body, self.cut)


def pow_fraction(series: LaurentSeries, alpha):
    """(1 + tail)^alpha for rational alpha, on a unit series (constant 1)."""
    if series.coeffs.get(0) != 1:
        raise ValueError("pow_fraction needs constant term 1")
    alpha = Q(alpha)
    d = _direction(series.basepoint)
    rel = series.cut * d
    t = {}
    for e, c in series.coeffs.items():
        j = e * d
        if j > 0:
            t[j] = c
        elif j < 0:
            raise ValueError("not a unit series")
    g = {0: Q(1)}
    for n in range(1, rel + 1):
        s = Q(0)
        for j, tj in t.items():
            if j <= n and (n - j) in g:
                s = s + ((alpha + 1) * j - n) * tj * g[n - j]
        s = s / n
        if s:
            g[n] = s
    return LaurentSeries(series.basepoint, {d * n: c for n, c in g.items()},
                         series.cut)


class PowerSeriesGerm:
    """A truncated germ of a conformal map fixing 0 or infinity."""

    __slots__ = ("basepoint", "truncation", "scale", "coeffs")

    def __init__(self, basepoint, truncation, coeffs=None, scale=Q(1)):
        _direction(basepoint)
        if truncation < 1:
            raise ValueError("truncation must be a positive integer")
        self.basepoint = basepoint
        self.truncation = truncation
        if not isinstance(scale, Poly):
            scale = Q(scale)
            if scale <= 0:
                raise ValueError("scale must be strictly positive")
        self.scale = scale
        clean = {}
        for m, c in (coeffs or {}).items():
            if basepoint == ORIGIN and not (1 <= m <= truncation):
                raise ValueError("origin germ index %d out of range" % m)
            if basepoint == INFINITY and not (-truncation <= m <= -1):
                raise ValueError("infinity germ index %d out of range" % m)
            if c:
                clean[m] = c if isinstance(c, Poly) else Q(c)
        self.coeffs = clean

    @staticmethod
    def identity(basepoint, truncation):
        return PowerSeriesGerm(basepoint, truncation)

    def is_identity(self):
        return self.scale == 1 and not self.coeffs

    # -- views ----------------------------------------------------------------

    def coefficient(self, m):
        return self.coeffs.get(m, Q(0))

    def to_series(self) -> LaurentSeries:
        d = _direction(self.basepoint)
        cut = 1 + d * self.truncation
        coeffs = {1: self.scale}
        for m, c in self.coeffs.items():
            coeffs[m + 1] = self.scale * c
        return LaurentSeries(self.basepoint, coeffs, cut)

    def map_coefficients(self, fn):
        scale = fn(self.scale) if isinstance(self.scale, Poly) else self.scale
        if isinstance(scale, Poly) and scale.is_constant():
            scale = scale.as_fraction()
        return PowerSeriesGerm(self.basepoint, self.truncation,
                               {m: fn(c) for m, c in self.coeffs.items()},
                               scale)

    def unit_part(self) -> "PowerSeriesGerm":
        """The germ f/scale, with unit derivative at the basepoint."""
        return PowerSeriesGerm(self.basepoint, self.truncation, self.coeffs)

    def eval_at(self, a):
        """Evaluate the truncated polynomial (origin germs only)."""
        if self.basepoint != ORIGIN:
            raise ValueError("eval_at is defined for origin germs")
        a = a if isinstance(a, Poly) else Q(a)
        total = a
        for m, c in self.coeffs.items():
            total = total + c * a ** (m + 1)
        return self.scale * total

    def derivative_series(self) -> LaurentSeries:
        return self.to_series().derivative()

    def __eq__(self, other):
        if not isinstance(other, PowerSeriesGerm):
            return NotImplemented
        return (self.basepoint == other.basepoint
                and self.truncation == other.truncation
                and self.scale == other.scale
                and self.coeffs == other.coeffs)

    def __repr__(self):
        terms = ["z"]
        order = sorted(self.coeffs, key=lambda m: abs(m))
        for m in order:
            terms.append("(%s)*z^%d" % (self.coeffs[m], m + 1))
        s = "" if self.scale == 1 else "(%s)*" % (self.scale,)
        return "<germ@%s %s[%s]; N=%d>" % (self.basepoint, s,
                                           " + ".join(terms), self.truncation)


def formal_germ(basepoint, truncation) -> PowerSeriesGerm:
    """Germ whose coefficients are the independent indeterminates f_m."""
    d = _direction(basepoint)
    coeffs = {d * m: Poly.var(fvar(d * m)) for m in range(1, truncation + 1)}
    return PowerSeriesGerm(basepoint, truncation, coeffs)


def _series_to_germ(series: LaurentSeries, truncation) -> PowerSeriesGerm:
    scale = series.coefficient(1)
    if isinstance(scale, Poly) and scale.is_constant():
        scale = scale.as_fraction()
    if isinstance(scale, Poly):
        raise ValueError("cannot extract a germ with a non-rational scale")
    inv = 1 / scale
    d = _direction(series.basepoint)
    coeffs = {}
    for m in range(1, truncation + 1):
        c = series.coefficient(d * m + 1)
        if c:
            coeffs[d * m] = c * inv
    return PowerSeriesGerm(series.basepoint, truncation, coeffs, scale)


def compose_series(f: PowerSeriesGerm, g: PowerSeriesGerm) -> LaurentSeries:
    """The series of g(f(z)), without extracting a germ."""
    if f.basepoint != g.basepoint:
        raise BasepointMismatch("compose needs germs at the same basepoint")
    w = f.to_series()
    d = _direction(f.basepoint)
    step = w.pow_int(d)  # w at the origin, 1/w at infinity
    # g(w) = scale_g * (w + w * sum_{k>=1} g_{dk} (w^d)^k); Horner on the sum
    acc = None
    for k in range(g.truncation, 0, -1):
        gm = g.coeffs.get(d * k, Q(0))
        if acc is None:
            if not gm:
                continue
            acc = LaurentSeries.constant(f.basepoint, gm)
        else:
            acc = acc * step
            if gm:
                acc = acc + LaurentSeries.constant(f.basepoint, gm)
    if acc is None:
        return w * g.scale
    tail = acc * step  # sum_{k>=1} g_{dk} w^{dk}
    return (w + w * tail) * g.scale


def compose(f: PowerSeriesGerm, g: PowerSeriesGerm) -> PowerSeriesGerm:
    """compose(f, g)(z) = g(f(z)), truncated; the scales multiply."""
    n = min(f.truncation, g.truncation)
    return _series_to_germ(compose_series(f, g), n)


def invert(f: PowerSeriesGerm) -> PowerSeriesGerm:
    """Compositional inverse to the truncation order; the scale inverts."""
    n = f.truncation
    d = _direction(f.basepoint)
    if isinstance(f.scale, Poly):
        raise ValueError("cannot invert a germ with a non-rational scale")
    u = f.unit_part()
    coeffs = {}
    g = PowerSeriesGerm(f.basepoint, n)
    for k in range(1, n + 1):
        m = d * k
        r = compose_series(u, g).coefficient(m + 1)
        if r:
            coeffs[m] = -r
            g = PowerSeriesGerm(f.basepoint, n, coeffs)
    # post-compose with z/s: (s*u)^-1 = u^-1(z/s)
    s = f.scale
    out = {m: c * s ** (-m) for m, c in g.coeffs.items()}
    return PowerSeriesGerm(f.basepoint, n, out, 1 / s)


def lagrange_weight(f: PowerSeriesGerm, m: int, n: int, power: int = 1):
    """The residue of w^{m+1} f'(w)^power / f(w)^{n+2}.

    With power=1 this is the connection coefficient C(m, n); for the
    identity germ it is the Kronecker delta at m = n for both basepoints.
    """
    fp = f.derivative_series()
    integrand = fp if power == 1 else fp * fp
    integrand = integrand * f.to_series().pow_int(-(n + 2))
    return integrand.shift(m + 1).residue()


def schwarzian(f) -> LaurentSeries:
    """Sf = (f''/f')' - (1/2)(f''/f')^2."""
    s = f.to_series() if isinstance(f, PowerSeriesGerm) else f
    f1 = s.derivative()
    f2 = f1.derivative()
    q = f2 * f1.inverse()
    return q.derivative() - q * q * Q(1, 2)


def hm_series(f: PowerSeriesGerm, m: int) -> LaurentSeries:
    """The corrected replacement kernel for the quadratic residues.

    At the origin this is h_m(z) = z^{m+1} f'(z) - sum_{m<=k<=0} f(z)^{k+1}
    * resid(u^{m+1} f'(u)^2 / f(u)^{k+2}), an O(z^2) series satisfying
    resid(z^{m+1} f'^2 / f^{l+2}) = resid(h_m f' / f^{l+2}) for l >= 1.
    At infinity the mirrored kernel i_n(z) = z^{1-n} f'(z) -
    sum_{n<=k<=0} f(z)^{1-k} * resid(u^{1-n} f'(u)^2 / f(u)^{2-k}) is O(1)
    and plays the same role for l <= -1.
    """
    fs = f.to_series()
    fp = fs.derivative()
    if f.basepoint == ORIGIN:
        out = fp.shift(m + 1)
        for k in range(m, 1):
            w = ((fp * fp) * fs.pow_int(-(k + 2))).shift(m + 1).residue()
            if w:
                out = out - fs.pow_int(k + 1) * w
        return out
    out = fp.shift(1 - m)
    for k in range(m, 1):
        w = ((fp * fp) * fs.pow_int(-(2 - k))).shift(1 - m).residue()
        if w:
            out = out - fs.pow_int(1 - k) * w
    return out


# -- closed-form hull maps ----------------------------------------------------


def slit_map_origin(gamma, truncation) -> PowerSeriesGerm:
    """f(z) = (z^-2 + gamma^-2)^(-1/2) = z*(1 + z^2/gamma^2)^(-1/2) at 0."""
    gamma = Q(gamma)
    u = LaurentSeries(ORIGIN, {0: Q(1), 2: 1 / gamma ** 2}, truncation)
    return _series_to_germ(pow_fraction(u, Q(-1, 2)).shift(1), truncation)


def slit_map_infinity(beta, truncation) -> PowerSeriesGerm:
    """f(z) = (z^2 + beta^2)^(1/2) = z*(1 + beta^2/z^2)^(1/2) at infinity."""
    beta = Q(beta)
    u = LaurentSeries(INFINITY, {0: Q(1), -2: beta ** 2}, -truncation)
    return _series_to_germ(pow_fraction(u, Q(1, 2)).shift(1), truncation)


def halfdisc_map_infinity(beta, truncation) -> PowerSeriesGerm:
    """f(z) = z + beta^2/z at infinity."""
    return PowerSeriesGerm(INFINITY, truncation, {-2: Q(beta) ** 2})


def halfdisc_fixing_zero(x0, r, truncation):
    """The map z + r^2/(z - x0) + r^2/x0 removing a half-disc on the axis.

    Fixes 0 and is z + O(1) at infinity; returns the pair of expansions
    (origin germ carrying the dilation 1 - r^2/x0^2, infinity germ).
    """
    x0, r = Q(x0), Q(r)
    if not (0 < r < x0):
        raise ValueError("need 0 < r < x0")
    scale = 1 - r ** 2 / x0 ** 2
    origin = PowerSeriesGerm(
        ORIGIN, truncation,
        {m: (-r ** 2 / x0 ** (m + 2)) / scale for m in range(1, truncation + 1)},
        scale)
    inf_coeffs = {-1: r ** 2 / x0}
    for k in range(1, truncation):
        inf_coeffs[-k - 1] = r ** 2 * x0 ** (k - 1)
    infinity = PowerSeriesGerm(INFINITY, truncation, inf_coeffs)
    return origin, infinity


def mobius_fixing_zero(mu, nu, truncation) -> PowerSeriesGerm:
    """h(z) = mu*z/(1 - nu*z) as an origin germ with dilation mu."""
    mu, nu = Q(mu), Q(nu)
    coeffs = {}
    for m in range(1, truncation + 1):
        c = nu ** m
        if c:
            coeffs[m] = c
    return PowerSeriesGerm(ORIGIN, truncation, coeffs, mu)


def translation_germ(a, truncation) -> PowerSeriesGerm:
    """h(z) = z + a as an infinity germ."""
    a = Q(a)
    return PowerSeriesGerm(INFINITY, truncation, {-1: a} if a else {})


# -- JSON germ literals ---------------------------------------------------------


def germ_to_json(f: PowerSeriesGerm) -> dict:
    if isinstance(f.scale, Poly):
        raise ValueError("only rational germs serialize to JSON")
    return {
        "basepoint": f.basepoint,
        "scale": str(f.scale),
        "coeffs": {str(m): str(c) for m, c in sorted(f.coeffs.items())},
        "truncation": f.truncation,
    }


def germ_from_json(obj) -> PowerSeriesGerm:
    if isinstance(obj, str):
        obj = json.loads(obj)
    coeffs = {int(m): Q(c) for m, c in obj.get("coeffs", {}).items()}
    return PowerSeriesGerm(obj["basepoint"], int(obj["truncation"]),
                           coeffs, Q(obj.get("scale", 1)))
