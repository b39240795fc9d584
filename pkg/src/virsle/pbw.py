"""Truncated completed enveloping algebras of the Virasoro algebra.

Elements are stored in PBW normal-ordered form: every term is a word

    L_{-a1} L_{-a2} ... L_{-ak} * L0^p * L_{bl} ... L_{b2} L_{b1}

with a1 <= a2 <= ... and b1 <= b2 <= ... (so L_1 factors sit at the utmost
right of the raising block and L_{-1} factors at the utmost left of the
lowering block), and a coefficient that is a polynomial in the formal
central charge c.

A term's grading is sum(b) - sum(a).  Truncation drops raising words above
max_pos and lowering words below -max_neg; the window [lo, hi] records the
gradings for which the stored element is exact (None means unbounded), and
`lossy` is set as soon as truncation has discarded anything.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from ._poly import Poly, Q

C = Poly.var("c")


def _block(i):
    return 0 if i < 0 else (1 if i == 0 else 2)


def _key(i):
    return (_block(i), -i)


@lru_cache(maxsize=None)
def _normal_order(seq):
    """Normal order a word of generator indices (0 stands for L0).

    Returns a dict {canonical_sequence: coefficient}; the dict and its
    values must be treated as read-only by callers.
    """
    for i in range(len(seq) - 1):
        x, y = seq[i], seq[i + 1]
        if _key(x) <= _key(y):
            continue
        head, tail = seq[:i], seq[i + 2:]
        out = {}
        for k, v in _normal_order(head + (y, x) + tail).items():
            out[k] = out.get(k, 0) + v
        if x != y:
            coef = Q(x - y)
            for k, v in _normal_order(head + (x + y,) + tail).items():
                s = out.get(k, 0) + v * coef
                if s:
                    out[k] = s
                else:
                    out.pop(k, None)
        if x + y == 0:
            central = C * Q(x ** 3 - x, 12)
            for k, v in _normal_order(head + tail).items():
                s = out.get(k, 0) + v * central
                if s:
                    out[k] = s
                else:
                    out.pop(k, None)
        return {k: v for k, v in out.items() if v}
    return {seq: Q(1)}


def _split(seq):
    """Split a canonical sequence into the (neg, l0, pos) term key."""
    neg, l0, pos = [], 0, []
    for i in seq:
        if i < 0:
            neg.append(-i)
        elif i == 0:
            l0 += 1
        else:
            pos.append(i)
    return (tuple(sorted(neg)), l0, tuple(sorted(pos)))


def _seq_of(key):
    neg, l0, pos = key
    return tuple(-a for a in neg) + (0,) * l0 + tuple(reversed(pos))


def term_grading(key):
    neg, _, pos = key
    return sum(pos) - sum(neg)


def _min_opt(*vals):
    vals = [v for v in vals if v is not None]
    return min(vals) if vals else None


def _max_opt(*vals):
    vals = [v for v in vals if v is not None]
    return max(vals) if vals else None


class AlgebraElement:
    """A normal-ordered element with truncation and validity bookkeeping."""

    __slots__ = ("terms", "max_pos", "max_neg", "lo", "hi", "lossy")

    def __init__(self, terms=None, max_pos=None, max_neg=None,
                 lo=None, hi=None, lossy=False):
        self.terms = {}
        self.max_pos = max_pos
        self.max_neg = max_neg
        self.lo = lo
        self.hi = hi
        self.lossy = lossy
        for key, coef in (terms or {}).items():
            self._add_term(key, coef)

    def _add_term(self, key, coef):
        if not coef:
            return
        neg, l0, pos = key
        if self.max_pos is not None and sum(pos) > self.max_pos:
            g = term_grading(key)
            self.hi = _min_opt(self.hi, g - 1)
            self.lossy = True
            return
        if self.max_neg is not None and sum(neg) > self.max_neg:
            g = term_grading(key)
            self.lo = _max_opt(self.lo, g + 1)
            self.lossy = True
            return
        s = self.terms.get(key, 0) + coef
        if s:
            self.terms[key] = s
        else:
            self.terms.pop(key, None)

    # -- constructors -----------------------------------------------------

    @staticmethod
    def one(**kw):
        return AlgebraElement({((), 0, ()): Q(1)}, **kw)

    @staticmethod
    def zero(**kw):
        return AlgebraElement({}, **kw)

    @staticmethod
    def generator(n, **kw):
        if n == 0:
            key = ((), 1, ())
        elif n < 0:
            key = ((-n,), 0, ())
        else:
            key = ((), 0, (n,))
        return AlgebraElement({key: Q(1)}, **kw)

    @staticmethod
    def scalar(value, **kw):
        return AlgebraElement({((), 0, ()): Poly.coerce(value)}, **kw)

    # -- views ---------------------------------------------------------------

    def min_grading(self):
        if not self.terms:
            return 0
        return min(term_grading(k) for k in self.terms)

    def max_grading(self):
        if not self.terms:
            return 0
        return max(term_grading(k) for k in self.terms)

    def max_neg_depth(self):
        if not self.terms:
            return 0
        return max(sum(k[0]) for k in self.terms)

    def grading_component(self, g):
        return AlgebraElement(
            {k: v for k, v in self.terms.items() if term_grading(k) == g},
            max_pos=self.max_pos, max_neg=self.max_neg,
            lo=self.lo, hi=self.hi, lossy=self.lossy)

    def coefficient(self, key):
        return Poly.coerce(self.terms.get(key, Q(0)))

    def scalar_part(self):
        """Coefficient of the empty word."""
        return self.coefficient(((), 0, ()))

    def is_zero(self):
        return not self.terms

    def exact_in(self, g) -> bool:
        if self.lo is not None and g < self.lo:
            return False
        if self.hi is not None and g > self.hi:
            return False
        return True

    # -- ring operations --------------------------------------------------------

    def _with(self, terms, lo, hi, lossy, max_pos=None, max_neg=None):
        out = AlgebraElement(max_pos=_min_opt(self.max_pos, max_pos),
                             max_neg=_min_opt(self.max_neg, max_neg),
                             lo=lo, hi=hi, lossy=lossy)
        for k, v in terms.items():
            out._add_term(k, v)
        return out

    def __add__(self, other):
        if not isinstance(other, AlgebraElement):
            other = AlgebraElement.scalar(other)
        terms = dict(self.terms)
        for k, v in other.terms.items():
            s = terms.get(k, 0) + v
            if s:
                terms[k] = s
            else:
                terms.pop(k, None)
        out = AlgebraElement(max_pos=_min_opt(self.max_pos, other.max_pos),
                             max_neg=_min_opt(self.max_neg, other.max_neg),
                             lo=_max_opt(self.lo, other.lo),
                             hi=_min_opt(self.hi, other.hi),
                             lossy=self.lossy or other.lossy)
        for k, v in terms.items():
            out._add_term(k, v)
        return out

    __radd__ = __add__

    def __neg__(self):
        return self._with({k: -v for k, v in self.terms.items()},
                          self.lo, self.hi, self.lossy)

    def __sub__(self, other):
        if not isinstance(other, AlgebraElement):
            other = AlgebraElement.scalar(other)
        return self + (-other)

    def scale(self, value):
        if not value:
            return AlgebraElement.zero(max_pos=self.max_pos, max_neg=self.max_neg,
                                       lo=self.lo, hi=self.hi, lossy=self.lossy)
        return self._with({k: v * value for k, v in self.terms.items()},
                          self.lo, self.hi, self.lossy)

    def __mul__(self, other):
        if not isinstance(other, AlgebraElement):
            return self.scale(other)
        return multiply(self, other)

    def __rmul__(self, other):
        if isinstance(other, AlgebraElement):
            return multiply(other, self)
        return self.scale(other)

    def transpose(self) -> "AlgebraElement":
        """Contravariant transpose: L_n -> L_{-n}, words reversed.

        With the storage conventions here this is exactly the swap of the
        lowering and raising blocks of every term key.
        """
        return AlgebraElement(
            {(pos, l0, neg): v for (neg, l0, pos), v in self.terms.items()},
            max_pos=self.max_neg, max_neg=self.max_pos,
            lo=None if self.hi is None else -self.hi,
            hi=None if self.lo is None else -self.lo,
            lossy=self.lossy)

    def specialize_c(self, value):
        return self._with(
            {k: Poly.coerce(v).subs({"c": Q(value)}) for k, v in self.terms.items()},
            self.lo, self.hi, self.lossy)

    def map_coefficients(self, fn):
        return self._with({k: fn(Poly.coerce(v)) for k, v in self.terms.items()},
                          self.lo, self.hi, self.lossy)

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        keys = set(self.terms) | set(other.terms)
        for k in keys:
            if Poly.coerce(self.terms.get(k, 0)) != Poly.coerce(other.terms.get(k, 0)):
                return False
        return True

    # -- rendering -----------------------------------------------------------

    def render(self) -> str:
        """Canonical text form, e.g. "c/2 + 4*L0" or "L2*L1^2"."""
        if not self.terms:
            return "0"
        def word_str(key):
            neg, l0, pos = key
            factors = []
            for a in sorted(set(neg)):
                e = neg.count(a)
                factors.append("L-%d%s" % (a, "^%d" % e if e > 1 else ""))
            if l0:
                factors.append("L0%s" % ("^%d" % l0 if l0 > 1 else ""))
            for b in sorted(set(pos), reverse=True):
                e = pos.count(b)
                factors.append("L%d%s" % (b, "^%d" % e if e > 1 else ""))
            return "*".join(factors)

        def sort_key(key):
            neg, l0, pos = key
            return (term_grading(key), sum(neg) + l0 + sum(pos), key)

        bits = []
        for key in sorted(self.terms, key=sort_key):
            coef = Poly.coerce(self.terms[key])
            w = word_str(key)
            cs = str(coef)
            if not w:
                bits.append(cs)
            elif cs == "1":
                bits.append(w)
            elif cs == "-1":
                bits.append("-" + w)
            elif "+" in cs or (cs.count("-") and not cs.startswith("-")):
                bits.append("(%s)*%s" % (cs, w))
            else:
                bits.append("%s*%s" % (cs, w))
        out = bits[0]
        for b in bits[1:]:
            out += ("%s" if b.startswith("-") else "+%s") % b
        return out

    def __repr__(self):
        return "<AlgebraElement %s>" % self.render()


def multiply(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    """PBW normal-ordered product with window bookkeeping."""
    out = AlgebraElement(max_pos=_min_opt(x.max_pos, y.max_pos),
                         max_neg=_min_opt(x.max_neg, y.max_neg),
                         lossy=x.lossy or y.lossy)
    xin, yin = x.min_grading(), y.min_grading()
    xax, yax = x.max_grading(), y.max_grading()
    out.hi = _min_opt(
        None if x.hi is None else x.hi + yin,
        None if y.hi is None else y.hi + xin)
    out.lo = _max_opt(
        None if x.lo is None else x.lo + yax,
        None if y.lo is None else y.lo + xax)
    for k1, c1 in x.terms.items():
        for k2, c2 in y.terms.items():
            c = c1 * c2
            seq = _seq_of(k1) + _seq_of(k2)
            for cseq, coef in _normal_order(seq).items():
                out._add_term(_split(cseq), coef * c)
    return out


def commutator(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    return multiply(x, y) - multiply(y, x)


def commutator_basis(n: int, m: int) -> AlgebraElement:
    """[L_n, L_m] = (n - m) L_{n+m} + (c/12)(n^3 - n) delta_{n+m,0}."""
    out = AlgebraElement.zero()
    if n != m:
        out = AlgebraElement.generator(n + m).scale(Q(n - m))
    if n + m == 0:
        out = out + AlgebraElement.scalar(C * Q(n ** 3 - n, 12))
    return out


def adjoint_exp(parameter, target: AlgebraElement, max_neg: int) -> AlgebraElement:
    """e^{t ad L_{-1}} applied to a lowering-side element, truncated.

    The parameter may be an exact rational or a formal variable name;
    nilpotence of ad L_{-1} below the depth cap makes the sum finite.
    """
    if isinstance(parameter, str):
        t = Poly.var(parameter)
    else:
        t = Q(parameter)
    lm1 = AlgebraElement.generator(-1, max_neg=max_neg)
    term = AlgebraElement(target.terms, max_neg=max_neg)
    out = term
    fact = 1
    power = Poly.const(1) if isinstance(t, Poly) else Q(1)
    k = 0
    while True:
        term = commutator(lm1, term)
        k += 1
        fact *= k
        power = power * t
        if term.is_zero():
            break
        out = out + term.scale(power / fact)
    out.lossy = out.lossy or target.lossy
    return out


def dilation_conjugate(x: AlgebraElement, lam) -> AlgebraElement:
    """lam^{L0} X lam^{-L0}: multiplies each grading-g term by lam^{-g}."""
    lam = Q(lam)
    terms = {}
    for k, v in x.terms.items():
        g = term_grading(k)
        terms[k] = v * lam ** (-g)
    return AlgebraElement(terms, max_pos=x.max_pos, max_neg=x.max_neg,
                          lo=x.lo, hi=x.hi, lossy=x.lossy)


def virasoro_bracket_check(indices, max_abs_grading):
    """Exact Jacobi check over basis triples; returns the list of failures."""
    failures = []
    for a in indices:
        for b in indices:
            for d in indices:
                lhs = (commutator(commutator_basis(a, b), AlgebraElement.generator(d))
                       + commutator(commutator_basis(b, d), AlgebraElement.generator(a))
                       + commutator(commutator_basis(d, a), AlgebraElement.generator(b)))
                if not lhs.is_zero():
                    failures.append((a, b, d))
    return failures
