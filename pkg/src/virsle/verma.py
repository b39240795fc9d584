"""Verma modules V(c,h), their graded duals, and highest-weight pairings.

States are stored over the PBW basis of lowering words: the word
(a1, a2, ..., ak) with a1 <= ... <= ak stands for L_{-a1} L_{-a2} ...
L_{-ak} applied to the highest weight vector, so the rightmost factor acts
first.  The action engine works with formal central charge c and weight h
(polynomials), and parameter values are substituted at the edge.

The weight-h highest weight vector degenerate at level 2 sits at

    c = (3k - 8)(6 - k) / (2k),   h = (6 - k) / (2k)

for the Loewner time-scale parameter k; with these values
(-2 L_{-2} + (k/2) L_{-1}^2) annihilates against every raising generator.
The quotient by that singular submodule is realized operationally: acting
on a quotient state rewrites trailing L_{-2} factors via the level-2
relation, so quotient words never contain a part equal to 2.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
import io

from ._poly import Poly, Q

_C = Poly.var("c")
_H = Poly.var("h")
_KAPPA = Poly.var("kappa")


class LossyTruncationError(ArithmeticError):
    """An exact pairing was requested from a truncation-lossy element."""


def central_charge(kappa) -> Fraction:
    """c_k = (3k-8)(6-k)/(2k); zero at k = 8/3 and k = 6."""
    kappa = Q(kappa)
    return (3 * kappa - 8) * (6 - kappa) / (2 * kappa)


def conformal_weight(kappa) -> Fraction:
    kappa = Q(kappa)
    return (6 - kappa) / (2 * kappa)


class VermaParams:
    """Central charge and conformal weight, possibly formal, optionally
    tied to the Loewner parameter kappa."""

    __slots__ = ("c", "h", "kappa")

    def __init__(self, c=None, h=None, kappa=None):
        if kappa is not None:
            kappa = Q(kappa)
            if kappa <= 0:
                raise ValueError("kappa must be positive")
            if c is None:
                c = central_charge(kappa)
            if h is None:
                h = conformal_weight(kappa)
        self.c = c if (c is None or isinstance(c, Poly)) else Q(c)
        self.h = h if (h is None or isinstance(h, Poly)) else Q(h)
        self.kappa = kappa

    @staticmethod
    def formal():
        return VermaParams()

    def assignment(self):
        out = {}
        if self.c is not None:
            out["c"] = self.c
        if self.h is not None:
            out["h"] = self.h
        if self.kappa is not None:
            out["kappa"] = self.kappa
        return out

    def specialize(self, value):
        value = Poly.coerce(value).subs(self.assignment())
        if value.is_constant():
            return value.as_fraction()
        return value

    def __repr__(self):
        return "VermaParams(c=%s, h=%s%s)" % (
            self.c, self.h, ", kappa=%s" % self.kappa if self.kappa else "")


# -- the formal action engine ---------------------------------------------------
#
# All three kernels return tuples of (word, coefficient) pairs and are
# memoized; callers must not mutate the results.


@lru_cache(maxsize=None)
def _lower(a: int, word: tuple):
    """L_{-a} applied to a canonical word: reorder into the PBW basis."""
    if not word or a <= word[0]:
        return (((a,) + word, Q(1)),)
    b, rest = word[0], word[1:]
    out = {}
    for w, c in _lower(a, rest):
        out[(b,) + w] = out.get((b,) + w, 0) + c
    for w, c in _lower(a + b, rest):
        s = out.get(w, 0) + c * (b - a)
        if s:
            out[w] = s
        else:
            out.pop(w, None)
    return tuple(out.items())


@lru_cache(maxsize=None)
def _raise(n: int, word: tuple):
    """L_n (n >= 1) applied to a word on the highest weight vector."""
    if not word:
        return ()
    b, rest = word[0], word[1:]
    out = {}
    # L_n L_{-b} = L_{-b} L_n + (n + b) L_{n-b} + delta (c/12)(n^3-n)
    for w, c in _raise(n, rest):
        for w2, c2 in _lower(b, w):
            s = out.get(w2, 0) + c * c2
            if s:
                out[w2] = s
            else:
                out.pop(w2, None)
    m = n - b
    coef = Q(n + b)
    if m > 0:
        inner = _raise(m, rest)
    elif m == 0:
        lvl = sum(rest)
        inner = ((rest, _H + lvl),)
    else:
        inner = _lower(-m, rest)
    for w, c in inner:
        s = out.get(w, 0) + Poly.coerce(c) * coef
        if s:
            out[w] = s
        else:
            out.pop(w, None)
    if n == b:
        central = _C * Q(n ** 3 - n, 12)
        s = out.get(rest, 0) + central
        if s:
            out[rest] = s
        else:
            out.pop(rest, None)
    return tuple(out.items())


@lru_cache(maxsize=None)
def _omega_reduce(word: tuple):
    """Rewrite a word of lowering generators into 2-free canonical words.

    The level-2 relation replaces a trailing L_{-2} (acting directly on
    the highest weight) by (kappa/4) L_{-1}^2.  The deepest L_{-2} is
    commuted to the right end through raw sequences; brackets never create
    new parts equal to 2 (that would need [L_{-1}, L_{-1}] = 0), so the
    count of 2s strictly drops at every substitution and the rewriting
    terminates.
    """
    if 2 not in word:
        out = {}
        for wc, cc in _canonicalize(word):
            s = out.get(wc, 0) + cc
            if s:
                out[wc] = s
            else:
                out.pop(wc, None)
        return tuple((w, Poly.coerce(c)) for w, c in out.items())
    i = len(word) - 1 - word[::-1].index(2)
    pre, post = word[:i], word[i + 1:]
    if not post:
        items = [(pre + (1, 1), _KAPPA * Q(1, 4))]
    else:
        b, rest = post[0], post[1:]
        # L_{-2} L_{-b} = L_{-b} L_{-2} + (b - 2) L_{-(b+2)}
        items = [(pre + (b, 2) + rest, Q(1))]
        if b != 2:
            items.append((pre + (b + 2,) + rest, Q(b - 2)))
    out = {}
    for w, c in items:
        for w2, c2 in _omega_reduce(w):
            s = out.get(w2, 0) + Poly.coerce(c) * c2
            if s:
                out[w2] = s
            else:
                out.pop(w2, None)
    return tuple(out.items())


@lru_cache(maxsize=None)
def _canonicalize(word: tuple):
    """Normal order an arbitrary sequence of lowering generators."""
    if all(word[i] <= word[i + 1] for i in range(len(word) - 1)):
        return ((word, Q(1)),)
    state = {(): Q(1)}
    for g in reversed(word):
        nxt = {}
        for w, c in state.items():
            for w2, c2 in _lower(g, w):
                s = nxt.get(w2, 0) + c * c2
                if s:
                    nxt[w2] = s
                else:
                    nxt.pop(w2, None)
        state = nxt
    return tuple(state.items())


def partitions(n: int, max_part=None):
    """Canonical ascending words of total n."""
    if n == 0:
        yield ()
        return
    if max_part is None:
        max_part = n
    for first in range(min(n, max_part), 0, -1):
        for rest in partitions(n - first, first):
            yield tuple(sorted(rest + (first,)))


def _ascending_partitions(n):
    return sorted(set(partitions(n)))


# -- states ------------------------------------------------------------------


class VermaVector:
    """A vector in V(c,h) (or its level-2 quotient when quotient=True)."""

    __slots__ = ("params", "terms", "quotient")

    def __init__(self, params: VermaParams, terms=None, quotient=False):
        self.params = params
        self.quotient = quotient
        self.terms = {}
        for w, c in (terms or {}).items():
            if c:
                self.terms[tuple(w)] = c

    @staticmethod
    def highest_weight(params, quotient=False):
        return VermaVector(params, {(): Q(1)}, quotient=quotient)

    def is_zero(self):
        return not self.terms

    def level_components(self):
        out = {}
        for w, c in self.terms.items():
            out.setdefault(sum(w), {})[w] = c
        return out

    def coefficient(self, word):
        return self.terms.get(tuple(word), Q(0))

    def _post(self, raw):
        """Specialize parameters and apply the quotient rewriting."""
        terms = {}
        items = raw.items() if isinstance(raw, dict) else raw
        if self.quotient:
            expanded = {}
            for w, c in items:
                for w2, c2 in _omega_reduce(w):
                    s = expanded.get(w2, 0) + Poly.coerce(c) * c2
                    if s:
                        expanded[w2] = s
                    else:
                        expanded.pop(w2, None)
            items = expanded.items()
        for w, c in items:
            v = self.params.specialize(c)
            if v:
                terms[w] = v
        return VermaVector(self.params, terms, quotient=self.quotient)

    def act_generator(self, n: int) -> "VermaVector":
        out = {}
        for w, c in self.terms.items():
            if n < 0:
                contrib = _lower(-n, w)
            elif n == 0:
                contrib = ((w, _H + sum(w)),)
            else:
                contrib = _raise(n, w)
            for w2, c2 in contrib:
                s = out.get(w2, 0) + Poly.coerce(c2) * c
                if s:
                    out[w2] = s
                else:
                    out.pop(w2, None)
        return self._post(out)

    def act_word(self, word) -> "VermaVector":
        """Apply L_word with the rightmost generator acting first."""
        v = self
        for n in reversed(tuple(word)):
            v = v.act_generator(n)
        return v

    def act_element(self, element) -> "VermaVector":
        """Apply a normal-ordered AlgebraElement."""
        total = VermaVector(self.params, {}, quotient=self.quotient)
        for (neg, l0, pos), coef in element.terms.items():
            v = self
            for b in pos:  # ascending: L_{b1} acts first
                v = v.act_generator(b)
                if v.is_zero():
                    break
            if v.is_zero():
                continue
            if l0:
                terms = {}
                for w, c in v.terms.items():
                    hval = self.params.specialize(_H)
                    factor = (Poly.coerce(hval) + sum(w)) ** l0
                    terms[w] = c * factor
                v = VermaVector(self.params, terms, quotient=self.quotient)
            for a in reversed(neg):  # L_{-a_k} acts first
                v = v.act_generator(-a)
            cval = self.params.specialize(coef)
            if not cval:
                continue
            for w, c in v.terms.items():
                s = total.terms.get(w, 0) + c * cval
                if s:
                    total.terms[w] = s
                else:
                    total.terms.pop(w, None)
        return total

    def __add__(self, other):
        terms = dict(self.terms)
        for w, c in other.terms.items():
            s = terms.get(w, 0) + c
            if s:
                terms[w] = s
            else:
                terms.pop(w, None)
        return VermaVector(self.params, terms, quotient=self.quotient)

    def scale(self, value):
        return VermaVector(self.params,
                           {w: c * value for w, c in self.terms.items()},
                           quotient=self.quotient)

    def __repr__(self):
        if not self.terms:
            return "<VermaVector 0>"
        bits = []
        for w in sorted(self.terms, key=lambda w: (sum(w), w)):
            label = "*".join("L-%d" % a for a in w)
            label = (label + "*x") if label else "x"
            bits.append("(%s) %s" % (self.terms[w], label))
        return "<VermaVector %s>" % " + ".join(bits)


class DualVector:
    """An element of the little graded dual, over the dual PBW basis."""

    __slots__ = ("params", "terms")

    def __init__(self, params: VermaParams, terms=None):
        self.params = params
        self.terms = {tuple(w): c for w, c in (terms or {}).items() if c}

    @staticmethod
    def dual_basis_vector(params, word):
        return DualVector(params, {tuple(word): Q(1)})

    def level(self):
        return max((sum(w) for w in self.terms), default=0)

    def pair(self, v: VermaVector):
        total = 0
        for w, c in self.terms.items():
            cv = v.terms.get(w)
            if cv:
                total = c * cv + total
        return total if total else Q(0)

    def __repr__(self):
        return "<DualVector %s>" % (dict(self.terms),)


def act(x_or_element, v: VermaVector) -> VermaVector:
    """Apply a single generator index or an AlgebraElement to a state."""
    if isinstance(x_or_element, int):
        return v.act_generator(x_or_element)
    return v.act_element(x_or_element)


# -- forms and pairings ------------------------------------------------------------


def shapovalov(params: VermaParams, n: int):
    """Gram matrix of the level-n PBW basis under the contravariant form."""
    basis = _ascending_partitions(n)
    x = VermaVector.highest_weight(params)
    columns = [x.act_word([-a for a in w]) for w in basis]
    mat = []
    for wi in basis:
        row = []
        for vj in columns:
            v = vj
            for a in wi:  # transpose word: raise in word order
                v = v.act_generator(a)
            row.append(v.coefficient(()))
        mat.append(row)
    return basis, mat


def shapovalov_csv(params: VermaParams, n: int) -> str:
    basis, mat = shapovalov(params, n)
    buf = io.StringIO()
    buf.write("," + ",".join("L" + "*".join("-%d" % a for a in w) for w in basis) + "\n")
    for w, row in zip(basis, mat):
        label = "L" + "*".join("-%d" % a for a in w)
        buf.write(label + "," + ",".join(str(v) for v in row) + "\n")
    return buf.getvalue()


def det_rational(mat):
    """Exact determinant by fraction-free-ish Gaussian elimination."""
    n = len(mat)
    a = [list(map(Q, row)) for row in mat]
    det = Q(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            return Q(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = 1 / a[col][col]
        for r in range(col + 1, n):
            if a[r][col]:
                f = a[r][col] * inv
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det


def singular_vector_level2(params: VermaParams, kappa) -> VermaVector:
    """(-2 L_{-2} + (kappa/2) L_{-1}^2) applied to the highest weight."""
    kappa = Q(kappa)
    return VermaVector(params, {(2,): Q(-2), (1, 1): kappa / 2})


def level2_singular_check(kappa):
    """Check L_1 and L_2 annihilate the level-2 singular vector.

    Returns (passed, witness) where the witness holds both images.
    """
    params = VermaParams(kappa=kappa)
    s = singular_vector_level2(params, kappa)
    r1 = s.act_generator(1)
    r2 = s.act_generator(2)
    return (r1.is_zero() and r2.is_zero(), {"L1": r1, "L2": r2})


def matrix_element(y: DualVector, x_op, x: VermaVector):
    """<y, X x> for a normal-ordered algebra element X."""
    from .deform import DeformationOperator  # local import to avoid a cycle
    if isinstance(x_op, DeformationOperator):
        x_op = x_op.element_with_dilation()
    needed = y.level()
    if x_op.hi is not None and x_op.hi < needed and x_op.lossy:
        raise LossyTruncationError(
            "operator truncated below the requested level %d" % needed)
    return y.pair(x.act_element(x_op))


def vacuum_expectation(xplus, xminus, c=None):
    """<Omega| X+ X- |Omega> with the vacuum killed by every L_n, n >= 0,
    and the bra killed by the lowering side; returns a polynomial in c
    (or its value when c is given)."""
    depth = xminus.max_neg_depth()
    if xplus.hi is not None and xplus.hi < depth:
        raise LossyTruncationError("raising side truncated below depth %d" % depth)
    height = max((sum(k[2]) for k in xplus.terms), default=0)
    if xminus.lo is not None and xminus.lo > -height:
        raise LossyTruncationError("lowering side truncated above height %d" % height)
    params = VermaParams(c=c, h=Q(0))
    omega = VermaVector.highest_weight(params)
    v = omega.act_element(xminus)
    w = v.act_element(xplus)
    return w.coefficient(())
