"""Sparse multivariate polynomials over the rationals.

Coefficients throughout the algebraic layer are either plain Fractions or
Poly values; both support +, -, * against each other, so the series and
algebra code can stay agnostic about which one it is handling.

A monomial is stored as a tuple of (name, exponent) pairs sorted by name,
with all exponents > 0; the empty tuple is the constant monomial.  Variable
names are plain strings ("c", "h", "kappa", "xi", "eps", "f1", "f-2", ...).
"""

from __future__ import annotations

from fractions import Fraction

Q = Fraction

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _mono_mul(m1, m2):
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for name, e in m2:
        d[name] = d.get(name, 0) + e
    return tuple(sorted(d.items()))


class Poly:
    """A sparse polynomial with Fraction coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        # terms must already be canonical (no zero values)
        self.terms = terms if terms is not None else {}

    # -- constructors ----------------------------------------------------

    @staticmethod
    def const(value) -> "Poly":
        value = Fraction(value)
        return Poly({(): value} if value else {})

    @staticmethod
    def var(name, power=1) -> "Poly":
        if power == 0:
            return Poly.const(1)
        return Poly({((name, power),): _ONE})

    @staticmethod
    def coerce(value) -> "Poly":
        if isinstance(value, Poly):
            return value
        return Poly.const(value)

    # -- predicates / accessors ------------------------------------------

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self):
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get((), _ZERO)

    def as_fraction(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("polynomial is not constant: %s" % self)
        return self.constant_term()

    def variables(self):
        names = set()
        for mono in self.terms:
            for name, _ in mono:
                names.add(name)
        return names

    def coefficient(self, mono) -> Fraction:
        """Coefficient of an explicit monomial (tuple of (name, exp) pairs)."""
        return self.terms.get(tuple(sorted(mono)), _ZERO)

    def degree(self, name) -> int:
        deg = 0
        for mono in self.terms:
            for n, e in mono:
                if n == name and e > deg:
                    deg = e
        return deg

    def weighted_degree(self, weight) -> int:
        """Max over monomials of sum(weight(name) * exp)."""
        best = 0
        for mono in self.terms:
            w = sum(weight(name) * e for name, e in mono)
            if w > best:
                best = w
        return best

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        other = Poly.coerce(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        terms = dict(self.terms)
        for mono, c in other.terms.items():
            s = terms.get(mono, _ZERO) + c
            if s:
                terms[mono] = s
            else:
                terms.pop(mono, None)
        return Poly(terms)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-Poly.coerce(other))

    def __rsub__(self, other):
        return Poly.coerce(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, Poly):
            other = Fraction(other)
            if not other:
                return Poly({})
            if other == 1:
                return self
            return Poly({m: c * other for m, c in self.terms.items()})
        if not self.terms or not other.terms:
            return Poly({})
        terms = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                s = terms.get(m, _ZERO) + c1 * c2
                if s:
                    terms[m] = s
                else:
                    terms.pop(m, None)
        return Poly(terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Poly):
            other = other.as_fraction()
        inv = 1 / Fraction(other)
        return Poly({m: c * inv for m, c in self.terms.items()})

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers")
        out = Poly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.terms == other.terms
        try:
            other = Fraction(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.is_constant() and self.constant_term() == other

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # -- calculus / substitution ------------------------------------------

    def diff(self, name) -> "Poly":
        terms = {}
        for mono, c in self.terms.items():
            d = dict(mono)
            e = d.get(name)
            if not e:
                continue
            if e == 1:
                del d[name]
            else:
                d[name] = e - 1
            m = tuple(sorted(d.items()))
            s = terms.get(m, _ZERO) + c * e
            if s:
                terms[m] = s
            else:
                terms.pop(m, None)
        return Poly(terms)

    def subs(self, assignment) -> "Poly":
        """Substitute some variables; values may be Fractions or Polys."""
        out = Poly({})
        for mono, c in self.terms.items():
            factor = Poly.const(c)
            for name, e in mono:
                if name in assignment:
                    factor = factor * Poly.coerce(assignment[name]) ** e
                else:
                    factor = factor * Poly.var(name, e)
            out = out + factor
        return out

    def eval_float(self, assignment) -> float:
        total = 0.0
        for mono, c in self.terms.items():
            v = float(c)
            for name, e in mono:
                v *= float(assignment[name]) ** e
            total += v
        return total

    def truncate_weighted(self, weight, cap) -> "Poly":
        """Drop monomials whose weighted degree exceeds cap."""
        terms = {m: c for m, c in self.terms.items()
                 if sum(weight(name) * e for name, e in m) <= cap}
        return Poly(terms)

    # -- rendering ---------------------------------------------------------

    def __repr__(self):
        return "Poly(%s)" % self

    def __str__(self):
        if not self.terms:
            return "0"
        bits = []
        for mono, c in sorted(self.terms.items()):
            factors = []
            for name, e in mono:
                factors.append(name if e == 1 else "%s^%d" % (name, e))
            if not factors:
                bits.append(str(c))
            elif c == 1:
                bits.append("*".join(factors))
            elif c == -1:
                bits.append("-" + "*".join(factors))
            else:
                bits.append("%s*%s" % (c, "*".join(factors)))
        out = bits[0]
        for b in bits[1:]:
            out += ("%s" if b.startswith("-") else "+%s") % b
        return out


def coef_is_zero(c) -> bool:
    return not c


def coef_str(c) -> str:
    if isinstance(c, Poly):
        return str(c)
    return str(c)


def solve_linear_system(rows, rhs):
    """Solve A x = b exactly over the rationals (A square, full rank).

    rows is a list of lists of Fractions, rhs a list of Fractions.
    Raises ValueError on a singular matrix.
    """
    n = len(rows)
    a = [list(map(Fraction, row)) + [Fraction(v)] for row, v in zip(rows, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            raise ValueError("singular linear system")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


def rref(rows):
    """Reduced row echelon form over the rationals; returns (rows, pivots).

    Row vectors are lists of Fractions; zero rows are dropped.
    """
    mat = [list(map(Fraction, row)) for row in rows]
    pivots = []
    r = 0
    ncols = len(mat[0]) if mat else 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(mat)) if mat[i][col]), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = 1 / mat[r][col]
        mat[r] = [x * inv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][col]:
                f = mat[i][col]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        pivots.append(col)
        r += 1
        if r == len(mat):
            break
    return mat[:r], pivots
