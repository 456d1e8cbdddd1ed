"""Sparse exact polynomials over Q in named variables.

Monomials are exponent tuples, coefficients are `Fraction` and never zero in
a stored term.  Every polynomial carries its ring so cross-ring arithmetic
fails fast.  Also provides the two monomial orders used everywhere
(degrevlex, lex) and small helpers for matrices of polynomials.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from .errors import RingMismatch


def degrevlex_key(exps):
    return (sum(exps), tuple(-e for e in reversed(exps)))


def lex_key(exps):
    return tuple(exps)


ORDER_KEYS = {"degrevlex": degrevlex_key, "lex": lex_key}


class BaseRing:
    """The polynomial ring Q[x1..xn], identified by its ordered variable names."""

    __slots__ = ("variables", "_index")

    def __init__(self, variables):
        names = tuple(str(v) for v in variables)
        if not names:
            raise ValueError("a base ring needs at least one variable")
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names")
        self.variables = names
        self._index = {v: i for i, v in enumerate(names)}

    @property
    def nvars(self):
        return len(self.variables)

    def var_index(self, name):
        return self._index[name]

    def zero(self):
        return Poly(self, {})

    def one(self):
        return self.const(1)

    def const(self, c):
        c = Fraction(c)
        if c == 0:
            return Poly(self, {})
        return Poly(self, {(0,) * self.nvars: c})

    def var(self, i):
        return self.monomial({i: 1})

    def monomial(self, powers, coeff=1):
        """Monomial from a {var_index: exponent} mapping."""
        coeff = Fraction(coeff)
        if coeff == 0:
            return Poly(self, {})
        e = [0] * self.nvars
        for i, k in powers.items():
            e[i] = k
        return Poly(self, {tuple(e): coeff})

    def __eq__(self, other):
        return isinstance(other, BaseRing) and self.variables == other.variables

    def __hash__(self):
        return hash(self.variables)

    def __repr__(self):
        return f"BaseRing({', '.join(self.variables)})"


class Poly:
    __slots__ = ("ring", "terms")

    def __init__(self, ring, terms):
        self.ring = ring
        self.terms = terms  # dict exps -> Fraction, no zeros

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def _cleaned(ring, terms):
        return Poly(ring, {e: c for e, c in terms.items() if c != 0})

    def _check(self, other):
        if self.ring != other.ring:
            raise RingMismatch(f"{self.ring} vs {other.ring}")

    # -- predicates ------------------------------------------------------------

    def is_zero(self):
        return not self.terms

    def is_constant(self):
        return all(sum(e) == 0 for e in self.terms)

    def constant_value(self):
        return self.terms.get((0,) * self.ring.nvars, Fraction(0))

    def total_degree(self):
        """Max total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    # -- arithmetic ------------------------------------------------------------

    def __add__(self, other):
        self._check(other)
        res = dict(self.terms)
        for e, c in other.terms.items():
            s = res.get(e, Fraction(0)) + c
            if s == 0:
                res.pop(e, None)
            else:
                res[e] = s
        return Poly(self.ring, res)

    def __sub__(self, other):
        self._check(other)
        res = dict(self.terms)
        for e, c in other.terms.items():
            s = res.get(e, Fraction(0)) - c
            if s == 0:
                res.pop(e, None)
            else:
                res[e] = s
        return Poly(self.ring, res)

    def __neg__(self):
        return Poly(self.ring, {e: -c for e, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        self._check(other)
        if not self.terms or not other.terms:
            return Poly(self.ring, {})
        res = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = res.get(e, Fraction(0)) + c1 * c2
                if s == 0:
                    res.pop(e, None)
                else:
                    res[e] = s
        return Poly(self.ring, res)

    __rmul__ = __mul__

    def scale(self, c):
        c = Fraction(c)
        if c == 0:
            return Poly(self.ring, {})
        return Poly(self.ring, {e: c * k for e, k in self.terms.items()})

    def mul_term(self, exps, coeff):
        coeff = Fraction(coeff)
        if coeff == 0:
            return Poly(self.ring, {})
        return Poly(
            self.ring,
            {tuple(a + b for a, b in zip(e, exps)): c * coeff for e, c in self.terms.items()},
        )

    def __pow__(self, k):
        out = self.ring.one()
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, Poly) and self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        return hash((self.ring, tuple(sorted(self.terms.items()))))

    # -- calculus / evaluation ---------------------------------------------------

    def diff(self, i):
        res = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                res[tuple(e2)] = c * e[i]
        return Poly(self.ring, res)

    def eval(self, point):
        """Exact value at a tuple of Fractions."""
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c
            for x, k in zip(point, e):
                if k:
                    v *= Fraction(x) ** k
            total += v
        return total

    # -- leading data -------------------------------------------------------------

    def lead(self, key=degrevlex_key):
        """(exps, coeff) of the leading term; None for zero."""
        if not self.terms:
            return None
        e = max(self.terms, key=key)
        return e, self.terms[e]

    # -- printing ----------------------------------------------------------------

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: degrevlex_key(t[0]), reverse=True)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            factors = []
            for name, k in zip(self.ring.variables, e):
                if k == 1:
                    factors.append(name)
                elif k > 1:
                    factors.append(f"{name}^{k}")
            mag = abs(c)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(mag)] + factors)
            parts.append(("- " if c < 0 else "+ ") + body)
        out = " ".join(parts)
        return out[2:] if out.startswith("+ ") else ("-" + out[2:])

    def __repr__(self):
        return f"Poly({self})"


# -- integer normalization -----------------------------------------------------


def content_normalize(p):
    """Scale to integer coefficients with overall content 1 and positive
    degrevlex-leading coefficient.  Zero stays zero."""
    if p.is_zero():
        return p
    num = 0
    den = 1
    for c in p.terms.values():
        num = gcd(num, abs(c.numerator))
        den = den * c.denominator // gcd(den, c.denominator)
    factor = Fraction(den, num)
    q = p.scale(factor)
    _, lc = q.lead()
    return q.scale(-1) if lc < 0 else q


# -- small matrix helpers (lists of lists of Poly) -------------------------------


def mat_zero(ring, rows, cols):
    return [[ring.zero() for _ in range(cols)] for _ in range(rows)]


def mat_mul(A, B):
    if not A or not B:
        return []
    rows, inner, cols = len(A), len(B), len(B[0])
    ring = A[0][0].ring
    out = mat_zero(ring, rows, cols)
    for i in range(rows):
        for k in range(inner):
            a = A[i][k]
            if a.is_zero():
                continue
            for j in range(cols):
                if not B[k][j].is_zero():
                    out[i][j] = out[i][j] + a * B[k][j]
    return out


def mat_vec(A, v):
    out = []
    for row in A:
        acc = row[0].ring.zero() if row else None
        for a, x in zip(row, v):
            if not a.is_zero() and not x.is_zero():
                acc = acc + a * x
        out.append(acc)
    return out


def mat_col(A, j):
    return [row[j] for row in A]


def mat_is_zero(A):
    return all(p.is_zero() for row in A for p in row)


def mat_eval(A, point):
    return [[p.eval(point) for p in row] for row in A]


def mat_str(A):
    return "[" + "; ".join(", ".join(str(p) for p in row) for row in A) + "]"
