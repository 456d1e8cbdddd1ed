"""Graded-commutative polynomial algebra and its graded derivations.

The algebra is generated over a BaseRing (degree-0 variables) by fiber
generators of positive degree.  A term is a base-ring polynomial times a
canonically sorted fiber monomial; products absorb the Koszul sign of the
sort into the coefficient.  Odd generators square to zero.

Derivations are stored by their values on base variables and fiber
generators and extended by the graded Leibniz rule on demand.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import RingMismatch
from .poly import BaseRing, Poly


class FiberGenerator:
    """A positive-degree generator, dual to a basis section at (level, index)."""

    __slots__ = ("name", "degree", "level", "index")

    def __init__(self, name, degree, level, index):
        if degree < 1:
            raise ValueError("fiber generators have positive degree")
        self.name = str(name)
        self.degree = degree
        self.level = level
        self.index = index

    def __repr__(self):
        return f"FiberGenerator({self.name}, deg={self.degree})"


class GradedRing:
    """Base ring plus fiber generators, sorted canonically by (degree, name)."""

    __slots__ = ("base", "gens", "degrees", "_by_source", "_partials")

    def __init__(self, base: BaseRing, generators):
        gens = sorted(generators, key=lambda g: (g.degree, g.name))
        names = [g.name for g in gens]
        if len(set(names)) != len(names):
            raise ValueError("duplicate fiber generator names")
        if set(names) & set(base.variables):
            raise ValueError("fiber generator name collides with a base variable")
        src = [(g.level, g.index) for g in gens]
        if len(set(src)) != len(src):
            raise ValueError("duplicate (level, index) source")
        self.base = base
        self.gens = tuple(gens)
        self.degrees = tuple(g.degree for g in gens)
        self._by_source = {s: i for i, s in enumerate(src)}
        self._partials = {}

    @property
    def ngens(self):
        return len(self.gens)

    def gen_index(self, level, index):
        return self._by_source[(level, index)]

    def source_of(self, gi):
        g = self.gens[gi]
        return (g.level, g.index)

    def zero(self):
        return GPoly(self, {})

    def one(self):
        return self.from_poly(self.base.one())

    def from_poly(self, p):
        if p.is_zero():
            return GPoly(self, {})
        return GPoly(self, {(): p})

    def gen(self, gi, coeff=None):
        c = self.base.one() if coeff is None else coeff
        if c.is_zero():
            return GPoly(self, {})
        return GPoly(self, {(gi,): c})

    def monomial(self, fibmon, coeff):
        if coeff.is_zero():
            return GPoly(self, {})
        return GPoly(self, {tuple(fibmon): coeff})

    def fib_degree(self, fm):
        return sum(self.degrees[g] for g in fm)

    def partial(self, gi):
        """d/d(generator gi), a derivation of degree -deg(gi)."""
        if gi not in self._partials:
            self._partials[gi] = GDerivation(
                self, -self.degrees[gi], gvals={gi: self.gen(gi).ring.one()}
            )
        return self._partials[gi]

    def __eq__(self, other):
        return (
            isinstance(other, GradedRing)
            and self.base == other.base
            and tuple((g.name, g.degree, g.level, g.index) for g in self.gens)
            == tuple((g.name, g.degree, g.level, g.index) for g in other.gens)
        )

    def __hash__(self):
        return hash((self.base, tuple(g.name for g in self.gens)))

    def __repr__(self):
        return f"GradedRing({self.base!r}; {', '.join(g.name for g in self.gens)})"


def merge_fibmon(ring, fm1, fm2):
    """Merge two canonical fiber monomials.  Returns (sign, merged) with
    sign in {1, -1}, or (0, None) when an odd generator repeats."""
    degs = ring.degrees
    out = []
    sign = 1
    # parity of the number of odd-degree generators in a suffix of fm1
    odd_suffix = [0] * (len(fm1) + 1)
    for i in range(len(fm1) - 1, -1, -1):
        odd_suffix[i] = odd_suffix[i + 1] + (degs[fm1[i]] % 2)
    i = j = 0
    while i < len(fm1) and j < len(fm2):
        if fm1[i] <= fm2[j]:
            out.append(fm1[i])
            i += 1
        else:
            g = fm2[j]
            if degs[g] % 2 and odd_suffix[i] % 2:
                sign = -sign
            out.append(g)
            j += 1
    out.extend(fm1[i:])
    out.extend(fm2[j:])
    for a, b in zip(out, out[1:]):
        if a == b and degs[a] % 2:
            return 0, None
    return sign, tuple(out)


def sort_with_sign(degrees_of_items, order_keys):
    """Stable-sort positions by order_keys; return (koszul_sign, permutation)
    where permutation lists original positions in sorted order."""
    idx = sorted(range(len(order_keys)), key=lambda i: (order_keys[i], i))
    sign = 1
    # count odd-odd inversions of the permutation
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            if idx[a] > idx[b]:
                if degrees_of_items[idx[a]] % 2 and degrees_of_items[idx[b]] % 2:
                    sign = -sign
    return sign, idx


def koszul_sign_of_selection(degrees, picked):
    """Koszul sign of moving the `picked` positions (ascending) of a graded
    tuple to the front, keeping relative orders of both groups."""
    sign = 1
    picked_set = set(picked)
    for p in picked:
        for q in range(p):
            if q not in picked_set:
                if degrees[p] % 2 and degrees[q] % 2:
                    sign = -sign
    return sign


class GPoly:
    """Element of the graded algebra: {fiber monomial: base Poly}."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring, terms):
        self.ring = ring
        self.terms = terms

    def _check(self, other):
        if self.ring != other.ring:
            raise RingMismatch("graded operands from different rings")

    def is_zero(self):
        return not self.terms

    def coeff(self, fm):
        return self.terms.get(tuple(fm), self.ring.base.zero())

    def items_sorted(self):
        return sorted(self.terms.items(), key=lambda t: (len(t[0]), t[0]))

    # -- arithmetic ------------------------------------------------------------

    def __add__(self, other):
        self._check(other)
        res = dict(self.terms)
        for fm, p in other.terms.items():
            s = res.get(fm)
            s = p if s is None else s + p
            if s.is_zero():
                res.pop(fm, None)
            else:
                res[fm] = s
        return GPoly(self.ring, res)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return GPoly(self.ring, {fm: -p for fm, p in self.terms.items()})

    def scale(self, c):
        """Multiply by a base Poly or a rational scalar (degree 0, no signs)."""
        if isinstance(c, (int, Fraction)):
            c = self.ring.base.const(c)
        res = {}
        for fm, p in self.terms.items():
            q = p * c
            if not q.is_zero():
                res[fm] = q
        return GPoly(self.ring, res)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Poly)):
            return self.scale(other)
        self._check(other)
        res = {}
        for fm1, p1 in self.terms.items():
            for fm2, p2 in other.terms.items():
                sign, fm = merge_fibmon(self.ring, fm1, fm2)
                if sign == 0:
                    continue
                q = p1 * p2
                if sign < 0:
                    q = -q
                s = res.get(fm)
                s = q if s is None else s + q
                if s.is_zero():
                    res.pop(fm, None)
                else:
                    res[fm] = s
        return GPoly(self.ring, res)

    def __eq__(self, other):
        return (
            isinstance(other, GPoly) and self.ring == other.ring and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.ring, tuple(sorted(self.terms.items(), key=lambda t: t[0]))))

    # -- grading ---------------------------------------------------------------

    def degree(self):
        """Common degree of all terms, or None if inhomogeneous / zero."""
        degs = {self.ring.fib_degree(fm) for fm in self.terms}
        if len(degs) == 1:
            return degs.pop()
        return None

    def is_homogeneous(self, d=None):
        if self.is_zero():
            return True
        deg = self.degree()
        return deg is not None and (d is None or deg == d)

    def arity_parts(self):
        """Split by fiber-monomial length: {arity: GPoly}."""
        out = {}
        for fm, p in self.terms.items():
            out.setdefault(len(fm), {})[fm] = p
        return {k: GPoly(self.ring, v) for k, v in sorted(out.items())}

    def __str__(self):
        if self.is_zero():
            return "0"
        parts = []
        for fm, p in self.items_sorted():
            names = "*".join(self.ring.gens[g].name for g in fm)
            if not fm:
                parts.append(f"({p})")
            elif p.is_constant() and p.constant_value() == 1:
                parts.append(names)
            else:
                parts.append(f"({p})*{names}")
        return " + ".join(parts)

    def __repr__(self):
        return f"GPoly({self})"


class GDerivation:
    """Graded derivation, stored by values on base variables and generators."""

    __slots__ = ("ring", "degree", "xvals", "gvals")

    def __init__(self, ring, degree, xvals=None, gvals=None):
        self.ring = ring
        self.degree = degree
        self.xvals = dict(xvals or {})  # var index -> GPoly
        self.gvals = dict(gvals or {})  # gen index -> GPoly
        for d in (self.xvals, self.gvals):
            for k in [k for k, v in d.items() if v.is_zero()]:
                del d[k]

    def value_on_var(self, i):
        return self.xvals.get(i, self.ring.zero())

    def value_on_gen(self, gi):
        return self.gvals.get(gi, self.ring.zero())

    def is_zero(self):
        return not self.xvals and not self.gvals

    def __eq__(self, other):
        return (
            isinstance(other, GDerivation)
            and self.ring == other.ring
            and self.degree == other.degree
            and self.xvals == other.xvals
            and self.gvals == other.gvals
        )

    def __add__(self, other):
        if self.ring != other.ring or self.degree != other.degree:
            raise RingMismatch("cannot add derivations of different rings/degrees")
        xv = dict(self.xvals)
        for i, v in other.xvals.items():
            xv[i] = xv.get(i, self.ring.zero()) + v
        gv = dict(self.gvals)
        for g, v in other.gvals.items():
            gv[g] = gv.get(g, self.ring.zero()) + v
        return GDerivation(self.ring, self.degree, xv, gv)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        return GDerivation(
            self.ring,
            self.degree,
            {i: v.scale(c) for i, v in self.xvals.items()},
            {g: v.scale(c) for g, v in self.gvals.items()},
        )

    def apply(self, f: GPoly) -> GPoly:
        """Extend to all of the algebra by the graded Leibniz rule."""
        if self.ring != f.ring:
            raise RingMismatch("derivation and argument from different rings")
        ring = self.ring
        out = ring.zero()
        w_odd = self.degree % 2
        for fm, p in f.terms.items():
            for i, wxi in self.xvals.items():
                dp = p.diff(i)
                if not dp.is_zero():
                    out = out + wxi.scale(dp) * ring.monomial(fm, ring.base.one())
            pref_deg = 0
            for j, g in enumerate(fm):
                wg = self.gvals.get(g)
                if wg is not None:
                    prefix = ring.monomial(fm[:j], p)
                    suffix = ring.monomial(fm[j + 1 :], ring.base.one())
                    term = prefix * wg * suffix
                    if w_odd and pref_deg % 2:
                        term = -term
                    out = out + term
                pref_deg += ring.degrees[g]
        return out

    def __str__(self):
        bits = []
        for i in sorted(self.xvals):
            bits.append(f"{self.ring.base.variables[i]} -> {self.xvals[i]}")
        for g in sorted(self.gvals):
            bits.append(f"{self.ring.gens[g].name} -> {self.gvals[g]}")
        return "; ".join(bits) if bits else "0"

    def __repr__(self):
        return f"GDerivation(deg={self.degree}; {self})"


# -- the four spec operations ----------------------------------------------------


def gp_mul(a: GPoly, b: GPoly) -> GPoly:
    return a * b


def gd_apply(w: GDerivation, f: GPoly) -> GPoly:
    return w.apply(f)


def gd_commutator(w1: GDerivation, w2: GDerivation) -> GDerivation:
    """[w1, w2] = w1 w2 - (-1)^{|w1||w2|} w2 w1, by values on generators."""
    if w1.ring != w2.ring:
        raise RingMismatch("derivations from different rings")
    ring = w1.ring
    sgn = -1 if (w1.degree % 2 and w2.degree % 2) else 1
    xv = {}
    for i in set(w1.xvals) | set(w2.xvals):
        v = w1.apply(w2.value_on_var(i)) - w2.apply(w1.value_on_var(i)).scale(sgn)
        if not v.is_zero():
            xv[i] = v
    gv = {}
    for g in range(ring.ngens):
        v = w1.apply(w2.value_on_gen(g)) - w2.apply(w1.value_on_gen(g)).scale(sgn)
        if not v.is_zero():
            gv[g] = v
    return GDerivation(ring, w1.degree + w2.degree, xv, gv)


def gd_arity_split(w: GDerivation):
    """Decompose into arity-homogeneous pieces; returns [(arity, piece), ...].

    A piece of arity k sends a base variable into fiber length k and a
    generator into fiber length k+1."""
    buckets = {}
    for i, v in w.xvals.items():
        for ln, part in v.arity_parts().items():
            b = buckets.setdefault(ln, ({}, {}))
            b[0][i] = part
    for g, v in w.gvals.items():
        for ln, part in v.arity_parts().items():
            b = buckets.setdefault(ln - 1, ({}, {}))
            b[1][g] = part
    return [
        (k, GDerivation(w.ring, w.degree, xv, gv)) for k, (xv, gv) in sorted(buckets.items())
    ]


def pair_sections(f: GPoly, gen_indices) -> Poly:
    """Evaluate an arity-n function on n sections (given as generator indices
    of their dual coordinates) by iterated contraction; first index acts
    first.  Returns the base-ring coefficient."""
    cur = f
    for gi in gen_indices:
        cur = cur.ring.partial(gi).apply(cur)
    return cur.coeff(())
