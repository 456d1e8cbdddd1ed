"""Groebner bases for submodules of free modules over Q[x1..xn].

Module elements are tuples of Poly of a fixed ambient rank.  Terms are
ordered position-over-term: earlier coordinates dominate, ties broken by the
chosen monomial order.  Provides normal forms, membership lifts with exact
reconstruction, and syzygy modules via Schreyer's construction.

Buchberger runs with the chain criterion and (for elements concentrated in
a single coordinate) the coprime criterion; the syzygy pass reduces every
same-position S-pair of the final basis so the recorded relations generate.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from .errors import NotInModule
from .poly import ORDER_KEYS


class MonomialOrder:
    """Total order on module terms: position-over-term over degrevlex or lex."""

    __slots__ = ("kind", "_key")

    def __init__(self, kind="degrevlex"):
        if kind not in ORDER_KEYS:
            raise ValueError(f"unknown order {kind!r}")
        self.kind = kind
        self._key = ORDER_KEYS[kind]

    def term_key(self, pos, exps):
        return (-pos, self._key(exps))

    def mono_key(self, exps):
        return self._key(exps)

    def __repr__(self):
        return f"MonomialOrder({self.kind})"


DEFAULT_ORDER = MonomialOrder("degrevlex")


# -- module element helpers ------------------------------------------------------


def me_zero(ring, rank):
    return tuple(ring.zero() for _ in range(rank))


def me_is_zero(v):
    return all(p.is_zero() for p in v)


def me_add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def me_sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def me_scale(v, p):
    return tuple(a * p for a in v)


def me_mul_term(v, exps, coeff):
    return tuple(a.mul_term(exps, coeff) for a in v)


def me_eq(u, v):
    return all(a == b for a, b in zip(u, v))


def me_normalize(v):
    """Clear denominators and content, fix the sign of the leading coefficient."""
    if me_is_zero(v):
        return v
    num, den = 0, 1
    for p in v:
        for c in p.terms.values():
            num = gcd(num, abs(c.numerator))
            den = den * c.denominator // gcd(den, c.denominator)
    factor = Fraction(den, num)
    w = tuple(p.scale(factor) for p in v)
    _, _, lc = _lead_term(w, DEFAULT_ORDER)
    return tuple(p.scale(-1) for p in w) if lc < 0 else w


def me_str(v):
    return "(" + ", ".join(str(p) for p in v) + ")"


def _lead_term(v, order):
    """(pos, exps, coeff) of the leading term of a nonzero element."""
    best = None
    for pos, p in enumerate(v):
        for e, c in p.terms.items():
            k = order.term_key(pos, e)
            if best is None or k > best[0]:
                best = (k, pos, e, c)
    if best is None:
        return None
    return best[1], best[2], best[3]


def _divides(e1, e2):
    return all(a <= b for a, b in zip(e1, e2))


def _div_exps(e2, e1):
    return tuple(b - a for a, b in zip(e1, e2))


def _lcm_exps(e1, e2):
    return tuple(max(a, b) for a, b in zip(e1, e2))


def _divide(v, basis, leads, order):
    """Full division of v by the listed elements.

    Returns (quotients, remainder): v = sum q_i basis_i + r and no term of r
    is divisible by any leading term of the basis."""
    rank = len(v)
    ring = v[0].ring
    quots = [ring.zero() for _ in basis]
    rem = [ring.zero() for _ in range(rank)]
    work = [dict(p.terms) for p in v]

    def work_lead():
        best = None
        for pos in range(rank):
            for e, c in work[pos].items():
                k = order.term_key(pos, e)
                if best is None or k > best[0]:
                    best = (k, pos, e, c)
        return best

    while True:
        t = work_lead()
        if t is None:
            break
        _, pos, e, c = t
        for k, (bp, be, bc) in enumerate(leads):
            if bp == pos and _divides(be, e):
                m = _div_exps(e, be)
                coef = c / bc
                quots[k] = quots[k] + ring.monomial(dict(enumerate(m)), coef)
                for bpos, bpoly in enumerate(basis[k]):
                    if bpoly.is_zero():
                        continue
                    wd = work[bpos]
                    for ee, cc in bpoly.terms.items():
                        key = tuple(a + b for a, b in zip(ee, m))
                        s = wd.get(key, Fraction(0)) - coef * cc
                        if s == 0:
                            wd.pop(key, None)
                        else:
                            wd[key] = s
                break
        else:
            rem[pos] = rem[pos] + ring.monomial(dict(enumerate(e)), c)
            del work[pos][e]
    return quots, tuple(rem)


class GroebnerBasis:
    """Auto-reduced monic Groebner basis; optionally tracks how each element
    is written in the input generators."""

    __slots__ = ("elements", "order", "leads", "transformation", "inputs", "rank")

    def __init__(self, elements, order, leads, transformation, inputs, rank):
        self.elements = elements
        self.order = order
        self.leads = leads
        self.transformation = transformation  # rows: gb element over inputs
        self.inputs = inputs
        self.rank = rank

    def __len__(self):
        return len(self.elements)

    def normal_form(self, v):
        _, r = _divide(v, self.elements, self.leads, self.order)
        return r

    def divide(self, v):
        return _divide(v, self.elements, self.leads, self.order)

    def contains(self, v):
        return me_is_zero(self.normal_form(v))


def _single_position(v):
    pos = None
    for i, p in enumerate(v):
        if not p.is_zero():
            if pos is not None:
                return None
            pos = i
    return pos


def gb_compute(gens, order=DEFAULT_ORDER, track=False):
    """Buchberger with the chain and (restricted) coprime criteria."""
    gens = [tuple(g) for g in gens]
    rank = len(gens[0]) if gens else 0
    for g in gens:
        if len(g) != rank:
            raise ValueError("inconsistent ambient rank")
    ring = gens[0][0].ring if gens else None

    basis = []
    reps = []
    for k, g in enumerate(gens):
        if me_is_zero(g):
            continue
        _, _, lc = _lead_term(g, order)
        basis.append(me_scale(g, ring.const(1 / lc)))
        rep = [ring.zero()] * len(gens)
        rep[k] = ring.const(1 / lc)
        reps.append(rep)
    leads = [_lead_term(b, order) for b in basis]

    pairs = set()
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            if leads[i][0] == leads[j][0]:
                pairs.add((i, j))
    done = set()

    def pair_key(ij):
        i, j = ij
        lcm = _lcm_exps(leads[i][1], leads[j][1])
        return (order.mono_key(lcm), i, j)

    while pairs:
        i, j = min(pairs, key=pair_key)
        pairs.discard((i, j))
        done.add((i, j))
        pi, ei, _ = leads[i]
        pj, ej, _ = leads[j]
        # coprime criterion, only valid when both live in one coordinate
        if (
            _single_position(basis[i]) is not None
            and _single_position(basis[j]) is not None
            and all(min(a, b) == 0 for a, b in zip(ei, ej))
        ):
            continue
        # chain criterion
        lcm = _lcm_exps(ei, ej)
        skip = False
        for k in range(len(basis)):
            if k in (i, j) or leads[k][0] != pi:
                continue
            if _divides(leads[k][1], lcm):
                a, b = min(i, k), max(i, k)
                c, d = min(j, k), max(j, k)
                if (a, b) in done and (c, d) in done:
                    skip = True
                    break
        if skip:
            continue
        s, srep = _spoly(basis, reps, leads, i, j, ring, track=True)
        quots, r = _divide(s, basis, leads, order)
        if me_is_zero(r):
            continue
        rep = list(srep)
        for k, q in enumerate(quots):
            if not q.is_zero():
                rep = [a - q * b for a, b in zip(rep, reps[k])]
        _, _, lc = _lead_term(r, order)
        inv = ring.const(1 / lc)
        basis.append(me_scale(r, inv))
        reps.append([p * inv for p in rep])
        leads.append(_lead_term(basis[-1], order))
        new = len(basis) - 1
        for k in range(new):
            if leads[k][0] == leads[new][0]:
                pairs.add((k, new))

    basis, reps, leads = _autoreduce(basis, reps, order, ring)
    return GroebnerBasis(
        basis, order, leads, reps if track else None, gens, rank
    )


def _spoly(basis, reps, leads, i, j, ring, track):
    pi, ei, ci = leads[i]
    pj, ej, cj = leads[j]
    lcm = _lcm_exps(ei, ej)
    mi, mj = _div_exps(lcm, ei), _div_exps(lcm, ej)
    s = me_sub(me_mul_term(basis[i], mi, 1 / ci), me_mul_term(basis[j], mj, 1 / cj))
    if not track:
        return s, None
    srep = [
        a.mul_term(mi, 1 / ci) - b.mul_term(mj, 1 / cj)
        for a, b in zip(reps[i], reps[j])
    ]
    return s, srep


def _autoreduce(basis, reps, order, ring):
    changed = True
    while changed:
        changed = False
        idx = sorted(range(len(basis)), key=lambda k: order.term_key(*_lead_term(basis[k], order)[:2]))
        basis = [basis[k] for k in idx]
        reps = [reps[k] for k in idx]
        for k in range(len(basis)):
            others = basis[:k] + basis[k + 1 :]
            oreps = reps[:k] + reps[k + 1 :]
            oleads = [_lead_term(b, order) for b in others]
            quots, r = _divide(basis[k], others, oleads, order)
            if me_is_zero(r):
                basis = others
                reps = oreps
                changed = True
                break
            if not me_eq(r, basis[k]):
                rep = list(reps[k])
                for t, q in enumerate(quots):
                    if not q.is_zero():
                        rep = [a - q * b for a, b in zip(rep, oreps[t])]
                _, _, lc = _lead_term(r, order)
                inv = ring.const(1 / lc)
                basis[k] = me_scale(r, inv)
                reps[k] = [p * inv for p in rep]
                changed = True
    leads = [_lead_term(b, order) for b in basis]
    return basis, reps, leads


def gb_normal_form(v, gb):
    if len(v) != gb.rank:
        raise ValueError("ambient rank mismatch")
    return gb.normal_form(tuple(v))


class Lifter:
    """Membership lifts through a fixed generator list, GB computed once."""

    def __init__(self, gens, order=DEFAULT_ORDER):
        self.gens = [tuple(g) for g in gens]
        self.order = order
        self.gb = gb_compute(self.gens, order, track=True) if self.gens else None

    def lift(self, v):
        """Coefficients (f_1..f_s) with sum f_i gens_i = v, or NotInModule."""
        v = tuple(v)
        if self.gb is None or not self.gb.elements:
            if me_is_zero(v):
                if not self.gens:
                    return []
                ring = self.gens[0][0].ring
                return [ring.zero()] * len(self.gens)
            return NotInModule(v)
        quots, r = self.gb.divide(v)
        if not me_is_zero(r):
            return NotInModule(r)
        ring = v[0].ring
        coeffs = [ring.zero()] * len(self.gens)
        for k, q in enumerate(quots):
            if q.is_zero():
                continue
            for t, b in enumerate(self.gb.transformation[k]):
                if not b.is_zero():
                    coeffs[t] = coeffs[t] + q * b
        return coeffs


def mod_lift(v, gens, order=DEFAULT_ORDER):
    return Lifter(gens, order).lift(v)


def mod_syzygies(gens, order=DEFAULT_ORDER, prune=True):
    """Generators of the relation module {(f_1..f_s) : sum f_i gens_i = 0}."""
    gens = [tuple(g) for g in gens]
    if not gens:
        return []
    ring = gens[0][0].ring
    s = len(gens)
    out = []
    # zero input generators contribute unit syzygies
    for k, g in enumerate(gens):
        if me_is_zero(g):
            syz = [ring.zero()] * s
            syz[k] = ring.one()
            out.append(tuple(syz))
    gb = gb_compute(gens, order, track=True)
    basis, leads, reps = gb.elements, gb.leads, gb.transformation

    # Schreyer: every same-position S-pair of the final basis reduces to zero
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            if leads[i][0] != leads[j][0]:
                continue
            pi, ei, ci = leads[i]
            _, ej, cj = leads[j]
            lcm = _lcm_exps(ei, ej)
            mi, mj = _div_exps(lcm, ei), _div_exps(lcm, ej)
            spoly = me_sub(
                me_mul_term(basis[i], mi, 1 / ci), me_mul_term(basis[j], mj, 1 / cj)
            )
            quots, r = _divide(spoly, basis, leads, order)
            if not me_is_zero(r):
                raise AssertionError("S-polynomial of a Groebner basis did not reduce")
            # syzygy of the basis: m_i e_i - m_j e_j - quots
            coeff = [ring.zero()] * len(basis)
            coeff[i] = ring.monomial(dict(enumerate(mi)), Fraction(1, 1) / ci)
            coeff[j] = ring.monomial(dict(enumerate(mj)), Fraction(-1, 1) / cj)
            for k, q in enumerate(quots):
                coeff[k] = coeff[k] - q
            # transport to the input generators
            syz = [ring.zero()] * s
            for k, c in enumerate(coeff):
                if c.is_zero():
                    continue
                for t, b in enumerate(reps[k]):
                    if not b.is_zero():
                        syz[t] = syz[t] + c * b
            if not me_is_zero(tuple(syz)):
                out.append(tuple(syz))

    # rows of (I - A B): A expresses inputs in the basis, B the basis in inputs
    for k, g in enumerate(gens):
        if me_is_zero(g):
            continue
        quots, r = gb.divide(g)
        if not me_is_zero(r):
            raise AssertionError("input generator not in its own module")
        row = [ring.zero()] * s
        row[k] = ring.one()
        for t, q in enumerate(quots):
            if q.is_zero():
                continue
            for u, b in enumerate(reps[t]):
                if not b.is_zero():
                    row[u] = row[u] - q * b
        if not me_is_zero(tuple(row)):
            out.append(tuple(row))

    out = [me_normalize(v) for v in out]
    out = _dedupe(out)
    if prune:
        out = prune_generators(out, order)
    # exact re-check: every syzygy annihilates the input
    for v in out:
        acc = me_zero(ring, len(gens[0]))
        for c, g in zip(v, gens):
            acc = me_add(acc, me_scale(g, c))
        if not me_is_zero(acc):
            raise AssertionError("computed relation does not annihilate the input")
    return out


def _dedupe(elems):
    seen = set()
    out = []
    for v in elems:
        key = tuple(tuple(sorted(p.terms.items())) for p in v)
        if key not in seen:
            seen.add(key)
            out.append(v)
    return out


def _complexity(v):
    return (
        max((p.total_degree() for p in v), default=-1),
        sum(len(p.terms) for p in v),
        me_str(v),
    )


def prune_generators(elems, order=DEFAULT_ORDER):
    """Drop generators lying in the module of the remaining ones.

    Deterministic: tries the most complex candidates first.  For graded
    inputs the result is a minimal generating set."""
    current = [v for v in elems if not me_is_zero(v)]
    for v in sorted(current, key=_complexity, reverse=True):
        rest = [w for w in current if w is not v]
        if not rest:
            continue
        if not isinstance(Lifter(rest, order).lift(v), NotInModule):
            current = rest
    return sorted(current, key=_complexity)


def modules_equal(gens_a, gens_b, order=DEFAULT_ORDER):
    """Mutual membership of two generating sets."""
    la, lb = Lifter(gens_a, order), Lifter(gens_b, order)
    for v in gens_a:
        if isinstance(lb.lift(v), NotInModule):
            return False
    for v in gens_b:
        if isinstance(la.lift(v), NotInModule):
            return False
    return True
