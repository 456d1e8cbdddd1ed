"""Degree +1 derivations tied to a resolution, and their bracket-table face.

Sign conventions, fixed here once and used consistently everywhere:

  * pairing of an arity-n function with n sections = iterated contraction,
    first section first: P(F; x1..xn) = i_{xn}( ... i_{x1}(F) ... );
  * the arity-0 piece is dual to the differential through
    P(Q(xi); x) = (-1)^{deg xi} <xi, d x>;
  * the arity-1 piece encodes the anchor on base variables and the binary
    bracket through P(Q(xi); x, y) = rho(x)<xi,y> - rho(y)<xi,x> - <xi,{x,y}>;
  * for n >= 3 the n-ary bracket is read off by
    P(Q(xi); x1..xn) = -<xi, {x1..xn}>.

With these choices the homological condition on the derivation is equivalent
to the higher Jacobi identities of the table (verified in the test suite on
every shipped structure).
"""

from __future__ import annotations

from fractions import Fraction

from .errors import DegreeMismatch, RingMismatch
from .graded import (
    FiberGenerator,
    GDerivation,
    GPoly,
    GradedRing,
    gd_arity_split,
    gd_commutator,
    pair_sections,
)
from .poly import Poly
from .resolution import GeomResolution


def graded_ring_for(res: GeomResolution) -> GradedRing:
    """One fiber generator per basis section; named by the section names."""
    gens = []
    for level, rank in enumerate(res.ranks, start=1):
        for index in range(rank):
            gens.append(FiberGenerator(res.name_of(level, index), level, level, index))
    return GradedRing(res.ring, gens)


class AnchoredQ:
    """A degree +1 derivation whose arity-0 part is dual to the resolution
    differential and whose action on base variables encodes the anchor."""

    __slots__ = ("res", "ring", "derivation", "_arity_cache")

    def __init__(self, res: GeomResolution, ring: GradedRing, derivation: GDerivation):
        if derivation.degree != 1:
            raise DegreeMismatch("the structure derivation must have degree +1")
        if derivation.ring != ring:
            raise RingMismatch("derivation lives in the wrong graded ring")
        self.res = res
        self.ring = ring
        self.derivation = derivation
        self._arity_cache = None
        self._validate()

    def _validate(self):
        ring = self.ring
        res = self.res
        # anchor shape on base variables
        for i in range(res.ring.nvars):
            expected = ring.zero()
            for a in range(res.rank_at_level(1)):
                c = res.anchor[i][a]
                if not c.is_zero():
                    expected = expected + ring.gen(ring.gen_index(1, a), c)
            if self.derivation.value_on_var(i) != expected:
                raise DegreeMismatch(
                    "action on base variables does not match the anchor matrix"
                )
        # arity-0 piece dual to the differential; values homogeneous
        for gi, g in enumerate(ring.gens):
            val = self.derivation.value_on_gen(gi)
            if not val.is_homogeneous(g.degree + 1):
                raise DegreeMismatch(f"value on {g.name} is not of degree {g.degree + 1}")
            linear = val.arity_parts().get(1, ring.zero())
            expected = ring.zero()
            d = res.diff_matrix(g.level + 1)
            if d is not None:
                sgn = (-1) ** g.level
                for b in range(res.rank_at_level(g.level + 1)):
                    c = d[g.index][b]
                    if not c.is_zero():
                        expected = expected + ring.gen(
                            ring.gen_index(g.level + 1, b), c.scale(sgn)
                        )
            if linear != expected:
                raise DegreeMismatch(
                    f"arity-0 piece on {g.name} does not match the differential"
                )

    def arity_parts(self):
        if self._arity_cache is None:
            self._arity_cache = dict(gd_arity_split(self.derivation))
        return self._arity_cache

    def arity_part(self, k):
        return self.arity_parts().get(k, GDerivation(self.ring, 1))

    def max_arity(self):
        parts = self.arity_parts()
        return max(parts) if parts else 0

    def section_ids(self):
        return [(g.level, g.index) for g in self.ring.gens]

    def __eq__(self, other):
        return isinstance(other, AnchoredQ) and self.derivation == other.derivation


# -- bracket tables ---------------------------------------------------------------


def _combo_add(ring, combo, sid, p):
    if p.is_zero():
        return
    s = combo.get(sid)
    s = p if s is None else s + p
    if s.is_zero():
        combo.pop(sid, None)
    else:
        combo[sid] = s


def _combo_scale(combo, p):
    out = {}
    for sid, c in combo.items():
        q = c * p
        if not q.is_zero():
            out[sid] = q
    return out


def _combo_sum(ring, combos):
    out = {}
    for c in combos:
        for sid, p in c.items():
            _combo_add(ring, out, sid, p)
    return out


def combo_str(res, combo):
    if not combo:
        return "0"
    parts = []
    for (lvl, idx) in sorted(combo):
        parts.append(f"({combo[(lvl, idx)]})*{res.name_of(lvl, idx)}")
    return " + ".join(parts)


class BracketTable:
    """n-ary bracket values on canonical tuples of basis sections.

    Tuples are sorted by the canonical generator order; retrieving any other
    order applies the Koszul sign of the resort.  Values are stored as
    {section id: base Poly}."""

    __slots__ = ("res", "ring", "tables")

    def __init__(self, res: GeomResolution, ring: GradedRing, tables=None):
        self.res = res
        self.ring = ring
        self.tables = {n: dict(t) for n, t in (tables or {}).items()}

    def max_arity(self):
        return max((n for n, t in self.tables.items() if t), default=1)

    def _canonical(self, sids):
        """(sign, tuple) for an arbitrary-order tuple; sign 0 when an
        odd-level section repeats."""
        idxs = [self.ring.gen_index(l, i) for (l, i) in sids]
        levels = [self.ring.degrees[g] for g in idxs]
        order = sorted(range(len(idxs)), key=lambda k: (idxs[k], k))
        sign = 1
        for a in range(len(order)):
            for b in range(a + 1, len(order)):
                if order[a] > order[b]:
                    if levels[order[a]] % 2 and levels[order[b]] % 2:
                        sign = -sign
        srt = [idxs[k] for k in order]
        for u, v in zip(srt, srt[1:]):
            if u == v and self.ring.degrees[u] % 2:
                return 0, None
        return sign, tuple(self.ring.source_of(g) for g in srt)

    def set_value(self, n, sids, combo):
        sign, key = self._canonical(sids)
        if sign == 0:
            if combo:
                raise DegreeMismatch("bracket value on a repeated odd section must vanish")
            return
        total = sum(l for (l, _) in key)
        for (lvl, _idx), p in combo.items():
            if not p.is_zero() and lvl != total - 1:
                raise DegreeMismatch(
                    f"{n}-ary value must land in level {total - 1}, got level {lvl}"
                )
        combo = _combo_scale(combo, self.res.ring.const(sign))
        if combo:
            self.tables.setdefault(n, {})[key] = combo

    def value(self, n, sids):
        """Bracket of basis sections given in any order, as a combo dict."""
        sign, key = self._canonical(sids)
        if sign == 0:
            return {}
        combo = self.tables.get(n, {}).get(key, {})
        if sign == 1:
            return dict(combo)
        return _combo_scale(combo, self.res.ring.const(sign))

    def tuples(self, n):
        return sorted(self.tables.get(n, {}).keys())

    def anchor_apply(self, sid, f: Poly) -> Poly:
        """rho(e_sid) applied to a base polynomial; zero off level 1."""
        lvl, idx = sid
        if lvl != 1:
            return self.res.ring.zero()
        out = self.res.ring.zero()
        for i in range(self.res.ring.nvars):
            c = self.res.anchor[i][idx]
            if not c.is_zero():
                out = out + c * f.diff(i)
        return out

    def eval_multi(self, n, args):
        """Evaluate the n-ary bracket on combos, O-multilinearly except for
        the binary Leibniz terms through the anchor."""
        ring = self.res.ring
        out = {}
        items = [list(sorted(a.items())) for a in args]
        if any(not it for it in items):
            return out

        def rec(k, chosen):
            if k == len(items):
                sids = [sid for sid, _ in chosen]
                coeff = ring.one()
                for _, p in chosen:
                    coeff = coeff * p
                if coeff.is_zero():
                    return
                base = self.value(n, sids)
                for sid, p in base.items():
                    _combo_add(ring, out, sid, p * coeff)
                if n == 2:
                    (a, fa), (b, fb) = chosen
                    if a[0] == 1:
                        _combo_add(ring, out, b, fa * self.anchor_apply(a, fb))
                    if b[0] == 1:
                        sgn = -1 if (a[0] % 2 and b[0] % 2) else 1
                        _combo_add(ring, out, a, (fb * self.anchor_apply(b, fa)).scale(sgn))
                return
            for sid, p in items[k]:
                rec(k + 1, chosen + [(sid, p)])

        rec(0, [])
        return out

    def differential_combo(self, sid):
        """1-ary bracket of a basis section = its differential column."""
        lvl, idx = sid
        d = self.res.diff_matrix(lvl)
        out = {}
        if d is not None:
            for i in range(self.res.rank_at_level(lvl - 1)):
                p = d[i][idx]
                if not p.is_zero():
                    out[(lvl - 1, i)] = p
        return out


# -- conversions -------------------------------------------------------------------


def brackets_from_q(q: AnchoredQ, max_arity=None) -> BracketTable:
    """Read the n-ary brackets off the derivation by duality."""
    ring = q.ring
    res = q.res
    if max_arity is None:
        max_arity = q.max_arity() + 1
    bt = BracketTable(res, ring)
    sections = list(range(ring.ngens))
    # 1-ary bracket: store the differential columns directly
    t1 = {}
    for gi in sections:
        sid = ring.source_of(gi)
        combo = bt.differential_combo(sid)
        if combo:
            t1[(sid,)] = combo
    if t1:
        bt.tables[1] = t1
    for n in range(2, max_arity + 1):
        table = {}
        for T in _canonical_tuples(ring, n):
            total = sum(ring.degrees[g] for g in T)
            target_level = total - 1
            if target_level < 1 or target_level > res.length:
                continue
            combo = {}
            for b in range(res.rank_at_level(target_level)):
                gi = ring.gen_index(target_level, b)
                p = pair_sections(q.derivation.value_on_gen(gi), T)
                if not p.is_zero():
                    combo[(target_level, b)] = -p
            if combo:
                table[tuple(ring.source_of(g) for g in T)] = combo
        if table:
            bt.tables[n] = table
    return bt


def q_from_brackets(bt: BracketTable, res: GeomResolution) -> AnchoredQ:
    """Assemble the degree +1 derivation from a bracket table.

    The 1-ary bracket must equal the resolution differential; each n-ary
    value must satisfy the degree rule (checked by BracketTable.set_value
    on input and revalidated here via the duality)."""
    ring = bt.ring
    if bt.res is not res:
        # allow equal-shaped tables built for the same resolution object
        if bt.res.ranks != res.ranks or bt.res.ring != res.ring:
            raise RingMismatch("bracket table belongs to a different resolution")
    # 1-ary piece must match the differential
    for key, combo in bt.tables.get(1, {}).items():
        (sid,) = key
        if combo != bt.differential_combo(sid):
            raise DegreeMismatch("1-ary bracket differs from the resolution differential")
    xvals = {}
    for i in range(res.ring.nvars):
        acc = ring.zero()
        for a in range(res.rank_at_level(1)):
            c = res.anchor[i][a]
            if not c.is_zero():
                acc = acc + ring.gen(ring.gen_index(1, a), c)
        if not acc.is_zero():
            xvals[i] = acc
    gvals = {}
    for gi, g in enumerate(ring.gens):
        val = ring.zero()
        d = res.diff_matrix(g.level + 1)
        if d is not None:
            sgn = (-1) ** g.level
            for b in range(res.rank_at_level(g.level + 1)):
                c = d[g.index][b]
                if not c.is_zero():
                    val = val + ring.gen(ring.gen_index(g.level + 1, b), c.scale(sgn))
        for n in range(2, bt.max_arity() + 1):
            for T, combo in bt.tables.get(n, {}).items():
                if sum(l for (l, _) in T) != g.level + 1:
                    continue
                target = combo.get((g.level, g.index))
                if target is None or target.is_zero():
                    continue
                fm = tuple(sorted(ring.gen_index(l, i) for (l, i) in T))
                norm = pair_sections(ring.monomial(fm, res.ring.one()), fm)
                nv = norm.constant_value()
                if nv == 0:
                    raise DegreeMismatch("degenerate bracket tuple")
                val = val + ring.monomial(fm, target.scale(Fraction(-1) / nv))
        if not val.is_zero():
            gvals[gi] = val
    der = GDerivation(ring, 1, xvals, gvals)
    return AnchoredQ(res, ring, der)


def _canonical_tuples(ring, n):
    """Nondecreasing generator-index tuples, odd-degree entries distinct."""
    out = []

    def rec(start, cur):
        if len(cur) == n:
            out.append(tuple(cur))
            return
        for g in range(start, ring.ngens):
            if cur and cur[-1] == g and ring.degrees[g] % 2:
                continue
            rec(g, cur + [g])

    rec(0, [])
    return out


# -- verification ------------------------------------------------------------------


def q_verify_homological(q: AnchoredQ, max_arity=None):
    """Check [Q, Q] = 0 arity by arity.  Returns {arity: entry} where each
    entry is {'ok': bool} plus a witness for failures."""
    if max_arity is None:
        max_arity = q.res.length
    sq = gd_commutator(q.derivation, q.derivation)
    parts = dict(gd_arity_split(sq))
    report = {}
    for m in range(0, max_arity + 1):
        piece = parts.get(m)
        if piece is None or piece.is_zero():
            report[m] = {"ok": True}
            continue
        witness = None
        for i in sorted(piece.xvals):
            witness = (q.res.ring.variables[i], str(piece.xvals[i]))
            break
        if witness is None:
            for g in sorted(piece.gvals):
                witness = (q.ring.gens[g].name, str(piece.gvals[g]))
                break
        report[m] = {"ok": False, "witness": witness}
    report["overall"] = all(report[m]["ok"] for m in range(0, max_arity + 1))
    return report


def is_homological(q: AnchoredQ) -> bool:
    return gd_commutator(q.derivation, q.derivation).is_zero()


def bt_verify_jacobi(bt: BracketTable, n_max=None):
    """Evaluate the unshuffle-sum identities on all canonical basis tuples
    up to n_max arguments.  The n-th entry also carries the anchor-side
    conditions that the derivation picture checks at arity n-1:
    n=1 is d.d = 0, n=2 adds rho.d = 0, n=3 adds the anchor morphism rule."""
    if n_max is None:
        n_max = bt.res.length + 1
    ring = bt.res.ring
    report = {}
    for n in range(1, n_max + 1):
        ok = True
        witness = None
        if n == 1:
            for sid in _all_sids(bt):
                one = bt.differential_combo(sid)
                dd = _combo_sum(ring, [
                    _combo_scale(bt.differential_combo(s2), p) for s2, p in one.items()
                ])
                if dd:
                    ok = False
                    witness = (str(sid), combo_str(bt.res, dd))
                    break
        else:
            if n == 2:
                entry = _rho_d_check(bt)
                if entry is not None:
                    ok, witness = False, entry
            if n == 3 and ok:
                entry = _anchor_morphism_check(bt)
                if entry is not None:
                    ok, witness = False, entry
            if ok:
                for T in _canonical_tuples(bt.ring, n):
                    sids = [bt.ring.source_of(g) for g in T]
                    defect = _jacobi_sum(bt, sids)
                    if defect:
                        ok = False
                        witness = (str(tuple(sids)), combo_str(bt.res, defect))
                        break
        report[n] = {"ok": ok} if ok else {"ok": False, "witness": witness}
    report["overall"] = all(report[n]["ok"] for n in range(1, n_max + 1))
    return report


def _all_sids(bt):
    return [(g.level, g.index) for g in bt.ring.gens]


def _rho_d_check(bt):
    """rho(d x) = 0 for level-2 sections."""
    ring = bt.res.ring
    for b in range(bt.res.rank_at_level(2)):
        combo = bt.differential_combo((2, b))
        for i in range(ring.nvars):
            acc = ring.zero()
            for (lvl, a), p in combo.items():
                acc = acc + bt.res.anchor[i][a] * p
            if not acc.is_zero():
                return (f"d(e2_{b})", f"anchor image coefficient {acc}")
    return None


def _anchor_morphism_check(bt):
    """rho({x,y}) = [rho x, rho y] on level-1 basis pairs."""
    from .foliation import PolyVectorField

    res = bt.res
    ring = res.ring
    r1 = res.rank_at_level(1)
    fields = [
        PolyVectorField(ring, [res.anchor[i][a] for i in range(ring.nvars)])
        for a in range(r1)
    ]
    for a in range(r1):
        for b in range(a + 1, r1):
            lhs = fields[a].bracket(fields[b])
            combo = bt.value(2, [(1, a), (1, b)])
            acc = [ring.zero() for _ in range(ring.nvars)]
            for (lvl, cidx), p in combo.items():
                if lvl != 1:
                    continue
                for i in range(ring.nvars):
                    acc[i] = acc[i] + res.anchor[i][cidx] * p
            diff = [lhs.coefficients[i] - acc[i] for i in range(ring.nvars)]
            if any(not p.is_zero() for p in diff):
                return (f"(e1_{a}, e1_{b})", "anchor morphism defect")
    return None


def _jacobi_sum(bt, sids):
    """sum_i sum_{unshuffles} eps {{inner}_i, rest}_{n-i+1} on one tuple."""
    from itertools import combinations

    ring = bt.res.ring
    n = len(sids)
    parities = [l % 2 for (l, _) in sids]
    total = {}
    for i in range(1, n + 1):
        for picked in combinations(range(n), i):
            from .graded import koszul_sign_of_selection

            eps = koszul_sign_of_selection(parities, picked)
            inner_sids = [sids[p] for p in picked]
            rest = [sids[p] for p in range(n) if p not in picked]
            inner = (
                bt.differential_combo(inner_sids[0])
                if i == 1
                else bt.value(i, inner_sids)
            )
            if not inner:
                continue
            k = n - i + 1
            if k == 1:
                term = _combo_sum(
                    ring,
                    [_combo_scale(bt.differential_combo(s), p) for s, p in inner.items()],
                )
            else:
                args = [inner] + [{s: ring.one()} for s in rest]
                term = bt.eval_multi(k, args)
            if eps < 0:
                term = _combo_scale(term, ring.const(-1))
            total = _combo_sum(ring, [total, term])
    return total


# -- root map and the derived binary bracket --------------------------------------


def q_root(w: GDerivation, q: AnchoredQ):
    """Image of a vertical derivation under (id x anchor) on its level-1
    component: {fiber monomial: coefficient vector over the generators}."""
    if w.xvals:
        raise ValueError("root map expects a vertical derivation")
    ring = q.ring
    r1 = q.res.rank_at_level(1)
    labels = {}
    for a in range(r1):
        gi = ring.gen_index(1, a)
        for fm, p in w.value_on_gen(gi).terms.items():
            labels.setdefault(fm, [q.res.ring.zero()] * r1)[a] = p
    return labels


def root_is_zero(root, res) -> bool:
    from .poly import mat_vec

    for vec in root.values():
        img = mat_vec(res.anchor, vec)
        if any(not p.is_zero() for p in img):
            return False
    return True


def q_leibniz_bracket(q: AnchoredQ, X: GDerivation, Y: GDerivation) -> GDerivation:
    """[[Q, X], Y] for vertical degree -1 arguments."""
    for w in (X, Y):
        if w.degree != -1 or w.xvals:
            raise ValueError("arguments must be vertical of degree -1")
    return gd_commutator(gd_commutator(q.derivation, X), Y)


# -- morphisms ---------------------------------------------------------------------


class MorphismData:
    """Taylor coefficients of a degree-0 algebra morphism from the functions
    of dst to the functions of src, stored by values on dst generators:
    taylor[k][dst generator index] is an arity-(k+1) element of src."""

    __slots__ = ("src", "dst", "taylor")

    def __init__(self, src: AnchoredQ, dst: AnchoredQ, taylor):
        self.src = src
        self.dst = dst
        self.taylor = {k: dict(v) for k, v in taylor.items() if v}
        for k, values in self.taylor.items():
            for gi, val in values.items():
                deg = dst.ring.degrees[gi]
                if not val.is_homogeneous(deg):
                    raise DegreeMismatch("Taylor coefficient breaks the degree rule")
                for fm in val.terms:
                    if len(fm) != k + 1:
                        raise DegreeMismatch("Taylor coefficient breaks the arity rule")

    @staticmethod
    def from_chain_map(cm, src: AnchoredQ, dst: AnchoredQ):
        t0 = {}
        for lvl in range(1, dst.res.length + 1):
            m = cm.matrix(lvl)
            if m is None or not m:
                continue
            for b in range(dst.res.rank_at_level(lvl)):
                acc = src.ring.zero()
                for a in range(src.res.rank_at_level(lvl)):
                    c = m[b][a]
                    if not c.is_zero():
                        acc = acc + src.ring.gen(src.ring.gen_index(lvl, a), c)
                if not acc.is_zero():
                    t0[dst.ring.gen_index(lvl, b)] = acc
        return MorphismData(src, dst, {0: t0})

    def gen_image(self, gi):
        acc = self.src.ring.zero()
        for values in self.taylor.values():
            v = values.get(gi)
            if v is not None:
                acc = acc + v
        return acc

    def apply(self, f: GPoly) -> GPoly:
        """Extend multiplicatively to any function of dst."""
        src_ring = self.src.ring
        out = src_ring.zero()
        images = {gi: self.gen_image(gi) for gi in range(self.dst.ring.ngens)}
        for fm, p in f.terms.items():
            acc = src_ring.from_poly(p)
            for gi in fm:
                acc = acc * images[gi]
                if acc.is_zero():
                    break
            out = out + acc
        return out


def morphism_defect(phi: MorphismData, src: AnchoredQ, dst: AnchoredQ):
    """Values of Phi Q_dst - Q_src Phi on dst base variables and generators."""
    defects = {}
    for i in range(dst.res.ring.nvars):
        x = src.ring.from_poly(src.res.ring.var(i))
        lhs = phi.apply(dst.derivation.value_on_var(i))
        rhs = src.derivation.apply(x)
        defects[("x", i)] = lhs - rhs
    for gi in range(dst.ring.ngens):
        lhs = phi.apply(dst.derivation.value_on_gen(gi))
        rhs = src.derivation.apply(phi.gen_image(gi))
        defects[("g", gi)] = lhs - rhs
    return defects


def q_verify_morphism(phi: MorphismData, src: AnchoredQ, dst: AnchoredQ, max_arity=None):
    """Check the intertwining relation arity by arity up to max_arity."""
    if max_arity is None:
        max_arity = dst.res.length
    defects = morphism_defect(phi, src, dst)
    report = {}
    for m in range(0, max_arity + 1):
        ok = True
        witness = None
        for key in sorted(defects):
            val = defects[key]
            length = m + (1 if key[0] == "g" else 0)
            part = {fm: p for fm, p in val.terms.items() if len(fm) == length}
            if part:
                ok = False
                name = (
                    dst.res.ring.variables[key[1]]
                    if key[0] == "x"
                    else dst.ring.gens[key[1]].name
                )
                witness = (name, str(GPoly(src.ring, part)))
                break
        report[m] = {"ok": ok} if ok else {"ok": False, "witness": witness}
    report["overall"] = all(report[m]["ok"] for m in range(0, max_arity + 1))
    return report


def morphism_is_strict(phi: MorphismData, src: AnchoredQ, dst: AnchoredQ) -> bool:
    return all(v.is_zero() for v in morphism_defect(phi, src, dst).values())
