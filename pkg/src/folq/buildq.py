"""Constructing structures on a verified resolution by obstruction lifting.

The driver: start from the anchor and the differential, install the binary
bracket from a structure-function certificate, repair the compatibility with
the differential, then kill the higher defects one arity at a time.  Every
repair is a module lift through the resolution, one fiber-monomial label at
a time, so the only engine needed is the Groebner lifter.

Also ships the explicit families used throughout the test suite (sl2 action
on the plane, vector fields vanishing at the origin, order-2 vanishing on
the plane, level sets of a polynomial with regular partials) and the
extension of a chain map to a strict morphism.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

from .errors import LiftFailure, NotInModule, NotInvolutive, NotRegularSequence, RootNotZero
from .foliation import (
    FoliationPresentation,
    PolyVectorField,
    StructureFunctions,
    fol_involutivity,
)
from .graded import GDerivation, GPoly, gd_commutator, koszul_sign_of_selection
from .groebner import DEFAULT_ORDER, Lifter, mod_syzygies
from .poly import BaseRing, mat_col, mat_vec
from .qfield import (
    AnchoredQ,
    BracketTable,
    MorphismData,
    graded_ring_for,
    is_homological,
    morphism_defect,
    morphism_is_strict,
    q_from_brackets,
    q_root,
    root_is_zero,
)
from .resolution import GeomResolution, res_build


class VerticalField:
    """A vertical derivation with its per-level, per-label decomposition."""

    __slots__ = ("derivation",)

    def __init__(self, derivation: GDerivation):
        if derivation.xvals:
            raise ValueError("vertical fields vanish on base variables")
        self.derivation = derivation

    def components(self):
        """{(fiber monomial, target level): coefficient vector}."""
        ring = self.derivation.ring
        out = {}
        for gi, val in self.derivation.gvals.items():
            level, index = ring.source_of(gi)
            for fm, p in val.terms.items():
                key = (fm, level)
                if key not in out:
                    rank = sum(1 for g in ring.gens if g.level == level)
                    out[key] = [ring.base.zero()] * rank
                out[key][index] = p
        return out


def bq_almost_lie(res: GeomResolution, c: StructureFunctions) -> AnchoredQ:
    """Arity 0 dual to the resolution; arity 1 from the certified binary
    bracket on level 1, zero on mixed and higher levels.  The compatibility
    [arity0, arity1] = 0 is NOT yet enforced."""
    ring = graded_ring_for(res)
    bt = BracketTable(res, ring)
    r1 = res.rank_at_level(1)
    if c.size != r1:
        raise ValueError("structure functions do not match the level-1 rank")
    for i in range(r1):
        for j in range(i + 1, r1):
            row = c.get(i, j)
            combo = {(1, k): p for k, p in enumerate(row) if not p.is_zero()}
            bt.set_value(2, [(1, i), (1, j)], combo)
    return q_from_brackets(bt, res)


def _level_lifters(res: GeomResolution, order=DEFAULT_ORDER):
    """Lifters through the columns of each differential, computed lazily."""
    cache = {}

    def get(level):
        # columns of the map into `level` (from level+1)
        if level not in cache:
            d = res.diff_matrix(level + 1)
            if d is None:
                cache[level] = None
            else:
                cols = [mat_col(d, j) for j in range(res.rank_at_level(level + 1))]
                cache[level] = Lifter(cols, order)
        return cache[level]

    return get


def bq_lift_vertical(res: GeomResolution, q: AnchoredQ, R: GDerivation, order=DEFAULT_ORDER):
    """Solve [arity-0 part, W] = R for a vertical W with no level-1 target.

    R must be vertical, closed for the arity-0 part, with vanishing root.
    Built level by level: each step lifts one polynomial vector per fiber
    monomial through the next differential."""
    ring = q.ring
    if R.xvals:
        raise ValueError("obstruction field must be vertical")
    if R.is_zero():
        return GDerivation(ring, R.degree - 1)
    q0 = q.arity_part(0)
    root = q_root(R, q)
    if not root_is_zero(root, res):
        raise RootNotZero("obstruction field has a nonzero root", witness=root)
    lifters = _level_lifters(res, order)
    w_degree = R.degree - 1
    gvals = {}
    # V[j][c] = value of W on the level-j generator c; level 1 is zero
    V = [ring.zero() for _ in range(res.rank_at_level(1))]
    for j in range(1, res.length + 1):
        rank_j = res.rank_at_level(j)
        sgn = (-1) ** (w_degree + j)
        rhs = []
        for cc in range(rank_j):
            gi = ring.gen_index(j, cc)
            val = q0.apply(V[cc]) - R.value_on_gen(gi)
            rhs.append(val.scale(sgn))
        lifter = lifters(j)
        if lifter is None:
            for cc, v in enumerate(rhs):
                if not v.is_zero():
                    raise LiftFailure(
                        f"residue at top level {j}: {ring.gens[ring.gen_index(j, cc)].name}"
                    )
            break
        # group the right-hand side by fiber monomial
        labels = {}
        for cc, v in enumerate(rhs):
            for fm, p in v.terms.items():
                labels.setdefault(fm, [res.ring.zero()] * rank_j)[cc] = p
        rank_next = res.rank_at_level(j + 1)
        Vnext = [ring.zero() for _ in range(rank_next)]
        for fm in sorted(labels):
            vec = labels[fm]
            lift = lifter.lift(vec)
            if isinstance(lift, NotInModule):
                raise LiftFailure(f"lift through level {j + 1} failed; non-exact input?")
            for b, coeff in enumerate(lift):
                if not coeff.is_zero():
                    Vnext[b] = Vnext[b] + ring.monomial(fm, coeff)
        for b, val in enumerate(Vnext):
            if not val.is_zero():
                gvals[ring.gen_index(j + 1, b)] = val
        V = Vnext
    W = GDerivation(ring, w_degree, {}, gvals)
    check = gd_commutator(q0, W) - R
    if not check.is_zero():
        raise LiftFailure("internal: lifted field does not reproduce the obstruction")
    return W


def bq_correct_arity1(res: GeomResolution, cand: AnchoredQ, order=DEFAULT_ORDER) -> AnchoredQ:
    """Repair the arity-1 part so it commutes with the arity-0 part; the
    level-1 bracket and the anchor are untouched."""
    q0 = cand.arity_part(0)
    q1 = cand.arity_part(1)
    R = gd_commutator(q0, q1)
    if R.is_zero():
        return cand
    if R.xvals:
        raise LiftFailure("internal: the arity-1 defect is not vertical")
    W = bq_lift_vertical(res, cand, R, order)
    corrected = cand.derivation - W
    out = AnchoredQ(res, cand.ring, corrected)
    nq0, nq1 = out.arity_part(0), out.arity_part(1)
    if not gd_commutator(nq0, nq1).is_zero():
        raise LiftFailure("internal: correction failed to close the arity-1 defect")
    if gd_commutator(nq1, nq1).xvals:
        raise LiftFailure("internal: the binary bracket does not respect the anchor")
    return out


def bq_extend(res: GeomResolution, q01: AnchoredQ, order=DEFAULT_ORDER) -> AnchoredQ:
    """Extend a corrected arity-(0,1) structure by killing each higher
    defect; the final derivation squares to zero (verified exactly)."""
    ring = q01.ring
    parts = {0: q01.arity_part(0), 1: q01.arity_part(1)}
    total = q01.derivation
    q_for_lift = q01
    for n in range(2, res.length + 1):
        R = GDerivation(ring, 2)
        for i in range(1, n):
            j = n - i
            if i in parts and j in parts:
                R = R + gd_commutator(parts[i], parts[j])
        R = R.scale(Fraction(-1, 2))
        if R.is_zero():
            parts[n] = GDerivation(ring, 1)
            continue
        if R.xvals:
            raise LiftFailure(f"internal: arity-{n} defect is not vertical")
        if not gd_commutator(parts[0], R).is_zero():
            raise LiftFailure(f"internal: arity-{n} defect is not closed")
        W = bq_lift_vertical(res, q_for_lift, R, order)
        parts[n] = W
        total = total + W
    out = AnchoredQ(res, ring, total)
    if not is_homological(out):
        raise LiftFailure("internal: extension did not square to zero")
    return out


def build_structure(fol: FoliationPresentation, order=DEFAULT_ORDER):
    """Full pipeline on a presentation: certify, resolve, install, repair,
    extend.  Returns (structure functions, resolution, AnchoredQ)."""
    c = fol_involutivity(fol, order)
    if isinstance(c, NotInvolutive):
        raise ValueError(f"presentation is not involutive: pair {(c.i, c.j)}")
    res = res_build(fol, order=order)
    cand = bq_almost_lie(res, c)
    q01 = bq_correct_arity1(res, cand, order)
    return c, res, bq_extend(res, q01, order)


# -- canned families ---------------------------------------------------------------


def _default_vars(n):
    return ["x", "y", "z", "t"][:n] if n <= 4 else [f"x{i + 1}" for i in range(n)]


def sl2_foliation():
    R = BaseRing(["x", "y"])
    x, y = R.var(0), R.var(1)
    return FoliationPresentation(
        R,
        [
            PolyVectorField(R, [x, -y]),
            PolyVectorField(R, [R.zero(), x]),
            PolyVectorField(R, [y, R.zero()]),
        ],
    )


def origin_foliation(n):
    R = BaseRing(_default_vars(n))
    gens = []
    for a in range(n):
        for u in range(n):
            coeffs = [R.zero()] * n
            coeffs[u] = R.var(a)
            gens.append(PolyVectorField(R, coeffs))
    return FoliationPresentation(R, gens)


def order2_foliation():
    R = BaseRing(["x", "y"])
    x, y = R.var(0), R.var(1)
    monos = [x * x, x * y, y * y]
    gens = [PolyVectorField(R, [m, R.zero()]) for m in monos] + [
        PolyVectorField(R, [R.zero(), m]) for m in monos
    ]
    return FoliationPresentation(R, gens)


def koszul_foliation(phi):
    R = phi.ring
    n = R.nvars
    gens = []
    for i in range(n):
        for j in range(i + 1, n):
            coeffs = [R.zero()] * n
            coeffs[j] = phi.diff(i)
            coeffs[i] = -phi.diff(j)
            gens.append(PolyVectorField(R, coeffs))
    return FoliationPresentation(R, gens)


def _sl2_builtin():
    fol = sl2_foliation()
    R = fol.ring
    x, y = R.var(0), R.var(1)
    anchor = fol.anchor_matrix()
    d2 = [[x * y], [y * y], [-(x * x)]]
    res = GeomResolution(R, anchor, [d2], section_names=[["h", "e", "f"], ["r"]])
    ring = graded_ring_for(res)
    bt = BracketTable(res, ring)
    two = R.const(2)
    bt.set_value(2, [(1, 0), (1, 1)], {(1, 1): two})  # {h, e} = 2e
    bt.set_value(2, [(1, 0), (1, 2)], {(1, 2): -two})  # {h, f} = -2f
    bt.set_value(2, [(1, 1), (1, 2)], {(1, 0): R.one()})  # {e, f} = h
    q = q_from_brackets(bt, res)
    return fol, res, q


def _wedge_sign(A, B):
    """(sign, merged sorted tuple) for wedging disjoint index tuples; 0 on
    overlap."""
    if set(A) & set(B):
        return 0, None
    merged = list(A) + list(B)
    sign = 1
    # bubble count over the concatenation
    for i, a in enumerate(merged):
        for b in merged[i + 1 :]:
            if a > b:
                sign = -sign
    return sign, tuple(sorted(merged))


def _origin_builtin(n):
    fol = origin_foliation(n)
    R = fol.ring
    # level i basis: (A, u), |A| = i, lex in (A, u)
    bases = []
    for i in range(1, n + 1):
        level = [(A, u) for A in combinations(range(n), i) for u in range(n)]
        bases.append(level)
    index = [{b: k for k, b in enumerate(lvl)} for lvl in bases]
    names = [
        ["".join(R.variables[a] for a in A) + "_" + R.variables[u] for (A, u) in lvl]
        for lvl in bases
    ]
    anchor = [[R.zero() for _ in bases[0]] for _ in range(n)]
    for col, ((a,), u) in enumerate(bases[0]):
        anchor[u][col] = R.var(a)
    diffs = []
    for i in range(2, n + 1):
        rows = len(bases[i - 2])
        cols = len(bases[i - 1])
        d = [[R.zero() for _ in range(cols)] for _ in range(rows)]
        for col, (A, u) in enumerate(bases[i - 1]):
            for k, a in enumerate(A):
                rest = tuple(b for b in A if b != a)
                r = index[i - 2][(rest, u)]
                d[r][col] = d[r][col] + R.var(a).scale((-1) ** k)
        diffs.append(d)
    res = GeomResolution(R, anchor, diffs, section_names=names)
    ring = graded_ring_for(res)
    bt = BracketTable(res, ring)

    def contract(u, B):
        if u not in B:
            return 0, None
        k = B.index(u)
        return (-1) ** k, tuple(b for b in B if b != u)

    # binary bracket: wedge against the contraction of the partner; the
    # second term carries the interchange sign of this kernel's pairing
    # conventions, (-1)^(ij+i+j) for entry levels i <= j
    for li, lvl_a in enumerate(bases):
        for lj in range(li, len(bases)):
            lvl_b = bases[lj]
            mixer = (-1) ** ((li + 1) * (lj + 1) + li + lj)
            for ia, (A, u) in enumerate(lvl_a):
                for ib, (B, v) in enumerate(lvl_b):
                    if lj == li and ib < ia:
                        continue
                    combo = {}
                    s1, Bu = contract(u, B)
                    if s1:
                        s2, AB = _wedge_sign(A, Bu)
                        if s2 and len(AB) <= n:
                            key = (len(AB), index[len(AB) - 1][(AB, v)])
                            c = combo.get(key, R.zero())
                            combo[key] = c + R.const(s1 * s2)
                    s3, Av = contract(v, A)
                    if s3:
                        s4, BA = _wedge_sign(B, Av)
                        if s4 and len(BA) <= n:
                            key = (len(BA), index[len(BA) - 1][(BA, u)])
                            c = combo.get(key, R.zero())
                            combo[key] = c + R.const(mixer * s3 * s4)
                    combo = {k: p for k, p in combo.items() if not p.is_zero()}
                    if combo:
                        bt.set_value(2, [(li + 1, ia), (lj + 1, ib)], combo)
    q = q_from_brackets(bt, res)
    return fol, res, q


def _order2_builtin():
    fol = order2_foliation()
    R = fol.ring
    x, y = R.var(0), R.var(1)
    monos = [x * x, x * y, y * y]
    z = R.zero()
    anchor = [
        [monos[0], monos[1], monos[2], z, z, z],
        [z, z, z, monos[0], monos[1], monos[2]],
    ]
    # delta(F, G) = (yF, -xF - yG, xG), one copy per velocity component
    blk = [[y, z], [-x, -y], [z, x]]
    d2 = [
        blk[0] + [z, z],
        blk[1] + [z, z],
        blk[2] + [z, z],
        [z, z] + blk[0],
        [z, z] + blk[1],
        [z, z] + blk[2],
    ]
    names = [["x2_x", "xy_x", "y2_x", "x2_y", "xy_y", "y2_y"], ["r0", "r1", "r2", "r3"]]
    res = GeomResolution(R, anchor, [d2], section_names=names)
    cand = order2_quadratic_candidate(res)
    q01 = bq_correct_arity1(res, cand)
    q = bq_extend(res, q01)
    return fol, res, q


def order2_quadratic_candidate(res: GeomResolution) -> AnchoredQ:
    """Binary bracket of the order-2 family on constant level-1 sections:
    {alpha u, beta v} = u[beta](alpha v) - v[alpha](beta u)."""
    R = res.ring
    x, y = R.var(0), R.var(1)
    monos = [x * x, x * y, y * y]
    basis = [(m, u) for u in range(2) for m in monos]
    ring = graded_ring_for(res)
    bt = BracketTable(res, ring)
    for i, (alpha, u) in enumerate(basis):
        for j in range(i + 1, len(basis)):
            beta, v = basis[j]
            combo = {}
            du_beta = beta.diff(u)
            dv_alpha = alpha.diff(v)
            if not du_beta.is_zero():
                key = (1, basis.index((alpha, v)))
                combo[key] = combo.get(key, R.zero()) + du_beta
            if not dv_alpha.is_zero():
                key = (1, basis.index((beta, u)))
                combo[key] = combo.get(key, R.zero()) - dv_alpha
            combo = {k: p for k, p in combo.items() if not p.is_zero()}
            if combo:
                bt.set_value(2, [(1, i), (1, j)], combo)
    return q_from_brackets(bt, res)


def check_regular_sequence(phi):
    """The partials form a regular sequence iff their syzygies are generated
    by the alternating ones."""
    R = phi.ring
    n = R.nvars
    partials = [phi.diff(i) for i in range(n)]
    if any(p.is_zero() for p in partials):
        bad = next(i for i, p in enumerate(partials) if p.is_zero())
        unit = [R.zero()] * n
        unit[bad] = R.one()
        raise NotRegularSequence(phi, tuple(unit))
    syz = mod_syzygies([(p,) for p in partials])
    standard = []
    for i in range(n):
        for j in range(i + 1, n):
            v = [R.zero()] * n
            v[i] = partials[j]
            v[j] = -partials[i]
            standard.append(tuple(v))
    lifter = Lifter(standard) if standard else None
    for s in syz:
        if lifter is None or isinstance(lifter.lift(s), NotInModule):
            raise NotRegularSequence(phi, s)


def _koszul_builtin(phi):
    """Canned wedge resolution with the multi-derivative binary bracket;
    higher arities are completed by the extension algorithm (they are only
    canonical up to homotopy, and the displayed normalization of the k-ary
    layers is convention-sensitive)."""
    check_regular_sequence(phi)
    fol = koszul_foliation(phi)
    R = phi.ring
    n = R.nvars
    bases = [list(combinations(range(n), i + 1)) for i in range(1, n)]
    index = [{b: k for k, b in enumerate(lvl)} for lvl in bases]
    names = [["d" + "".join(R.variables[a] for a in A) for A in lvl] for lvl in bases]

    def iota(A):
        """Contraction with d(phi): combo of one-lower wedge basis."""
        out = {}
        for k, a in enumerate(A):
            rest = tuple(b for b in A if b != a)
            c = phi.diff(a).scale((-1) ** k)
            if not c.is_zero():
                out[rest] = out.get(rest, R.zero()) + c
        return out

    anchor = [[R.zero() for _ in bases[0]] for _ in range(n)]
    for col, (i, j) in enumerate(bases[0]):
        anchor[j][col] = anchor[j][col] + phi.diff(i)
        anchor[i][col] = anchor[i][col] - phi.diff(j)
    diffs = []
    for lvl in range(2, n):
        rows, cols = len(bases[lvl - 2]), len(bases[lvl - 1])
        d = [[R.zero() for _ in range(cols)] for _ in range(rows)]
        for col, A in enumerate(bases[lvl - 1]):
            for rest, c in iota(A).items():
                d[index[lvl - 2][rest]][col] = c
        diffs.append(d)
    res = GeomResolution(R, anchor, diffs, section_names=names)
    ring = graded_ring_for(res)
    bt = BracketTable(res, ring)
    _koszul_fill_arity(bt, res, index, phi, 2)
    q01 = q_from_brackets(bt, res)
    q01 = bq_correct_arity1(res, q01)
    q = bq_extend(res, q01)
    return fol, res, q


def koszul_bracket_value(res, index, phi, tuples):
    """Value of the alternating multi-derivative bracket on wedge basis
    sections given as index tuples."""
    R = phi.ring
    k = len(tuples)
    concat = [a for I in tuples for a in I]
    bounds = []
    start = 0
    for I in tuples:
        bounds.append((start, start + len(I)))
        start += len(I)
    combo = {}

    def pick(slot, chosen_positions, deriv):
        if slot == k:
            if deriv.is_zero():
                return
            eps = koszul_sign_of_selection([1] * len(concat), chosen_positions)
            rest = [concat[p] for p in range(len(concat)) if p not in set(chosen_positions)]
            if len(set(rest)) != len(rest):
                return
            sign = 1
            for i, a in enumerate(rest):
                for b in rest[i + 1 :]:
                    if a > b:
                        sign = -sign
            key_tuple = tuple(sorted(rest))
            level = len(key_tuple) - 1
            if level < 1 or level > res.length:
                return
            key = (level, index[level - 1][key_tuple])
            c = combo.get(key, R.zero())
            c = c + deriv.scale(eps * sign)
            if c.is_zero():
                combo.pop(key, None)
            else:
                combo[key] = c
            return
        lo, hi = bounds[slot]
        for p in range(lo, hi):
            nxt = deriv.diff(concat[p])
            if nxt.is_zero():
                continue
            pick(slot + 1, chosen_positions + (p,), nxt)

    pick(0, (), phi)
    return combo


def _koszul_fill_arity(bt, res, index, phi, k):
    from .qfield import _canonical_tuples

    ring = bt.ring
    reverse = [{kk: b for b, kk in lvl.items()} for lvl in index]
    for T in _canonical_tuples(ring, k):
        sids = [ring.source_of(g) for g in T]
        tuples = [reverse[lvl - 1][idx] for (lvl, idx) in sids]
        combo = koszul_bracket_value(res, index, phi, tuples)
        if combo:
            bt.set_value(k, sids, combo)


def bq_builtin(name, params=None):
    """(foliation, resolution, structure) for a canned family; the structure
    is verified before returning."""
    if name == "sl2":
        fol, res, q = _sl2_builtin()
    elif name == "origin":
        fol, res, q = _origin_builtin(int(params))
    elif name == "order2":
        fol, res, q = _order2_builtin()
    elif name == "koszul":
        fol, res, q = _koszul_builtin(params)
    else:
        raise ValueError(f"unknown builtin {name!r}")
    if not is_homological(q):
        raise LiftFailure(f"builtin {name} failed the homological check")
    return fol, res, q


# -- extending a chain map to a strict morphism ------------------------------------


def bq_extend_morphism(phi0, src: AnchoredQ, dst: AnchoredQ, order=DEFAULT_ORDER) -> MorphismData:
    """Extend a chain map to a strict morphism by lifting the defect one
    arity at a time through the target differentials."""
    phi = MorphismData.from_chain_map(phi0, src, dst)
    dst_res = dst.res
    src_q0 = src.arity_part(0)
    lifters = _level_lifters(dst_res, order)
    for n in range(1, max(dst_res.length, 1)):
        defects = morphism_defect(phi, src, dst)
        # base-variable defect at this arity must vanish (anchor square for
        # n = 1, degree bookkeeping above)
        for i in range(dst_res.ring.nvars):
            part = {
                fm: p for fm, p in defects[("x", i)].terms.items() if len(fm) == n
            }
            if part:
                raise RootNotZero(
                    f"anchor compatibility fails on {dst_res.ring.variables[i]}",
                    witness=part,
                )
        c_n = {}
        for gi in range(dst.ring.ngens):
            val = defects[("g", gi)]
            part = {fm: p for fm, p in val.terms.items() if len(fm) == n + 1}
            c_n[gi] = GPoly(src.ring, part) if part else src.ring.zero()
        if all(v.is_zero() for v in c_n.values()):
            continue
        taylor_n = _solve_morphism_level(phi, src, dst, src_q0, c_n, n, lifters)
        taylor = {k: dict(v) for k, v in phi.taylor.items()}
        taylor[n] = taylor_n
        phi = MorphismData(src, dst, taylor)
    if not morphism_is_strict(phi, src, dst):
        raise LiftFailure("internal: extension did not produce a strict morphism")
    return phi


def _solve_morphism_level(phi, src, dst, src_q0, c_n, n, lifters):
    """Solve W Q0_dst - Q0_src W = -c_n level by level; the unknown W is the
    arity-(n+1) Taylor coefficient, valued in functions of src."""
    dst_res = dst.res
    ring_src = src.ring
    ring_dst = dst.ring
    taylor_n = {}
    V = [ring_src.zero() for _ in range(dst_res.rank_at_level(1))]
    for j in range(1, dst_res.length + 1):
        rank_j = dst_res.rank_at_level(j)
        sgn = (-1) ** j
        rhs = []
        for cc in range(rank_j):
            gi = ring_dst.gen_index(j, cc)
            val = src_q0.apply(V[cc]) - c_n[gi]
            rhs.append(val.scale(sgn))
        lifter = lifters(j)
        if lifter is None:
            for cc, v in enumerate(rhs):
                if not v.is_zero():
                    raise LiftFailure(f"morphism defect survives at top level {j}")
            break
        labels = {}
        for cc, v in enumerate(rhs):
            for fm, p in v.terms.items():
                labels.setdefault(fm, [dst_res.ring.zero()] * rank_j)[cc] = p
        rank_next = dst_res.rank_at_level(j + 1)
        Vnext = [ring_src.zero() for _ in range(rank_next)]
        for fm in sorted(labels):
            vec = labels[fm]
            if j == 1:
                img = mat_vec(dst_res.anchor, vec)
                if any(not p.is_zero() for p in img):
                    raise RootNotZero(
                        "morphism defect has a nonzero root", witness=(fm, vec)
                    )
            lift = lifter.lift(vec)
            if isinstance(lift, NotInModule):
                raise LiftFailure(f"morphism lift through level {j + 1} failed")
            for b, coeff in enumerate(lift):
                if not coeff.is_zero():
                    Vnext[b] = Vnext[b] + ring_src.monomial(fm, coeff)
        for b, val in enumerate(Vnext):
            if not val.is_zero():
                taylor_n[ring_dst.gen_index(j + 1, b)] = val
        V = Vnext
    return taylor_n
