"""Free resolutions of a foliation by iterated syzygies.

A GeomResolution stores the anchor matrix (columns = images of the level-1
basis as vector fields) and the differentials d[i]: level i+2 -> level i+1
(columns = images of basis sections).  Verification checks the complex
identities, module equality at level 1, and exactness by lifting syzygy
generators one level up.

Minimalization at a rational point works over the local ring: entries become
fractions whose denominators do not vanish at the point.
"""

from __future__ import annotations

import warnings
from fractions import Fraction

from .errors import LengthExceeded, LiftFailure, NotInModule, PivotFailure
from .foliation import FoliationPresentation
from .groebner import (
    DEFAULT_ORDER,
    Lifter,
    me_is_zero,
    me_normalize,
    me_str,
    mod_syzygies,
    modules_equal,
)
from .poly import BaseRing, Poly, mat_col, mat_mul, mat_is_zero


class GeomResolution:
    """ranks[k] = rank of level k+1; anchor is n x ranks[0]; differentials[i]
    maps level i+2 into level i+1 (ranks[i] rows, ranks[i+1] columns)."""

    __slots__ = ("ring", "anchor", "differentials", "section_names")

    def __init__(self, ring: BaseRing, anchor, differentials, section_names=None):
        self.ring = ring
        self.anchor = anchor
        self.differentials = list(differentials)
        r = len(anchor[0]) if anchor else 0
        for d in self.differentials:
            if len(d) != r:
                raise ValueError("differential rows must match the previous rank")
            r = len(d[0]) if d else 0
        self.section_names = section_names

    @property
    def ranks(self):
        out = [len(self.anchor[0]) if self.anchor else 0]
        for d in self.differentials:
            out.append(len(d[0]) if d else 0)
        return tuple(out)

    @property
    def length(self):
        return len(self.ranks)

    def rank_at_level(self, level):
        ranks = self.ranks
        return ranks[level - 1] if 1 <= level <= len(ranks) else 0

    def diff_matrix(self, level):
        """Matrix of d at the given source level (level >= 2)."""
        if 2 <= level <= self.length:
            return self.differentials[level - 2]
        return None

    def name_of(self, level, index):
        if self.section_names and level - 1 < len(self.section_names):
            return self.section_names[level - 1][index]
        return f"e{level}_{index}"

    def anchor_columns(self):
        return [mat_col(self.anchor, j) for j in range(self.rank_at_level(1))]


def res_build(fol: FoliationPresentation, max_length=None, order=DEFAULT_ORDER):
    """Level-1 module on the generators, then iterated syzygies until they
    vanish.  Warns past nvars+1 levels, raises LengthExceeded at max_length."""
    ring = fol.ring
    if max_length is None:
        max_length = ring.nvars + 4
    anchor = fol.anchor_matrix()
    differentials = []
    cols = fol.columns()
    level = 1
    while True:
        syz = mod_syzygies(cols, order)
        syz = [me_normalize(s) for s in syz]
        if not syz:
            break
        level += 1
        if level > max_length:
            raise LengthExceeded(
                f"nonzero syzygies remain at level {level} (max_length={max_length})"
            )
        if level > ring.nvars + 1:
            warnings.warn(
                f"resolution length {level} exceeds nvars+1 = {ring.nvars + 1}",
                stacklevel=2,
            )
        rank_prev = len(cols)
        d = [[syz[j][i] for j in range(len(syz))] for i in range(rank_prev)]
        differentials.append(d)
        cols = syz
    return GeomResolution(ring, anchor, differentials)


def res_euler(res: GeomResolution) -> int:
    return sum((-1) ** i * r for i, r in enumerate(res.ranks))


def res_verify(res: GeomResolution, fol: FoliationPresentation, order=DEFAULT_ORDER):
    """Complex identities, level-1 module equality, exactness at each level.

    Returns a report dict with an overall 'ok' flag; failures carry a level
    and a witness string."""
    report = {"complex": [], "anchor_module": None, "exactness": [], "ok": True}

    def fail(section, entry):
        report[section].append(entry)
        report["ok"] = False

    # (a) composite identities
    prev = res.anchor
    for lvl in range(2, res.length + 1):
        d = res.diff_matrix(lvl)
        comp = mat_mul(prev, d)
        if mat_is_zero(comp):
            report["complex"].append({"level": lvl, "ok": True})
        else:
            fail("complex", {"level": lvl, "ok": False, "witness": _first_nonzero(comp)})
        prev = d

    # (b) level-1 module equality
    same = modules_equal(res.anchor_columns(), fol.columns(), order)
    report["anchor_module"] = {"ok": same}
    report["ok"] = report["ok"] and same

    # (c) exactness: syzygies of the map out of each level lift through the
    # map into it
    for lvl in range(1, res.length + 1):
        cols = (
            res.anchor_columns()
            if lvl == 1
            else [mat_col(res.diff_matrix(lvl), j) for j in range(res.rank_at_level(lvl))]
        )
        syz = mod_syzygies(cols, order)
        d_next = res.diff_matrix(lvl + 1)
        if d_next is None:
            ok = not syz
            entry = {"level": lvl, "ok": ok}
            if not ok:
                entry["witness"] = me_str(syz[0])
            report["exactness"].append(entry)
            report["ok"] = report["ok"] and ok
            continue
        next_cols = [mat_col(d_next, j) for j in range(res.rank_at_level(lvl + 1))]
        lifter = Lifter(next_cols, order)
        bad = None
        for sgen in syz:
            if isinstance(lifter.lift(sgen), NotInModule):
                bad = sgen
                break
        entry = {"level": lvl, "ok": bad is None}
        if bad is not None:
            entry["witness"] = me_str(bad)
        report["exactness"].append(entry)
        report["ok"] = report["ok"] and entry["ok"]
    return report


def _first_nonzero(mat):
    for i, row in enumerate(mat):
        for j, p in enumerate(row):
            if not p.is_zero():
                return f"entry ({i}, {j}) = {p}"
    return None


# -- localized matrices -----------------------------------------------------------


class LocFrac:
    """Fraction p/q of base polynomials with q nonvanishing at the point of
    the owning localization.  No gcd reduction; sizes stay small here."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly):
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        self.num = num
        self.den = den

    @staticmethod
    def of(p: Poly):
        return LocFrac(p, p.ring.one())

    def is_poly(self):
        return self.den.is_constant()

    def as_poly(self):
        return self.num.scale(1 / self.den.constant_value())

    def eval(self, point):
        d = self.den.eval(point)
        if d == 0:
            raise ZeroDivisionError("denominator vanishes at the point")
        return self.num.eval(point) / d

    def is_zero(self):
        return self.num.is_zero()

    def __add__(self, other):
        return LocFrac(self.num * other.den + other.num * self.den, self.den * other.den)

    def __sub__(self, other):
        return LocFrac(self.num * other.den - other.num * self.den, self.den * other.den)

    def __mul__(self, other):
        return LocFrac(self.num * other.num, self.den * other.den)

    def __neg__(self):
        return LocFrac(-self.num, self.den)

    def inverse_at(self, point):
        if self.num.eval(point) == 0:
            raise ZeroDivisionError("not a unit at the point")
        return LocFrac(self.den, self.num)

    def __str__(self):
        if self.is_poly():
            return str(self.as_poly())
        return f"({self.num})/({self.den})"

    def __repr__(self):
        return f"LocFrac({self})"


class LocalResolution:
    """Resolution with LocFrac entries, minimal at its point."""

    __slots__ = ("ring", "point", "anchor", "differentials")

    def __init__(self, ring, point, anchor, differentials):
        self.ring = ring
        self.point = point
        self.anchor = anchor
        self.differentials = differentials

    @property
    def ranks(self):
        out = [len(self.anchor[0]) if self.anchor else 0]
        for d in self.differentials:
            out.append(len(d[0]) if d else 0)
        while out and out[-1] == 0:
            out.pop()
        return tuple(out)

    @property
    def length(self):
        return len(self.ranks)

    def diff_matrix(self, level):
        if 2 <= level <= len(self.differentials) + 1:
            return self.differentials[level - 2]
        return None


def _loc_matrix(mat):
    return [[LocFrac.of(p) for p in row] for row in mat]


def res_minimal_at(res: GeomResolution, point):
    """Cancel unit entries of the differentials at the point until all of
    them vanish there; exactness near the point is preserved.

    Works over the local ring: entries become LocFrac with denominators
    nonvanishing at the point."""
    point = tuple(Fraction(c) for c in point)
    anchor = _loc_matrix(res.anchor)
    diffs = [_loc_matrix(d) for d in res.differentials]

    def find_pivot():
        # any entry nonzero at the point is a unit of the local ring; the
        # PivotFailure guard is kept for impossible internal states
        for li, d in enumerate(diffs):
            for i, row in enumerate(d):
                for j, f in enumerate(row):
                    if not f.is_zero() and f.eval(point) != 0:
                        return li, i, j
        return None

    while True:
        hit = find_pivot()
        if hit is None:
            break
        li, r, c = hit
        d = diffs[li]
        u = d[r][c]
        uinv = u.inverse_at(point)
        ncols = len(d[0])
        nrows = len(d)
        # column operations: clear row r outside the pivot
        for c2 in range(ncols):
            if c2 == c or d[r][c2].is_zero():
                continue
            lam = d[r][c2] * uinv
            for i in range(nrows):
                d[i][c2] = d[i][c2] - lam * d[i][c]
            # source basis change transposes onto the rows of the next map
            if li + 1 < len(diffs):
                nxt = diffs[li + 1]
                for j in range(len(nxt[0]) if nxt else 0):
                    nxt[c][j] = nxt[c][j] + lam * nxt[c2][j]
        # row operations: clear column c outside the pivot
        for r2 in range(nrows):
            if r2 == r or d[r2][c].is_zero():
                continue
            lam = d[r2][c] * uinv
            for j in range(ncols):
                d[r2][j] = d[r2][j] - lam * d[r][j]
            # target basis change transposes onto the columns of the
            # outgoing map (previous differential, or the anchor)
            out_mat = diffs[li - 1] if li > 0 else anchor
            for i in range(len(out_mat)):
                out_mat[i][r] = out_mat[i][r] + lam * out_mat[i][r2]
        # the split-off summand must leave zero traces (composites are zero
        # and the pivot is invertible, so these vanish identically)
        out_mat = diffs[li - 1] if li > 0 else anchor
        for i in range(len(out_mat)):
            if not out_mat[i][r].is_zero():
                raise AssertionError("outgoing column of a cancelled summand is nonzero")
        if li + 1 < len(diffs):
            nxt = diffs[li + 1]
            for j in range(len(nxt[0]) if nxt else 0):
                if not nxt[c][j].is_zero():
                    raise AssertionError("incoming row of a cancelled summand is nonzero")
        # drop basis vector r at level li+1 and basis vector c at level li+2
        diffs[li] = [
            [f for j, f in enumerate(row) if j != c]
            for i, row in enumerate(d)
            if i != r
        ]
        if li > 0:
            diffs[li - 1] = [[f for j, f in enumerate(row) if j != r] for row in diffs[li - 1]]
        else:
            anchor = [[f for j, f in enumerate(row) if j != r] for row in anchor]
        if li + 1 < len(diffs):
            diffs[li + 1] = [row for i, row in enumerate(diffs[li + 1]) if i != c]

    while diffs and not any(diffs[-1]):
        diffs.pop()
    while diffs and diffs[-1] and len(diffs[-1][0]) == 0:
        diffs.pop()
    return LocalResolution(res.ring, point, anchor, diffs)


# -- chain maps -------------------------------------------------------------------


class ChainMap:
    """maps[i]: level i+1 of the source into level i+1 of the target."""

    __slots__ = ("src", "dst", "maps")

    def __init__(self, src: GeomResolution, dst: GeomResolution, maps):
        self.src = src
        self.dst = dst
        self.maps = list(maps)

    def matrix(self, level):
        if 1 <= level <= len(self.maps):
            return self.maps[level - 1]
        return None

    def verify(self):
        """Exact commutation: rho_dst phi_1 = rho_src and
        d_dst phi_i = phi_{i-1} d_src.  Missing maps count as zero."""
        lhs = mat_mul(self.dst.anchor, self.maps[0])
        if lhs != self.src.anchor:
            return False
        for lvl in range(2, self.src.length + 1):
            d_src = self.src.diff_matrix(lvl)
            phi = self.matrix(lvl)
            phi_prev = self.matrix(lvl - 1)
            d_dst = self.dst.diff_matrix(lvl)
            left = mat_mul(d_dst, phi) if (d_dst and phi) else []
            right = mat_mul(phi_prev, d_src) if phi_prev else []
            if not _mats_match(left, right):
                return False
        return True


def _mats_match(a, b):
    """Equality where [] stands for any zero matrix."""
    if not a or mat_is_zero(a):
        return not b or mat_is_zero(b)
    if not b or mat_is_zero(b):
        return False
    return a == b


def res_chain_map(src: GeomResolution, dst: GeomResolution, order=DEFAULT_ORDER):
    """Lift the identity on the foliation to a map of complexes src -> dst.

    dst must be exact; src only needs to be a complex whose anchor columns
    lie in the module of dst's anchor columns."""
    maps = []
    lifter = Lifter(dst.anchor_columns(), order)
    phi_cols = []
    for col in src.anchor_columns():
        lift = lifter.lift(col)
        if isinstance(lift, NotInModule):
            raise LiftFailure("source anchor column does not lift; module mismatch")
        phi_cols.append(lift)
    maps.append([[phi_cols[j][i] for j in range(len(phi_cols))] for i in range(dst.rank_at_level(1))])

    for lvl in range(2, src.length + 1):
        d_src = src.diff_matrix(lvl)
        pushed = mat_mul(maps[-1], d_src)
        d_dst = dst.diff_matrix(lvl)
        if d_dst is None:
            if not mat_is_zero(pushed):
                raise LiftFailure(f"no target level {lvl} but the pushed map is nonzero")
            maps.append([])
            break
        dst_cols = [mat_col(d_dst, j) for j in range(dst.rank_at_level(lvl))]
        lifter = Lifter(dst_cols, order)
        cols = []
        for j in range(src.rank_at_level(lvl)):
            lift = lifter.lift(mat_col(pushed, j))
            if isinstance(lift, NotInModule):
                raise LiftFailure(f"chain square at level {lvl} does not lift")
            cols.append(lift)
        maps.append(
            [[cols[j][i] for j in range(len(cols))] for i in range(dst.rank_at_level(lvl))]
        )

    cm = ChainMap(src, dst, maps)
    if not cm.verify():
        raise LiftFailure("constructed chain map fails a commutation square")
    return cm
