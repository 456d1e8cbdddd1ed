"""Pointwise invariants: fiber complexes, their cohomology, the bracket
structure induced at a rational point, and the degree-3 cohomology class
that obstructs a minimal-rank binary model.

Everything here is exact rational linear algebra.  The induced structure at
a point is only extracted from resolutions that are minimal there (all
differentials vanish at the point); callers localize first when needed.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

from .errors import CocycleCheckFailed, NotMinimalAt
from .linalg import mat_is_zero_q, nullspace, rank, solve, solve_or_certificate
from .qfield import AnchoredQ, BracketTable, brackets_from_q, bt_verify_jacobi, graded_ring_for
from .resolution import GeomResolution


class FiberComplex:
    """Rational matrices of the anchor and differentials at a point."""

    __slots__ = ("point", "anchor", "differentials", "dims")

    def __init__(self, point, anchor, differentials, dims):
        self.point = point
        self.anchor = anchor
        self.differentials = differentials
        self.dims = dims

    def diff_at(self, level):
        if 2 <= level <= len(self.differentials) + 1:
            return self.differentials[level - 2]
        return None


def _eval_entry(entry, point):
    return entry.eval(point)


def iso_fiber_complex(res, point) -> FiberComplex:
    """Exact evaluation of all matrices at the point; accepts polynomial or
    localized resolutions."""
    point = tuple(Fraction(c) for c in point)
    anchor = [[_eval_entry(p, point) for p in row] for row in res.anchor]
    dims = list(res.ranks)
    diffs = [
        [[_eval_entry(p, point) for p in row] for row in d]
        for d in res.differentials[: max(0, len(dims) - 1)]
    ]
    # composite identities at the point
    for i, d in enumerate(diffs):
        prev = anchor if i == 0 else diffs[i - 1]
        comp = _q_mat_mul(prev, d)
        if not mat_is_zero_q(comp):
            raise AssertionError("fiber complex composite is nonzero")
    return FiberComplex(point, anchor, diffs, dims)


def _q_mat_mul(A, B):
    if not A or not B:
        return []
    rows, inner, cols = len(A), len(B), len(B[0]) if B else 0
    out = [[Fraction(0)] * cols for _ in range(rows)]
    for i in range(rows):
        for k in range(inner):
            a = A[i][k]
            if a == 0:
                continue
            for j in range(cols):
                out[i][j] += a * B[k][j]
    return out


def iso_cohomology_dims(res, point):
    """{level: dimension} of the fiber cohomology; independent of the
    resolution."""
    fc = iso_fiber_complex(res, point)
    out = {}
    for level in range(1, len(fc.dims) + 1):
        if level == 1:
            out_map = fc.anchor
        else:
            out_map = fc.diff_at(level)
        dim = fc.dims[level - 1]
        ker = dim - (rank(out_map) if out_map else 0)
        into = fc.diff_at(level + 1)
        img = rank(into) if into else 0
        out[level] = ker - img
    return out


class IsotropyLinfty:
    """Finite-dimensional structure at a point: graded dimensions, a chosen
    basis of the level-1 anchor kernel, and rational bracket constants,
    stored as a constant-coefficient bracket table over a zero-differential
    shell so the generic verifier applies."""

    __slots__ = ("point", "dims", "kernel_basis", "shell", "table")

    def __init__(self, point, dims, kernel_basis, shell, table):
        self.point = point
        self.dims = dims
        self.kernel_basis = kernel_basis
        self.shell = shell
        self.table = table

    def dim(self, level):
        return self.dims.get(level, 0)

    def bracket(self, n, sids):
        return self.table.value(n, sids)

    def max_arity(self):
        return self.table.max_arity()

    def all_zero(self):
        return not any(t for n, t in self.table.tables.items() if n >= 2)


def _zero_shell(res, dims, names):
    """Zero-anchor, zero-differential resolution shell with given ranks."""
    R = res.ring
    ranks = [dims.get(level, 0) for level in range(1, max(dims) + 1)] if dims else []
    while ranks and ranks[-1] == 0:
        ranks.pop()
    if not ranks:
        ranks = [0]
    anchor = [[R.zero() for _ in range(ranks[0])] for _ in range(R.nvars)]
    diffs = []
    for level in range(2, len(ranks) + 1):
        diffs.append([[R.zero() for _ in range(ranks[level - 1])] for _ in range(ranks[level - 2])])
    return GeomResolution(R, anchor, diffs, section_names=names)


def iso_linfty(res: GeomResolution, q: AnchoredQ, point) -> IsotropyLinfty:
    """Restrict the structure at a point where the resolution is minimal.

    Degree -1 space: kernel of the anchor at the point, in reduced column
    echelon basis.  Deeper degrees: the full fibers.  All bracket constants
    are re-verified against the higher Jacobi identities over Q."""
    point = tuple(Fraction(c) for c in point)
    fc = iso_fiber_complex(res, point)
    for level in range(2, len(fc.dims) + 1):
        if not mat_is_zero_q(fc.diff_at(level)):
            raise NotMinimalAt(point, level)
    kernel = nullspace(fc.anchor)
    h1 = len(kernel)
    dims = {1: h1}
    for level in range(2, len(fc.dims) + 1):
        dims[level] = fc.dims[level - 1]
    names = [[f"k{i}" for i in range(h1)]]
    for level in range(2, len(fc.dims) + 1):
        names.append([res.name_of(level, i) for i in range(fc.dims[level - 1])])
    shell = _zero_shell(res, dims, names)
    shell_ring = graded_ring_for(shell)
    table = BracketTable(shell, shell_ring)

    src = brackets_from_q(q, max_arity=res.length + 1)
    kernel_cols = [list(v) for v in kernel]  # vectors over the level-1 fiber

    def iso_elements(level):
        if level == 1:
            return [(1, v) for v in kernel_cols]
        dim = dims.get(level, 0)
        units = []
        for i in range(dim):
            e = [Fraction(0)] * dim
            e[i] = Fraction(1)
            units.append((level, e))
        return units

    max_n = res.length + 1
    levels_avail = sorted(dims)
    basis_by_level = {lvl: iso_elements(lvl) for lvl in levels_avail}

    def eval_table(n, picks):
        """picks: list of (level, coordinate vector); returns {orig sid: Fraction}."""
        out = {}

        def rec(k, ids, coeff):
            if coeff == 0:
                return
            if k == len(picks):
                combo = src.value(n, ids)
                for sid, p in combo.items():
                    v = p.eval(point) * coeff
                    if v:
                        out[sid] = out.get(sid, Fraction(0)) + v
                return
            lvl, vec = picks[k]
            for idx, c in enumerate(vec):
                if c:
                    rec(k + 1, ids + [(lvl, idx)], coeff * c)

        rec(0, [], Fraction(1))
        return {sid: v for sid, v in out.items() if v}

    for n in range(2, max_n + 1):
        for pattern in _level_patterns(levels_avail, n):
            for choice in _tuple_choices(basis_by_level, pattern):
                picks = [basis_by_level[lvl][i] for (lvl, i) in choice]
                raw = eval_table(n, picks)
                if not raw:
                    continue
                combo = {}
                lvl1_part = [Fraction(0)] * fc.dims[0]
                for (lvl, idx), v in raw.items():
                    if lvl == 1:
                        lvl1_part[idx] += v
                    else:
                        combo[(lvl, idx)] = combo.get((lvl, idx), Fraction(0)) + v
                if any(lvl1_part):
                    coords = _in_kernel_coordinates(kernel_cols, lvl1_part)
                    if coords is None:
                        raise AssertionError(
                            "bracket value leaves the anchor kernel at the point"
                        )
                    for i, c in enumerate(coords):
                        if c:
                            combo[(1, i)] = combo.get((1, i), Fraction(0)) + c
                combo = {
                    sid: res.ring.const(v) for sid, v in sorted(combo.items()) if v
                }
                if combo:
                    table.set_value(n, [sid for sid in choice], combo)

    iso = IsotropyLinfty(point, dims, kernel_cols, shell, table)
    report = bt_verify_jacobi(table, n_max=max_n)
    if not report["overall"]:
        raise AssertionError("restricted structure fails the Jacobi suite")
    return iso


def _level_patterns(levels, n):
    """Nondecreasing level tuples of length n."""
    out = []

    def rec(start, cur):
        if len(cur) == n:
            out.append(tuple(cur))
            return
        for lvl in levels:
            if cur and lvl < cur[-1]:
                continue
            rec(lvl, cur + [lvl])

    rec(0, [])
    return out


def _tuple_choices(basis_by_level, pattern):
    """Canonical index choices for a level pattern: nondecreasing within
    equal levels, strictly increasing for odd levels."""
    out = []

    def rec(k, cur):
        if k == len(pattern):
            out.append(tuple(cur))
            return
        lvl = pattern[k]
        start = 0
        if cur and cur[-1][0] == lvl:
            start = cur[-1][1] + (1 if lvl % 2 else 0)
        for i in range(start, len(basis_by_level[lvl])):
            rec(k + 1, cur + [(lvl, i)])

    rec(0, [])
    return out


def _in_kernel_coordinates(kernel_cols, vec):
    if not kernel_cols:
        return None if any(vec) else []
    A = [[kernel_cols[j][i] for j in range(len(kernel_cols))] for i in range(len(vec))]
    return solve(A, vec)


# -- the degree-3 class -------------------------------------------------------------


class CEData:
    """g = degree -1 constants, W = degree -2 module data, and the 3-cochain."""

    __slots__ = ("g_dim", "w_dim", "bracket", "action", "cocycle")

    def __init__(self, g_dim, w_dim, bracket, action, cocycle):
        self.g_dim = g_dim
        self.w_dim = w_dim
        self.bracket = bracket  # (i, j) i<j -> vector over g
        self.action = action  # (i, w) -> vector over W
        self.cocycle = cocycle  # (i, j, k) i<j<k -> vector over W

    def bracket_vec(self, i, j):
        if i == j:
            return [Fraction(0)] * self.g_dim
        if i < j:
            return self.bracket.get((i, j), [Fraction(0)] * self.g_dim)
        v = self.bracket.get((j, i), [Fraction(0)] * self.g_dim)
        return [-x for x in v]

    def act(self, i, wvec):
        out = [Fraction(0)] * self.w_dim
        for w, c in enumerate(wvec):
            if c:
                col = self.action.get((i, w))
                if col:
                    for t in range(self.w_dim):
                        out[t] += c * col[t]
        return out

    def cocycle_vec(self, i, j, k):
        key = tuple(sorted((i, j, k)))
        if len(set(key)) < 3:
            return [Fraction(0)] * self.w_dim
        v = self.cocycle.get(key, [Fraction(0)] * self.w_dim)
        sign = _perm_sign((i, j, k))
        return v if sign > 0 else [-x for x in v]


def _perm_sign(t):
    sign = 1
    lst = list(t)
    for a in range(len(lst)):
        for b in range(a + 1, len(lst)):
            if lst[a] > lst[b]:
                sign = -sign
    return sign


def iso_nmrla_cocycle(iso: IsotropyLinfty) -> CEData:
    """Extract the degree -1 bracket, its action on degree -2, and the
    restriction of the ternary bracket; check the cocycle condition."""
    g = iso.dim(1)
    w = iso.dim(2)
    bracket = {}
    action = {}
    cocycle = {}
    for i in range(g):
        for j in range(i + 1, g):
            combo = iso.bracket(2, [(1, i), (1, j)])
            vec = [Fraction(0)] * g
            for (lvl, idx), p in combo.items():
                if lvl == 1:
                    vec[idx] = p.constant_value()
            if any(vec):
                bracket[(i, j)] = vec
    for i in range(g):
        for t in range(w):
            combo = iso.bracket(2, [(1, i), (2, t)])
            vec = [Fraction(0)] * w
            for (lvl, idx), p in combo.items():
                if lvl == 2:
                    vec[idx] = p.constant_value()
            if any(vec):
                action[(i, t)] = vec
    for i in range(g):
        for j in range(i + 1, g):
            for k in range(j + 1, g):
                combo = iso.bracket(3, [(1, i), (1, j), (1, k)])
                vec = [Fraction(0)] * w
                for (lvl, idx), p in combo.items():
                    if lvl == 2:
                        vec[idx] = p.constant_value()
                if any(vec):
                    cocycle[(i, j, k)] = vec
    ce = CEData(g, w, bracket, action, cocycle)
    _check_action_is_module(ce)
    if not _ce_d3_is_zero(ce):
        raise CocycleCheckFailed("extracted 3-cochain is not closed")
    return ce


def _check_action_is_module(ce: CEData):
    """pi([x,y]) = pi(x)pi(y) - pi(y)pi(x) on basis pairs."""
    for i in range(ce.g_dim):
        for j in range(i + 1, ce.g_dim):
            for t in range(ce.w_dim):
                unit = [Fraction(0)] * ce.w_dim
                unit[t] = Fraction(1)
                lhs = [Fraction(0)] * ce.w_dim
                br = ce.bracket_vec(i, j)
                for k, c in enumerate(br):
                    if c:
                        col = ce.action.get((k, t))
                        if col:
                            for s in range(ce.w_dim):
                                lhs[s] += c * col[s]
                rhs = [
                    a - b
                    for a, b in zip(ce.act(i, ce.act(j, unit)), ce.act(j, ce.act(i, unit)))
                ]
                if lhs != rhs:
                    raise CocycleCheckFailed("degree -2 space is not a module")


def _ce_theta_d(ce: CEData, theta):
    """CE differential of a 2-cochain theta: {(i,j): vector over W}."""

    def theta_vec(i, j):
        if i == j:
            return [Fraction(0)] * ce.w_dim
        if i < j:
            return theta.get((i, j), [Fraction(0)] * ce.w_dim)
        return [-x for x in theta.get((j, i), [Fraction(0)] * ce.w_dim)]

    out = {}
    for i in range(ce.g_dim):
        for j in range(i + 1, ce.g_dim):
            for k in range(j + 1, ce.g_dim):
                val = [Fraction(0)] * ce.w_dim
                # action terms
                for s, (a, b, c) in (
                    (1, (i, j, k)),
                    (-1, (j, i, k)),
                    (1, (k, i, j)),
                ):
                    tv = theta_vec(b, c)
                    av = ce.act(a, tv)
                    for t in range(ce.w_dim):
                        val[t] += s * av[t]
                # bracket terms
                for s, (a, b, c) in (
                    (-1, (i, j, k)),
                    (1, (i, k, j)),
                    (-1, (j, k, i)),
                ):
                    br = ce.bracket_vec(a, b)
                    for m, cm in enumerate(br):
                        if cm:
                            tv = theta_vec(m, c)
                            for t in range(ce.w_dim):
                                val[t] += s * cm * tv[t]
                if any(val):
                    out[(i, j, k)] = val
    return out


def _ce_d3_is_zero(ce: CEData) -> bool:
    """delta c = 0 on basis quadruples."""
    g = ce.g_dim
    for quad in combinations(range(g), 4):
        val = [Fraction(0)] * ce.w_dim
        x = list(quad)
        for pos in range(4):
            rest = x[:pos] + x[pos + 1 :]
            cv = ce.cocycle_vec(*rest)
            av = ce.act(x[pos], cv)
            s = (-1) ** pos
            for t in range(ce.w_dim):
                val[t] += s * av[t]
        for p1 in range(4):
            for p2 in range(p1 + 1, 4):
                rest = [x[m] for m in range(4) if m not in (p1, p2)]
                br = ce.bracket_vec(x[p1], x[p2])
                s = (-1) ** (p1 + p2)
                for m, cm in enumerate(br):
                    if cm:
                        cv = ce.cocycle_vec(m, rest[0], rest[1])
                        for t in range(ce.w_dim):
                            val[t] += s * cm * cv[t]
        if any(val):
            return False
    return True


def iso_ce_class_vanishes(ce: CEData):
    """Solve delta theta = c.  Returns (True, theta) or (False, certificate);
    the certificate is a rational functional annihilating all coboundaries
    but not c."""
    pairs = list(combinations(range(ce.g_dim), 2))
    triples = list(combinations(range(ce.g_dim), 3))
    if not triples or ce.w_dim == 0 or not ce.cocycle:
        return True, {}
    ncols = len(pairs) * ce.w_dim
    nrows = len(triples) * ce.w_dim
    A = [[Fraction(0)] * ncols for _ in range(nrows)]
    for cidx, (pair, t) in enumerate((p, t) for p in pairs for t in range(ce.w_dim)):
        theta = {pair: [Fraction(int(s == t)) for s in range(ce.w_dim)]}
        img = _ce_theta_d(ce, theta)
        for ridx, (tri, s) in enumerate((tr, s) for tr in triples for s in range(ce.w_dim)):
            v = img.get(tri)
            if v is not None and v[s]:
                A[ridx][cidx] = v[s]
    b = []
    for tri in triples:
        cv = ce.cocycle_vec(*tri)
        b.extend(cv)
    sol, cert = solve_or_certificate(A, b)
    if sol is None:
        return False, cert
    theta = {}
    for cidx, (pair, t) in enumerate((p, t) for p in pairs for t in range(ce.w_dim)):
        if sol[cidx]:
            theta.setdefault(pair, [Fraction(0)] * ce.w_dim)[t] = sol[cidx]
    return True, theta


def iso_minimal_rank_verdict(res_min, iso: IsotropyLinfty, ce: CEData):
    """Report the minimal rank and whether the class obstructs a binary
    model of that rank near the point."""
    ranks = res_min.ranks
    r = ranks[0] if ranks else 0
    vanishes, payload = iso_ce_class_vanishes(ce)
    if vanishes:
        verdict = "inconclusive: the degree-3 class vanishes"
    else:
        verdict = (
            f"no rank-{r} Lie algebroid induces this foliation near the point"
        )
    return {
        "rank": r,
        "class_vanishes": vanishes,
        "witness": None if vanishes else _cert_str(payload),
        "primitive": _theta_str(payload) if vanishes else None,
        "verdict": verdict,
    }


def _cert_str(cert):
    return "[" + ", ".join(str(c) for c in cert) + "]"


def _theta_str(theta):
    if not theta:
        return "0"
    return "; ".join(
        f"theta[{i},{j}] = (" + ", ".join(str(x) for x in vec) + ")"
        for (i, j), vec in sorted(theta.items())
    )
