import random
from fractions import Fraction

import pytest

from folq.poly import BaseRing
from folq.buildq import bq_builtin, sl2_foliation
from folq.errors import DegreeMismatch
from folq.graded import GDerivation, gd_arity_split, gd_commutator
from folq.qfield import (
    AnchoredQ,
    BracketTable,
    MorphismData,
    brackets_from_q,
    bt_verify_jacobi,
    graded_ring_for,
    is_homological,
    q_from_brackets,
    q_leibniz_bracket,
    q_root,
    q_verify_homological,
    q_verify_morphism,
    root_is_zero,
)
from folq.resolution import GeomResolution, res_build, res_chain_map


@pytest.fixture(scope="module")
def sl2():
    return bq_builtin("sl2")


@pytest.fixture(scope="module")
def origin2():
    return bq_builtin("origin", 2)


def test_trivial_q_anchor_only():
    # zero differential, zero brackets: only the anchor part survives
    R = BaseRing(["x"])
    res = GeomResolution(R, [[R.one()]], [])
    ring = graded_ring_for(res)
    bt = BracketTable(res, ring)
    q = q_from_brackets(bt, res)
    assert q.derivation.value_on_var(0) == ring.gen(0)
    assert q.derivation.value_on_gen(0).is_zero()
    assert is_homological(q)


def test_sl2_round_trip(sl2):
    fol, res, q = sl2
    bt = brackets_from_q(q)
    q2 = q_from_brackets(bt, res)
    assert q2 == q
    # arities 0 and 1 only
    parts = dict(gd_arity_split(q.derivation))
    assert sorted(parts) == [0, 1]


def test_sl2_mixed_bracket_vanishes(sl2):
    fol, res, q = sl2
    bt = brackets_from_q(q)
    for a in range(3):
        assert bt.value(2, [(1, a), (2, 0)]) == {}


def test_origin_bracket_on_constants(origin2):
    # {x_x, y_y} must be 0, {x_y, y_x} = x_x - y_y (the gl2 relations)
    fol, res, q = origin2
    bt = brackets_from_q(q)
    names = res.section_names[0]
    ix_y = names.index("x_y")
    iy_x = names.index("y_x")
    val = bt.value(2, [(1, ix_y), (1, iy_x)])
    R = res.ring
    assert val == {(1, names.index("x_x")): R.one(), (1, names.index("y_y")): -R.one()}


def test_round_trip_random_tables(origin2):
    # randomized valid-degree tables round trip through the derivation form
    fol, res, q = origin2
    ring = q.ring
    rng = random.Random(19)
    for _ in range(5):
        bt = BracketTable(res, ring)
        # random 2-ary values on level-1 pairs, landing in level 1
        names = res.section_names[0]
        for i in range(len(names)):
            for j in range(i + 1, len(names)):
                combo = {}
                for k in range(len(names)):
                    c = rng.randint(-2, 2)
                    if c:
                        combo[(1, k)] = res.ring.const(c)
                if combo:
                    bt.set_value(2, [(1, i), (1, j)], combo)
        q2 = q_from_brackets(bt, res)
        bt2 = brackets_from_q(q2)
        assert bt2.tables.get(2, {}) == bt.tables.get(2, {})


def test_degree_rule_rejected(origin2):
    fol, res, q = origin2
    bt = BracketTable(res, q.ring)
    with pytest.raises(DegreeMismatch):
        bt.set_value(2, [(1, 0), (1, 1)], {(2, 0): res.ring.one()})


def test_verify_homological_reports(sl2):
    fol, res, q = sl2
    rep = q_verify_homological(q, max_arity=3)
    assert rep["overall"]
    assert all(rep[m]["ok"] for m in range(4))


def test_arity0_only_q_passes():
    # a verified resolution with zero brackets beyond the differential:
    # [Q, Q] = 0 reduces to d.d = 0 and rho.d = 0
    fol = sl2_foliation()
    res = res_build(fol)
    ring = graded_ring_for(res)
    bt = BracketTable(res, ring)
    q = q_from_brackets(bt, res)
    rep = q_verify_homological(q, max_arity=0)
    assert rep[0]["ok"]


def test_jacobi_agreement_on_builtins(sl2, origin2):
    for fol, res, q in (sl2, origin2):
        bt = brackets_from_q(q)
        jrep = bt_verify_jacobi(bt, n_max=res.length + 1)
        qrep = q_verify_homological(q, max_arity=res.length)
        assert jrep["overall"] and qrep["overall"]


def test_jacobi_detects_violation(sl2):
    # break the sl2 table: {e, f} = h but kill {h, e} and {h, f}
    fol, res, q = sl2
    bt = BracketTable(res, q.ring)
    bt.set_value(2, [(1, 1), (1, 2)], {(1, 0): res.ring.one()})
    q_bad = q_from_brackets(bt, res)
    jrep = bt_verify_jacobi(brackets_from_q(q_bad), n_max=3)
    qrep = q_verify_homological(q_bad, max_arity=2)
    assert not jrep["overall"] and not qrep["overall"]
    # same verdict per matched entry: identity on n args <-> arity n-1
    for n in (1, 2, 3):
        assert jrep[n]["ok"] == qrep[n - 1]["ok"]


def test_root_unit_vector(sl2):
    fol, res, q = sl2
    ring = q.ring
    w = ring.partial(ring.gen_index(1, 1))  # dual to the second generator
    root = q_root(w, q)
    assert root == {(): [res.ring.zero(), res.ring.one(), res.ring.zero()]}
    assert not root_is_zero(root, res)


def test_root_of_no_level1_component(sl2):
    fol, res, q = sl2
    ring = q.ring
    w = GDerivation(ring, -2, gvals={ring.gen_index(2, 0): ring.one()})
    assert q_root(w, q) == {}
    assert root_is_zero(q_root(w, q), res)


def test_root_of_q1_squared(sl2, origin2):
    for fol, res, q in (sl2, origin2):
        q1 = q.arity_part(1)
        r = gd_commutator(q1, q1)
        assert not r.xvals  # vertical
        assert root_is_zero(q_root(r, q), res)


def test_leibniz_bracket_sl2(sl2):
    fol, res, q = sl2
    ring = q.ring
    de = ring.partial(ring.gen_index(1, 1))
    df = ring.partial(ring.gen_index(1, 2))
    dh = ring.partial(ring.gen_index(1, 0))
    out = q_leibniz_bracket(q, de, df)
    # dual to {e, f} = h
    assert out.value_on_gen(ring.gen_index(1, 0)) == ring.one()
    assert out.value_on_gen(ring.gen_index(1, 1)).is_zero()
    # Loday identity on a sample triple
    x, y, z = de, df, dh
    lhs = q_leibniz_bracket(q, x, q_leibniz_bracket(q, y, z))
    r1 = q_leibniz_bracket(q, q_leibniz_bracket(q, x, y), z)
    r2 = q_leibniz_bracket(q, y, q_leibniz_bracket(q, x, z))
    assert lhs == r1 + r2


def test_leibniz_bracket_constant_fields_arity0():
    # with no brackets installed, [[Q, X], Y] vanishes for constant duals
    fol = sl2_foliation()
    res = res_build(fol)
    ring = graded_ring_for(res)
    q = q_from_brackets(BracketTable(res, ring), res)
    X = ring.partial(ring.gen_index(1, 0))
    Y = ring.partial(ring.gen_index(1, 1))
    assert q_leibniz_bracket(q, X, Y).is_zero()


def test_morphism_identity(sl2):
    fol, res, q = sl2
    cm = res_chain_map(res, res)
    phi = MorphismData.from_chain_map(cm, q, q)
    rep = q_verify_morphism(phi, q, q, max_arity=res.length)
    assert rep["overall"]


def test_morphism_inclusion_sl2(sl2):
    fol, res, q = sl2
    # rank-3 presentation with the Lie-algebra structure, no level 2
    pres = GeomResolution(res.ring, fol.anchor_matrix(), [], section_names=[["h", "e", "f"]])
    ring_p = graded_ring_for(pres)
    bt = BracketTable(pres, ring_p)
    R = res.ring
    bt.set_value(2, [(1, 0), (1, 1)], {(1, 1): R.const(2)})
    bt.set_value(2, [(1, 0), (1, 2)], {(1, 2): R.const(-2)})
    bt.set_value(2, [(1, 1), (1, 2)], {(1, 0): R.one()})
    q_src = q_from_brackets(bt, pres)
    assert is_homological(q_src)
    cm = res_chain_map(pres, res)
    phi = MorphismData.from_chain_map(cm, q_src, q)
    rep = q_verify_morphism(phi, q_src, q, max_arity=2)
    assert rep["overall"]


def test_morphism_perturbation_detected(sl2):
    fol, res, q = sl2
    cm = res_chain_map(res, res)
    phi = MorphismData.from_chain_map(cm, q, q)
    taylor = {k: dict(v) for k, v in phi.taylor.items()}
    ring = q.ring
    gi = ring.gen_index(1, 0)
    taylor[0][gi] = taylor[0][gi] + ring.gen(ring.gen_index(1, 1))
    phi_bad = MorphismData(q, q, taylor)
    rep = q_verify_morphism(phi_bad, q, q, max_arity=2)
    assert not rep["overall"]
    assert any(not rep[m]["ok"] for m in (0, 1))


def test_anchor_is_bracket_morphism(sl2, origin2):
    from folq.foliation import PolyVectorField

    for fol, res, q in (sl2, origin2):
        bt = brackets_from_q(q)
        R = res.ring
        r1 = res.rank_at_level(1)
        fields = [
            PolyVectorField(R, [res.anchor[i][a] for i in range(R.nvars)])
            for a in range(r1)
        ]
        for a in range(r1):
            for b in range(a + 1, r1):
                combo = bt.value(2, [(1, a), (1, b)])
                acc = [R.zero()] * R.nvars
                for (lvl, c), p in combo.items():
                    if lvl == 1:
                        for i in range(R.nvars):
                            acc[i] = acc[i] + res.anchor[i][c] * p
                want = fields[a].bracket(fields[b]).coefficients
                assert list(want) == acc


def test_bracket_degree_bookkeeping(origin2):
    fol, res, q = origin2
    bt = brackets_from_q(q)
    for n, table in bt.tables.items():
        for T, combo in table.items():
            total = sum(l for (l, _) in T)
            for (lvl, _), p in combo.items():
                if not p.is_zero():
                    assert lvl == total - 1
