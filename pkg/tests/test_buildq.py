import random
from fractions import Fraction

import pytest

from folq.poly import BaseRing
from folq.buildq import (
    bq_almost_lie,
    bq_builtin,
    bq_correct_arity1,
    bq_extend,
    bq_extend_morphism,
    bq_lift_vertical,
    build_structure,
    check_regular_sequence,
    koszul_bracket_value,
    order2_foliation,
    order2_quadratic_candidate,
    origin_foliation,
    sl2_foliation,
    VerticalField,
)
from folq.errors import NotRegularSequence
from folq.foliation import fol_involutivity
from folq.graded import GDerivation, gd_arity_split, gd_commutator
from folq.qfield import (
    MorphismData,
    brackets_from_q,
    combo_str,
    is_homological,
    morphism_is_strict,
    q_verify_homological,
    q_verify_morphism,
)
from folq.resolution import res_build, res_chain_map


@pytest.fixture(scope="module")
def sl2_pipeline():
    fol = sl2_foliation()
    c, res, q = build_structure(fol)
    return fol, c, res, q


def test_almost_lie_sl2_level1_bracket(sl2_pipeline):
    fol, c, res, q = sl2_pipeline
    bt = brackets_from_q(q)
    R = fol.ring
    # {h, e} = 2e, {h, f} = -2f, {e, f} = h survive the correction
    assert bt.value(2, [(1, 0), (1, 1)]) == {(1, 1): R.const(2)}
    assert bt.value(2, [(1, 0), (1, 2)]) == {(1, 2): R.const(-2)}
    assert bt.value(2, [(1, 1), (1, 2)]) == {(1, 0): R.one()}


def test_sl2_pipeline_properties(sl2_pipeline):
    fol, c, res, q = sl2_pipeline
    assert res.ranks == (3, 1)
    assert is_homological(q)
    parts = dict(gd_arity_split(q.derivation))
    assert sorted(parts) == [0, 1]  # nothing beyond the binary layer
    bt = brackets_from_q(q)
    for a in range(3):
        assert bt.value(2, [(1, a), (2, 0)]) == {}


def test_correct_arity1_idempotent_when_closed(sl2_pipeline):
    fol, c, res, q = sl2_pipeline
    again = bq_correct_arity1(res, q)
    assert again.derivation == q.derivation


def test_lift_vertical_zero(sl2_pipeline):
    fol, c, res, q = sl2_pipeline
    ring = q.ring
    Z = GDerivation(ring, 2)
    W = bq_lift_vertical(res, q, Z)
    assert W.is_zero()


def test_lift_vertical_round_trip(sl2_pipeline):
    fol, c, res, q = sl2_pipeline
    ring = q.ring
    rng = random.Random(43)
    q0 = q.arity_part(0)
    # hand-built exact fields: R = [q0, W0] for vertical W0 without level-1
    # target, arity 1
    for _ in range(6):
        gvals = {}
        for a in range(3):
            gi = ring.gen_index(1, a)
            if rng.random() < 0.7:
                c2 = rng.randint(-2, 2)
                if c2:
                    # value on a level-1 dual: arity 2, degree 2 target:
                    # xi_1 * xi_1 coefficients times level-2 dual is degree 3;
                    # use (level-1 dual)*(level-1 dual) landing in nothing ->
                    # instead put a level-2 value: W0 targets level 2 only
                    pass
        w0_gvals = {}
        gi2 = ring.gen_index(2, 0)
        # W0(xi_2) of degree 3 arity 2: products of a level-1 and a level-2 dual
        val = ring.zero()
        for a in range(3):
            cc = rng.randint(-1, 1)
            if cc:
                val = val + ring.gen(ring.gen_index(1, a)) * ring.gen(gi2).scale(cc)
        if val.is_zero():
            continue
        W0 = GDerivation(ring, 1, {}, {gi2: val})
        R = gd_commutator(q0, W0)
        if R.is_zero():
            continue
        W = bq_lift_vertical(res, q, R)
        assert gd_commutator(q0, W) == R
        assert all(
            ring.source_of(g)[0] != 1 for g in W.gvals
        )  # no level-1 target component


def test_order2_candidate_fails_arity2():
    fol = order2_foliation()
    fol2, res, q_full = bq_builtin("order2")
    cand = order2_quadratic_candidate(res)
    q01 = bq_correct_arity1(res, cand)
    rep = q_verify_homological(q01, max_arity=2)
    assert rep[0]["ok"] and rep[1]["ok"]
    assert not rep[2]["ok"]  # nonzero Jacobiator residue


def test_order2_extension(sl2_pipeline):
    fol, res, q = bq_builtin("order2")
    assert res.ranks == (6, 4)
    assert is_homological(q)
    bt = brackets_from_q(q)
    three = bt.tables.get(3, {})
    assert three  # nonzero ternary layer
    origin = (Fraction(0), Fraction(0))
    for combo in three.values():
        for p in combo.values():
            assert p.eval(origin) == 0  # valued in sections vanishing at 0


def test_origin_builtin_matches_regular_rank():
    for n in (2, 3):
        fol, res, q = bq_builtin("origin", n)
        assert res.ranks == tuple(
            n * _binom(n, i) for i in range(1, n + 1)
        )
        assert is_homological(q)
        parts = dict(gd_arity_split(q.derivation))
        assert sorted(parts) == [0, 1]


def test_koszul_builtin_cubic4():
    R4 = BaseRing(["x", "y", "z", "t"])
    phi = sum((R4.var(i) ** 3 for i in range(4)), R4.zero())
    fol, res, q = bq_builtin("koszul", phi)
    assert res.ranks == (6, 4, 1)
    assert is_homological(q)
    parts = dict(gd_arity_split(q.derivation))
    # a cubic has vanishing fourth derivatives: arity 3 is empty
    assert sorted(parts) == [0, 1, 2]
    bt = brackets_from_q(q)
    names = res.section_names[0]
    sids = [(1, names.index(nm)) for nm in ("dxy", "dxz", "dxt")]
    val = bt.value(3, sids)
    # frozen: the derived ternary value on the triple sharing the first slot
    tgt = res.section_names[1].index("dyzt")
    assert val == {(2, tgt): res.ring.const(6)}


def test_koszul_regular_sequence_check():
    R2 = BaseRing(["x", "y"])
    x, y = R2.var(0), R2.var(1)
    with pytest.raises(NotRegularSequence):
        check_regular_sequence(x ** 3)  # d/dy vanishes identically
    with pytest.raises(NotRegularSequence):
        check_regular_sequence(x * x * y)  # common factor x
    check_regular_sequence(x ** 3 + y ** 3)  # fine


def test_koszul_bracket_display_value():
    # the displayed alternating evaluation, independent of any structure
    from itertools import combinations

    R4 = BaseRing(["x", "y", "z", "t"])
    phi = sum((R4.var(i) ** 3 for i in range(4)), R4.zero())
    bases = [list(combinations(range(4), i + 1)) for i in range(1, 4)]
    index = [{b: k for k, b in enumerate(lvl)} for lvl in bases]
    fol, res, q = bq_builtin("koszul", phi)
    combo = koszul_bracket_value(res, index, phi, [(0, 1), (0, 2), (0, 3)])
    tgt = index[1][(1, 2, 3)]
    assert combo == {(2, tgt): R4.const(-6)}


def test_vertical_field_components(sl2_pipeline):
    fol, c, res, q = sl2_pipeline
    ring = q.ring
    gi2 = ring.gen_index(2, 0)
    val = ring.gen(ring.gen_index(1, 0)) * ring.gen(gi2)
    w = VerticalField(GDerivation(ring, 1, {}, {gi2: val}))
    comps = w.components()
    assert len(comps) == 1
    (fm, level), vec = next(iter(comps.items()))
    assert level == 2 and len(vec) == 1


def test_extend_morphism_sl2_inclusion(sl2_pipeline):
    from folq.qfield import BracketTable, graded_ring_for, q_from_brackets
    from folq.resolution import GeomResolution

    fol, res, q = bq_builtin("sl2")
    R = res.ring
    pres = GeomResolution(R, sl2_foliation().anchor_matrix(), [], section_names=[["h", "e", "f"]])
    ring_p = graded_ring_for(pres)
    bt = BracketTable(pres, ring_p)
    bt.set_value(2, [(1, 0), (1, 1)], {(1, 1): R.const(2)})
    bt.set_value(2, [(1, 0), (1, 2)], {(1, 2): R.const(-2)})
    bt.set_value(2, [(1, 1), (1, 2)], {(1, 0): R.one()})
    q_src = q_from_brackets(bt, pres)
    cm = res_chain_map(pres, res)
    phi = bq_extend_morphism(cm, q_src, q)
    assert morphism_is_strict(phi, q_src, q)
    # Taylor coefficients above the chain map vanish here
    assert all(k == 0 for k in phi.taylor)


def test_extend_morphism_origin(sl2_pipeline):
    fol = origin_foliation(2)
    c, res_src, q_src = build_structure(fol)
    fol2, res_dst, q_dst = bq_builtin("origin", 2)
    cm = res_chain_map(res_src, res_dst)
    phi = bq_extend_morphism(cm, q_src, q_dst)
    assert morphism_is_strict(phi, q_src, q_dst)
    rep = q_verify_morphism(phi, q_src, q_dst, max_arity=res_dst.length)
    assert rep["overall"]


def _binom(n, k):
    from math import comb

    return comb(n, k)
