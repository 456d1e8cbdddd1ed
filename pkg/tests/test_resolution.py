from fractions import Fraction

import pytest

from folq.poly import BaseRing, mat_col, mat_is_zero, mat_mul
from folq.errors import LiftFailure
from folq.foliation import FoliationPresentation, PolyVectorField, fol_involutivity, fol_rank_at
from folq.groebner import modules_equal
from folq.resolution import (
    GeomResolution,
    res_build,
    res_chain_map,
    res_euler,
    res_minimal_at,
    res_verify,
)


@pytest.fixture
def R():
    return BaseRing(["x", "y"])


def sl2(R):
    x, y = R.var(0), R.var(1)
    return FoliationPresentation(
        R,
        [
            PolyVectorField(R, [x, -y]),
            PolyVectorField(R, [R.zero(), x]),
            PolyVectorField(R, [y, R.zero()]),
        ],
    )


def origin_fol(R):
    x, y = R.var(0), R.var(1)
    z = R.zero()
    return FoliationPresentation(
        R,
        [
            PolyVectorField(R, [x, z]),
            PolyVectorField(R, [y, z]),
            PolyVectorField(R, [z, x]),
            PolyVectorField(R, [z, y]),
        ],
    )


def order2_fol(R):
    x, y = R.var(0), R.var(1)
    z = R.zero()
    monos = [x * x, x * y, y * y]
    return FoliationPresentation(
        R,
        [PolyVectorField(R, [m, z]) for m in monos]
        + [PolyVectorField(R, [z, m]) for m in monos],
    )


def test_build_sl2(R):
    x, y = R.var(0), R.var(1)
    res = res_build(sl2(R))
    assert res.ranks == (3, 1)
    col = mat_col(res.diff_matrix(2), 0)
    assert modules_equal([col], [(x * y, y * y, -(x * x))])


def test_build_regular(R):
    fol = FoliationPresentation(R, [PolyVectorField(R, [R.one(), R.zero()])])
    res = res_build(fol)
    assert res.ranks == (1,)
    assert res.differentials == []


def test_build_order2(R):
    res = res_build(order2_fol(R))
    assert res.ranks == (6, 4)


def test_verify_build_outputs(R):
    for fol in (sl2(R), origin_fol(R), order2_fol(R)):
        res = res_build(fol)
        assert res_verify(res, fol)["ok"]


def test_verify_detects_broken_exactness(R):
    fol = sl2(R)
    res = res_build(fol)
    broken = GeomResolution(R, res.anchor, [])  # drop the level-2 differential
    report = res_verify(broken, fol)
    assert not report["ok"]
    bad = [e for e in report["exactness"] if not e["ok"]]
    assert bad and bad[0]["level"] == 1 and "witness" in bad[0]


def test_euler_values(R):
    assert res_euler(res_build(sl2(R))) == 2
    assert res_euler(res_build(origin_fol(R))) == 2
    assert res_euler(res_build(order2_fol(R))) == 2


def test_euler_matches_regular_rank(R):
    fol = sl2(R)
    res = res_build(fol)
    assert res_euler(res) == fol_rank_at(fol, (Fraction(1), Fraction(2)))


def test_minimal_at_origin_unchanged(R):
    res = res_build(sl2(R))
    loc = res_minimal_at(res, (0, 0))
    assert loc.ranks == (3, 1)
    d = loc.diff_matrix(2)
    zero = (Fraction(0), Fraction(0))
    assert all(f.eval(zero) == 0 for row in d for f in row)


def test_minimal_at_regular_point(R):
    res = res_build(sl2(R))
    loc = res_minimal_at(res, (1, 0))
    assert loc.ranks == (2,)
    assert res_euler(loc) == res_euler(res)


def test_minimal_strips_identity_padding(R):
    # pad the sl2 resolution with an identity summand at levels 2 and 1
    res = res_build(sl2(R))
    one, zero = R.one(), R.zero()
    anchor = [row + [zero] for row in res.anchor]
    d2 = res.diff_matrix(2)
    padded_d2 = [row + [zero] for row in d2] + [[zero, one]]
    padded = GeomResolution(R, anchor, [padded_d2])
    assert padded.ranks == (4, 2)
    loc = res_minimal_at(padded, (0, 0))
    assert loc.ranks == (3, 1)
    assert res_euler(loc) == res_euler(padded)


def test_chain_map_same_resolution(R):
    res = res_build(sl2(R))
    cm = res_chain_map(res, res)
    assert cm.verify()


def test_chain_map_presentation_into_resolution(R):
    fol = sl2(R)
    res = res_build(fol)
    pres = GeomResolution(R, fol.anchor_matrix(), [])
    cm = res_chain_map(pres, res)
    assert cm.verify()
    assert cm.matrix(1) == [[R.one() if i == j else R.zero() for j in range(3)] for i in range(3)]


def test_chain_map_between_origin_resolutions(R):
    # built-by-syzygies vs the wedge-shaped presentation of the same module
    fol = origin_fol(R)
    res_a = res_build(fol)
    res_b = res_build(origin_fol(R))
    cm = res_chain_map(res_a, res_b)
    assert cm.verify()


def test_chain_map_module_mismatch_raises(R):
    x = R.var(0)
    small = FoliationPresentation(R, [PolyVectorField(R, [x, R.zero()])])
    big = sl2(R)
    res_small = res_build(small)
    res_big = res_build(big)
    with pytest.raises(LiftFailure):
        res_chain_map(res_big, res_small)
