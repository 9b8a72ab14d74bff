"""Weighted algebras: differential saturation, singular loci, tau."""

import random
from fractions import Fraction

import pytest

from charpres.poly import (INF, ClosedPoint, FieldSpec, GenericPoint, MPoly,
                           parse_poly, render_poly)
from charpres.rees import (Pair, ReesAlg, SmallExtField, diff_saturate,
                           ord_at, pair_to_rees, quadratic_rank, sing_member,
                           singular_coordinate_strata, tau_at,
                           tau_translation_oracle)

Q = FieldSpec(0)
F2 = FieldSpec(2)
F3 = FieldSpec(3)
ZXY = ("z", "x", "y")


def P(text, field=Q, names=ZXY):
    return parse_poly(text, field, names)


def alg(field, gens, names=ZXY):
    return ReesAlg.make(field, len(names), [(P(t, field, names), n) for t, n in gens])


ORIGIN = ClosedPoint((0, 0, 0))


def test_make_drops_zero_and_detects_units():
    a = alg(Q, [("0", 2), ("z^2 + x^3", 2)])
    assert [n for _, n in a.gens] == [2]
    u = alg(Q, [("2", 1)])
    assert u.is_unit
    assert ord_at(u, ORIGIN) == 0
    assert not sing_member(u, ORIGIN)
    # a non-constant generator with a unit constant term is not the unit
    # algebra, but no point of V(f) = empty locus near it is singular
    v = alg(Q, [("1 + x", 1)])
    assert not v.is_unit
    assert not sing_member(v, ORIGIN)


def test_trivial_algebra():
    t = ReesAlg.make(Q, 3, [])
    assert t.is_trivial()
    assert ord_at(t, ORIGIN) is INF
    assert sing_member(t, ORIGIN)


def test_saturation_of_cusp():
    a = alg(Q, [("z^2 + x^3", 2)])
    sat = diff_saturate(a)
    got = {(render_poly(f, ZXY), n) for f, n in sat.gens}
    assert got == {("3*x^2", 1), ("2*z", 1), ("x^3 + z^2", 2)}
    # saturating again is a fixpoint
    assert diff_saturate(sat) == sat


def test_saturation_unit_detection():
    # the z-derivative of z + x^2 is the constant 1 at weight 1
    a = alg(Q, [("z + x^2", 2)])
    sat = diff_saturate(a)
    assert sat.is_unit
    # weight 1 admits no derivatives of order below the weight
    b = alg(Q, [("z + x^2", 1)])
    assert diff_saturate(b) == b


def test_relative_saturation():
    f = P("z^2 + x^3 + y^3", F2)
    a = ReesAlg.make(F2, 3, [(f, 2)])
    rel = diff_saturate(a, relative_vars={1})
    got = {(render_poly(g, ZXY), n) for g, n in rel.gens}
    assert got == {("x^2", 1), ("x^3 + y^3 + z^2", 2)}
    # the y-direction stays untouched: no y^2 generator appears
    assert all("y^2" != t for t, _ in got)


def test_singular_strata():
    a = alg(Q, [("z^2 + x^3", 2)])
    sat = diff_saturate(a)
    strata = singular_coordinate_strata(sat)
    assert set(strata) == {frozenset({0, 1}), frozenset({0, 1, 2})}


def test_sing_member_points():
    a = alg(Q, [("z^2 + x^3", 2)])
    assert sing_member(a, ORIGIN)
    assert not sing_member(a, ClosedPoint((1, Fraction(-1), 0)))
    assert sing_member(a, GenericPoint(frozenset({0, 1})))


def test_pair_to_rees():
    pr = Pair((P("z^2 + x^3"),), 2)
    a = pair_to_rees(pr, Q, 3)
    assert a.gens == ((P("z^2 + x^3"), 2),)


def test_tau_char0():
    a = alg(Q, [("z^2 + x^3", 2)])
    td = tau_at(a, ORIGIN)
    assert td.tau == 1
    node = alg(Q, [("z^2 - x*y", 2)])
    assert tau_at(node, ORIGIN).tau == 3
    assert quadratic_rank(P("z^2 - x*y")) == 3
    quad = ReesAlg.make(Q, 2, [(parse_poly("x^2 + y^2", Q, ("x", "y")), 2)])
    assert tau_at(quad, ClosedPoint((0, 0))).tau == 2


def test_tau_rejects_nonsingular_point():
    a = alg(Q, [("z^2 + x^3", 2)])
    with pytest.raises(ValueError):
        tau_at(a, ClosedPoint((0, 1, 0)))


def test_tau_char2_ideal_level():
    # z^2 + xy: the ideal contains z^2 = (z^2+xy) + x*y, so all three
    # directions are vertices even though the form itself is not additive
    a = alg(F2, [("z^2 + x*y", 2)])
    td = tau_at(a, ORIGIN)
    assert td.tau == 3
    for m in (1, 2, 3):
        assert tau_translation_oracle(a, ORIGIN, m) == 3


def test_tau_char2_drops():
    a = alg(F2, [("z^2 + x^2*y", 2)])
    assert tau_at(a, ORIGIN).tau == 1
    for m in (1, 2):
        assert tau_translation_oracle(a, ORIGIN, m) == 1


def test_tau_char3_cube():
    a = alg(F3, [("z^3 + x^3", 3)])
    td = tau_at(a, ORIGIN)
    assert td.tau == 1
    for m in (1, 2):
        assert tau_translation_oracle(a, ORIGIN, m) == 1


def test_tau_quadric_char2_vs_char0():
    names = ("x", "y")
    q2 = ReesAlg.make(F2, 2, [(parse_poly("x^2 + y^2", F2, names), 2)])
    assert tau_at(q2, ClosedPoint((0, 0))).tau == 1
    for m in (1, 2, 3):
        assert tau_translation_oracle(q2, ClosedPoint((0, 0)), m) == 1


def test_small_ext_field_axioms():
    rng = random.Random(7)
    for (p, m) in ((2, 2), (2, 3), (3, 2), (5, 2)):
        K = SmallExtField(p, m)
        els = list(K.elements())
        assert len(els) == p ** m
        for _ in range(60):
            a, b, c = (rng.choice(els) for _ in range(3))
            assert K.mul(a, K.mul(b, c)) == K.mul(K.mul(a, b), c)
            assert K.mul(a, K.add(b, c)) == K.add(K.mul(a, b), K.mul(a, c))
        # Frobenius fixed field is F_p
        fixed = [a for a in els if K.power(a, p) == a]
        assert len(fixed) == p


def test_canonical_generator_order_is_stable():
    a = alg(Q, [("x^3 + z^2", 2), ("2*z", 1), ("3*x^2", 1)])
    b = alg(Q, [("3*x^2", 1), ("x^3 + z^2", 2), ("2*z", 1)])
    assert a == b
