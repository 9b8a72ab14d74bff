"""Slopes, normal forms, membership, H-orders, coefficient elimination."""

from fractions import Fraction

import pytest

from charpres.errors import (DegenerateSlopeError, NotNormalFormError,
                             PermissibilityError)
from charpres.poly import (INF, ClosedPoint, FieldSpec, GenericPoint,
                           parse_poly, render_poly, weighted_initial_form)
from charpres.projection import (PPresentation, Presentation,
                                 SimplifiedPresentation, coefficient_elim,
                                 fiber_point, hord, hord_data, is_normal_at,
                                 is_nth_power, make_p_presentation,
                                 membership_criterion, normalize, slope_poly,
                                 slope_presentation, upstairs_algebra)
from charpres.rees import ReesAlg, sing_member

Q = FieldSpec(0)
F2 = FieldSpec(2)
F3 = FieldSpec(3)
F5 = FieldSpec(5)
ZXY = ("z", "x", "y")
ORIGIN = ClosedPoint((0, 0, 0))


def P(text, field=Q, names=ZXY):
    return parse_poly(text, field, names)


def ealg(field, gens, names=ZXY):
    return ReesAlg.make(field, len(names), [(P(t, field, names), n) for t, n in gens])


def pres1(text, field=Q, elim_gens=None):
    f = P(text, field)
    if elim_gens is None:
        elim = coefficient_elim(f, 0)
    else:
        elim = ealg(field, elim_gens)
    return Presentation(field, 3, 0, f, elim)


def test_slope_poly_values():
    assert slope_poly(P("z^2 + x^3"), 0, ORIGIN) == Fraction(3, 2)
    assert slope_poly(P("z^2 + x*y"), 0, ORIGIN) == 1
    assert slope_poly(P("z^2 + 2*x*z + x^2 + x^3"), 0, ORIGIN) == 1
    assert slope_poly(P("z^3"), 0, ORIGIN) is INF
    # off-origin slope is measured after translation
    assert slope_poly(P("z^2 + x^2*y"), 0, ClosedPoint((0, 0, 1))) == 1
    # generic points use the coordinate order
    assert slope_poly(P("z^2 + x^2*y^3"), 0, GenericPoint(frozenset({2}))) == Fraction(3, 2)


def test_is_nth_power():
    W = weighted_initial_form(P("z^2 + 2*x*z + x^2 + x^3"), 0, ORIGIN, Fraction(1))
    root = is_nth_power(W)
    assert root == P("x")
    # char 2: x^3 has no square root
    W2 = weighted_initial_form(P("z^2 + x^3", F2), 0, ORIGIN, Fraction(3, 2))
    assert is_nth_power(W2) is None
    # char 5, n = p: the p-th root comes from the constant coefficient
    f5 = (P("z + x", F5) ** 5) + P("x^6", F5)
    W5 = weighted_initial_form(f5, 0, ORIGIN, Fraction(1))
    assert is_nth_power(W5) == P("x", F5)


def test_normalize_char0():
    pres = pres1("z^2 + 2*x*z + x^2 + x^3", elim_gens=[])
    res = normalize(pres, ORIGIN)
    assert render_poly(res.presentation.f, ZXY) == "x^3 + z^2"
    assert res.record.iterations == 1
    assert res.record.slopes == (Fraction(1), Fraction(3, 2))
    assert [render_poly(a, ZXY) for a in res.record.substitutions] == ["x"]


def test_normalize_already_normal():
    pres = pres1("z^2 + x^3", F2, elim_gens=[])
    res = normalize(pres, ORIGIN)
    assert res.record.iterations == 0
    assert res.presentation.f == P("z^2 + x^3", F2)


def test_normalize_char5_artin_style():
    f = (P("z + x", F5) ** 5) + P("x^6", F5)
    pres = Presentation(F5, 3, 0, f, ReesAlg.make(F5, 3, []))
    res = normalize(pres, ORIGIN)
    assert res.presentation.f == P("z^5 + x^6", F5)
    assert res.record.slope == Fraction(6, 5)


def test_normalize_iteration_cap():
    pres = pres1("z^2 + 2*x*z + x^2 + x^3", elim_gens=[])
    with pytest.raises(DegenerateSlopeError):
        normalize(pres, ORIGIN, max_iters=0)


def test_normalize_off_origin():
    # translate the char-0 example to (0, 1, 0): same intrinsic slope
    f = P("z^2 + 2*x*z + x^2 + x^3").translate((0, -1, 0))
    pres = Presentation(Q, 3, 0, f, ReesAlg.make(Q, 3, []))
    res = normalize(pres, ClosedPoint((0, 1, 0)))
    assert res.record.slope == Fraction(3, 2)


def test_slope_presentation_caps_at_elim():
    pres = pres1("z^2 + x^3", elim_gens=[("x^2", 2)])
    assert slope_presentation(pres, ORIGIN) == 1     # eord = 1 caps 3/2


def test_membership_criterion():
    pres = pres1("z^2 + x*y")
    assert membership_criterion(pres, ORIGIN) is True
    assert membership_criterion(pres, ClosedPoint((0, 1, 0))) is False
    gen = pres1("z^2 + x^2*y^3")
    assert membership_criterion(gen, GenericPoint(frozenset({2}))) is True


def test_membership_off_origin_char3():
    pres = pres1("z^2 + x^3 + y^3", F3)
    # (1, 2) lies on the singular anti-diagonal x + y = 0
    assert membership_criterion(pres, ClosedPoint((0, 1, 2))) is True
    assert membership_criterion(pres, ClosedPoint((0, 1, 1))) is False


def test_membership_requires_normal_form():
    f = P("z^2 + 2*x*z + x^2 + x^5")
    pres = Presentation(Q, 3, 0, f, ealg(Q, [("x^5", 2)]))
    assert not is_normal_at(pres, ORIGIN)
    with pytest.raises(NotNormalFormError):
        membership_criterion(pres, ORIGIN)


def test_membership_matches_upstairs():
    pres = pres1("z^2 + x^3 + y^3", F3)
    for a in range(3):
        for b in range(3):
            y = ClosedPoint((0, a, b))
            res = normalize(pres, y)
            member = membership_criterion(res.presentation, y)
            up = sing_member(upstairs_algebra(res.presentation),
                             fiber_point(res.presentation, y))
            assert member == up


def test_hord_two_sections():
    polys = (P("z1^2 + x^3", names=("z1", "z2", "x")),
             P("z2^2 + x^5", names=("z1", "z2", "x")))
    elim = ReesAlg.make(Q, 3, [(parse_poly("x^4", Q, ("z1", "z2", "x")), 2)])
    sp = SimplifiedPresentation(Q, 3, (0, 1), polys, elim)
    data = hord_data(sp, ClosedPoint((0, 0, 0)))
    assert data.value == Fraction(3, 2)
    assert [r.slope for r in data.normalizations] == [Fraction(3, 2), Fraction(5, 2)]
    assert data.elim_ord == 2


def test_hord_single_section():
    pres = pres1("z^2 + x^3")
    assert hord(pres, ORIGIN) == Fraction(3, 2)


def test_hord_pure_power_falls_to_elim():
    pres = pres1("z^2", elim_gens=[("x^3", 2)])
    assert hord(pres, ORIGIN) == Fraction(3, 2)


def test_hord_at_generic_point():
    pres = pres1("z^2 + x^2*y^3", F2)
    assert hord(pres, GenericPoint(frozenset({1}))) == 1
    assert hord(pres, GenericPoint(frozenset({2}))) == Fraction(3, 2)
    assert hord(pres, GenericPoint(frozenset({1, 2}))) == Fraction(5, 2)


def test_p_presentation_reduced_formula():
    f = P("z^2 + x^3", F2)
    elim = ealg(F2, [("x^3", 2)])
    pp = make_p_presentation(F2, 3, (0,), (f,), elim)
    assert isinstance(pp, PPresentation)
    assert pp.degrees == (2,)
    assert pp.p_exponents() == (1,)
    d = hord_data(pp, ORIGIN)
    assert d.value == Fraction(3, 2)
    assert d.reduced_value == Fraction(3, 2)


def test_make_p_presentation_augments_elim():
    # the middle coefficient x of z^2 + xz + y^3 must join the elimination
    # part for the constant-term formula to be valid
    f = P("z^2 + x*z + y^3", F2)
    pp = make_p_presentation(F2, 3, (0,), (f,), ReesAlg.make(F2, 3, []))
    got = {(render_poly(g, ZXY), n) for g, n in pp.elim.gens}
    assert ("x", 1) in got
    d = hord_data(pp, ORIGIN)
    assert d.value == 1
    assert d.reduced_value == 1


def test_p_presentation_rejects_missing_middle_coefficient():
    f = P("z^2 + x*z + y^3", F2)
    with pytest.raises(ValueError):
        PPresentation(F2, 3, (0,), (f,), ReesAlg.make(F2, 3, []))


def test_coefficient_elim():
    def gens(f):
        return sorted((render_poly(g, ZXY), n) for g, n in coefficient_elim(f, 0).gens)
    assert gens(P("z^2 + x^3")) == [("x^3", 2)]
    assert gens(P("z^5 + x^6", F5)) == [("x^6", 5)]
    assert gens(P("z^2 + x*z + y^2")) == [("x", 1), ("y^2", 2)]


def test_coefficient_elim_saturation_route_agrees():
    for text, field in (("z^2 + x^3", Q), ("z^2 + x*z + y^2", Q),
                        ("z^2 + x^3", F2), ("z^3 + x^2*y^2", F3)):
        f = P(text, field)
        plain = coefficient_elim(f, 0)
        saturated = coefficient_elim(f, 0, relative_saturation=True)
        assert plain == saturated


def test_upstairs_algebra_and_fiber_point():
    pres = pres1("z^2 + x^3")
    up = upstairs_algebra(pres)
    assert (P("z^2 + x^3"), 2) in up.gens
    assert (P("x^3"), 2) in up.gens
    fp = fiber_point(pres, ClosedPoint((7, 1, 2)))
    assert fp == ClosedPoint((0, 1, 2))
    gp = fiber_point(pres, GenericPoint(frozenset({1})))
    assert gp == GenericPoint(frozenset({0, 1}))


def test_section_invariance_small():
    pres = pres1("z^3 + x^4 + y^5", F3)
    base = hord(pres, ORIGIN)
    for alpha_text in ("x", "2*y", "x + y^2", "x^2 + 2*x*y"):
        alpha = P(alpha_text, F3)
        z = parse_poly("z", F3, ZXY)
        shifted = pres.f.substitute({0: z - alpha})
        moved = Presentation(F3, 3, 0, shifted, pres.elim)
        assert hord(moved, ORIGIN) == base
