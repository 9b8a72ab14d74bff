"""Transversal-projection data: presentations of an algebra over a coordinate
projection, slopes, weighted normal forms, the coefficient proxy for the
elimination algebra, and the H-order functions computed through normalization.

A presentation couples monic section polynomials with a downstairs Rees
algebra (the elimination part).  Projections are coordinate deletions: the
scene contract supplies generators already monic in the declared sections, so
no generic coordinate changes are ever attempted here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Union

from .errors import DegenerateSlopeError, NotNormalFormError
from .poly import (INF, ClosedPoint, FieldSpec, GenericPoint, MPoly,
                   PointSpec, WeightedForm, monic_coefficients, order_at,
                   weighted_initial_form)
from .rees import ReesAlg, diff_saturate, ord_at, sing_member

DEFAULT_CAP_FACTOR = 64


def _check_downstairs_point(y: PointSpec, sections, nvars: int):
    if isinstance(y, GenericPoint):
        if any(z in y.vars for z in sections):
            raise ValueError("downstairs points cannot involve section variables")
    else:
        if len(y.values) != nvars:
            raise ValueError("point arity mismatch")


@dataclass(frozen=True)
class SimplifiedPresentation:
    """e monic section polynomials over a shared downstairs elimination part.

    polys[i] is monic of degree n_i in sections[i] and its coefficients are
    free of every section variable; elim generators are section-free.  Points
    fed to the slope and H-order functions are downstairs: full-arity closed
    points whose section coordinates are ignored, or generic points of
    section-free variable subsets.
    """

    field: FieldSpec
    nvars: int
    sections: tuple
    polys: tuple
    elim: ReesAlg

    def __post_init__(self):
        secs = self.sections
        if not secs or len(set(secs)) != len(secs):
            raise ValueError("sections must be distinct")
        if any(not 0 <= z < self.nvars for z in secs):
            raise ValueError("section index out of range")
        if len(self.polys) != len(secs):
            raise ValueError("one monic polynomial per section")
        for z, f in zip(secs, self.polys):
            if f.field != self.field or f.nvars != self.nvars:
                raise ValueError("presentation polynomial in the wrong ring")
            coeffs = monic_coefficients(f, z)  # raises NotMonicError
            for a in coeffs.values():
                if any(a.uses_var(w) for w in secs):
                    raise ValueError("coefficients must be free of all section variables")
        if self.elim.field != self.field or self.elim.nvars != self.nvars:
            raise ValueError("elimination algebra in the wrong ring")
        for g, _ in self.elim.gens:
            if any(g.uses_var(w) for w in secs):
                raise ValueError("elimination generators must be section-free")

    @property
    def degrees(self) -> tuple:
        return tuple(f.degree_in_var(z) for z, f in zip(self.sections, self.polys))

    def coefficient(self, i: int, j: int) -> MPoly:
        """a_j of the i-th polynomial (zero polynomial when absent)."""
        coeffs = monic_coefficients(self.polys[i], self.sections[i])
        a = coeffs.get(j)
        return a if a is not None else MPoly.zero_poly(self.field, self.nvars)

    def with_polys(self, polys, elim=None) -> "SimplifiedPresentation":
        return type(self)(self.field, self.nvars, self.sections, tuple(polys),
                          self.elim if elim is None else elim)


@dataclass(frozen=True)
class Presentation:
    """The one-section case: a single monic polynomial over its elimination part."""

    field: FieldSpec
    nvars: int
    section_var: int
    f: MPoly
    elim: ReesAlg

    def __post_init__(self):
        SimplifiedPresentation(self.field, self.nvars, (self.section_var,),
                               (self.f,), self.elim)

    @property
    def degree(self) -> int:
        return self.f.degree_in_var(self.section_var)

    def simplified(self) -> SimplifiedPresentation:
        return SimplifiedPresentation(self.field, self.nvars, (self.section_var,),
                                      (self.f,), self.elim)


@dataclass(frozen=True)
class PPresentation(SimplifiedPresentation):
    """A simplified presentation whose degrees are p-powers p^l_1 <= ... <= p^l_e.

    The reduced H-order formula (minimum over the constant coefficients
    alone) is only valid when the middle coefficients of every polynomial
    already sit in the elimination part, as relative differential saturation
    puts them there; construction enforces that so the two formulas must
    agree.  Use make_p_presentation to augment a bare elimination part.
    """

    def __post_init__(self):
        super().__post_init__()
        p = self.field.characteristic
        if p == 0:
            raise ValueError("p-presentations need positive characteristic")
        exps = []
        for n in self.degrees:
            e = 0
            m = n
            while m % p == 0:
                m //= p
                e += 1
            if m != 1:
                raise ValueError("p-presentation degrees must be powers of p")
            exps.append(e)
        if list(exps) != sorted(exps):
            raise ValueError("p-presentation degrees must be non-decreasing")
        have = {(g, n) for g, n in self.elim.gens}
        for i in range(len(self.polys)):
            n = self.degrees[i]
            for j in range(1, n):
                a = self.coefficient(i, j)
                if not a.is_zero() and (a, j) not in have:
                    raise ValueError(
                        "middle coefficient a_%d of polynomial %d is missing from "
                        "the elimination part; use make_p_presentation" % (j, i + 1))

    def p_exponents(self) -> tuple:
        p = self.field.characteristic
        return tuple(round(math.log(n, p)) for n in self.degrees)


def make_p_presentation(field: FieldSpec, nvars: int, sections, polys,
                        elim: ReesAlg) -> PPresentation:
    """Build a p-presentation, placing middle coefficients in the elimination
    part (they belong there: relative saturation sends a_j downstairs with
    weight j)."""
    extra = []
    for z, f in zip(sections, polys):
        coeffs = monic_coefficients(f, z)
        n = max(coeffs)
        for j, a in coeffs.items():
            if 1 <= j < n and not a.is_zero():
                extra.append((a, j))
    return PPresentation(field, nvars, tuple(sections), tuple(polys),
                         elim.with_extra(extra))


AnyPresentation = Union[Presentation, SimplifiedPresentation]


# -- slopes ---------------------------------------------------------------------


def slope_poly(f: MPoly, z_index: int, y: PointSpec):
    """min over j of nu_y(a_j)/j for f = z^n + sum a_j z^(n-j); inf when every
    a_j vanishes (f a pure power, excluded by the codimension-one assumption
    upstream but returned honestly here)."""
    _check_downstairs_point(y, (z_index,), f.nvars)
    coeffs = monic_coefficients(f, z_index)
    best = INF
    for j, a in coeffs.items():
        if a.is_zero():
            continue
        s = Fraction(order_at(a, y), j)
        if s < best:
            best = s
    return best


def slope_presentation(pres: Presentation, y: PointSpec):
    """Sl(P)(y): the slope of the polynomial capped by the elimination order."""
    return min(slope_poly(pres.f, pres.section_var, y), ord_at(pres.elim, y))


# -- weighted normal forms -------------------------------------------------------


def is_nth_power(W: WeightedForm) -> Optional[MPoly]:
    """The root A with W = (Z+A)^n, if one exists; None otherwise.

    Writes n = m*p^e with p not dividing m (e = 0 in characteristic 0).  Any
    root must appear in the coefficient of Z^(n-p^e), whose binomial factor
    is a unit by Lucas; the candidate is confirmed by exact expansion.
    """
    field = W.field
    p = field.characteristic
    n = W.n
    m, e = n, 0
    if p:
        while m % p == 0:
            m //= p
            e += 1
    pe = p ** e if p else 1
    lead = W.coeff(pe)
    if lead.is_zero():
        return None
    c = field.coerce(math.comb(n, pe))
    B = lead.scale(field.inv(c))
    A = B.pth_power_root(pe)
    if A is None:
        return None
    for j in range(1, n + 1):
        expect = (A ** j).scale(field.coerce(math.comb(n, j)))
        if W.coeff(j) != expect:
            return None
    return A


@dataclass(frozen=True)
class PolyNormalization:
    """Record of the slope-raising loop on one monic polynomial at one point."""

    poly: MPoly
    iterations: int
    slopes: tuple          # slope before each substitution, then the final slope
    substitutions: tuple   # the alpha subtracted from the section variable, ambient coords

    @property
    def slope(self):
        return self.slopes[-1]


def normalize_poly(f: MPoly, z_index: int, y: PointSpec, elim_ord=INF,
                   max_iters: Optional[int] = None) -> PolyNormalization:
    """Raise the slope at y by substitutions z <- z - alpha while the weighted
    initial form is an n-th power (Z+A)^n with A nonzero and the slope is
    still below the elimination order.

    alpha is the homogeneous representative of A itself (translated back to
    ambient coordinates for off-origin closed points); only its initial form
    matters.  Each iteration strictly increases the slope; exceeding the cap
    means the codimension-one assumption fails for this input.
    """
    field, nvars = f.field, f.nvars
    n = f.degree_in_var(z_index)
    cap = DEFAULT_CAP_FACTOR * n if max_iters is None else max_iters
    slopes = [slope_poly(f, z_index, y)]
    subs = []
    zvar = MPoly.var(field, nvars, z_index)
    while slopes[-1] < elim_ord and slopes[-1] != INF:
        q = slopes[-1]
        W = weighted_initial_form(f, z_index, y, q)
        A = is_nth_power(W)
        if A is None or A.is_zero():
            break
        if len(subs) >= cap:
            raise DegenerateSlopeError("degenerate: slope unbounded")
        if isinstance(y, ClosedPoint):
            alpha = A.translate(tuple(field.neg(v) for v in y.values))
        else:
            alpha = A
        f = f.substitute({z_index: zvar - alpha})
        subs.append(alpha)
        new = slope_poly(f, z_index, y)
        assert new > q, "normalization must strictly increase the slope"
        slopes.append(new)
    return PolyNormalization(f, len(subs), tuple(slopes), tuple(subs))


def normalize(pres: Presentation, y: PointSpec,
              max_iters: Optional[int] = None) -> "NormalizeResult":
    """Bring a one-section presentation into normal form at y: afterwards
    either its slope meets the elimination order or the weighted initial form
    is not an n-th power."""
    rec = normalize_poly(pres.f, pres.section_var, y,
                         elim_ord=ord_at(pres.elim, y), max_iters=max_iters)
    out = Presentation(pres.field, pres.nvars, pres.section_var, rec.poly, pres.elim)
    return NormalizeResult(out, rec)


@dataclass(frozen=True)
class NormalizeResult:
    presentation: Presentation
    record: PolyNormalization

    @property
    def slope(self):
        return min(self.record.slope, INF)


def is_normal_at(pres: Presentation, y: PointSpec) -> bool:
    """Normal form test: slope meets the elimination order, or the weighted
    initial form is not an n-th power with nonzero root."""
    s = slope_poly(pres.f, pres.section_var, y)
    if s >= ord_at(pres.elim, y) or s == INF:
        return True
    W = weighted_initial_form(pres.f, pres.section_var, y, s)
    A = is_nth_power(W)
    return A is None or A.is_zero()


# -- membership ------------------------------------------------------------------


def upstairs_algebra(pres: AnyPresentation) -> ReesAlg:
    """The ambient Rees algebra the presentation describes: section
    polynomials with their degrees as weights, joined with the elimination
    generators."""
    sp = pres.simplified() if isinstance(pres, Presentation) else pres
    gens = list(zip(sp.polys, sp.degrees)) + list(sp.elim.gens)
    return ReesAlg.make(sp.field, sp.nvars, gens, sp.elim.is_unit)


def fiber_point(pres: AnyPresentation, y: PointSpec) -> PointSpec:
    """The unique point over y with all section coordinates zero."""
    sections = (pres.section_var,) if isinstance(pres, Presentation) else pres.sections
    if isinstance(y, ClosedPoint):
        vals = tuple(pres.field.zero if i in sections else v
                     for i, v in enumerate(y.values))
        return ClosedPoint(vals)
    return GenericPoint(y.vars | frozenset(sections))


def membership_criterion(pres: Presentation, y: PointSpec) -> bool:
    """Does y lie in the projection of the singular locus?  True exactly when
    Sl(P)(y) >= 1.  Requires the presentation to be in normal form at y and
    cross-checks against the ambient singular-locus test at the fiber point."""
    if not is_normal_at(pres, y):
        raise NotNormalFormError("presentation is not in normal form at the point")
    result = slope_presentation(pres, y) >= 1
    upstairs = sing_member(upstairs_algebra(pres), fiber_point(pres, y))
    assert upstairs == result, "projection membership disagrees with the fiber test"
    return result


# -- H-order ----------------------------------------------------------------------


@dataclass(frozen=True)
class HordData:
    value: object                 # Fraction or INF
    elim_ord: object
    normalizations: tuple         # one PolyNormalization per section polynomial
    reduced_value: object = None  # p-presentation cross-check, when applicable


def hord_data(sp: AnyPresentation, y: PointSpec,
              max_iters: Optional[int] = None) -> HordData:
    """H-order of the presentation at a downstairs point: normalize each
    polynomial independently at y, then take the minimum of all coefficient
    slopes and the elimination order.

    For p-presentations the reduced formula (constant coefficients only) is
    recomputed and must agree; construction guarantees the middle
    coefficients are dominated by the elimination part.
    """
    if isinstance(sp, Presentation):
        sp = sp.simplified()
    _check_downstairs_point(y, sp.sections, sp.nvars)
    eord = ord_at(sp.elim, y)
    recs = [normalize_poly(f, z, y, elim_ord=eord, max_iters=max_iters)
            for z, f in zip(sp.sections, sp.polys)]
    value = min([eord] + [r.slope for r in recs])
    reduced = None
    if isinstance(sp, PPresentation):
        parts = [eord]
        for i, (z, rec) in enumerate(zip(sp.sections, recs)):
            n = sp.degrees[i]
            a = monic_coefficients(rec.poly, z).get(n)
            if a is not None and not a.is_zero():
                parts.append(Fraction(order_at(a, y), n))
            else:
                parts.append(INF)
        reduced = min(parts)
        assert reduced == value, "p-presentation H-order formulas disagree"
    return HordData(value, eord, tuple(recs), reduced)


def hord(sp: AnyPresentation, y: PointSpec, max_iters: Optional[int] = None):
    return hord_data(sp, y, max_iters=max_iters).value


# -- elimination proxy -------------------------------------------------------------


def coefficient_elim(f: MPoly, z_index: int, relative_saturation: bool = False) -> ReesAlg:
    """Downstairs proxy for the elimination algebra of a monic polynomial:
    the coefficient generators (a_j, j).

    With relative_saturation, the generator (f, n) is saturated in the
    section direction first and section-free results are placed downstairs as
    well; the section-free part of the order-(n-j) derivative is exactly a_j,
    so both routes return the same algebra.
    """
    coeffs = monic_coefficients(f, z_index)
    n = max(coeffs)
    gens = [(a, j) for j, a in coeffs.items() if 1 <= j <= n and not a.is_zero()]
    if relative_saturation:
        sat = diff_saturate(ReesAlg.make(f.field, f.nvars, [(f, n)]),
                            relative_vars=[z_index])
        for g, m in sat.gens:
            if not g.uses_var(z_index):
                gens.append((g, m))
    return ReesAlg.make(f.field, f.nvars, gens)
