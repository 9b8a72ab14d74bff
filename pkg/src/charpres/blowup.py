"""Chart-level monoidal transformations with exceptional-divisor bookkeeping.

Only coordinate centers are supported and only one affine chart is
materialized per step; variable names are reused across charts, so a tower is
a sequence of substitutions and exact divisions in one ambient ring.  Divisor
labels are globally unique within a tower and are kept in the registry even
when their strict transform misses the chosen chart.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Iterable, Optional

from .errors import PermissibilityError
from .poly import (INF, ClosedPoint, FieldSpec, GenericPoint, MPoly,
                   order_at)
from .projection import (Presentation, SimplifiedPresentation, hord,
                         is_normal_at, slope_poly)
from .rees import Pair, ReesAlg, ord_at, sing_member


@dataclass(frozen=True)
class Center:
    """A coordinate center V(vars); containment in Sing is checked at
    transform time."""

    vars: frozenset

    def __post_init__(self):
        if not self.vars:
            raise ValueError("a center needs at least one variable")

    @classmethod
    def of(cls, *indices) -> "Center":
        return cls(frozenset(indices))


@dataclass(frozen=True)
class BlowupRecord:
    center: tuple       # sorted variable indices
    chart_var: int
    new_label: str


@dataclass(frozen=True)
class Chart:
    """Variable names plus the exceptional-divisor registry.

    divisors maps each label to the chart variable cutting it out, or None
    when the divisor's strict transform does not meet this chart.
    """

    names: tuple
    divisors: tuple     # tuple[(label, Optional[int])], creation order
    lineage: tuple = ()

    @classmethod
    def initial(cls, names: Iterable[str]) -> "Chart":
        return cls(tuple(names), ())

    def divisor_map(self) -> dict:
        return dict(self.divisors)

    def present_divisors(self) -> dict:
        return {lab: v for lab, v in self.divisors if v is not None}

    def after_blowup(self, center: Center, chart_var: int) -> "Chart":
        if chart_var not in center.vars:
            raise ValueError("chart variable must belong to the center")
        for v in center.vars:
            if not 0 <= v < len(self.names):
                raise ValueError("center variable out of range")
        label = "H%d" % (len(self.lineage) + 1)
        updated = tuple((lab, None if v == chart_var else v) for lab, v in self.divisors)
        rec = BlowupRecord(tuple(sorted(center.vars)), chart_var, label)
        return Chart(self.names, updated + ((label, chart_var),), self.lineage + (rec,))


def blow_up_poly(f: MPoly, n: int, center: Center, chart_var: int) -> MPoly:
    """Weighted transform of f in the chart_var chart: substitute v <- v*w for
    the other center variables, then divide by w^n exactly."""
    if chart_var not in center.vars:
        raise ValueError("chart variable must belong to the center")
    w = MPoly.var(f.field, f.nvars, chart_var)
    mapping = {v: MPoly.var(f.field, f.nvars, v) * w
               for v in center.vars if v != chart_var}
    g = f.substitute(mapping)
    try:
        return g.divide_by_var_power(chart_var, n)
    except ValueError:
        raise PermissibilityError("center not permissible for weight %d" % n)


def transform_pair(pair: Pair, center: Center, chart_var: int) -> Pair:
    """Controlled transform of (J, b): every generator is divided by the b-th
    power of the exceptional variable."""
    xi = GenericPoint(center.vars)
    if min(order_at(g, xi) for g in pair.gens) < pair.b:
        raise PermissibilityError("center not contained in the singular locus of the pair")
    return Pair(tuple(blow_up_poly(g, pair.b, center, chart_var) for g in pair.gens),
                pair.b)


def transform_rees(alg: ReesAlg, center: Center, chart_var: int) -> ReesAlg:
    """Generator-wise weighted transform; a generator dropping to a nonzero
    constant turns the result into the unit algebra (resolved locus)."""
    if alg.is_unit:
        raise PermissibilityError("the unit algebra has empty singular locus")
    if not sing_member(alg, GenericPoint(center.vars)):
        raise PermissibilityError("center not contained in the singular locus")
    return ReesAlg.make(alg.field, alg.nvars,
                        [(blow_up_poly(f, n, center, chart_var), n) for f, n in alg.gens])


def transform_presentation(sp, center: Center, chart_var: int):
    """Transform a presentation along a center containing every section
    variable; coefficients transform downstairs as a_j / w^j and the
    elimination part transforms as a Rees algebra, so the result is a valid
    presentation of the transformed algebra of the same kind."""
    one_section = isinstance(sp, Presentation)
    simp = sp.simplified() if one_section else sp
    sections = set(simp.sections)
    if not sections <= center.vars:
        raise PermissibilityError("center not beta-vertical")
    if chart_var in sections:
        raise PermissibilityError("chart variable must be a downstairs variable")
    xi = GenericPoint(center.vars)
    for z, f, n in zip(simp.sections, simp.polys, simp.degrees):
        if order_at(f, xi) < n:
            raise PermissibilityError("center not permissible for a section polynomial")
    if not sing_member(simp.elim, xi):
        raise PermissibilityError("center not permissible for the elimination part")
    polys = tuple(blow_up_poly(f, n, center, chart_var)
                  for f, n in zip(simp.polys, simp.degrees))
    elim = transform_rees(simp.elim, center, chart_var) if simp.elim.gens else simp.elim
    out = type(simp)(simp.field, simp.nvars, simp.sections, polys, elim)
    if one_section:
        return Presentation(sp.field, sp.nvars, sp.section_var, polys[0], elim)
    return out


def transform_object(obj, center: Center, chart_var: int):
    if isinstance(obj, Pair):
        return transform_pair(obj, center, chart_var)
    if isinstance(obj, ReesAlg):
        return transform_rees(obj, center, chart_var)
    if isinstance(obj, (Presentation, SimplifiedPresentation)):
        return transform_presentation(obj, center, chart_var)
    raise TypeError("cannot transform objects of type %s" % type(obj).__name__)


def _origin(field: FieldSpec, nvars: int) -> ClosedPoint:
    return ClosedPoint((field.zero,) * nvars)


def invariant_snapshot(obj, names) -> dict:
    """Order data at the chart origin, recorded after each tower step."""
    snap: dict = {}
    if isinstance(obj, Pair):
        alg = ReesAlg.make(obj.gens[0].field, obj.gens[0].nvars,
                           [(g, obj.b) for g in obj.gens])
        snap["ord_origin"] = ord_at(alg, _origin(alg.field, alg.nvars))
    elif isinstance(obj, ReesAlg):
        snap["is_unit"] = obj.is_unit
        snap["ord_origin"] = ord_at(obj, _origin(obj.field, obj.nvars))
    else:
        simp = obj.simplified() if isinstance(obj, Presentation) else obj
        origin = _origin(simp.field, simp.nvars)
        snap["elim_ord_origin"] = ord_at(simp.elim, origin)
        snap["hord_origin"] = hord(simp, origin)
    return snap


@dataclass(frozen=True)
class TowerStep:
    center: tuple
    chart_var: int
    chart: Chart
    obj: object
    permissibility: dict
    snapshot: dict


@dataclass
class Tower:
    """A sequence of chart-level blowups of one tracked object."""

    chart: Chart
    obj: object
    steps: list = dc_field(default_factory=list)
    initial_obj: object = None

    @classmethod
    def start(cls, names: Iterable[str], obj) -> "Tower":
        return cls(Chart.initial(names), obj, initial_obj=obj)

    def states(self) -> list:
        """Objects before each step plus the final one."""
        return [self.initial_obj] + [st.obj for st in self.steps]

    def blow_up(self, center: Center, chart_var: int) -> TowerStep:
        xi = GenericPoint(center.vars)
        perm = {"center": sorted(self.chart.names[v] for v in center.vars),
                "chart": self.chart.names[chart_var]}
        new_obj = transform_object(self.obj, center, chart_var)
        perm["containment"] = True
        perm["exact_division"] = True
        new_chart = self.chart.after_blowup(center, chart_var)
        step = TowerStep(tuple(sorted(center.vars)), chart_var, new_chart, new_obj,
                         perm, invariant_snapshot(new_obj, new_chart.names))
        self.chart = new_chart
        self.obj = new_obj
        self.steps.append(step)
        return step


# -- the two-stage slope experiment --------------------------------------------


def stage_ab_experiment(f: MPoly, z_index: int, N: int,
                        q: Optional[Fraction] = None, names=None):
    """Measure how long the codimension-two center stays permissible after N
    point blowups along an auxiliary line.

    Adjoin a variable t; Stage A performs N point blowups at the marked chart
    origin (t-chart each time), Stage B blows up V(z, t) in the t-chart while
    that center is permissible.  Returns (l, trace) where l is the largest
    number of Stage-B transformations after which the center is still
    permissible, i.e. one less than the number performed.
    """
    if N < 1:
        raise ValueError("N must be positive")
    n = f.degree_in_var(z_index)
    origin = _origin(f.field, f.nvars)
    slope = slope_poly(f, z_index, origin)
    if q is not None and slope != q:
        raise ValueError("declared slope does not match the polynomial")
    q = slope
    if q == INF or q < 1:
        raise ValueError("the experiment needs a finite slope q >= 1")
    trivial = ReesAlg.make(f.field, f.nvars, [])
    if not is_normal_at(Presentation(f.field, f.nvars, z_index, f, trivial), origin):
        raise ValueError("polynomial is not in normal form at the base point")

    nvars = f.nvars + 1
    t_index = f.nvars
    names = list(names) if names is not None else ["v%d" % i for i in range(f.nvars)]
    names = names + ["t"]
    g = f.extend_arity(nvars)
    field = f.field
    trace = {"n": n, "q": q, "N": N, "steps": []}

    point_center = Center(frozenset(range(nvars)))
    for i in range(N):
        nu = order_at(g, _origin(field, nvars))
        if nu < n:
            raise PermissibilityError("marked point left the singular locus during stage A")
        g = blow_up_poly(g, n, point_center, t_index)
        trace["steps"].append({"stage": "A", "index": i + 1,
                               "center": sorted(names), "chart": "t",
                               "order": nu, "permissible": True})

    line_center = Center(frozenset({z_index, t_index}))
    xi = GenericPoint(line_center.vars)
    performed = 0
    while True:
        nu = order_at(g, xi)
        permissible = nu >= n
        trace["steps"].append({"stage": "B", "index": performed + 1,
                               "center": sorted([names[z_index], "t"]), "chart": "t",
                               "order": nu, "permissible": permissible})
        if not permissible:
            break
        g = blow_up_poly(g, n, line_center, t_index)
        performed += 1
    ell = performed - 1
    trace["performed"] = performed
    trace["l"] = ell
    target = N * (q - 1) - 1
    trace["expected"] = target.numerator // target.denominator
    return ell, trace


def codim1_singular_strata(alg: ReesAlg):
    """Coordinate hypersurfaces contained in the singular locus; permissible
    transforms must never create these."""
    out = []
    for i in range(alg.nvars):
        if sing_member(alg, GenericPoint(frozenset({i}))):
            out.append(i)
    return out
