"""The monomial algebra attached to a tower, the strong-monomial-case test,
the combinatorial resolution game, and its lift back upstairs.

Exponents live on exceptional-divisor labels.  The game plays on the
incidence complex of the divisors present in one chart: a move either lowers
a single divisor's exponent or blows up a deeper stratum, subdividing the
complex.  The chosen move rule (inclusion-minimal qualifying stratum, deepest
first, oldest labels breaking ties) terminates: every qualifying stratum the
move creates has strictly smaller excess than a qualifying stratum it
destroys, so the multiset of excesses decreases in the Dershowitz-Manna
order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .errors import (NonMonomialElimError, PermissibilityError, TrackingError)
from .poly import INF, ClosedPoint, GenericPoint, PointSpec
from .projection import (Presentation, SimplifiedPresentation, hord,
                         upstairs_algebra)
from .rees import ReesAlg, ord_at, sing_member
from .blowup import Center, Chart, Tower


@dataclass(frozen=True)
class MonomialAlg:
    """I(H_1)^(h_1/s)...I(H_r)^(h_r/s) as integer exponents over a common s."""

    s: int
    exponents: tuple     # tuple[(label, int)], creation order

    def __post_init__(self):
        if self.s < 1:
            raise ValueError("the common denominator must be positive")
        if any(h < 0 for _, h in self.exponents):
            raise ValueError("exponents must be non-negative")
        labels = [lab for lab, _ in self.exponents]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate divisor label")

    def exponent_map(self) -> dict:
        return dict(self.exponents)

    def reduced(self) -> "MonomialAlg":
        g = math.gcd(self.s, *(h for _, h in self.exponents)) if self.exponents else self.s
        if g <= 1:
            return self
        return MonomialAlg(self.s // g, tuple((lab, h // g) for lab, h in self.exponents))

    def restricted(self, labels) -> "MonomialAlg":
        keep = set(labels)
        return MonomialAlg(self.s, tuple((lab, h) for lab, h in self.exponents
                                         if lab in keep))


def _lcm(nums) -> int:
    out = 1
    for n in nums:
        out = out * n // math.gcd(out, n)
    return out


def track_monomial(tower: Tower) -> MonomialAlg:
    """Attach the monomial algebra of a presentation tower: the divisor born
    at step i carries exponent h_i/s = hord(state before step i at the
    downstairs generic point of the center) - 1."""
    states = tower.states()
    if not isinstance(states[0], (Presentation, SimplifiedPresentation)):
        raise TrackingError("monomial tracking needs a presentation tower")
    values = []
    labels = []
    for i, st in enumerate(tower.steps):
        sp = states[i]
        sections = ((sp.section_var,) if isinstance(sp, Presentation)
                    else sp.sections)
        downstairs = frozenset(st.center) - frozenset(sections)
        if not downstairs:
            raise TrackingError("center has no downstairs part")
        q = hord(sp, GenericPoint(downstairs))
        if q == INF:
            raise TrackingError("H-order is infinite at a center")
        if q < 1:
            raise TrackingError("center with H-order below 1 is impermissible")
        values.append(q - 1)
        labels.append(st.chart.lineage[i].new_label)
    s = _lcm([v.denominator for v in values]) if values else 1
    exps = tuple((lab, int(v * s)) for lab, v in zip(labels, values))
    return MonomialAlg(s, exps).reduced()


def ord_monomial(M: MonomialAlg, x: PointSpec, chart: Chart):
    """Order of the monomial algebra at a representable point: the sum of
    exponents of the present divisors passing through it, over s."""
    dmap = chart.divisor_map()
    total = 0
    for lab, h in M.exponents:
        if lab not in dmap:
            raise ValueError("divisor label %r is not in the chart registry" % lab)
        v = dmap[lab]
        if v is None:
            continue
        if isinstance(x, ClosedPoint):
            on = x.values[v] == 0
        else:
            on = v in x.vars
        if on:
            total += h
    return Fraction(total, M.s)


def divides(M: MonomialAlg, R: MonomialAlg) -> bool:
    """Componentwise h_i/s_M <= alpha_i/s_R over a shared divisor registry."""
    hm, hr = M.exponent_map(), R.exponent_map()
    if set(hm) != set(hr):
        raise TrackingError("incompatible divisor registries")
    return all(h * R.s <= hr[lab] * M.s for lab, h in hm.items())


# -- strong monomial case --------------------------------------------------------


def elim_monomial_algebras(elim: ReesAlg, chart: Chart):
    """One MonomialAlg per elimination generator, when every generator is a
    single term supported on present exceptional variables; error otherwise."""
    present = chart.present_divisors()
    var_to_label = {v: lab for lab, v in present.items()}
    out = []
    for g, m in elim.gens:
        if not g.is_single_term():
            raise NonMonomialElimError("elimination generator is not a monomial")
        exps, _ = g.terms[0]
        alg_exps = []
        for v, e in enumerate(exps):
            if e == 0:
                continue
            if v not in var_to_label:
                raise NonMonomialElimError(
                    "elimination generator involves the non-exceptional variable #%d" % v)
            alg_exps.append((var_to_label[v], e))
        out.append(MonomialAlg(m, tuple(alg_exps)))
    return out


@dataclass(frozen=True)
class StrongCheckResult:
    strong: bool
    monomial: MonomialAlg
    witness: Optional[dict]
    checked: tuple       # records per checked point


def is_strong_monomial(tower: Tower, monomial: Optional[MonomialAlg] = None,
                       extra_points: Iterable[PointSpec] = ()) -> StrongCheckResult:
    """Does the H-order equal the monomial order everywhere it can be tested?

    Tested at the generic points of all present-divisor strata and at the
    supplied closed points; additionally the monomial algebra must divide
    each (monomial) elimination generator, which makes the elimination branch
    collapse onto the monomial algebra locally.  The witness is the first
    failing comparison.
    """
    sp = tower.obj
    if isinstance(sp, Presentation):
        sp = sp.simplified()
    if not isinstance(sp, SimplifiedPresentation):
        raise TrackingError("the strong-monomial test needs a presentation tower")
    chart = tower.chart
    M = monomial if monomial is not None else track_monomial(tower)
    present = chart.present_divisors()
    labels = [lab for lab, _ in M.exponents if present.get(lab) is not None]
    if sp.elim.gens:
        Mp = M.restricted(labels)
        for R in elim_monomial_algebras(sp.elim, chart):
            full = MonomialAlg(R.s, tuple(
                (lab, R.exponent_map().get(lab, 0)) for lab in labels))
            if not divides(Mp, full):
                return StrongCheckResult(False, M, {
                    "kind": "divides", "elim_gen_weight": R.s,
                    "monomial": Mp.exponents, "elim": full.exponents}, ())
    checked = []
    points = []
    for k in range(1, len(labels) + 1):
        for sub in itertools.combinations(labels, k):
            points.append(("stratum " + "&".join(sub),
                           GenericPoint(frozenset(present[lab] for lab in sub))))
    for i, pt in enumerate(extra_points):
        points.append(("point %d" % (i + 1), pt))
    witness = None
    for name, pt in points:
        hv = hord(sp, pt)
        mv = ord_monomial(M, pt, chart)
        ok = hv == mv
        checked.append({"at": name, "hord": hv, "ord_monomial": mv, "equal": ok})
        if not ok and witness is None:
            witness = {"kind": "order mismatch", "at": name,
                       "hord": hv, "ord_monomial": mv}
    return StrongCheckResult(witness is None, M, witness, tuple(checked))


# -- the combinatorial game -------------------------------------------------------


@dataclass(frozen=True)
class GameMove:
    labels: frozenset          # the stratum blown up
    new_label: Optional[str]   # None for single-divisor moves
    exponent: Optional[int]    # exponent of the new divisor, over the game's s
    exponents_after: tuple     # full exponent table after the move


def _label_age(lab: str):
    return (0 if lab.startswith("H") else 1, int(lab[1:]))


@dataclass(frozen=True)
class GameResult:
    moves: tuple
    exponents: tuple    # final table, label order by age
    faces: frozenset    # final incidence complex


def combinatorial_resolve(M: MonomialAlg, chart: Chart):
    """Ordered moves of the stratum-excess game; see resolve_game."""
    return list(resolve_game(M, chart).moves)


def resolve_game(M: MonomialAlg, chart: Chart) -> GameResult:
    """Play the stratum-excess game to the end.

    State: exponents on the present divisors plus the incidence complex,
    initially the full simplex (coordinate divisors all meet).  While some
    stratum has total exponent >= s, play an inclusion-minimal such stratum,
    deepest first, oldest labels breaking ties.  A single-divisor stratum
    just loses s; a deeper stratum is blown up: it gains a divisor carrying
    the excess, and the complex is stellarly subdivided so the old stratum's
    members no longer all meet.
    """
    present = chart.present_divisors()
    h = {lab: hv for lab, hv in M.exponents if present.get(lab) is not None}
    s = M.s
    faces = set()
    labs = sorted(h, key=_label_age)
    for k in range(1, len(labs) + 1):
        for sub in itertools.combinations(labs, k):
            faces.add(frozenset(sub))
    def table():
        return tuple(sorted(h.items(), key=lambda kv: _label_age(kv[0])))

    moves = []
    counter = 0
    while True:
        # a qualifying stratum is inclusion-minimal iff dropping any one
        # divisor drops the total below s (exponents are non-negative)
        candidates = [T for T in faces
                      if sum(h[l] for l in T) >= s
                      and all(sum(h[l] for l in T - {j}) < s for j in T)]
        if not candidates:
            break
        candidates.sort(key=lambda T: (-len(T), sorted(_label_age(l) for l in T)))
        T = candidates[0]
        if len(T) == 1:
            lab = next(iter(T))
            h[lab] -= s
            moves.append(GameMove(T, None, None, table()))
            continue
        counter += 1
        new_lab = "E%d" % counter
        h[new_lab] = sum(h[l] for l in T) - s
        kept = {S for S in faces if not T <= S}
        additions = set()
        for S in itertools.chain([frozenset()], kept):
            if (S | T) in faces:
                additions.add(S | {new_lab})
        faces = kept | additions
        moves.append(GameMove(T, new_lab, h[new_lab], table()))
    assert all(sum(h[l] for l in S) < s for S in faces), \
        "game ended with a qualifying stratum left"
    return GameResult(tuple(moves), table(), frozenset(faces))


# -- lifting the game upstairs ----------------------------------------------------


@dataclass(frozen=True)
class LiftRecord:
    move: GameMove
    skipped: bool
    reason: Optional[str]
    contact_case: Optional[str]    # "A" when hord meets the elimination order
    hord_at_center: object
    elim_ord_at_center: object


@dataclass(frozen=True)
class LiftResult:
    tower: Tower
    records: tuple
    final_singular: tuple   # representable singular strata left (must be empty)


def lift_resolution(tower: Tower, moves=None,
                    monomial: Optional[MonomialAlg] = None,
                    extra_points: Iterable[PointSpec] = ()) -> LiftResult:
    """Materialize the game's centers upstairs: each stratum gains every
    section variable, the chart follows the oldest divisor's variable, and
    the presentation transforms along the way.  Refuses non-strong towers;
    any impermissible lifted center falsifies the hypothesis and errors."""
    check = is_strong_monomial(tower, monomial=monomial, extra_points=extra_points)
    if not check.strong:
        raise TrackingError("lift refused: tower is not in the strong monomial case")
    M = check.monomial
    if moves is None:
        moves = combinatorial_resolve(M, tower.chart)
    sp = tower.obj
    sections = ((sp.section_var,) if isinstance(sp, Presentation) else sp.sections)
    var_of = {lab: v for lab, v in tower.chart.divisors}
    records = []
    for move in moves:
        labs = sorted(move.labels, key=_label_age)
        vars_ = [var_of.get(lab) for lab in labs]
        if any(v is None for v in vars_):
            records.append(LiftRecord(move, True, "stratum absent from the chart",
                                      None, None, None))
            continue
        chart_var = var_of[labs[0]]
        center = Center(frozenset(vars_) | frozenset(sections))
        sp = tower.obj
        down = GenericPoint(frozenset(vars_))
        hv = hord(sp, down)
        ev = ord_at((sp.simplified() if isinstance(sp, Presentation) else sp).elim, down)
        case = "A" if hv == ev else "B"
        try:
            tower.blow_up(center, chart_var)
        except PermissibilityError as exc:
            raise TrackingError(
                "lifted center %s is impermissible (%s); the strong-monomial "
                "hypothesis fails" % (sorted(tower.chart.names[v] for v in center.vars), exc))
        if move.new_label is None:
            # same divisor, smaller multiplicity; it keeps its variable
            pass
        else:
            var_of[labs[0]] = None
            var_of[move.new_label] = chart_var
        records.append(LiftRecord(move, False, None, case, hv, ev))
    final = tower.obj
    up = upstairs_algebra(final)
    leftover = []
    nvars = up.nvars
    for k in range(1, nvars + 1):
        for sub in itertools.combinations(range(nvars), k):
            if sing_member(up, GenericPoint(frozenset(sub))):
                leftover.append(sub)
    origin = ClosedPoint((up.field.zero,) * nvars)
    if sing_member(up, origin):
        leftover.append(("origin",))
    if leftover:
        raise TrackingError(
            "lift ended with singular strata %r; the strong-monomial hypothesis fails"
            % (leftover,))
    return LiftResult(tower, tuple(records), ())


def sandwich_report(tower: Tower, M: Optional[MonomialAlg] = None):
    """ord_monomial <= hord <= ord(elim) at the generic point of every
    present-divisor stratum of the tower's final chart."""
    sp = tower.obj
    simp = sp.simplified() if isinstance(sp, Presentation) else sp
    M = M if M is not None else track_monomial(tower)
    present = tower.chart.present_divisors()
    labels = sorted(present, key=_label_age)
    rows = []
    for k in range(1, len(labels) + 1):
        for sub in itertools.combinations(labels, k):
            pt = GenericPoint(frozenset(present[lab] for lab in sub))
            om = ord_monomial(M, pt, tower.chart)
            hv = hord(simp, pt)
            ev = ord_at(simp.elim, pt)
            rows.append({"stratum": "&".join(sub), "ord_monomial": om,
                         "hord": hv, "elim_ord": ev,
                         "ok": om <= hv <= ev})
    return rows
