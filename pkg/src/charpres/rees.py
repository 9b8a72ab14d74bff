"""Pairs and Rees algebras: singular loci, orders, differential saturation,
and the tangent-cone codimension invariant tau.

A Rees algebra is handled through a finite generator list [(f, n)] with
weights n >= 1.  All membership and order computations are generator-level,
which is exact for the algebra those generators span.  A generator that is a
nonzero constant in positive weight marks the unit algebra (empty singular
locus); an empty generator list is the trivial algebra (order infinity,
singular everywhere), which is what an absent elimination part degenerates to.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .poly import (INF, ClosedPoint, FieldSpec, GenericPoint, MPoly, PointSpec,
                   initial_form, order_at)


@dataclass(frozen=True)
class Pair:
    """An ideal-with-weight (J, b): generators of J and a positive integer b."""

    gens: tuple
    b: int

    def __post_init__(self):
        if self.b < 1:
            raise ValueError("pair weight must be a positive integer")
        if not self.gens or any(g.is_zero() for g in self.gens):
            raise ValueError("pair ideal needs nonzero generators")


@dataclass(frozen=True)
class ReesAlg:
    """A finitely generated Rees algebra given by weighted generators."""

    field: FieldSpec
    nvars: int
    gens: tuple  # tuple[tuple[MPoly, int], ...], canonical order
    is_unit: bool = False

    @classmethod
    def make(cls, field: FieldSpec, nvars: int,
             gens: Iterable[tuple], is_unit: bool = False) -> "ReesAlg":
        kept = []
        unit = is_unit
        for f, n in gens:
            if n < 1:
                raise ValueError("generator weights must be positive")
            if f.field != field or f.nvars != nvars:
                raise ValueError("generator lives in the wrong ring")
            if f.is_zero():
                continue
            if f.is_constant():
                unit = True
                continue
            kept.append((f, n))
        uniq = sorted(set(kept), key=lambda t: (t[1], t[0].terms))
        return cls(field, nvars, tuple(uniq), unit)

    def with_extra(self, more: Iterable[tuple]) -> "ReesAlg":
        return ReesAlg.make(self.field, self.nvars,
                            list(self.gens) + list(more), self.is_unit)

    def is_trivial(self) -> bool:
        return not self.gens and not self.is_unit

    def max_weight(self) -> int:
        return max((n for _, n in self.gens), default=0)


def pair_to_rees(pair: Pair, field: FieldSpec, nvars: int) -> ReesAlg:
    return ReesAlg.make(field, nvars, [(g, pair.b) for g in pair.gens])


def sing_member(alg: ReesAlg, pt: PointSpec) -> bool:
    """Is the point in the singular locus (order >= weight for every generator)?"""
    if alg.is_unit:
        return False
    return all(order_at(f, pt) >= n for f, n in alg.gens)


def ord_at(alg: ReesAlg, pt: PointSpec):
    """The order of the algebra at a point: min over generators of nu/weight.

    The unit algebra has order 0 (callers can see alg.is_unit for the warning
    flag), the trivial algebra has order infinity.
    """
    if alg.is_unit:
        return Fraction(0)
    if not alg.gens:
        return INF
    return min(Fraction(order_at(f, pt)) / n for f, n in alg.gens)


# -- differential saturation ---------------------------------------------------


def _multi_indices(nvars: int, allowed: Sequence[int], max_total: int):
    """All multi-indices with support in `allowed` and 1 <= |alpha| <= max_total."""
    allowed = list(allowed)
    if max_total < 1 or not allowed:
        return
    for total in range(1, max_total + 1):
        for cut in itertools.combinations_with_replacement(allowed, total):
            alpha = [0] * nvars
            for i in cut:
                alpha[i] += 1
            yield tuple(alpha)


def diff_saturate(alg: ReesAlg, relative_vars: Optional[Iterable[int]] = None) -> ReesAlg:
    """Close the algebra under Hasse derivatives of order below each weight.

    `relative_vars` restricts differentiation to those variables (relative
    saturation along a projection); None means absolute saturation.  Because
    composites of Hasse operators are integer multiples of single operators
    of the combined order, one pass over each original generator closes the
    generator set; the loop to a fixpoint below is cheap and keeps the
    construction self-evidently idempotent.  Degree-0 derivative results are
    never formed (orders stay below the weight); a positive-weight constant
    marks the unit algebra.
    """
    if alg.is_unit:
        return alg
    allowed = list(relative_vars) if relative_vars is not None else list(range(alg.nvars))
    seen = set(alg.gens)
    frontier = list(alg.gens)
    unit = False
    while frontier:
        new = []
        for f, n in frontier:
            for alpha in _multi_indices(alg.nvars, allowed, n - 1):
                g = f.hasse_deriv_multi(alpha)
                if g.is_zero():
                    continue
                m = n - sum(alpha)
                if g.is_constant():
                    unit = True
                    continue
                key = (g, m)
                if key not in seen:
                    seen.add(key)
                    new.append(key)
        frontier = new
    return ReesAlg.make(alg.field, alg.nvars, sorted(seen, key=lambda t: (t[1], t[0].terms)),
                        alg.is_unit or unit)


# -- exact linear algebra over the base field ----------------------------------


def rref(rows, field: FieldSpec):
    """Reduced row echelon form; returns (reduced nonzero rows, pivot columns)."""
    mat = [list(r) for r in rows]
    pivots = []
    r = 0
    ncols = len(mat[0]) if mat else 0
    for c in range(ncols):
        pivot = None
        for i in range(r, len(mat)):
            if mat[i][c] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        inv = field.inv(mat[r][c])
        mat[r] = [field.mul(x, inv) for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                factor = mat[i][c]
                mat[i] = [field.add(x, field.neg(field.mul(factor, y)))
                          for x, y in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return [row for row in mat[:r]], pivots


def _reduce_against(vec, basis, pivots, field: FieldSpec):
    v = list(vec)
    for row, c in zip(basis, pivots):
        if v[c] != 0:
            factor = v[c]
            v = [field.add(x, field.neg(field.mul(factor, y))) for x, y in zip(v, row)]
    return v


def _null_space(columns, field: FieldSpec):
    """Basis of {c : sum c_i * columns[i] = 0}; columns are equal-length vectors."""
    d = len(columns)
    if d == 0:
        return []
    nrows = len(columns[0])
    mat = [[columns[j][i] for j in range(d)] for i in range(nrows)]
    if not mat:
        mat = [[field.zero] * d]
    reduced, pivots = rref(mat, field)
    free = [j for j in range(d) if j not in pivots]
    basis = []
    for j in free:
        c = [field.zero] * d
        c[j] = field.one
        for row, pc in zip(reduced, pivots):
            c[pc] = field.neg(row[j])
        basis.append(c)
    return basis


# -- tau: codimension of the vertex space of the tangent cone ------------------


@dataclass(frozen=True)
class TangentData:
    """Initial forms at a singular closed point plus the vertex-space summary."""

    point: ClosedPoint
    tau: int
    initial_forms: tuple      # the degree-matching initial forms of the saturation
    vertex_forms: tuple       # additive forms (degree 1 or p^e) cutting the vertex space
    root_forms: tuple         # their linear p^e-th roots, an independent family


def _monomials_of_degree(nvars: int, deg: int):
    if deg == 0:
        yield (0,) * nvars
        return
    for cut in itertools.combinations_with_replacement(range(nvars), deg):
        exps = [0] * nvars
        for i in cut:
            exps[i] += 1
        yield tuple(exps)


def _additive_forms_in_degree(forms, degree: int, field: FieldSpec, nvars: int):
    """Additive forms sum(c_i x_i^degree) inside the degree-`degree` graded
    piece of the ideal generated by the given homogeneous forms.

    Returns a list of coefficient vectors c.  Works by spanning the graded
    piece with monomial multiples of the generators and solving for the
    additive vectors that reduce to zero against that span.
    """
    basis_monos = sorted(_monomials_of_degree(nvars, degree), reverse=True)
    index = {m: k for k, m in enumerate(basis_monos)}
    rows = []
    for f in forms:
        d = f.total_degree()
        if d > degree or d < 0:
            continue
        for m in _monomials_of_degree(nvars, degree - d):
            shifted = f * MPoly.monomial(f.field, nvars, m)
            row = [field.zero] * len(basis_monos)
            for e, c in shifted.terms:
                row[index[e]] = c
            rows.append(row)
    if rows:
        reduced, pivots = rref(rows, field)
    else:
        reduced, pivots = [], []
    residues = []
    for i in range(nvars):
        exps = [0] * nvars
        exps[i] = degree
        vec = [field.zero] * len(basis_monos)
        vec[index[tuple(exps)]] = field.one
        residues.append(_reduce_against(vec, reduced, pivots, field))
    return _null_space(residues, field)


def tau_at(alg: ReesAlg, pt: ClosedPoint, check_codim: bool = True) -> TangentData:
    """Codimension of the subspace of vertices of the tangent cone at pt.

    Saturates absolutely, collects initial forms of generators whose local
    order equals their weight, and measures the independent additive forms in
    the p-power graded pieces of the ideal they generate (degree-one forms in
    characteristic 0, where full saturation already exposes every vertex).
    """
    if not isinstance(pt, ClosedPoint):
        raise ValueError("tau is computed at closed points")
    sat = diff_saturate(alg)
    if not sing_member(sat, pt):
        raise ValueError("tau is only defined at points of the singular locus")
    field, nvars = alg.field, alg.nvars
    forms = []
    for f, n in sat.gens:
        if order_at(f, pt) == n:
            forms.append(initial_form(f, pt))
    p = field.characteristic
    degrees = [1]
    if p:
        maxdeg = max((f.total_degree() for f in forms), default=0)
        d = p
        while d <= maxdeg:
            degrees.append(d)
            d *= p
    vertex_forms = []
    roots = []
    for deg in degrees:
        e = 0
        dd = deg
        while dd > 1:
            dd //= p
            e += 1
        for cvec in _additive_forms_in_degree(forms, deg, field, nvars):
            form = MPoly.from_dict(field, nvars, {
                tuple(deg if i == j else 0 for i in range(nvars)): c
                for j, c in enumerate(cvec) if c != 0})
            if form.is_zero():
                continue
            vertex_forms.append(form)
            roots.append([field.pth_root(c, e) for c in cvec])
    reduced, _ = rref(roots, field) if roots else ([], [])
    tau = len(reduced)
    if check_codim:
        strata = singular_coordinate_strata(alg)
        if strata:
            assert tau <= min(len(s) for s in strata), \
                "tau exceeded the codimension of a coordinate singular stratum"
    root_polys = tuple(
        MPoly.from_dict(field, nvars, {
            tuple(1 if i == j else 0 for i in range(nvars)): c
            for j, c in enumerate(r) if c != 0})
        for r in reduced)
    return TangentData(pt, tau, tuple(forms), tuple(vertex_forms), root_polys)


def singular_coordinate_strata(alg: ReesAlg):
    """All variable subsets S with the generic point of V(S) singular."""
    out = []
    for k in range(1, alg.nvars + 1):
        for S in itertools.combinations(range(alg.nvars), k):
            if sing_member(alg, GenericPoint(frozenset(S))):
                out.append(frozenset(S))
    return out


# -- brute-force translation oracle (small finite fields) ----------------------

_IRRED = {
    (2, 2): (1, 1, 1),        # x^2 + x + 1
    (2, 3): (1, 1, 0, 1),     # x^3 + x + 1
    (3, 2): (1, 0, 1),        # x^2 + 1
    (3, 3): (1, 2, 0, 1),     # x^3 + 2x + 1
    (5, 2): (2, 0, 1),        # x^2 + 2
    (5, 3): (1, 1, 0, 1),     # x^3 + x + 1
    (7, 2): (1, 0, 1),        # x^2 + 1
    (7, 3): (2, 3, 0, 1),     # x^3 + 3x + 2
}


class SmallExtField:
    """Arithmetic in F_{p^m} for tiny m, elements as coefficient tuples."""

    def __init__(self, p: int, m: int):
        if m < 1:
            raise ValueError("extension degree must be >= 1")
        if m > 1 and (p, m) not in _IRRED:
            raise ValueError(f"no modulus table entry for F_{p}^{m}")
        self.p = p
        self.m = m
        self.modulus = _IRRED.get((p, m))

    def zero(self):
        return (0,) * self.m

    def embed(self, c: int):
        return (c % self.p,) + (0,) * (self.m - 1)

    def add(self, a, b):
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def mul(self, a, b):
        p, m = self.p, self.m
        if m == 1:
            return ((a[0] * b[0]) % p,)
        prod = [0] * (2 * m - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] = (prod[i + j] + x * y) % p
        mod = self.modulus
        for k in range(len(prod) - 1, m - 1, -1):
            c = prod[k]
            if c:
                prod[k] = 0
                for j in range(m):
                    prod[k - m + j] = (prod[k - m + j] - c * mod[j]) % p
        return tuple(prod[:m])

    def power(self, a, n: int):
        out = self.embed(1)
        base = a
        while n:
            if n & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            n >>= 1
        return out

    def elements(self):
        return itertools.product(range(self.p), repeat=self.m)


def _verify_modulus_table():
    for (p, m), coeffs in _IRRED.items():
        # no roots in F_p => irreducible for degree 2 and 3
        for a in range(p):
            val = sum(c * pow(a, i, p) for i, c in enumerate(coeffs)) % p
            if val == 0:
                raise AssertionError(f"modulus for F_{p}^{m} has a root {a}")


_verify_modulus_table()


def tau_translation_oracle(alg: ReesAlg, pt: ClosedPoint, ext_degree: int = 1) -> int:
    """Brute-force tau: count translations over F_{p^m} fixing every collected
    initial form, i.e. vectors v with F(x + v) = F(x) identically.

    The good vectors form the rational points of the vertex space, so their
    count is (p^m)^dim.  Exact for cones cut by the collected forms
    individually; used as an oracle in tests and behind a CLI flag.
    """
    p = alg.field.characteristic
    if p == 0:
        raise ValueError("the translation oracle needs positive characteristic")
    if ext_degree > 3:
        raise ValueError("extension degrees above 3 are not supported")
    sat = diff_saturate(alg)
    if not sing_member(sat, pt):
        raise ValueError("tau is only defined at points of the singular locus")
    nvars = alg.nvars
    forms = [initial_form(f, pt) for f, n in sat.gens if order_at(f, pt) == n]
    gf = SmallExtField(p, ext_degree)

    # Precompute, per form, the coefficient table of F(x+v) - F(x) as a
    # polynomial in x whose coefficients are polynomials in v:
    #   F(x+v) = sum_alpha Hasse^alpha(F)(x) * v^alpha.
    tables = []
    for F in forms:
        table: dict = {}
        degs = [F.degree_in_var(i) for i in range(nvars)]
        for alpha in itertools.product(*(range(d + 1) for d in degs)):
            if sum(alpha) == 0:
                continue
            g = F.hasse_deriv_multi(alpha)
            for e, c in g.terms:
                table.setdefault(e, []).append((alpha, c))
        tables.append(table)

    good = 0
    for v in itertools.product(gf.elements(), repeat=nvars):
        ok = True
        for table in tables:
            for entries in table.values():
                acc = gf.zero()
                for alpha, c in entries:
                    term = gf.embed(int(c))
                    for i, a in enumerate(alpha):
                        if a:
                            term = gf.mul(term, gf.power(v[i], a))
                    acc = gf.add(acc, term)
                if acc != gf.zero():
                    ok = False
                    break
            if not ok:
                break
        if ok:
            good += 1
    q = p ** ext_degree
    dim = 0
    count = good
    while count > 1:
        if count % q:
            raise AssertionError("fixed-translation count is not a power of the field size")
        count //= q
        dim += 1
    return nvars - dim


def quadratic_rank(f: MPoly) -> int:
    """Rank of a quadratic form over Q (Gram matrix rank); oracle for tau in
    characteristic 0 on single-quadric algebras."""
    if f.field.characteristic != 0:
        raise ValueError("Gram-rank oracle is for characteristic 0")
    n = f.nvars
    gram = [[Fraction(0)] * n for _ in range(n)]
    for e, c in f.terms:
        if sum(e) != 2:
            raise ValueError("not a quadratic form")
        idx = [i for i in range(n) for _ in range(e[i])]
        i, j = idx
        if i == j:
            gram[i][i] = Fraction(c)
        else:
            gram[i][j] = gram[j][i] = Fraction(c) / 2
    reduced, _ = rref(gram, f.field)
    return len(reduced)
