"""Sparse exact multivariate polynomials over Q or F_p.

This is the carrier type for the whole library: coefficients are
`fractions.Fraction` in characteristic 0 and canonical residues `0..p-1` in
characteristic p, so every computation downstream is exact.  On top of the
ring operations the module provides the local-analysis toolkit: orders at
closed and generic points, initial forms, Hasse (divided-power) derivatives,
and weighted initial forms of monic section polynomials.

Term order for canonical output is graded lexicographic, largest first.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Union

from .errors import PolyParseError

# Orders of the zero polynomial and of empty algebras compare as infinity.
# float("inf") is used strictly for comparisons and never serialized as-is.
INF = float("inf")

Coeff = Union[Fraction, int]
Exps = tuple  # tuple[int, ...]


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class FieldSpec:
    """The base field: Q when characteristic is 0, F_p when it is a prime p."""

    characteristic: int

    def __post_init__(self):
        p = self.characteristic
        if p != 0 and not _is_prime(p):
            raise ValueError(f"characteristic must be 0 or prime, got {p}")

    @property
    def zero(self) -> Coeff:
        return 0 if self.characteristic else Fraction(0)

    @property
    def one(self) -> Coeff:
        return 1 if self.characteristic else Fraction(1)

    def coerce(self, x) -> Coeff:
        """Bring an int or Fraction into canonical element form."""
        p = self.characteristic
        if p == 0:
            return Fraction(x)
        if isinstance(x, Fraction):
            den = x.denominator % p
            if den == 0:
                raise ZeroDivisionError(f"denominator of {x} vanishes mod {p}")
            return (x.numerator % p) * pow(den, -1, p) % p
        return x % p

    def add(self, a: Coeff, b: Coeff) -> Coeff:
        p = self.characteristic
        return (a + b) % p if p else a + b

    def mul(self, a: Coeff, b: Coeff) -> Coeff:
        p = self.characteristic
        return (a * b) % p if p else a * b

    def neg(self, a: Coeff) -> Coeff:
        p = self.characteristic
        return (-a) % p if p else -a

    def inv(self, a: Coeff) -> Coeff:
        p = self.characteristic
        if p:
            return pow(a, -1, p)
        return Fraction(1) / a

    def pth_root(self, a: Coeff, e: int) -> Coeff:
        """The p^e-th root of a field element.

        Over the prime field F_p the Frobenius is the identity, so the root
        is the element itself; over Q only e = 0 is meaningful.
        """
        if e == 0:
            return a
        if self.characteristic == 0:
            raise ValueError("p-power roots need positive characteristic")
        return a

    def __str__(self) -> str:
        p = self.characteristic
        return "Q" if p == 0 else f"F_{p}"


def _grlex_key(exps: Exps):
    return (sum(exps), exps)


@dataclass(frozen=True)
class MPoly:
    """An immutable sparse polynomial: exponent vector -> nonzero coefficient.

    `terms` is kept sorted graded-lexicographically descending, which makes
    equality, hashing and rendering canonical.
    """

    field: FieldSpec
    nvars: int
    terms: tuple  # tuple[tuple[Exps, Coeff], ...]

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_dict(cls, field: FieldSpec, nvars: int, d: Mapping[Exps, Coeff]) -> "MPoly":
        items = []
        for exps, c in d.items():
            c = field.coerce(c)
            if c == 0:
                continue
            if len(exps) != nvars or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent vector {exps} for arity {nvars}")
            items.append((tuple(exps), c))
        items.sort(key=lambda t: _grlex_key(t[0]), reverse=True)
        return cls(field, nvars, tuple(items))

    @classmethod
    def zero_poly(cls, field: FieldSpec, nvars: int) -> "MPoly":
        return cls(field, nvars, ())

    @classmethod
    def const(cls, field: FieldSpec, nvars: int, c) -> "MPoly":
        return cls.from_dict(field, nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, field: FieldSpec, nvars: int, i: int) -> "MPoly":
        exps = [0] * nvars
        exps[i] = 1
        return cls.from_dict(field, nvars, {tuple(exps): 1})

    @classmethod
    def monomial(cls, field: FieldSpec, nvars: int, exps: Iterable[int], c=1) -> "MPoly":
        return cls.from_dict(field, nvars, {tuple(exps): c})

    # -- basic queries -----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e, _ in self.terms)

    def constant_value(self) -> Coeff:
        for e, c in self.terms:
            if sum(e) == 0:
                return c
        return self.field.zero

    def is_single_term(self) -> bool:
        return len(self.terms) == 1

    def iter_terms(self) -> Iterator[tuple]:
        return iter(self.terms)

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e, _ in self.terms)

    def degree_in_var(self, i: int) -> int:
        if not self.terms:
            return -1
        return max(e[i] for e, _ in self.terms)

    def uses_var(self, i: int) -> bool:
        return any(e[i] for e, _ in self.terms)

    def order_total(self):
        if not self.terms:
            return INF
        return min(sum(e) for e, _ in self.terms)

    def order_wrt(self, var_set: Iterable[int]):
        vs = tuple(var_set)
        if not self.terms:
            return INF
        return min(sum(e[i] for i in vs) for e, _ in self.terms)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "MPoly") -> "MPoly":
        self._check_compat(other)
        d = dict(self.terms)
        f = self.field
        for e, c in other.terms:
            d[e] = f.add(d.get(e, f.zero), c)
        return MPoly.from_dict(f, self.nvars, d)

    def __neg__(self) -> "MPoly":
        f = self.field
        return MPoly(f, self.nvars, tuple((e, f.neg(c)) for e, c in self.terms))

    def __sub__(self, other: "MPoly") -> "MPoly":
        return self + (-other)

    def __mul__(self, other: "MPoly") -> "MPoly":
        self._check_compat(other)
        f = self.field
        d: dict = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                prod = f.mul(c1, c2)
                if e in d:
                    d[e] = f.add(d[e], prod)
                else:
                    d[e] = prod
        return MPoly.from_dict(f, self.nvars, d)

    def __pow__(self, n: int) -> "MPoly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = MPoly.const(self.field, self.nvars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def scale(self, c) -> "MPoly":
        f = self.field
        c = f.coerce(c)
        if c == 0:
            return MPoly.zero_poly(f, self.nvars)
        return MPoly.from_dict(f, self.nvars, {e: f.mul(cc, c) for e, cc in self.terms})

    def _check_compat(self, other: "MPoly"):
        if self.field != other.field or self.nvars != other.nvars:
            raise ValueError("polynomials live in different rings")

    # -- structural pieces -------------------------------------------------

    def homogeneous_part(self, k: int) -> "MPoly":
        return MPoly(self.field, self.nvars,
                     tuple((e, c) for e, c in self.terms if sum(e) == k))

    def graded_part_wrt(self, var_set: Iterable[int], k: int) -> "MPoly":
        vs = tuple(var_set)
        return MPoly(self.field, self.nvars,
                     tuple((e, c) for e, c in self.terms if sum(e[i] for i in vs) == k))

    def coefficients_in_var(self, i: int) -> dict:
        """Decompose as a polynomial in variable i: exponent -> coefficient poly."""
        buckets: dict = {}
        for e, c in self.terms:
            k = e[i]
            rest = list(e)
            rest[i] = 0
            buckets.setdefault(k, {})[tuple(rest)] = c
        return {k: MPoly.from_dict(self.field, self.nvars, d) for k, d in buckets.items()}

    # -- substitution and friends -------------------------------------------

    def substitute(self, mapping: Mapping[int, "MPoly"]) -> "MPoly":
        """Simultaneously replace variables by polynomials (ring morphism)."""
        f = self.field
        out = MPoly.zero_poly(f, self.nvars)
        pow_cache: dict = {}
        for e, c in self.terms:
            piece = MPoly.const(f, self.nvars, c)
            plain = [0] * self.nvars
            for i, k in enumerate(e):
                if k == 0:
                    continue
                if i in mapping:
                    key = (i, k)
                    if key not in pow_cache:
                        pow_cache[key] = mapping[i] ** k
                    piece = piece * pow_cache[key]
                else:
                    plain[i] = k
            if any(plain):
                piece = piece * MPoly.monomial(f, self.nvars, plain)
            out = out + piece
        return out

    def translate(self, values) -> "MPoly":
        """Shift coordinates to a closed point: x_i -> x_i + v_i.

        `values` may contain None entries for variables left untouched.
        The result expresses the polynomial in local coordinates at the point.
        """
        f = self.field
        mapping = {}
        for i, v in enumerate(values):
            if v is None:
                continue
            v = f.coerce(v)
            if v == 0:
                continue
            mapping[i] = MPoly.var(f, self.nvars, i) + MPoly.const(f, self.nvars, v)
        if not mapping:
            return self
        return self.substitute(mapping)

    def evaluate(self, values) -> Coeff:
        f = self.field
        vals = [f.coerce(v) for v in values]
        acc = f.zero
        for e, c in self.terms:
            term = c
            for i, k in enumerate(e):
                for _ in range(k):
                    term = f.mul(term, vals[i])
            acc = f.add(acc, term)
        return acc

    def set_var_to_zero(self, i: int) -> "MPoly":
        return MPoly(self.field, self.nvars,
                     tuple((e, c) for e, c in self.terms if e[i] == 0))

    def extend_arity(self, new_nvars: int) -> "MPoly":
        """Embed into a ring with extra trailing variables."""
        if new_nvars < self.nvars:
            raise ValueError("cannot shrink arity")
        pad = (0,) * (new_nvars - self.nvars)
        return MPoly(self.field, new_nvars,
                     tuple((e + pad, c) for e, c in self.terms))

    # -- exact divisions and roots ------------------------------------------

    def divide_by_var_power(self, i: int, n: int) -> "MPoly":
        """Exact division by x_i^n; raises ValueError if any term falls short."""
        if n == 0:
            return self
        out = []
        for e, c in self.terms:
            if e[i] < n:
                raise ValueError(
                    f"term with exponent {e[i]} in variable {i} is not divisible by power {n}")
            ee = list(e)
            ee[i] -= n
            out.append((tuple(ee), c))
        out.sort(key=lambda t: _grlex_key(t[0]), reverse=True)
        return MPoly(self.field, self.nvars, tuple(out))

    def pth_power_root(self, pe: int) -> Optional["MPoly"]:
        """The pe-th root when pe is a p-power and the poly is a pe-th power.

        Over F_p a polynomial is a pe-th power exactly when every exponent is
        divisible by pe (coefficient roots are free by Fermat).  Returns None
        when no root exists.  pe = 1 returns the polynomial itself.
        """
        if pe == 1:
            return self
        f = self.field
        if f.characteristic == 0:
            return None
        d = {}
        for e, c in self.terms:
            if any(k % pe for k in e):
                return None
            d[tuple(k // pe for k in e)] = f.pth_root(c, 1)
        return MPoly.from_dict(f, self.nvars, d)

    # -- Hasse derivatives ---------------------------------------------------

    def hasse_deriv(self, i: int, r: int) -> "MPoly":
        """The divided-power derivative of order r in variable i.

        Acts on monomials by x^m -> binom(m, r) x^(m-r), the binomial taken
        in Z and then reduced into the field, which is the correct divided
        Leibniz operator in every characteristic.
        """
        if r == 0:
            return self
        f = self.field
        d: dict = {}
        for e, c in self.terms:
            m = e[i]
            if m < r:
                continue
            b = f.coerce(math.comb(m, r))
            if b == 0:
                continue
            ee = list(e)
            ee[i] = m - r
            ee = tuple(ee)
            val = f.mul(c, b)
            d[ee] = f.add(d.get(ee, f.zero), val)
        return MPoly.from_dict(f, self.nvars, d)

    def hasse_deriv_multi(self, alpha) -> "MPoly":
        out = self
        for i, r in enumerate(alpha):
            if r:
                out = out.hasse_deriv(i, r)
            if out.is_zero():
                break
        return out

    def __str__(self) -> str:
        return render_poly(self, tuple(f"x{i}" for i in range(self.nvars)))


# -- points -----------------------------------------------------------------


@dataclass(frozen=True)
class ClosedPoint:
    """A rational point given by its coordinate values."""

    values: tuple

    @property
    def kind(self) -> str:
        return "closed"


@dataclass(frozen=True)
class GenericPoint:
    """The generic point of the coordinate subvariety V(x_i : i in vars)."""

    vars: frozenset

    def __post_init__(self):
        if not self.vars:
            raise ValueError("generic point needs a non-empty variable set")

    @property
    def kind(self) -> str:
        return "generic"


PointSpec = Union[ClosedPoint, GenericPoint]


def order_at(f: MPoly, pt: PointSpec):
    """The order of f at a point: infinity for the zero polynomial.

    Closed points measure the usual local multiplicity (after translating the
    point to the origin); the generic point of V(x_i : i in S) measures the
    minimal S-degree, i.e. the order along that coordinate subvariety.
    """
    if isinstance(pt, ClosedPoint):
        if len(pt.values) != f.nvars:
            raise ValueError("point arity does not match polynomial arity")
        return f.translate(pt.values).order_total()
    return f.order_wrt(pt.vars)


def initial_form(f: MPoly, pt: ClosedPoint) -> MPoly:
    """The lowest homogeneous part of f in local coordinates at a closed point."""
    if not isinstance(pt, ClosedPoint):
        raise ValueError("initial forms are taken at closed points")
    if f.is_zero():
        return f
    g = f.translate(pt.values)
    return g.homogeneous_part(g.order_total())


def hasse_derivative(f: MPoly, var: int, r: int) -> MPoly:
    return f.hasse_deriv(var, r)


# -- weighted initial forms ---------------------------------------------------


@dataclass(frozen=True)
class WeightedForm:
    """The weighted initial form of a monic section polynomial.

    Represents Z^n + sum_j A_j Z^(n-j) where Z stands for the section
    variable with weight q and the A_j are forms of degree j*q in the grading
    variables (coefficients in the remaining variables are allowed when the
    grading is taken along a coordinate subvariety).  Coefficients A_j with
    j*q not an integer are identically zero and therefore absent.
    """

    field: FieldSpec
    nvars: int
    z_index: int
    n: int
    q: Fraction
    graded_vars: frozenset
    coeffs: tuple  # tuple[tuple[int, MPoly], ...] sorted by j, A_j nonzero

    def __post_init__(self):
        for j, a in self.coeffs:
            if a.is_zero() or a.uses_var(self.z_index):
                raise ValueError("weighted form coefficients must be nonzero and section-free")
            w = self.q * j
            if w.denominator != 1:
                raise ValueError(f"coefficient at j={j} sits off the integer grid")
            if a.order_wrt(self.graded_vars) != w or \
               a.graded_part_wrt(self.graded_vars, int(w)) != a:
                raise ValueError(f"coefficient at j={j} is not homogeneous of degree {w}")

    def coeff(self, j: int) -> MPoly:
        for jj, a in self.coeffs:
            if jj == j:
                return a
        return MPoly.zero_poly(self.field, self.nvars)

    def is_pure_power_of_z(self) -> bool:
        return not self.coeffs

    def expand(self) -> MPoly:
        """The form as an honest polynomial (Z realized as the section variable)."""
        f = self.field
        z_exps = [0] * self.nvars
        z_exps[self.z_index] = self.n
        out = MPoly.monomial(f, self.nvars, z_exps)
        for j, a in self.coeffs:
            ze = [0] * self.nvars
            ze[self.z_index] = self.n - j
            out = out + a * MPoly.monomial(f, self.nvars, ze)
        return out


def weighted_initial_form(f: MPoly, z_index: int, y: PointSpec, q: Fraction) -> WeightedForm:
    """Collect the weight-q boundary terms of a monic section polynomial at y.

    f must be monic of some degree n in the section variable with
    section-free coefficients.  For each j with j*q integral, the coefficient
    of Z^(n-j) is the degree-(j*q) graded piece of a_j at y; the grading is
    total degree at a closed point (after translation) and S-degree at the
    generic point of V(S).  q = 0 returns the fiber-equation data: the
    degree-0 pieces, i.e. the evaluation of the coefficients at the point.
    """
    q = Fraction(q)
    if q < 0:
        raise ValueError("weights are non-negative")
    coeffs_by_j = _monic_coefficients(f, z_index)
    n = max(coeffs_by_j)
    if isinstance(y, ClosedPoint):
        graded = frozenset(i for i in range(f.nvars) if i != z_index)
        shift = y.values
    else:
        graded = frozenset(y.vars)
        if z_index in graded:
            raise ValueError("grading point must live downstairs")
        shift = None
    out = []
    for j in range(1, n + 1):
        a = coeffs_by_j.get(j)
        if a is None:
            continue
        w = q * j
        if w.denominator != 1:
            continue
        if shift is not None:
            a = a.translate(shift)
        piece = a.graded_part_wrt(graded, int(w))
        if not piece.is_zero():
            out.append((j, piece))
    return WeightedForm(f.field, f.nvars, z_index, n, q, graded, tuple(out))


def _monic_coefficients(f: MPoly, z_index: int) -> dict:
    """Split a monic section polynomial into {j: a_j} with f = z^n + sum a_j z^(n-j).

    Raises on non-monic input or on coefficients involving the section variable
    (the latter cannot happen for polynomials built by decomposition, but input
    validation keeps presentations honest).
    """
    from .errors import NotMonicError

    by_deg = f.coefficients_in_var(z_index)
    if not by_deg:
        raise NotMonicError("zero polynomial is not monic")
    n = max(by_deg)
    lead = by_deg[n]
    if n == 0 or not lead.is_constant() or lead.constant_value() != f.field.one:
        raise NotMonicError("section polynomial must be monic of positive degree")
    out = {n: MPoly.zero_poly(f.field, f.nvars)}
    for k, a in by_deg.items():
        if k == n:
            continue
        out[n - k] = a
    # fill in n itself: a_n is the z-free part
    out[n] = by_deg.get(0, MPoly.zero_poly(f.field, f.nvars))
    if 0 in by_deg and n == 0:
        raise NotMonicError("section polynomial must have positive degree")
    return out


def monic_coefficients(f: MPoly, z_index: int) -> dict:
    return _monic_coefficients(f, z_index)


# -- text syntax --------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*^()]))")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            rest = text[pos:].strip()
            raise PolyParseError(f"unexpected character at: {rest[:20]!r}")
        if m.group("num"):
            lit = m.group("num")
            if "/" in lit:
                a, b = lit.split("/")
                if int(b) == 0:
                    raise PolyParseError("zero denominator in coefficient literal")
                tokens.append(("num", Fraction(int(a), int(b))))
            else:
                tokens.append(("num", Fraction(int(lit))))
        elif m.group("name"):
            tokens.append(("name", m.group("name")))
        else:
            tokens.append(("op", m.group("op")))
        pos = m.end()
    tokens.append(("end", None))
    return tokens


class _Parser:
    """Recursive-descent parser for `+ - * ^` expressions over named variables.

    Division is not an operator; rational literals like 3/2 are single
    coefficient tokens.  Implicit multiplication is rejected by construction
    (two adjacent atoms never parse).
    """

    def __init__(self, tokens, field: FieldSpec, names):
        self.tokens = tokens
        self.pos = 0
        self.field = field
        self.names = list(names)
        self.nvars = len(self.names)

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse(self) -> MPoly:
        out = self.expr()
        if self.peek()[0] != "end":
            raise PolyParseError(f"trailing input near token {self.peek()!r}")
        return out

    def expr(self) -> MPoly:
        sign = 1
        while self.peek() == ("op", "-") or self.peek() == ("op", "+"):
            if self.take() == ("op", "-"):
                sign = -sign
        acc = self.term()
        if sign < 0:
            acc = -acc
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()
            rhs = self.term()
            acc = acc + rhs if op == ("op", "+") else acc - rhs
        return acc

    def term(self) -> MPoly:
        acc = self.factor()
        while self.peek() == ("op", "*"):
            self.take()
            acc = acc * self.factor()
        return acc

    def factor(self) -> MPoly:
        base = self.atom()
        while self.peek() == ("op", "^"):
            self.take()
            kind, val = self.take()
            if kind != "num" or val.denominator != 1 or val < 0:
                raise PolyParseError("exponent must be a non-negative integer")
            base = base ** int(val)
        return base

    def atom(self) -> MPoly:
        kind, val = self.take()
        if kind == "num":
            return MPoly.const(self.field, self.nvars, val)
        if kind == "name":
            try:
                i = self.names.index(val)
            except ValueError:
                raise PolyParseError(f"unknown variable {val!r}") from None
            return MPoly.var(self.field, self.nvars, i)
        if (kind, val) == ("op", "("):
            inner = self.expr()
            if self.take() != ("op", ")"):
                raise PolyParseError("missing closing parenthesis")
            return inner
        if (kind, val) == ("op", "-"):
            return -self.atom()
        raise PolyParseError(f"unexpected token {val!r}")


def parse_poly(text: str, field: FieldSpec, names) -> MPoly:
    if "/" in text:
        # A slash is only legal inside a rational coefficient literal.
        if re.search(r"(?<![0-9])/|/(?![0-9])", text):
            raise PolyParseError("division is not part of the polynomial syntax")
    return _Parser(_tokenize(text), field, names).parse()


def format_coeff(c: Coeff) -> str:
    if isinstance(c, Fraction) and c.denominator != 1:
        return f"{c.numerator}/{c.denominator}"
    return str(int(c))


def render_poly(f: MPoly, names) -> str:
    """Canonical text form; parse_poly(render_poly(f)) == f."""
    if f.is_zero():
        return "0"
    parts = []
    for e, c in f.terms:  # already sorted graded-lex descending
        factors = []
        for i, k in enumerate(e):
            if k == 0:
                continue
            factors.append(names[i] if k == 1 else f"{names[i]}^{k}")
        neg = c < 0
        mag = -c if neg else c
        body = "*".join(factors)
        if not factors:
            body = format_coeff(mag)
        elif mag != 1:
            body = f"{format_coeff(mag)}*{body}"
        if not parts:
            parts.append(f"-{body}" if neg else body)
        else:
            parts.append(f"- {body}" if neg else f"+ {body}")
    return " ".join(parts)
