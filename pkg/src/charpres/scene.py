"""Scene files and their execution.

A scene is a line-oriented UTF-8 file with bracketed sections declaring the
base field, the variables, an algebra and/or a presentation, named points,
and a script of commands.  Execution appends one record per command to a
trace document; traces serialize as canonical JSON (sorted keys, rationals as
"num/den" strings, never floats) so byte equality is meaningful.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Optional

from .blowup import Center, Tower, stage_ab_experiment
from .errors import CommandError, SceneParseError
from .monomial import (combinatorial_resolve, is_strong_monomial,
                       lift_resolution, sandwich_report, track_monomial)
from .poly import (INF, ClosedPoint, FieldSpec, GenericPoint, MPoly,
                   PointSpec, parse_poly, render_poly)
from .projection import (Presentation, SimplifiedPresentation, hord_data,
                         make_p_presentation, membership_criterion, normalize,
                         slope_poly, upstairs_algebra)
from .rees import (ReesAlg, diff_saturate, ord_at, sing_member,
                   singular_coordinate_strata, tau_at, tau_translation_oracle)

_SECTIONS = ("field", "variables", "algebra", "presentation", "points", "script")
_GEN_RE = re.compile(r"^(.*?)\s+W\^(\d+)$")


@dataclass
class Scene:
    field: FieldSpec
    names: list
    sections: tuple                 # section variable indices
    algebra: Optional[ReesAlg]
    presentation: object            # Presentation | SimplifiedPresentation | None
    points: dict                    # name -> PointSpec
    script: list                    # [(lineno, command text)]
    path: str = "<scene>"

    def require_algebra(self) -> ReesAlg:
        if self.algebra is not None:
            return self.algebra
        if self.presentation is not None:
            return upstairs_algebra(self.presentation)
        raise CommandError("scene declares neither an algebra nor a presentation")

    def require_presentation(self):
        if self.presentation is None:
            raise CommandError("this command needs a [presentation] section")
        return self.presentation


def _split_csv(text: str):
    return [t.strip() for t in text.split(",") if t.strip()]


def parse_scene(text: str, path: str = "<scene>") -> Scene:
    section = None
    data: dict = {name: [] for name in _SECTIONS}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            name = stripped[1:-1].strip().lower()
            if name not in _SECTIONS:
                raise SceneParseError("unknown section [%s]" % name, lineno)
            section = name
            continue
        if section is None:
            raise SceneParseError("content before the first section header", lineno)
        data[section].append((lineno, stripped))

    # field
    characteristic = None
    for lineno, line in data["field"]:
        key, _, value = line.partition(":")
        if key.strip() != "characteristic":
            raise SceneParseError("expected 'characteristic: <p>'", lineno)
        try:
            characteristic = int(value.strip())
        except ValueError:
            raise SceneParseError("characteristic must be an integer", lineno)
    if characteristic is None:
        raise SceneParseError("missing [field] characteristic")
    try:
        field = FieldSpec(characteristic)
    except ValueError as exc:
        raise SceneParseError(str(exc), data["field"][0][0])

    # variables
    names = None
    section_names = []
    sections_lineno = data["variables"][0][0]
    for lineno, line in data["variables"]:
        key, _, value = line.partition(":")
        key = key.strip()
        if key == "vars":
            names = _split_csv(value)
        elif key == "sections":
            section_names = _split_csv(value)
            sections_lineno = lineno
        else:
            raise SceneParseError("unknown [variables] entry %r" % key, lineno)
    if not names:
        raise SceneParseError("missing [variables] vars line")
    if len(set(names)) != len(names):
        raise SceneParseError("duplicate variable name", data["variables"][0][0])
    if "W" in names:
        raise SceneParseError("'W' is reserved for generator weights",
                              data["variables"][0][0])
    index = {n: i for i, n in enumerate(names)}

    def var_index(name: str, lineno: int) -> int:
        if name not in index:
            raise SceneParseError("unknown variable %r" % name, lineno)
        return index[name]

    sections = tuple(var_index(n, sections_lineno) for n in section_names)

    def parse_gen(line: str, lineno: int):
        m = _GEN_RE.match(line)
        if not m:
            raise SceneParseError("expected '<polynomial> W^<weight>'", lineno)
        try:
            f = parse_poly(m.group(1), field, names)
        except Exception as exc:
            raise SceneParseError(str(exc), lineno)
        return f, int(m.group(2))

    # algebra
    algebra = None
    gens = []
    for lineno, line in data["algebra"]:
        key, _, value = line.partition(":")
        if key.strip() != "gen":
            raise SceneParseError("expected 'gen: <poly> W^<n>'", lineno)
        gens.append(parse_gen(value.strip(), lineno))
    if gens:
        try:
            algebra = ReesAlg.make(field, len(names), gens)
        except ValueError as exc:
            raise SceneParseError(str(exc), data["algebra"][0][0])

    # presentation
    presentation = None
    if data["presentation"]:
        psecs = sections
        polys = {}
        elim_gens = []
        kind = "simplified"
        for lineno, line in data["presentation"]:
            key, _, value = line.partition(":")
            key = key.strip()
            value = value.strip()
            if key == "sections":
                psecs = tuple(var_index(n, lineno) for n in _split_csv(value))
            elif key.startswith("poly"):
                tail = key[4:].strip()
                try:
                    i = int(tail) if tail else 1
                except ValueError:
                    raise SceneParseError("expected 'poly <i>: <polynomial>'", lineno)
                try:
                    polys[i] = parse_poly(value, field, names)
                except Exception as exc:
                    raise SceneParseError(str(exc), lineno)
            elif key == "elim":
                elim_gens.append(parse_gen(value, lineno))
            elif key == "kind":
                if value not in ("simplified", "p"):
                    raise SceneParseError("presentation kind must be 'simplified' or 'p'",
                                          lineno)
                kind = value
            else:
                raise SceneParseError("unknown [presentation] entry %r" % key, lineno)
        if not psecs:
            raise SceneParseError("presentation needs section variables",
                                  data["presentation"][0][0])
        if sorted(polys) != list(range(1, len(psecs) + 1)):
            raise SceneParseError("presentation needs 'poly i:' for i = 1..e",
                                  data["presentation"][0][0])
        elim = ReesAlg.make(field, len(names), elim_gens)
        ordered = tuple(polys[i] for i in range(1, len(psecs) + 1))
        try:
            if kind == "p":
                presentation = make_p_presentation(field, len(names), psecs,
                                                   ordered, elim)
            elif len(psecs) == 1:
                presentation = Presentation(field, len(names), psecs[0],
                                            ordered[0], elim)
            else:
                presentation = SimplifiedPresentation(field, len(names), psecs,
                                                      ordered, elim)
        except Exception as exc:
            raise SceneParseError(str(exc), data["presentation"][0][0])

    # points
    points: dict = {}
    for lineno, line in data["points"]:
        name, eq, value = line.partition("=")
        if not eq:
            raise SceneParseError("expected '<name> = (…)' or '<name> = {…}'", lineno)
        name = name.strip()
        value = value.strip()
        if value.startswith("(") and value.endswith(")"):
            parts = _split_csv(value[1:-1])
            if len(parts) != len(names):
                raise SceneParseError("closed point needs %d coordinates" % len(names),
                                      lineno)
            try:
                vals = tuple(field.coerce(Fraction(p)) for p in parts)
            except (ValueError, ZeroDivisionError) as exc:
                raise SceneParseError("bad coordinate: %s" % exc, lineno)
            points[name] = ClosedPoint(vals)
        elif value.startswith("{") and value.endswith("}"):
            vs = frozenset(var_index(n, lineno) for n in _split_csv(value[1:-1]))
            if not vs:
                raise SceneParseError("generic point needs at least one variable", lineno)
            points[name] = GenericPoint(vs)
        else:
            raise SceneParseError("expected '(…)' or '{…}' point syntax", lineno)
    points.setdefault("origin", ClosedPoint((field.zero,) * len(names)))

    script = list(data["script"])
    return Scene(field, names, sections, algebra, presentation, points, script, path)


def load_scene(path: str) -> Scene:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scene(fh.read(), path)


# -- serialization -----------------------------------------------------------------


def jsonify(obj):
    """Exact JSON image: Fractions become ints or 'num/den' strings, infinity
    becomes 'inf', containers recurse.  No floats ever."""
    if obj is INF:
        return "inf"
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        raise TypeError("floats are not allowed in traces")
    if isinstance(obj, Fraction):
        if obj.denominator == 1:
            return int(obj)
        return "%d/%d" % (obj.numerator, obj.denominator)
    if isinstance(obj, dict):
        return {str(k): jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonify(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(jsonify(v) for v in obj)
    raise TypeError("cannot serialize %r" % type(obj).__name__)


def canonical_json(doc) -> str:
    return json.dumps(jsonify(doc), sort_keys=True, separators=(",", ":")) + "\n"


def _first_divergence(a, b, path="$"):
    if type(a) is not type(b):
        return "%s: type %s != %s" % (path, type(a).__name__, type(b).__name__)
    if isinstance(a, dict):
        for k in sorted(set(a) | set(b)):
            if k not in a:
                return "%s: missing key %r on the left" % (path, k)
            if k not in b:
                return "%s: missing key %r on the right" % (path, k)
            d = _first_divergence(a[k], b[k], "%s.%s" % (path, k))
            if d:
                return d
        return None
    if isinstance(a, list):
        for i, (x, y) in enumerate(zip(a, b)):
            d = _first_divergence(x, y, "%s[%d]" % (path, i))
            if d:
                return d
        if len(a) != len(b):
            return "%s: length %d != %d" % (path, len(a), len(b))
        return None
    if a != b:
        return "%s: %r != %r" % (path, a, b)
    return None


def verify_trace(trace_text: str, golden_text: str):
    """Byte equality of canonicalized traces; on mismatch, a pointer to the
    first divergent value."""
    try:
        a = json.loads(trace_text)
        b = json.loads(golden_text)
    except json.JSONDecodeError as exc:
        return False, "not valid JSON: %s" % exc
    ca, cb = canonical_json(a), canonical_json(b)
    if ca == cb:
        return True, None
    return False, _first_divergence(jsonify(a), jsonify(b)) or "traces differ"


# -- command execution ---------------------------------------------------------------


@dataclass
class RunOptions:
    max_normalize_iters: Optional[int] = None
    tau_oracle_extension: Optional[int] = None


@dataclass
class _Execution:
    scene: Scene
    options: RunOptions
    tower: Optional[Tower] = None
    records: list = dc_field(default_factory=list)

    def rp(self, f: MPoly) -> str:
        return render_poly(f, self.scene.names)

    def point(self, name: str) -> PointSpec:
        if name not in self.scene.points:
            raise CommandError("unknown point %r" % name)
        return self.scene.points[name]

    def point_json(self, pt: PointSpec):
        if isinstance(pt, ClosedPoint):
            return {"closed": [v for v in pt.values]}
        return {"generic": sorted(self.scene.names[i] for i in pt.vars)}

    def current_presentation(self):
        if self.tower is not None:
            obj = self.tower.obj
            if isinstance(obj, (Presentation, SimplifiedPresentation)):
                return obj
            raise CommandError("the tower does not track a presentation")
        return self.scene.require_presentation()

    def ensure_tower(self) -> Tower:
        if self.tower is None:
            obj = (self.scene.presentation if self.scene.presentation is not None
                   else self.scene.require_algebra())
            self.tower = Tower.start(self.scene.names, obj)
        return self.tower


def _object_json(ex: _Execution, obj) -> dict:
    if isinstance(obj, ReesAlg):
        return {"kind": "algebra", "unit": obj.is_unit,
                "gens": [{"poly": ex.rp(f), "weight": n} for f, n in obj.gens]}
    simp = obj.simplified() if isinstance(obj, Presentation) else obj
    return {"kind": "presentation",
            "sections": [ex.scene.names[z] for z in simp.sections],
            "polys": [ex.rp(f) for f in simp.polys],
            "elim": [{"poly": ex.rp(g), "weight": m} for g, m in simp.elim.gens]}


def _cmd_analyze(ex: _Execution, point_name: str) -> dict:
    alg = ex.scene.require_algebra()
    pt = ex.point(point_name)
    rec = {"command": "analyze", "point": point_name,
           "point_spec": ex.point_json(pt)}
    if alg.is_unit:
        rec["unit_algebra"] = True
    rec["ord"] = ord_at(alg, pt)
    rec["singular"] = sing_member(alg, pt)
    sat = diff_saturate(alg)
    rec["saturated_singular"] = sing_member(sat, pt)
    rec["singular_strata"] = [sorted(ex.scene.names[i] for i in S)
                              for S in singular_coordinate_strata(sat)]
    if isinstance(pt, ClosedPoint) and rec["saturated_singular"]:
        td = tau_at(alg, pt)
        rec["tau"] = td.tau
        m = ex.options.tau_oracle_extension
        if m is not None and ex.scene.field.characteristic > 0:
            oracle = tau_translation_oracle(alg, pt, m)
            rec["tau_oracle"] = oracle
            rec["oracle_agrees"] = oracle == td.tau
            if oracle != td.tau:
                rec["warning"] = ("translation oracle over extension degree %d "
                                  "disagrees with the graded computation" % m)
    return rec


def _cmd_slope(ex: _Execution, point_name: str) -> dict:
    pres = ex.current_presentation()
    if not isinstance(pres, Presentation):
        raise CommandError("the slope command needs a one-section presentation")
    pt = ex.point(point_name)
    raw = slope_poly(pres.f, pres.section_var, pt)
    res = normalize(pres, pt, max_iters=ex.options.max_normalize_iters)
    final = res.presentation
    rec = {"command": "slope", "point": point_name,
           "point_spec": ex.point_json(pt),
           "slope_raw": raw,
           "elim_ord": ord_at(pres.elim, pt),
           "iterations": res.record.iterations,
           "slopes": list(res.record.slopes),
           "normalized_poly": ex.rp(final.f),
           "presentation_slope": min(res.record.slope, ord_at(pres.elim, pt))}
    rec["membership"] = membership_criterion(final, pt)
    return rec


def _cmd_hord(ex: _Execution, point_name: str) -> dict:
    pres = ex.current_presentation()
    pt = ex.point(point_name)
    data = hord_data(pres, pt, max_iters=ex.options.max_normalize_iters)
    rec = {"command": "hord", "point": point_name,
           "point_spec": ex.point_json(pt),
           "hord": data.value,
           "elim_ord": data.elim_ord,
           "poly_slopes": [r.slope for r in data.normalizations],
           "iterations": [r.iterations for r in data.normalizations]}
    if data.reduced_value is not None:
        rec["reduced_hord"] = data.reduced_value
    return rec


_BLOWUP_RE = re.compile(r"^center\s*=\s*\{([^}]*)\}\s*;\s*chart\s*=\s*(\S+)$")


def _cmd_blowup(ex: _Execution, spec: str) -> dict:
    m = _BLOWUP_RE.match(spec.strip())
    if not m:
        raise CommandError("expected 'blowup: center = {v, …}; chart = v'")
    index = {n: i for i, n in enumerate(ex.scene.names)}
    try:
        vars_ = [index[n] for n in _split_csv(m.group(1))]
        chart_var = index[m.group(2)]
    except KeyError as exc:
        raise CommandError("unknown variable %s" % exc)
    tower = ex.ensure_tower()
    step = tower.blow_up(Center(frozenset(vars_)), chart_var)
    return {"command": "blowup",
            "center": sorted(ex.scene.names[v] for v in step.center),
            "chart": ex.scene.names[step.chart_var],
            "divisors": {lab: (None if v is None else ex.scene.names[v])
                         for lab, v in step.chart.divisors},
            "object": _object_json(ex, step.obj),
            "snapshot": step.snapshot}


_EXPERIMENT_RE = re.compile(r"^q-from-presentation\s+N\s*=\s*(\d+)$")


def _cmd_experiment(ex: _Execution, spec: str) -> dict:
    m = _EXPERIMENT_RE.match(spec.strip())
    if not m:
        raise CommandError("expected 'experiment q-from-presentation N=<count>'")
    N = int(m.group(1))
    pres = ex.scene.require_presentation()
    if not isinstance(pres, Presentation):
        raise CommandError("the experiment needs a one-section presentation")
    try:
        ell, trace = stage_ab_experiment(pres.f, pres.section_var, N,
                                         names=ex.scene.names)
    except ValueError as exc:
        raise CommandError(str(exc))
    return {"command": "experiment", "N": N, "q": trace["q"], "l": ell,
            "expected": trace["expected"], "agrees": ell == trace["expected"],
            "performed": trace["performed"], "steps": trace["steps"]}


def _cmd_monomial_track(ex: _Execution) -> dict:
    tower = ex.ensure_tower()
    M = track_monomial(tower)
    return {"command": "monomial-track", "s": M.s,
            "exponents": {lab: h for lab, h in M.exponents}}


def _cmd_strong_check(ex: _Execution) -> dict:
    tower = ex.ensure_tower()
    closed = [(name, pt) for name, pt in sorted(ex.scene.points.items())
              if isinstance(pt, ClosedPoint)]
    res = is_strong_monomial(tower, extra_points=[pt for _, pt in closed])
    rec = {"command": "strong-check", "strong": res.strong,
           "monomial": {"s": res.monomial.s,
                        "exponents": {lab: h for lab, h in res.monomial.exponents}},
           "checked": list(res.checked),
           "witness": res.witness}
    if tower.steps:
        rec["sandwich"] = sandwich_report(tower, res.monomial)
    return rec


def _cmd_resolve(ex: _Execution) -> dict:
    tower = ex.ensure_tower()
    M = track_monomial(tower)
    moves = combinatorial_resolve(M, tower.chart)
    rec = {"command": "resolve",
           "monomial": {"s": M.s, "exponents": {lab: h for lab, h in M.exponents}},
           "moves": [{"stratum": sorted(m.labels), "new_label": m.new_label,
                      "exponent": m.exponent,
                      "exponents_after": {lab: h for lab, h in m.exponents_after}}
                     for m in moves]}
    lift = lift_resolution(tower, moves=moves, monomial=M)
    rec["lift"] = [{"stratum": sorted(r.move.labels), "skipped": r.skipped,
                    "reason": r.reason, "case": r.contact_case,
                    "hord_at_center": r.hord_at_center,
                    "elim_ord_at_center": r.elim_ord_at_center}
                   for r in lift.records]
    rec["final"] = _object_json(ex, tower.obj)
    rec["divisors"] = {lab: (None if v is None else ex.scene.names[v])
                       for lab, v in tower.chart.divisors}
    rec["singular_after"] = list(lift.final_singular)
    return rec


_AT_RE = re.compile(r"^(analyze|slope|hord)\s+at\s+(\S+)$")


def execute_command(ex: _Execution, text: str) -> dict:
    m = _AT_RE.match(text)
    if m:
        fn = {"analyze": _cmd_analyze, "slope": _cmd_slope, "hord": _cmd_hord}[m.group(1)]
        return fn(ex, m.group(2))
    if text.startswith("blowup:"):
        return _cmd_blowup(ex, text[len("blowup:"):])
    if text.startswith("experiment"):
        return _cmd_experiment(ex, text[len("experiment"):])
    if text == "monomial-track":
        return _cmd_monomial_track(ex)
    if text == "strong-check":
        return _cmd_strong_check(ex)
    if text == "resolve":
        return _cmd_resolve(ex)
    raise CommandError("unknown command %r" % text)


def run_scene(scene: Scene, options: Optional[RunOptions] = None,
              extra_commands=()) -> dict:
    """Execute the scene script (plus any extra commands) in order.  The
    first failing command is recorded with its reason and stops execution;
    the trace status reflects it."""
    ex = _Execution(scene, options or RunOptions())
    doc = {"scene": scene.path.rsplit("/", 1)[-1],
           "field": str(scene.field),
           "variables": list(scene.names),
           "records": ex.records,
           "status": "ok"}
    commands = [(lineno, text) for lineno, text in scene.script]
    commands += [(None, text) for text in extra_commands]
    for lineno, text in commands:
        try:
            ex.records.append(execute_command(ex, text))
        except Exception as exc:
            ex.records.append({"command": text, "error": str(exc),
                               "error_type": type(exc).__name__})
            doc["status"] = "error"
            break
    return doc
