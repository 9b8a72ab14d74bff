"""Scene parsing, canonical traces, verification, the CLI, and the golden
regression corpus."""

import glob
import json
import os
from fractions import Fraction

import pytest

from charpres.cli import main
from charpres.errors import SceneParseError
from charpres.poly import INF, ClosedPoint, GenericPoint
from charpres.scene import (RunOptions, canonical_json, jsonify, load_scene,
                            parse_scene, run_scene, verify_trace)

SCENES = os.path.join(os.path.dirname(__file__), "..", "scenes")

MINIMAL = """\
[field]
characteristic: 3

[variables]
vars: z, x, y
sections: z

[presentation]
poly 1: z^2 + x^3
elim: x^3 W^2

[points]
P1 = (0, 1, 2)
L = {x}

[script]
hord at origin
"""


def test_parse_minimal():
    sc = parse_scene(MINIMAL)
    assert sc.field.characteristic == 3
    assert sc.names == ["z", "x", "y"]
    assert sc.sections == (0,)
    assert sc.points["P1"] == ClosedPoint((0, 1, 2))
    assert sc.points["L"] == GenericPoint(frozenset({1}))
    # the origin is always available without being declared
    assert sc.points["origin"] == ClosedPoint((0, 0, 0))
    assert [text for _, text in sc.script] == ["hord at origin"]


@pytest.mark.parametrize("mangle,fragment,lineno", [
    (lambda s: s.replace("[points]", "[bogus]"), "unknown section", 12),
    (lambda s: "stray\n" + s, "content before the first section", 1),
    (lambda s: s.replace("characteristic: 3", "characteristic: three"),
     "characteristic must be an integer", 2),
    (lambda s: s.replace("vars: z, x, y", "vars: z, x, x"),
     "duplicate variable name", 5),
    (lambda s: s.replace("vars: z, x, y", "vars: z, x, W"),
     "'W' is reserved", 5),
    (lambda s: s.replace("P1 = (0, 1, 2)", "P1 = (0, 1)"),
     "closed point needs 3 coordinates", 13),
    (lambda s: s.replace("sections: z", "sections: q"),
     "unknown variable 'q'", 6),
    (lambda s: s.replace("elim: x^3 W^2", "elim: x^3"),
     "W^<weight>", 10),
])
def test_parse_errors_carry_line_numbers(mangle, fragment, lineno):
    with pytest.raises(SceneParseError) as err:
        parse_scene(mangle(MINIMAL))
    assert fragment in str(err.value)
    assert err.value.lineno == lineno
    assert str(err.value).startswith("line %d:" % lineno)


def test_parse_error_missing_field():
    bad = MINIMAL.replace("[field]\ncharacteristic: 3\n\n", "")
    with pytest.raises(SceneParseError, match="missing \\[field\\]"):
        parse_scene(bad)


def test_jsonify():
    assert jsonify(Fraction(7, 2)) == "7/2"
    assert jsonify(Fraction(4, 2)) == 2
    assert jsonify(Fraction(-3, 4)) == "-3/4"
    assert jsonify(INF) == "inf"
    assert jsonify({1: {"a", "c", "b"}}) == {"1": ["a", "b", "c"]}
    assert jsonify((True, None, "x")) == [True, None, "x"]
    with pytest.raises(TypeError, match="floats"):
        jsonify(0.5)


def test_canonical_json_is_sorted_and_terminated():
    text = canonical_json({"b": Fraction(1, 2), "a": [Fraction(3)]})
    assert text == '{"a":[3],"b":"1/2"}\n'


def test_verify_trace():
    a = '{"records": [{"hord": "9/2"}], "status": "ok"}'
    same_reordered = '{"status": "ok", "records": [{"hord": "9/2"}]}'
    different = '{"records": [{"hord": "7/2"}], "status": "ok"}'
    ok, report = verify_trace(a, same_reordered)
    assert ok and report is None
    ok, report = verify_trace(a, different)
    assert not ok
    assert report == "$.records[0].hord: '9/2' != '7/2'"
    ok, report = verify_trace(a, "{nope")
    assert not ok and report.startswith("not valid JSON")


def test_run_scene_empty_script():
    sc = parse_scene(MINIMAL.split("[script]")[0])
    doc = run_scene(sc)
    assert doc["records"] == [] and doc["status"] == "ok"


def test_run_scene_stops_at_first_error():
    sc = parse_scene(MINIMAL.replace(
        "hord at origin",
        "blowup: center = {z, y}; chart = y\nhord at origin"))
    doc = run_scene(sc)
    assert doc["status"] == "error"
    assert len(doc["records"]) == 1
    rec = doc["records"][0]
    assert rec["error_type"] == "PermissibilityError"
    assert "not permissible" in rec["error"]


def test_run_scene_unknown_command():
    sc = parse_scene(MINIMAL.replace("hord at origin", "frobnicate"))
    doc = run_scene(sc)
    assert doc["status"] == "error"
    assert doc["records"][0]["error_type"] == "CommandError"


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_cli_run_and_verify(tmp_path, capsys):
    scene = _write(tmp_path, "s.scene", MINIMAL)
    trace = str(tmp_path / "t.json")
    assert main(["run", "--scene", scene, "--trace-out", trace]) == 0
    text = open(trace).read()
    doc = json.loads(text)
    assert doc["status"] == "ok"
    assert doc["records"][0]["hord"] == "3/2"

    golden = _write(tmp_path, "golden.json", text)
    assert main(["run", "--scene", scene, "--verify", golden]) == 0
    capsys.readouterr()

    bad = _write(tmp_path, "bad.json", text.replace('"hord":"3/2"', '"hord":"5/2"'))
    assert main(["run", "--scene", scene, "--verify", bad]) == 1
    err = capsys.readouterr().err
    assert "trace mismatch" in err and "$.records[0].hord" in err


def test_cli_stdout_default(tmp_path, capsys):
    scene = _write(tmp_path, "s.scene", MINIMAL)
    assert main(["--scene", scene]) == 0
    out = capsys.readouterr().out
    assert json.loads(out)["records"][0]["command"] == "hord"


def test_cli_parse_error_exits_2(tmp_path, capsys):
    scene = _write(tmp_path, "s.scene", MINIMAL.replace("[points]", "[bogus]"))
    assert main(["run", "--scene", scene]) == 2
    assert "unknown section" in capsys.readouterr().err


def test_cli_command_error_exits_1(tmp_path, capsys):
    scene = _write(tmp_path, "s.scene",
                   MINIMAL.replace("hord at origin", "hord at nowhere"))
    assert main(["run", "--scene", scene]) == 1
    assert "command failed" in capsys.readouterr().err


def test_cli_bad_subcommand_exits_2(tmp_path, capsys):
    scene = _write(tmp_path, "s.scene", MINIMAL)
    with pytest.raises(SystemExit) as err:
        main(["explode", "--scene", scene])
    assert err.value.code == 2
    capsys.readouterr()


def test_cli_extra_terminal_command(tmp_path, capsys):
    scene = _write(tmp_path, "s.scene",
                   MINIMAL.replace("hord at origin",
                                   "blowup: center = {z, x}; chart = x"))
    assert main(["monomial-track", "--scene", scene]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["records"][-1] == {"command": "monomial-track", "s": 2,
                                  "exponents": {"H1": 1}}


def test_cli_oracle_flag_rejects_large_extension(tmp_path, capsys):
    scene = _write(tmp_path, "s.scene", MINIMAL)
    with pytest.raises(SystemExit):
        main(["run", "--scene", scene, "--tau-oracle-field-extension", "4"])
    capsys.readouterr()


def _scene_paths():
    return sorted(glob.glob(os.path.join(SCENES, "*.scene")))


def test_corpus_is_present():
    assert len(_scene_paths()) == 25


@pytest.mark.parametrize("path", _scene_paths(),
                         ids=[os.path.basename(p) for p in _scene_paths()])
def test_golden_regression(path):
    sc = load_scene(path)
    doc = run_scene(sc, RunOptions(tau_oracle_extension=2))
    assert doc["status"] == "ok"
    got = canonical_json(doc)
    name = os.path.basename(path).rsplit(".", 1)[0]
    golden_path = os.path.join(SCENES, "golden", name + ".trace.json")
    with open(golden_path, "r", encoding="utf-8") as fh:
        golden = fh.read()
    assert got == golden


def test_traces_are_deterministic():
    path = _scene_paths()[0]
    one = canonical_json(run_scene(load_scene(path), RunOptions(tau_oracle_extension=2)))
    two = canonical_json(run_scene(load_scene(path), RunOptions(tau_oracle_extension=2)))
    assert one == two
