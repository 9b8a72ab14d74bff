"""Command line front end.

    charpres [run|monomial-track|strong-check|resolve] --scene FILE
             [--trace-out FILE] [--verify GOLDEN]
             [--max-normalize-iters N] [--tau-oracle-field-extension M]

Runs the scene script, emits the canonical JSON trace (stdout, or the
--trace-out path), and optionally byte-compares it against a golden trace.
Exit codes: 0 success, 1 command error or verification mismatch, 2 parse
error.
"""

from __future__ import annotations

import argparse
import sys

from .errors import SceneParseError
from .scene import RunOptions, canonical_json, load_scene, run_scene, verify_trace

_EXTRA = {"monomial-track", "strong-check", "resolve"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="charpres",
        description="exact invariants of hypersurface singularities in "
                    "positive characteristic")
    parser.add_argument("command", nargs="?", default="run",
                        choices=["run"] + sorted(_EXTRA),
                        help="run the scene script, optionally followed by one "
                             "extra terminal command")
    parser.add_argument("--scene", required=True, help="scene file to execute")
    parser.add_argument("--trace-out", metavar="FILE",
                        help="write the canonical trace here instead of stdout")
    parser.add_argument("--verify", metavar="GOLDEN",
                        help="compare the trace against this golden file")
    parser.add_argument("--max-normalize-iters", type=int, default=None,
                        metavar="N", help="cap on projection cleaning steps")
    parser.add_argument("--tau-oracle-field-extension", type=int, default=None,
                        metavar="M", choices=[1, 2, 3],
                        help="cross-check tau by counting translations over "
                             "the degree-M extension field")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scene = load_scene(args.scene)
    except OSError as exc:
        print("cannot read scene: %s" % exc, file=sys.stderr)
        return 2
    except SceneParseError as exc:
        print("parse error: %s" % exc, file=sys.stderr)
        return 2

    options = RunOptions(max_normalize_iters=args.max_normalize_iters,
                         tau_oracle_extension=args.tau_oracle_field_extension)
    extra = [args.command] if args.command in _EXTRA else []
    doc = run_scene(scene, options, extra_commands=extra)
    text = canonical_json(doc)

    if args.trace_out:
        with open(args.trace_out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)

    status = 0 if doc["status"] == "ok" else 1
    if status != 0:
        bad = doc["records"][-1]
        print("command failed: %s: %s" % (bad.get("command"), bad.get("error")),
              file=sys.stderr)

    if args.verify is not None:
        try:
            with open(args.verify, "r", encoding="utf-8") as fh:
                golden = fh.read()
        except OSError as exc:
            print("cannot read golden trace: %s" % exc, file=sys.stderr)
            return 1
        ok, report = verify_trace(text, golden)
        if not ok:
            print("trace mismatch: %s" % report, file=sys.stderr)
            return 1
        print("verified against %s" % args.verify, file=sys.stderr)

    return status


if __name__ == "__main__":
    sys.exit(main())
