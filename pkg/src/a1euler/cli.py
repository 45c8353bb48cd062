"""Command-line entry point.

Every command builds one report dict (command, inputs, results, timings,
version); the text rendering is read off that dict, and ``--json`` dumps it.
Exit codes: 0 success, 1 verification failure, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Callable

from . import __version__
from .acceptance import run_all
from .cech import BoxTooSmall
from .gw import ZERO, gw_equal, to_canonical_string
from .k0var import ExprParseError, bittner_residual, chi_c_report, parse_expr
from .linalg import format_rational
from .pairing import DegeneratePairing, class_of_graded_form, gram_matrix, hochschild_dims, hodge_table
from .toric import Fan, FanError, FanFormatError, format_fan, load_fan

INPUT_ERRORS = (FanError, FanFormatError, ExprParseError, BoxTooSmall, DegeneratePairing, ValueError, OSError)


class InputError(Exception):
    pass


def _fan_input(fan: Fan) -> dict:
    return {"name": fan.name, "fan": format_fan(fan)}


def _load(source: str) -> Fan:
    try:
        return load_fan(source)
    except INPUT_ERRORS as exc:
        raise InputError(str(exc)) from exc


def _parse(text: str):
    try:
        return parse_expr(text)
    except INPUT_ERRORS as exc:
        raise InputError(f"{text!r}: {exc}") from exc


def _matrix_text(rows: list[list[str]]) -> str:
    return "[" + ", ".join("[" + ",".join(r) + "]" for r in rows) + "]"


def _trace_scale(args) -> int:
    return -1 if args.corrupt_trace_sign else 1


# commands: each returns (inputs, results, exit code) ----------------------------

def cmd_chi(args):
    fan = _load(args.variety)
    g = gram_matrix(fan, args.box, args.threads, _trace_scale(args))
    value = class_of_graded_form(g)
    results = {"chi": to_canonical_string(value, invariants=False), "class": value.to_record(),
               "gram": g.to_record()}
    return _fan_input(fan), results, 0


def cmd_hodge(args):
    fan = _load(args.variety)
    table = hodge_table(fan, args.box, args.threads)
    basis = {}
    for i, row in enumerate(table.h):
        for j, d in enumerate(row):
            if d:
                basis[f"H^{i}(Omega^{j})"] = [c.to_record() for c in table.basis(i, j)]
    results = dict(table.to_record(), serre_symmetric=table.serre_symmetric(), basis=basis,
                   radius={str(j): r.radius for j, r in sorted(table.results.items())})
    return _fan_input(fan), results, 0


def cmd_gram(args):
    fan = _load(args.variety)
    g = gram_matrix(fan, args.box, args.threads, _trace_scale(args))
    results = g.to_record()
    inputs = _fan_input(fan)
    if args.block is not None:
        inputs["block"] = args.block
        results["selected"] = [[format_rational(x) for x in row] for row in g.block(args.block).to_rows()]
    return inputs, results, 0


def cmd_hh(args):
    fan = _load(args.variety)
    dims = hochschild_dims(hodge_table(fan, args.box, args.threads))
    return _fan_input(fan), {"hh": {str(t): d for t, d in sorted(dims.items())}}, 0


def cmd_k0(args):
    expr = _parse(args.expr)
    try:
        rep = chi_c_report(expr)
    except INPUT_ERRORS as exc:
        raise InputError(str(exc)) from exc
    return {"expr": str(expr)}, rep.to_record(), 0


def cmd_bittner(args):
    x, y = _parse(args.x), _parse(args.y)
    try:
        r = bittner_residual(x, y, args.c)
    except INPUT_ERRORS as exc:
        raise InputError(str(exc)) from exc
    zero = gw_equal(r, ZERO)
    results = {"residual": to_canonical_string(r, invariants=False), "class": r.to_record(), "zero": zero}
    return {"X": str(x), "Y": str(y), "c": args.c}, results, 0 if zero else 1


def cmd_verify(args):
    checks = run_all(trace_scale=_trace_scale(args))
    results = {"checks": [c.to_record() for c in checks], "passed": all(c.passed for c in checks)}
    args._check_times = {str(c.number): round(c.seconds, 4) for c in checks}
    return {}, results, 0 if results["passed"] else 1


# rendering ---------------------------------------------------------------------

def _render(report: dict) -> str:
    cmd, res = report["command"]["name"], report["results"]
    if cmd == "chi":
        return res["chi"]
    if cmd == "hodge":
        lines = [f"h^{i},* = " + " ".join(str(d) for d in row) for i, row in enumerate(res["h"])]
        if res["diagonal"] is not None:
            lines.append("diagonal: " + ",".join(str(d) for d in res["diagonal"]))
        return "\n".join(lines)
    if cmd == "gram":
        if "selected" in res:
            return _matrix_text(res["selected"])
        return "\n".join(f"block {t}: {_matrix_text(m)}" for t, m in res["blocks"].items()) + \
            "\nfull: " + _matrix_text(res["full"])
    if cmd == "hh":
        return "\n".join(f"HH_{t} = {d}" for t, d in res["hh"].items())
    if cmd == "k0":
        return res["chi_c"]
    if cmd == "bittner":
        return f"residual {res['residual']}"
    if cmd == "verify":
        lines = [f"[{'PASS' if c['passed'] else 'FAIL'}] {c['number']}. {c['name']}: {c['detail']}"
                 for c in res["checks"]]
        lines.append("all criteria pass" if res["passed"] else "verification FAILED")
        return "\n".join(lines)
    raise AssertionError(cmd)


COMMANDS: dict[str, Callable] = {"chi": cmd_chi, "hodge": cmd_hodge, "gram": cmd_gram, "hh": cmd_hh,
                                 "k0": cmd_k0, "bittner": cmd_bittner, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the full report as JSON")
    common.add_argument("--box", type=int, default=None, metavar="RADIUS",
                        help="character box radius (default: derived from the weights)")
    common.add_argument("--threads", type=int, default=1, metavar="N")
    common.add_argument("--corrupt-trace-sign", action="store_true", help=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="a1euler",
                                description="A1-Euler characteristics of smooth toric varieties.")
    p.add_argument("--version", action="version", version=f"a1euler {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in [("chi", "A1-Euler characteristic via the Hodge pairing"),
                        ("hodge", "Hodge numbers h^{i,j}"), ("hh", "Hochschild homology dimensions")]:
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("variety", help="builtin name or fan file")
    s = sub.add_parser("gram", parents=[common], help="graded Gram matrix of the pairing")
    s.add_argument("variety")
    s.add_argument("--block", type=int, default=None, help="only the block of degree j - i = BLOCK")
    s = sub.add_parser("k0", parents=[common], help="compactly supported chi of an expression")
    s.add_argument("expr")
    s = sub.add_parser("bittner", parents=[common], help="blow-up relation residual")
    s.add_argument("x")
    s.add_argument("y")
    s.add_argument("c", type=int)
    sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    return p


def run(argv: list[str] | None = None) -> tuple[dict, int, bool]:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        raise InputError("--threads must be positive")
    if args.box is not None and args.box < 1:
        raise InputError("--box must be positive")
    t0 = time.perf_counter()
    try:
        inputs, results, code = COMMANDS[args.command](args)
    except InputError:
        raise
    except INPUT_ERRORS as exc:
        raise InputError(str(exc)) from exc
    timings = {"total": round(time.perf_counter() - t0, 4)}
    timings.update(getattr(args, "_check_times", {}))
    options = {"box": args.box, "threads": args.threads}
    if args.corrupt_trace_sign:
        options["corrupt_trace_sign"] = True
    report = {"tool": "a1euler", "version": __version__,
              "command": {"name": args.command, "options": options},
              "inputs": inputs, "results": results, "timings": timings}
    return report, code, args.json


def main(argv: list[str] | None = None) -> int:
    try:
        report, code, as_json = run(argv)
    except InputError as exc:
        print(f"a1euler: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)
    if as_json:
        print(json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False))
    else:
        print(_render(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
