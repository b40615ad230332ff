"""Command-line entry point: ``harmval <command> [options]``.

Every output document has the form ``{"meta": {...}, "result": {...}}`` where
``meta`` records the program version, the command and all parameters.  Floats
are written with Python's shortest round-trip representation.

Exit codes: 0 success, 2 input error, 3 degenerate instance, 4 no regular
family instance.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import metadata

import numpy as np

from . import ensemble, family, hyperdim, levelset
from .errors import (
    ConstantPolynomial,
    DegenerateDraw,
    DegenerateElimination,
    LeadingPartVanishes,
    NonFiniteInput,
    NonIsolatedZeroSet,
)
from .planar import PlanarHarmonicField, bounds, solve

__all__ = ["main", "build_parser", "EXIT_OK", "EXIT_INPUT", "EXIT_DEGENERATE", "EXIT_IRREGULAR"]

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_IRREGULAR = 4

_DEGENERATE = (NonIsolatedZeroSet, DegenerateElimination, LeadingPartVanishes, ConstantPolynomial, DegenerateDraw)


class InputError(Exception):
    pass


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _threads(args) -> int:
    cap = args.threads
    env = os.environ.get("HARMVAL_THREADS")
    if env:
        try:
            cap = min(cap, int(env)) if cap else int(env)
        except ValueError:
            raise InputError("HARMVAL_THREADS must be an integer")
    return max(1, cap or 1)


def _meta(args, params: dict) -> dict:
    return {"program": "harmval", "version": _version(), "command": args.command, "parameters": params}


def _emit(doc: dict, path: str | None):
    text = json.dumps(doc, indent=1, sort_keys=False) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_text(text: str, path: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _positive_int(lo: int):
    def parse(s):
        try:
            v = int(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}")
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be at least {lo}")
        return v

    return parse


def _float_list(s: str):
    try:
        vals = [float(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def cmd_solve(args) -> int:
    try:
        with open(args.input, encoding="utf-8") as fh:
            obj = json.load(fh)
        F = PlanarHarmonicField.from_json(obj)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        if isinstance(exc, _DEGENERATE):
            raise
        raise InputError(f"cannot read field from {args.input}: {exc}")
    rep = solve(F, certify=not args.no_certify)
    params = {"input": os.path.basename(args.input), "certify": not args.no_certify, "field": F.to_json()}
    _emit({"meta": _meta(args, params), "result": rep.to_json()}, args.output)
    return EXIT_OK


def cmd_family(args) -> int:
    eps_values = args.eps_sweep if args.eps_sweep else list(family.SWEEP_EPS)
    points, best = family.eps_sweep(args.n, eps_values, certify=not args.no_certify)
    params = {"n": args.n, "eps_sweep": eps_values, "certify": not args.no_certify}
    if args.csv:
        _write_text(family.sweep_csv(points), args.csv)
    if best is None:
        _emit({"meta": _meta(args, params), "result": {"error": "no regular instance", "sweep": [p.row() for p in points]}}, args.output)
        return EXIT_IRREGULAR
    inst = family.build(args.n, complex(1.0, best.eps))
    rep = best.report
    result = {
        "instance": inst.scalars(),
        "eps": best.eps,
        "N_F": rep.N_F,
        "N_plus": rep.N_plus,
        "N_minus": rep.N_minus,
        "winding_at_infinity": rep.winding_at_infinity,
        "certified": rep.certified,
        "predicted_lower": inst.predicted_lower,
        "conjectured_max": inst.conjectured_max,
        "violated": bool(rep.N_F > inst.conjectured_max and rep.N_singular == 0),
        "sweep": [p.row() for p in points],
        "report": rep.to_json(),
    }
    _emit({"meta": _meta(args, params), "result": result}, args.output)
    return EXIT_OK


def cmd_levelset(args) -> int:
    inst = family.build(args.n, complex(1.0, args.eps))
    if args.window is None:
        window = levelset.default_window(inst.field)
    else:
        h = args.window
        window = (-h, h, -h, h)
    data = levelset.figure_data(inst.f, args.n, window, args.res)
    rep = solve(inst.field)
    x0, x1, y0, y1 = window
    loc = rep.locations
    inside = (loc.real > x0) & (loc.real < x1) & (loc.imag > y0) & (loc.imag < y1)
    data["solver_count_in_window"] = int(np.sum(inside))
    params = {"n": args.n, "eps": args.eps, "window": list(window), "res": args.res}
    _emit({"meta": _meta(args, params), "result": data}, args.output)
    return EXIT_OK


def cmd_example3d(args) -> int:
    report = hyperdim.example3d_report(args.samples)
    _emit({"meta": _meta(args, {"samples": args.samples}), "result": report}, args.output)
    return EXIT_OK


def cmd_random(args) -> int:
    spec = ensemble.EnsembleSpec(args.n, args.seed, args.trials)
    res = ensemble.expected_zeros(spec, threads=_threads(args))
    if args.csv:
        _write_text(res.to_csv(), args.csv)
    params = spec.to_json()
    _emit({"meta": _meta(args, params), "result": res.to_json()}, args.output)
    return EXIT_OK


def cmd_bounds(args) -> int:
    tab = bounds(args.n, args.m, args.N_F, args.N_minus)
    params = {"n": args.n, "m": args.m, "N_F": args.N_F, "N_minus": args.N_minus}
    result = tab.to_json()
    result["conjecture"] = result["conjecture_wilmshurst"]
    result["new_total"] = result["conjecture_new_total"]
    _emit({"meta": _meta(args, params), "result": result}, args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="harmval", description="Zeros of harmonic polynomial fields.")
    ap.add_argument("--threads", type=_positive_int(1), default=None, help="cap on worker threads")
    sub = ap.add_subparsers(dest="command", required=True)

    def out(p):
        p.add_argument("-o", "--output", help="write the JSON document here instead of stdout")

    p = sub.add_parser("solve", help="solve p + conj(q) = 0 from a JSON file")
    p.add_argument("input", help='JSON with {"p": {"re": [...], "im": [...]}, "q": {...}}')
    p.add_argument("--no-certify", action="store_true", help="skip the winding certificate")
    out(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("family", help="sweep the degree-n counterexample family over eps")
    p.add_argument("--n", type=_positive_int(4), required=True, help="degree n >= 4")
    p.add_argument("--eps-sweep", type=_float_list, default=None, help="comma-separated eps values")
    p.add_argument("--csv", help="write the sweep table here")
    p.add_argument("--no-certify", action="store_true", help="skip the winding certificate")
    out(p)
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("levelset", help="level curves and their crossings for the family")
    p.add_argument("--n", type=_positive_int(4), required=True, help="degree n >= 4")
    p.add_argument("--eps", type=float, default=0.04, help="imaginary part of a = 1 + i eps")
    p.add_argument("--window", type=float, default=None, help="half-width of the square window")
    p.add_argument("--res", type=_positive_int(32), default=1024, help="grid cells per side (at least 32)")
    out(p)
    p.set_defaults(func=cmd_levelset)

    p = sub.add_parser("example3d", help="verify the explicit three-dimensional example")
    p.add_argument("--samples", type=_positive_int(10_000), default=100_000, help="sphere samples (at least 10000)")
    out(p)
    p.set_defaults(func=cmd_example3d)

    p = sub.add_parser("random", help="Monte Carlo zero count of random harmonic fields")
    p.add_argument("--n", type=_positive_int(1), required=True, help="degree of p and q")
    p.add_argument("--trials", type=_positive_int(1), default=100, help="number of draws")
    p.add_argument("--seed", type=_positive_int(0), default=0, help="base seed")
    p.add_argument("--csv", help="write per-trial counts here")
    out(p)
    p.set_defaults(func=cmd_random)

    p = sub.add_parser("bounds", help="bound table for degrees n and m")
    p.add_argument("--n", type=_positive_int(1), required=True, help="degree of p")
    p.add_argument("--m", type=_positive_int(0), required=True, help="degree of q")
    p.add_argument("--N-F", dest="N_F", type=_positive_int(0), default=None, help="observed zero count to compare")
    p.add_argument("--N-minus", dest="N_minus", type=_positive_int(0), default=None, help="observed count of orientation-reversing zeros")
    out(p)
    p.set_defaults(func=cmd_bounds)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NonFiniteInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except _DEGENERATE as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
