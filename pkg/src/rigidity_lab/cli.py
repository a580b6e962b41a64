"""Command-line entry point: ``rigidity-lab <subcommand> ...``.

Every JSON document carries ``"schema": "rigidity-lab/v1"`` and echoes the
run configuration, so identical arguments reproduce byte-identical output.

Exit codes: 0 success, 1 budget or convergence failure, 2 precondition or
parameter error, 3 refuted verification or rationality report, 64 usage.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys

from . import __version__
from .closure import (SCHEMA, ClosureContext, DerivationCertificate, derive_to_epsilon,
                      verify_certificate)
from .counterexamples import EXAMPLE_IDS, audit_distance, build_example, example4_demo
from .errors import (BudgetExhaustedError, ConvergenceError, DiagnosticsError, RationalityReport,
                     RigidityError)
from .intersections import classify_intersection, intersect_predicate, intersect_witness
from .lens import DEFAULT_BUDGET, lens_profile, rbar
from .manifolds import model_from_id
from .scalars import INF, parse_scalar
from .suite import format_table, run_suite

EXIT_OK = 0
EXIT_BUDGET = 1
EXIT_PRECONDITION = 2
EXIT_REFUTED = 3
EXIT_USAGE = 64


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise _UsageError(message)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _emit(doc: dict, args, out=None) -> None:
    doc = {"schema": SCHEMA, "config": _config(args), **doc}
    text = _dump(doc) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}


def _point(M, text: str):
    if text in ("origin", "north"):
        return M.origin()
    if text in ("antipode", "south"):
        return M.point(-M.origin().coords)
    coords = [float(parse_scalar(c)) if "sqrt" in c or "/" in c else float(c)
              for c in text.split(",")]
    return M.point(coords)


_PI_MULTIPLE = re.compile(r"^(?:(?P<coef>[0-9.]+(?:/[0-9]+)?)\*?)?pi(?:/(?P<den>[0-9.]+))?$")


def _length(text: str) -> float:
    """A length: any scalar accepted by parse_scalar, or ``[c*]pi[/m]``."""
    text = text.strip().lower().replace(" ", "")
    m = _PI_MULTIPLE.match(text)
    if m:
        coef = float(parse_scalar(m.group("coef"))) if m.group("coef") else 1.0
        return coef * math.pi / (float(m.group("den")) if m.group("den") else 1.0)
    return float(parse_scalar(text))


def _two_spheres(args):
    M = model_from_id(args.model)
    return M, _point(M, args.x1), _length(args.r1), _point(M, args.x2), _length(args.r2)


def cmd_intersect(args) -> int:
    M, x1, r1, x2, r2 = _two_spheres(args)
    below = all(M.conv is INF or r < float(M.conv) for r in (r1, r2))
    pred = intersect_predicate(M, x1, r1, x2, r2) if below else None
    z = intersect_witness(M, x1, r1, x2, r2, tol=args.tol)
    doc = {"model": M.id, "distance": M.distance(x1, x2), "predicate": pred,
           "nonempty": z is not None, "witness": None if z is None else z.to_json()}
    if not below:
        doc["note"] = "radii not below conv: predicate undefined, witness decided by search"
    _emit(doc, args)
    return EXIT_OK


def cmd_classify(args) -> int:
    M, x1, r1, x2, r2 = _two_spheres(args)
    cls = classify_intersection(M, x1, r1, x2, r2)
    _emit({"model": M.id, **cls.to_json()}, args)
    return EXIT_OK


def cmd_lens_profile(args) -> int:
    M = model_from_id(args.model)
    prof = lens_profile(M, _length(args.r), samples=args.samples, budget=args.budget,
                        seed=args.seed)
    if args.format == "csv":
        text = prof.to_csv()
    elif args.format == "svg":
        text = prof.to_svg()
    else:
        doc = {"schema": SCHEMA, "config": _config(args), **prof.to_json(),
               "violations": prof.violations()}
        text = _dump(doc) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_rbar(args) -> int:
    M = model_from_id(args.model)
    res = rbar(M, _length(args.r), tol=args.tol, budget=args.budget, seed=args.seed)
    _emit(res.to_json(), args)
    return EXIT_OK


def _context(args) -> ClosureContext:
    if args.model:
        M = model_from_id(args.model)
        return ClosureContext.for_model(M, args.regularity, args.periodic)
    return ClosureContext(parse_scalar(args.conv), parse_scalar(args.inj),
                          args.two_point_homogeneous, args.periodic, args.regularity)


def cmd_closure_derive(args) -> int:
    ctx = _context(args)
    seeds = [parse_scalar(s) for s in args.seeds.split(",")]
    eps = parse_scalar(args.eps)
    try:
        cert = derive_to_epsilon(seeds, ctx, eps, args.strategy, budget=args.budget)
    except RationalityReport as exc:
        _emit({"outcome": "rationality-report", "message": str(exc),
               "partial": exc.partial.to_json() if exc.partial else None}, args)
        return EXIT_REFUTED
    except BudgetExhaustedError as exc:
        _emit({"outcome": "budget-exhausted", "message": str(exc),
               "partial": exc.partial.to_json() if exc.partial else None}, args)
        return EXIT_BUDGET
    doc = cert.to_json()
    doc["config"] = _config(args)
    text = _dump(doc) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_closure_verify(args) -> int:
    with open(args.certificate, encoding="utf-8") as fh:
        cert = DerivationCertificate.from_json(json.load(fh))
    report = verify_certificate(cert)
    _emit(report.to_json(), args)
    return EXIT_OK if report.ok else EXIT_REFUTED


def cmd_counterexample(args) -> int:
    params = {}
    if args.hex_diameter is not None:
        params["hex_diameter"] = args.hex_diameter
    if args.cap_radius is not None:
        params["cap_radius"] = _length(args.cap_radius)
    cmap = build_example(args.id, params, args.seed)
    if args.id == "ex4":
        doc = {"example": "ex4", **example4_demo()}
    else:
        defaults = {"ex1": "1/2", "ex2": "pi", "ex3": "1"}
        text = args.r or defaults[args.id]
        r = parse_scalar(text) if args.id == "ex1" else _length(text)
        doc = {"example": args.id, "params": cmap.params,
               "audit": audit_distance(cmap, r, args.pairs, args.seed).to_json()}
    if args.report == "json":
        _emit(doc, args)
    else:
        audit = doc.get("audit")
        if audit:
            print(f"{args.id} r={audit['r']}: {audit['verdict']} "
                  f"(forward {audit['preserved_forward']}/{audit['pairs_tested']}, "
                  f"backward {audit['preserved_backward']}, violations {audit['violation_count']})")
        else:
            print(f"ex4: all cells confirm = {doc['all_cells_confirm']}")
    return EXIT_OK


def cmd_verify_suite(args) -> int:
    M = model_from_id(args.model)
    results = run_suite(M, seed=args.seed)
    if args.report == "json":
        _emit({"model": M.id, "results": [r.to_json() for r in results],
               "passed": all(r.passed for r in results)}, args)
    else:
        print(format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_REFUTED


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rigidity-lab", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def spheres(sp):
        sp.add_argument("--model", required=True, help='model id, e.g. "e2", "s2", "h2:-1", "t2"')
        sp.add_argument("--x1", required=True, help="comma-separated coordinates, or origin/antipode")
        sp.add_argument("--r1", required=True)
        sp.add_argument("--x2", required=True)
        sp.add_argument("--r2", required=True)

    sp = sub.add_parser("intersect", help="sphere-intersection predicate and witness")
    spheres(sp)
    sp.add_argument("--tol", type=float, default=1e-7)
    sp.set_defaults(func=cmd_intersect)

    sp = sub.add_parser("classify", help="empty / singleton / continuum")
    spheres(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("lens-profile", help="g(t) on [0, 2r]",
                        description="CSV columns: t, g_estimate, error_bound.")
    sp.add_argument("--model", required=True)
    sp.add_argument("--r", required=True)
    sp.add_argument("--samples", type=int, default=50)
    sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--format", choices=("json", "csv", "svg"), default="json")
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_lens_profile)

    sp = sub.add_parser("rbar", help="certified enclosure of r-bar")
    sp.add_argument("--model", required=True)
    sp.add_argument("--r", required=True)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--budget", type=int, default=64)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_rbar)

    sp = sub.add_parser("closure", help="derivation certificates")
    csub = sp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    d = csub.add_parser("derive", help="derive a preserved distance below eps")
    d.add_argument("--seeds", required=True, help="comma-separated scalars: p/q, sqrt<k>, a+b*sqrt<k>")
    d.add_argument("--conv", default="inf")
    d.add_argument("--inj", default="inf")
    d.add_argument("--model", help="take conv, inj and homogeneity from a model id")
    d.add_argument("--two-point-homogeneous", action="store_true")
    d.add_argument("--periodic", action="store_true", help="geodesic flow periodic with period 1")
    d.add_argument("--regularity", choices=("surjective", "continuous"), default="surjective")
    d.add_argument("--strategy", choices=("A", "B", "C", "exhaustive"), default="A")
    d.add_argument("--eps", required=True)
    d.add_argument("--budget", type=int, default=10_000)
    d.add_argument("--output")
    d.set_defaults(func=cmd_closure_derive)
    v = csub.add_parser("verify", help="replay a certificate")
    v.add_argument("certificate")
    v.set_defaults(func=cmd_closure_verify)

    sp = sub.add_parser("counterexample", help="run an example map and audit")
    csub = sp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    run = csub.add_parser("run")
    run.add_argument("--id", required=True, choices=EXAMPLE_IDS)
    run.add_argument("--r", help="audited distance (default per example)")
    run.add_argument("--pairs", type=int, default=10_000)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--hex-diameter", type=float)
    run.add_argument("--cap-radius")
    run.add_argument("--report", choices=("json", "text"), default="json")
    run.set_defaults(func=cmd_counterexample)

    sp = sub.add_parser("verify-suite", help="pass/fail table over the invariant suites")
    sp.add_argument("--model", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--report", choices=("json", "text"), default="text")
    sp.set_defaults(func=cmd_verify_suite)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return EXIT_USAGE
    try:
        return args.func(args)
    except (BudgetExhaustedError, ConvergenceError, DiagnosticsError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_BUDGET
    except (RigidityError, ValueError, TypeError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
