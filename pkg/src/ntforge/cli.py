"""Scenario-driven command line.

    ntforge run scenario.json [--depth N] [--tol X] [--seed S] [--out report.json]
    ntforge explain <check>
    ntforge list-instances
    ntforge segments scenario.json -F 1 -F 11 [--depth N]
    ntforge partition-check scenario.json -F ... [--depth N]
    ntforge nt {mul,adjoint,expect,grade,norm} scenario.json x [y]
    ntforge fock {build,norm,expect,project} scenario.json [x] [--depth --tol --dense-cap]
    ntforge check {toeplitz,condition-c,condition-cprime,aperiodicity,graded,projections} ...
    ntforge bundle {roundtrip,regular,spectrum} scenario.json

Everything reads element/section names from the scenario file; results are JSON
on stdout.  Exit code 0 when all checks pass or are informational, 1 on a
failed check, 2 on bad input.
"""

from __future__ import annotations

import argparse
import difflib
import json
import sys

from .fock import DENSE_CAP, Truncation, lift, projection_Qw, projection_QT
from .scenario import (
    CHECKS,
    Scenario,
    ScenarioError,
    element_to_json,
    report_ok,
    run_scenario,
)
from .semigroups import INSTANCE_KINDS
from .wick import core_norm, diagonal_expectation, nt_adjoint, nt_mul

EXPLAIN = {
    "segments": (
        "Enumerate the initial segments of a finite family F: the distinct sets\n"
        "C of elements of F that admit a common multiple, each recorded with the\n"
        "least such multiple sigma(C).  Parameters: F (elements), depth.\n"
        "Informational; also reports whether the induced cells partition the\n"
        "enumerated ball (see partition-check)."
    ),
    "partition-check": (
        "Verify that the cells {p : the part of F dividing p is exactly C} for C\n"
        "ranging over the initial segments of F cover every enumerated element\n"
        "exactly once.  Parameters: F, depth.  Verdict: pass iff no element lies\n"
        "in zero or two cells."
    ),
    "core-norm": (
        "Exact norm of a diagonal core element from the initial-segment formula:\n"
        "the maximum over segments C of the norm of sum_{p in C} a_p tensored\n"
        "into the fiber at sigma(C).  Parameters: element, wdepth.  Reports\n"
        "{value, exact}; exact is false when off-diagonal keys force a truncated\n"
        "lower-bound estimate instead."
    ),
    "fock-norm": (
        "Operator norm of the element on the truncated Fock space of the given\n"
        "depth, computed per source fiber.  Parameters: element, depth, tol,\n"
        "dense-cap.  Reports {norm, exact, depth}; exact is true when the\n"
        "truncation provably attains the limit (diagonal element, depth at\n"
        "least max key length + 2)."
    ),
    "norm-agreement": (
        "Cross-check that core-norm and fock-norm agree on a diagonal core\n"
        "element at depth max key length + 2.  Verdict: pass iff the exact value\n"
        "and the Fock value differ by at most 1e-6."
    ),
    "expect": (
        "Block-diagonal compression of the lifted element: sum over sources w of\n"
        "Q_w lift(x) Q_w.  Over right-cancellative instances every off-diagonal\n"
        "key dies; absorption-style instances keep some alive, which is the\n"
        "phenomenon this check measures.  Parameters: element, depth.  Reports\n"
        "the compression's norm."
    ),
    "grade": (
        "Grades of the element's keys under the generator-counting homomorphism\n"
        "to Z^k (or the group itself when the instance is a group).  The grade\n"
        "of a key (p, q) is theta(p) - theta(q).  Informational."
    ),
    "well-aligned": (
        "Random products of ideal-supported arrows stay ideal-supported after\n"
        "composition and right tensoring.  Parameters: depth, seed.  Verdict:\n"
        "pass iff no sampled product leaves the ideal."
    ),
    "nondegenerate": (
        "Right tensoring by each generator has trivial kernel on every fiber of\n"
        "the ideal.  Parameters: depth.  Verdict: pass iff all tensor maps are\n"
        "injective."
    ),
    "essential": (
        "Span of K(p,q)K(q,p) is all of the (p,p) fiber for enumerated pairs.\n"
        "Parameters: depth.  Verdict: pass iff every span test attains full\n"
        "dimension."
    ),
    "toeplitz": (
        "Rank test for covariance: the (p,p) fiber image must intersect the span\n"
        "of the (q,q) fiber images trivially, i.e. rank[A|B] = rank A + rank B\n"
        "for the vectorized images.  Parameters: p, qs, depth, tol.\n"
        "Precondition: no q may divide p.  Certificate: the three ranks."
    ),
    "condition-c": (
        "Faithfulness of a |-> phi(a) prod_i (1 - Q_<q_i>) on the (p,p) fiber:\n"
        "the smallest singular value of the linearized map must exceed tol, and\n"
        "the compression must commute with the fiber action.  Parameters: p,\n"
        "qs, depth, tol.  Precondition: no q may divide p.  Certificate:\n"
        "sigma_min and the commutation defect."
    ),
    "condition-cprime": (
        "Norm preservation in the corner: compressing the represented element by\n"
        "1 - (Q_{q_1} v ... v Q_{q_n}) must not change its norm.  Parameters:\n"
        "p, qs, element, tol.  Precondition: no q may divide p.  Certificate:\n"
        "full norm and corner norm."
    ),
    "projections": (
        "Semilattice law for the range projections: Q_<p> Q_<q> equals Q_<lcm>\n"
        "when p and q have a common multiple and 0 otherwise, plus the per-\n"
        "element equality Q_p = Q_<p>.  Parameters: depth (word length of the\n"
        "pairs), fock_depth, tol.  Certificate: worst defect per law."
    ),
    "aperiodicity": (
        "Randomized search for the infimum of |alpha(a) b a| over positive\n"
        "norm-one a supported on a hereditary corner of the (p,p) fiber, where\n"
        "alpha twists by the given unit.  Values near 0 witness aperiodicity of\n"
        "the twisted action; 1.0 is the periodic (trivial-action) value.\n"
        "Parameters: p, unit, b, optional h and twist, trials, seed.\n"
        "Informational; reports the best value and the witness."
    ),
    "graded": (
        "Topological-grading inequality for a representation of a group-graded\n"
        "family: the identity-fiber coefficient satisfies |b_e| <= |sum_g\n"
        "phi(b_g)| on every sample.  Collapsing representations (for instance\n"
        "sending a unitary generator to 1) fail on elements like 1 - u.\n"
        "Parameters: trials, seed, tol, optional named sections."
    ),
    "bundle-roundtrip": (
        "Rebuild the fiber family from its own arrow category and replay random\n"
        "products and stars along both routes.  Verdict: pass iff every replay\n"
        "is bit-for-bit identical (the two routes execute the same float ops)."
    ),
    "bundle-regular": (
        "Left-convolution representation on the direct sum of the fibers with\n"
        "the Hilbert-Schmidt inner product.  Verdict: pass iff the image algebra\n"
        "has full rank, i.e. the representation separates the fibers."
    ),
    "bundle-spectrum": (
        "Eigenvalues of the regular-representation matrix of a named section.\n"
        "For the order-two group acting trivially on C, a + b u has spectrum\n"
        "{a + b, a - b}.  Informational."
    ),
}


def _print(obj):
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _finish(status, data):
    _print({"status": status, "data": data})
    return 0 if status in ("pass", "info") else 1


def _scenario(args) -> Scenario:
    sc = Scenario.from_path(args.scenario)
    for key in ("depth", "tol", "seed"):
        v = getattr(args, key, None)
        if v is not None:
            sc.settings[key] = v
    if getattr(args, "dense_cap", None) is not None:
        sc.settings["dense_cap"] = args.dense_cap
    return sc


# -- command handlers -------------------------------------------------------------


def cmd_run(args):
    overrides = {"depth": args.depth, "tol": args.tol, "seed": args.seed}
    report = run_scenario(args.scenario, overrides)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
    else:
        _print(report)
    return 0 if report_ok(report) else 1


def cmd_explain(args):
    name = args.check
    if name not in EXPLAIN:
        near = difflib.get_close_matches(name, EXPLAIN, n=3)
        hint = f" (did you mean: {', '.join(near)}?)" if near else ""
        sys.stderr.write(
            f"unknown check {name!r}{hint}\navailable: {', '.join(sorted(EXPLAIN))}\n"
        )
        return 2
    print(f"{name}\n{'-' * len(name)}\n{EXPLAIN[name]}")
    return 0


def cmd_list_instances(args):
    _print(INSTANCE_KINDS)
    return 0


def cmd_segments(args):
    sc = _scenario(args)
    params = {"F": args.F}
    if args.depth is not None:
        params["depth"] = args.depth
    status, data = CHECKS["segments"](sc, params)
    _print(data)
    return 0 if (args.command == "segments" or status == "pass") else 1


def cmd_nt(args):
    sc = _scenario(args)
    x = sc.element(args.x)
    if args.op == "mul":
        z = nt_mul(x, sc.element(args.y))
        return _finish("info", {"terms": element_to_json(z)})
    if args.op == "adjoint":
        return _finish("info", {"terms": element_to_json(nt_adjoint(x))})
    if args.op == "expect":
        return _finish("info", {"terms": element_to_json(diagonal_expectation(x))})
    if args.op == "grade":
        status, data = CHECKS["grade"](sc, {"element": args.x})
        return _finish(status, data)
    value = core_norm(x, wdepth=sc.settings["depth"])
    return _finish("info", {"value": value.value, "exact": value.exact})


def cmd_fock(args):
    sc = _scenario(args)
    depth = sc.settings["depth"]
    tr = Truncation(sc.backend, depth)
    if args.op == "project":
        if (args.word is None) == (args.above is None):
            raise ScenarioError("fock project needs exactly one of --word/--above")
        if args.word is not None:
            op = projection_Qw(sc.parse_el(args.word), tr)
        else:
            op = projection_QT(sc.parse_el(args.above), tr)
        rank = sum(int(round(b.trace().real)) for d in op.cols for b in d.values())
        return _finish("info", {"norm": op.norm(), "exact": True, "depth": depth, "rank": rank})
    x = sc.element(args.x)
    exact = bool(x.is_diagonal() and x.max_key_length() + 2 <= depth)
    if args.op == "build":
        op = lift(x, tr)
        data = {
            "norm": op.norm(dense_cap=sc.settings["dense_cap"], tol=sc.settings["tol"]),
            "exact": exact,
            "depth": depth,
            "sources": len(tr.S),
        }
        return _finish("info", data)
    if args.op == "norm":
        status, data = CHECKS["fock-norm"](sc, {"element": args.x, "depth": depth})
        return _finish(status, data)
    status, data = CHECKS["expect"](sc, {"element": args.x, "depth": depth})
    data["exact"] = False
    return _finish(status, data)


def cmd_check(args):
    sc = _scenario(args)
    params = {"seed": sc.settings["seed"]}
    if args.trials is not None:
        params["trials"] = args.trials
    if args.tol is not None:
        params["tol"] = args.tol
    if args.which in ("toeplitz", "condition-c", "condition-cprime"):
        params.update({"p": args.p, "qs": args.qs})
        if args.which == "condition-cprime":
            params["element"] = args.element
    elif args.which == "aperiodicity":
        params.update({"p": args.p, "unit": args.unit, "b": args.b})
        if args.element:
            params["h"] = args.element
    elif args.which == "projections":
        params["depth"] = min(sc.settings["depth"], 2)
        params["fock_depth"] = sc.settings["depth"]
    status, data = CHECKS[args.which](sc, params)
    return _finish(status, data)


def cmd_bundle(args):
    sc = _scenario(args)
    if sc.bundle is None:
        raise ScenarioError("scenario has no bundle section")
    if args.op == "roundtrip":
        status, data = CHECKS["bundle-roundtrip"](sc, {"seed": sc.settings["seed"]})
    elif args.op == "regular":
        status, data = CHECKS["bundle-regular"](sc, {})
    else:
        if not args.section:
            raise ScenarioError("bundle spectrum needs --section")
        status, data = CHECKS["bundle-spectrum"](sc, {"section": args.section})
    return _finish(status, data)


# -- wiring ---------------------------------------------------------------------


def _add_settings(p, dense_cap=False):
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    if dense_cap:
        p.add_argument("--dense-cap", type=int, default=None, dest="dense_cap")


def build_parser():
    ap = argparse.ArgumentParser(prog="ntforge", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run every check in a scenario file")
    p.add_argument("scenario")
    p.add_argument("--out", default=None)
    _add_settings(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("explain", help="describe a check and its verdict semantics")
    p.add_argument("check")
    p.set_defaults(fn=cmd_explain)

    p = sub.add_parser("list-instances", help="list the semigroup instance kinds")
    p.set_defaults(fn=cmd_list_instances)

    for name in ("segments", "partition-check"):
        p = sub.add_parser(name, help="initial segments / cell partition of a family F")
        p.add_argument("scenario")
        p.add_argument("-F", action="append", required=True, help="element of F (repeatable)")
        _add_settings(p)
        p.set_defaults(fn=cmd_segments)

    p = sub.add_parser("nt", help="symbolic operations on named elements")
    p.add_argument("op", choices=["mul", "adjoint", "expect", "grade", "norm"])
    p.add_argument("scenario")
    p.add_argument("x")
    p.add_argument("y", nargs="?")
    _add_settings(p)
    p.set_defaults(fn=cmd_nt)

    p = sub.add_parser("fock", help="truncated Fock operators")
    p.add_argument("op", choices=["build", "norm", "expect", "project"])
    p.add_argument("scenario")
    p.add_argument("x", nargs="?")
    p.add_argument("--word", default=None, help="source word for a Q_w projection")
    p.add_argument("--above", default=None, help="p for the Q_<p> projection (sources in pP)")
    _add_settings(p, dense_cap=True)
    p.set_defaults(fn=cmd_fock)

    p = sub.add_parser("check", help="numerical verdicts with certificates")
    p.add_argument(
        "which",
        choices=["toeplitz", "condition-c", "condition-cprime", "aperiodicity", "graded", "projections"],
    )
    p.add_argument("scenario")
    p.add_argument("--p", default=None)
    p.add_argument("--qs", nargs="*", default=[])
    p.add_argument("--element", default=None, help="named element (corner h for aperiodicity)")
    p.add_argument("--unit", default=None)
    p.add_argument("--b", default=None)
    p.add_argument("--trials", type=int, default=None)
    _add_settings(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("bundle", help="group-graded fiber families")
    p.add_argument("op", choices=["roundtrip", "regular", "spectrum"])
    p.add_argument("scenario")
    p.add_argument("--section", default=None)
    _add_settings(p)
    p.set_defaults(fn=cmd_bundle)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ScenarioError, ValueError, FileNotFoundError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
