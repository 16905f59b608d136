"""Command-line front end.

Exit codes: 0 success, 1 malformed input, 2 hypothesis violation or failed
check, 3 budget exhausted (a sound partial result is still printed).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from collections import Counter
from dataclasses import replace
from fractions import Fraction

from . import __version__
from .covdeg import (
    DEFAULT_BUDGET,
    BudgetExhausted,
    CoveringDegreeEngine,
    HypothesisViolated,
    MultiDegreeProblem,
    certificate_from_dag,
    certificate_to_dag,
    exact_covdeg,
    explicit_lower_bound,
    verify_certificate,
)
from .documents import CACHE_ENV, CertificateDocument, load_cache, locked_cache, save_cache
from .graphio import GraphFormatError, graph_from_dict, graph_to_dict, load_graph
from .separation import (
    DEFAULT_C,
    DEFAULT_DELTA,
    PrecisionExhausted,
    complete_intersection_gonality_bound,
    degree_threshold,
)
from .snc_balance import (
    MalformedGraph,
    check_labeling,
    enumerate_labelings,
    matching_admissibility,
    matching_instances,
    multiplicity_matching,
)

EXIT_OK, EXIT_INPUT, EXIT_CHECK, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _rational(text: str) -> Fraction:
    try:
        num, _, den = text.partition("/")
        value = Fraction(int(num), int(den)) if den else Fraction(int(num))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational p/q, got {text!r}") from None
    return value


def _degrees(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if any(d < 1 for d in values):
        raise argparse.ArgumentTypeError("degrees must be positive")
    return values


def _nonneg(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("expected a nonnegative integer")
    return value


def _frac(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="covbound", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"covbound {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("covdeg", help="certified covering-degree lower bound")
    p.add_argument("--dim", type=_nonneg, required=True)
    p.add_argument("--codim", type=_nonneg, required=True)
    p.add_argument("--degrees", type=_degrees, default=())
    p.add_argument("--budget", type=_nonneg, default=DEFAULT_BUDGET, help="memo entry cap")
    p.add_argument("--assume-fano-floor", action="store_true")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--cache", help=f"memo cache file (default ${CACHE_ENV})")
    p.add_argument("--no-cache", action="store_true")
    p.add_argument("--timing", action="store_true", help="record wall-clock time in the document")

    p = sub.add_parser("gonality", help="covering-gonality lower bound from a separation schedule")
    p.add_argument("--dim", type=_nonneg, required=True)
    p.add_argument("--codim", type=_nonneg, required=True)
    p.add_argument("--degrees", type=_degrees, required=True)
    p.add_argument("--epsilon", type=_rational, required=True)
    p.add_argument("--delta", type=_rational, default=DEFAULT_DELTA)
    p.add_argument("--c", type=_rational, default=DEFAULT_C)
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--timing", action="store_true")

    p = sub.add_parser("balance", help="check or enumerate dual-graph labelings")
    p.add_argument("mode", choices=("check", "enumerate"))
    p.add_argument("path")
    p.add_argument("--order", type=_nonneg, help="degeneration order n (defaults to the file's)")
    p.add_argument("--delta-max", type=_nonneg, default=1)
    p.add_argument("--matching", action="store_true", help="evaluate contact-order matching per labeling")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--timing", action="store_true")

    p = sub.add_parser("verify", help="re-check a document emitted by this tool")
    p.add_argument("path")
    return parser


def _emit(doc: CertificateDocument, fmt: str, text_lines) -> None:
    if fmt == "json":
        sys.stdout.write(doc.dumps())
    else:
        sys.stdout.write("\n".join(text_lines(doc)) + "\n")


def _covdeg_text(doc: CertificateDocument):
    res = doc.result
    p = doc.problem
    yield f"cd({p['n']}; {', '.join(map(str, p['degrees']))}) >= {res['value']}"
    if res["exact"]:
        yield f"exact: covering degree = {res['exact_value']}"
    if res["budget_exhausted"]:
        yield "budget exhausted: partial bound"
    cert = certificate_from_dag(res["certificate"])
    seen = set()

    def walk(node, indent):
        key = node.problem.key
        tag = " (shared)" if key in seen else ""
        yield f"{'  ' * indent}{key}  {node.value}  {node.label}{tag}"
        if key in seen:
            return
        seen.add(key)
        for child in node.children:
            yield from walk(child, indent + 1)

    yield from walk(cert, 0)


def cmd_covdeg(args) -> int:
    if len(args.degrees) != args.codim:
        raise UsageError(f"--codim {args.codim} but {len(args.degrees)} degrees given")
    problem = MultiDegreeProblem.of(args.dim, args.degrees)
    if problem.n < 1:
        print("error: dimension must be at least 1", file=sys.stderr)
        return EXIT_CHECK
    engine = CoveringDegreeEngine(args.assume_fano_floor)
    cache = None if args.no_cache else (args.cache or os.environ.get(CACHE_ENV))
    start = time.perf_counter()
    exhausted = False
    if cache:
        with locked_cache(cache):
            load_cache(cache, engine)
            try:
                cert = engine.bound(problem, args.budget)
            except BudgetExhausted as exc:
                cert, exhausted = exc.certificate, True
            if not exhausted:
                save_cache(cache, engine)
    else:
        try:
            cert = engine.bound(problem, args.budget)
        except BudgetExhausted as exc:
            cert, exhausted = exc.certificate, True
    verdict = verify_certificate(cert, allow_fano=args.assume_fano_floor)
    if not verdict:
        raise RuntimeError(f"internal error: emitted certificate fails verification: {verdict.reason}")
    exact = exact_covdeg(problem)
    try:
        explicit = explicit_lower_bound(problem)
    except HypothesisViolated:
        explicit = None
    rules = Counter(node.rule for node in cert.nodes())
    doc = CertificateDocument(
        command={
            "subcommand": "covdeg",
            "dim": problem.n,
            "codim": problem.r,
            "degrees": list(args.degrees),
            "budget": args.budget,
            "assume_fano_floor": args.assume_fano_floor,
        },
        problem={**problem.to_dict(), "assume_fano_floor": args.assume_fano_floor},
        result={
            "value": cert.value,
            "product": problem.product,
            "exact": exact is not None,
            "exact_value": exact,
            "explicit_lower_bound": explicit,
            "budget_exhausted": exhausted,
            "certificate": certificate_to_dag(cert),
        },
        provenance={
            "root_rule": cert.label,
            "depth": cert.depth,
            "node_count": sum(rules.values()),
            "rule_counts": dict(sorted(rules.items())),
        },
        timing_ms=round((time.perf_counter() - start) * 1000, 3) if args.timing else None,
    )
    _emit(doc, args.format, _covdeg_text)
    return EXIT_BUDGET if exhausted else EXIT_OK


def _gonality_text(doc: CertificateDocument):
    res = doc.result
    s = res["schedule"]
    yield f"alpha = {res['alpha']}, schedule dimension = {s['n']}, d = {s['d']}"
    yield f"m = {s['m']}, a = [{', '.join(s['a'])}], c = {s['c']}"
    yield f"feasible = {s['feasible']}"
    yield f"covering gonality >= {res['bound']}" if res["bound"] else "no bound certified"
    th = res["threshold"]
    yield f"degree threshold: d0_scan = {th['d0_scan']}, d0_closed = {th['d0_closed']}"


def cmd_gonality(args) -> int:
    if len(args.degrees) != args.codim:
        raise UsageError(f"--codim {args.codim} but {len(args.degrees)} degrees given")
    if not 0 < args.epsilon < 1:
        raise UsageError("--epsilon must lie strictly between 0 and 1")
    if args.delta <= 0 or args.c < 0:
        raise UsageError("--delta must be positive and --c nonnegative")
    if args.dim < 1 or args.codim < 1:
        raise UsageError("--dim and --codim must be at least 1")
    start = time.perf_counter()
    try:
        result = complete_intersection_gonality_bound(args.dim, args.degrees, args.epsilon, args.delta, args.c)
    except HypothesisViolated as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK
    threshold = degree_threshold(args.dim + 1, args.epsilon, args.c)
    doc = CertificateDocument(
        command={
            "subcommand": "gonality",
            "dim": args.dim,
            "codim": args.codim,
            "degrees": list(args.degrees),
            "epsilon": _frac(args.epsilon),
            "delta": _frac(args.delta),
            "c": _frac(args.c),
        },
        problem={
            "n": args.dim,
            "r": args.codim,
            "degrees": list(args.degrees),
            "epsilon": _frac(args.epsilon),
            "delta": _frac(args.delta),
            "c": _frac(args.c),
        },
        result={**result.to_dict(), "threshold": threshold.to_dict()},
        provenance={
            "alpha_rule": "product of (d_i - n) over the degrees after the first",
            "schedule_dimension": args.dim + 1,
            "target_points": f"floor((1 - epsilon) * alpha * d_1) = {result.schedule.m}",
        },
        timing_ms=round((time.perf_counter() - start) * 1000, 3) if args.timing else None,
    )
    _emit(doc, args.format, _gonality_text)
    return EXIT_OK if result.schedule.feasible else EXIT_CHECK


def _matching_report(g) -> dict:
    rows = []
    for inst in matching_instances(g):
        problems = matching_admissibility(inst)
        lhs, rhs, equal = multiplicity_matching(inst)
        rows.append(
            {
                "F": sorted(inst.F),
                "node_edge": inst.node_edge,
                "admissible": not problems,
                "problems": problems,
                "lhs": lhs,
                "rhs": rhs,
                "equal": equal,
            }
        )
    return {"instances": rows, "holds": all(r["equal"] for r in rows if r["admissible"])}


def _balance_text(doc: CertificateDocument):
    res = doc.result
    if doc.command["mode"] == "check":
        if res["ok"]:
            yield "pass" + (" (loop edges exempt from edge-jump)" if res["loop_exempt"] else "")
        else:
            yield f"fail: condition {res['condition']} at {res['where']}: {res['message']}"
        return
    yield f"{res['count']} labelings"
    for i, g in enumerate(res["labelings"]):
        speeds = " ".join(f"{v}={tuple(s)}" for v, s in g["speeds"].items())
        deltas = " ".join(f"{e['name']}:{e['delta']}" for e in g["edges"])
        line = f"[{i}] speeds {speeds}" + (f" deltas {deltas}" if deltas else "")
        if "matching" in res:
            line += f" matching {'ok' if res['matching'][i]['holds'] else 'FAILS'}"
        yield line


def cmd_balance(args) -> int:
    start = time.perf_counter()
    graph = load_graph(args.path)
    command = {"subcommand": "balance", "mode": args.mode, "order": args.order, "delta_max": args.delta_max, "matching": args.matching}
    if args.mode == "check":
        if args.order is not None:
            graph = replace(graph, n=args.order)
        verdict = check_labeling(graph)
        result = {
            "ok": verdict.ok,
            "condition": verdict.condition,
            "where": verdict.where,
            "message": verdict.message,
            "loop_exempt": verdict.loop_exempt,
        }
        if args.matching and verdict.ok:
            result["matching"] = _matching_report(graph)
        doc = CertificateDocument(
            command=command,
            problem={"graph": graph_to_dict(graph)},
            result=result,
            provenance={"checked": ["delta", "total-speed", "support", "edge-jump", "flag-sum", "regular"]},
            timing_ms=round((time.perf_counter() - start) * 1000, 3) if args.timing else None,
        )
        _emit(doc, args.format, _balance_text)
        return EXIT_OK if verdict.ok else EXIT_CHECK
    n = args.order if args.order is not None else graph.n
    if n is None or n < 1:
        raise UsageError("enumerate needs a positive order (--order or an 'order' line)")
    if args.delta_max < 1:
        raise UsageError("--delta-max must be at least 1")
    skeleton = graph.skeleton()
    labelings = enumerate_labelings(skeleton, n, args.delta_max)
    result = {"count": len(labelings), "labelings": [graph_to_dict(g) for g in labelings]}
    if args.matching:
        result["matching"] = [_matching_report(g) for g in labelings]
    doc = CertificateDocument(
        command=command,
        problem={"skeleton": graph_to_dict(skeleton), "n": n, "delta_max": args.delta_max},
        result=result,
        provenance={"order": "vertex speeds lexicographic in vertex order, then per edge delta ascending"},
        timing_ms=round((time.perf_counter() - start) * 1000, 3) if args.timing else None,
    )
    _emit(doc, args.format, _balance_text)
    return EXIT_OK


def verify_document(doc: CertificateDocument) -> tuple[bool, str]:
    """Re-check a document independently of how it was produced."""
    sub = doc.command.get("subcommand")
    if sub == "covdeg":
        cert = certificate_from_dag(doc.result["certificate"])
        problem = MultiDegreeProblem.of(doc.problem["n"], doc.problem["degrees"])
        if cert.problem != problem:
            return False, "certificate root does not match the problem"
        if cert.value != doc.result["value"]:
            return False, "reported value differs from the certificate"
        verdict = verify_certificate(cert, allow_fano=bool(doc.problem.get("assume_fano_floor")))
        if not verdict:
            return False, f"node {list(verdict.path)}: {verdict.reason}"
        exact = doc.result.get("exact_value")
        if exact is not None and (exact != problem.product or cert.value != exact):
            return False, "exact value disagrees with the certified bound"
        return True, f"certificate verified: cd >= {cert.value}"
    if sub == "balance":
        if doc.command.get("mode") == "check":
            graph = graph_from_dict(doc.problem["graph"])
            verdict = check_labeling(graph)
            if verdict.ok != doc.result["ok"] or verdict.condition != doc.result["condition"]:
                return False, "labeling verdict does not reproduce"
            return True, "labeling verdict reproduced"
        skeleton = graph_from_dict(doc.problem["skeleton"])
        graphs = [graph_from_dict(g) for g in doc.result["labelings"]]
        for i, g in enumerate(graphs):
            if g.skeleton() != skeleton or g.n != doc.problem["n"]:
                return False, f"labeling {i} is not on the stated skeleton"
            verdict = check_labeling(g)
            if not verdict:
                return False, f"labeling {i} violates {verdict.condition}: {verdict.message}"
            if any(e.delta > doc.problem["delta_max"] for e in g.edges):
                return False, f"labeling {i} exceeds delta_max"
        keys = [g.label_key() for g in graphs]
        if keys != sorted(keys) or len(set(keys)) != len(keys):
            return False, "labelings are not in canonical order or repeat"
        if len(graphs) != doc.result["count"]:
            return False, "count does not match the list"
        fresh = enumerate_labelings(skeleton, doc.problem["n"], doc.problem["delta_max"])
        if [g.label_key() for g in fresh] != keys:
            return False, "list differs from a fresh enumeration"
        return True, f"{len(graphs)} labelings verified"
    if sub == "gonality":
        s = doc.result["schedule"]
        alpha, m, d = Fraction(s["alpha"]), int(s["m"]), int(s["d"])
        eps, delta, c = Fraction(s["epsilon"]), Fraction(s["delta"]), Fraction(s["c"])
        a = [Fraction(x) for x in s["a"]]
        if m != math.floor((1 - eps) * alpha * d):
            return False, "point count is not floor((1 - epsilon) alpha d)"
        for j, aj in enumerate(a, start=1):
            if aj - delta < 0 or (aj - delta) ** j < Fraction(j**j) * m / alpha:
                return False, f"a_{j} does not bound j (m/alpha)^(1/j) + delta"
        feasible = sum(a) + c < d
        if s["feasible"] and not feasible:
            return False, "schedule claimed feasible but exceeds d"
        if doc.result["bound"] != (m + 1 if s["feasible"] else 0):
            return False, "bound is not m + 1"
        return True, f"schedule verified: covering gonality >= {doc.result['bound']}"
    return False, f"unknown subcommand {sub!r}"


def cmd_verify(args) -> int:
    with open(args.path, encoding="utf-8") as fh:
        try:
            doc = CertificateDocument.loads(fh.read())
        except (json.JSONDecodeError, ValueError) as exc:
            raise UsageError(f"not a certificate document: {exc}") from None
    try:
        ok, message = verify_document(doc)
    except (KeyError, TypeError, ValueError) as exc:
        ok, message = False, f"malformed document: {exc}"
    print(("ok: " if ok else "FAILED: ") + message)
    return EXIT_OK if ok else EXIT_CHECK


COMMANDS = {"covdeg": cmd_covdeg, "gonality": cmd_gonality, "balance": cmd_balance, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.subcommand](args)
    except UsageError as exc:
        print(f"covbound: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GraphFormatError, MalformedGraph, OSError) as exc:
        print(f"covbound: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PrecisionExhausted as exc:
        print(f"covbound: error: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
