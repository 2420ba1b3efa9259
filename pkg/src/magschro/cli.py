"""``magschro`` command line: gen, check, report, assemble, spectrum, metric.

Every subcommand writes JSON (or CSV for matrices and profiles) to ``--out``
or stdout.  Exit codes: 0 ok, 1 check failure, 2 usage error, 3 numeric
failure.
"""

from __future__ import annotations

import argparse
import ast
import json
import math
import sys

import numpy as np

from . import __version__
from .criteria import spectrum_of, theorem_report
from .exceptions import (EigensolverError, GraphParseError, GraphValidationError,
                         SingularSystemError, TruncationError)
from .export import (atomic_write_text, dumps_json, eigenvalues_csv, matrix_csv,
                     matrix_sidecar, profile_csv, write_matrix)
from .families import FAMILIES, make_family
from .graph import ball, dumps_graph, load_graph
from .identities import TOLERANCES
from .metric import completeness_profile, dist
from .operators import assemble
from .suite import run_checks

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

# shorthand family names accepted on the command line
ALIASES = {"cycle3": ("cycle", {"n": 3})}


class UsageError(Exception):
    pass


_ALLOWED = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Constant, ast.Name,
            ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd, ast.Load)


def parse_value(text: str):
    """JSON literal, arithmetic in ``pi`` (``pi/3``, ``2*pi``), or a bare string."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError:
        return text
    nodes = list(ast.walk(tree))
    if all(isinstance(nd, _ALLOWED) for nd in nodes) and \
            all(nd.id == "pi" for nd in nodes if isinstance(nd, ast.Name)):
        return float(eval(compile(tree, "<param>", "eval"), {"__builtins__": {}},
                          {"pi": math.pi}))
    return text


def parse_pairs(items, what: str, cast=parse_value) -> dict:
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep or not key:
            raise UsageError(f"{what} must look like NAME=VALUE, got {item!r}")
        out[key] = cast(val)
    return out


def parse_tolerances(items) -> dict:
    def positive(v):
        try:
            x = float(v)
        except ValueError:
            raise UsageError(f"tolerance {v!r} is not a number") from None
        if not (x > 0 and math.isfinite(x)):
            raise UsageError(f"tolerance must be positive, got {v}")
        return x

    tol = parse_pairs(items, "--tol", positive)
    unknown = set(tol) - set(TOLERANCES)
    if unknown:
        raise UsageError(f"unknown tolerance(s) {sorted(unknown)}; known: {sorted(TOLERANCES)}")
    return tol


def family_from_args(args):
    """``(name, Family)`` from the positional name, ``--family`` and ``--params``."""
    name = args.family or args.family_pos
    if name is None:
        return None, None
    params = {}
    if name in ALIASES:
        name, params = ALIASES[name][0], dict(ALIASES[name][1])
    params.update(parse_pairs(args.params, "--params"))
    for key in ("n", "flux"):
        val = getattr(args, key, None)
        if val is not None:
            params[key] = parse_value(val) if isinstance(val, str) else val
    try:
        return name, make_family(name, **params)
    except TypeError as exc:
        raise UsageError(f"bad parameters for {name}: {exc}") from None


def source_from_args(args):
    """A :class:`Family` or a loaded graph, never both."""
    name, fam = family_from_args(args)
    if args.graph and fam is not None:
        raise UsageError("give either --graph or a family, not both")
    if args.graph:
        return load_graph(args.graph)
    if fam is None:
        raise UsageError("a graph source is required: --graph PATH or a family name")
    return fam


def graph_from_args(args, radius):
    src = source_from_args(args)
    if not hasattr(src, "generate"):
        return src
    if not src.infinite:
        return src.generate(1)
    if radius is None:
        raise UsageError("--radius is required to materialize an infinite family")
    return src.generate(radius)


def emit(args, text: str):
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)


def header(seed=None, tolerances=None) -> dict:
    return {"tool": {"name": "magschro", "version": __version__},
            "seed": seed, "tolerances": dict(tolerances or TOLERANCES)}


# -- subcommands ---------------------------------------------------------------


def cmd_gen(args) -> int:
    if args.radius is None:
        args.radius = 1
    g = graph_from_args(args, args.radius)
    emit(args, dumps_graph(g))
    return EXIT_OK


def cmd_check(args) -> int:
    if args.trials < 0:
        raise UsageError("--trials must be >= 0")
    g = graph_from_args(args, args.radius if args.radius is not None else 10)
    rep = run_checks(g, seed=args.seed, trials=args.trials,
                     tolerances=parse_tolerances(args.tol), zero_fields=args.zero_fields)
    if args.format == "text":
        lines = [f"graph {rep['graph_hash'][:12]}  seed {rep['seed']}  trials {rep['trials']}"]
        for r in rep["results"] + rep["informational"]:
            tag = "PASS" if r["passed"] else "FAIL"
            extra = " (informational)" if r in rep["informational"] else ""
            lines.append(f"{tag}  {r['name']:<28} {r['max_violation']:.3e} "
                         f"<= {r['tolerance']:.0e}{extra}")
        for s in rep["skipped"]:
            lines.append(f"SKIP  {s['name']:<28} {s['reason']}")
        lines.append("all checks passed" if rep["passed"] else "CHECK FAILURE")
        emit(args, "\n".join(lines) + "\n")
    else:
        emit(args, dumps_json(rep))
    if not rep["passed"]:
        for r in rep["results"]:
            if not r["passed"]:
                print(f"magschro: check {r['name']} failed: violation "
                      f"{r['max_violation']:.3e} > {r['tolerance']:.0e} at {r['location']}",
                      file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def render_report(rep: dict) -> str:
    src = rep["source"].get("family", "graph")
    lines = [f"source: {src} {rep['source'].get('params', '')}".rstrip(),
             f"graph hash: {rep['graph_hash']}", f"center: {rep['center']}"]
    if rep.get("notice"):
        lines.append(f"notice: {rep['notice']}")
    aa = rep["assumption_a"]
    lines.append("assumption A (n, m_n, a_n, ratio):")
    shown = aa if len(aa) <= 12 else aa[:5] + [None] + aa[-5:]
    for rec in shown:
        lines.append("  ..." if rec is None else
                     f"  {rec['n']:>6} {rec['m_n']:>6} {rec['a_n']:>14.6g} {rec['ratio']:.6g}")
    lines.append("form bound (n, lambda_min):")
    for rec in rep["form_bound"]:
        lines.append(f"  {rec['n']:>6} {rec['lambda_min']:.6g}")
    prof = rep["metric_profile"]
    if prof:
        last = prof[-1]
        lines.append(f"metric profile: n = {last['n']}, min dist {last['min_dist']:.6g}")
    for k in ("1", "2", "3"):
        th = rep["theorems"][k]
        verdict = "applicable" if th["applicable"] else "not applicable"
        if th.get("trivially_applicable"):
            verdict += " (trivially, finite graph)"
        lines.append(f"theorem {k}: {verdict}")
        for h in th["hypotheses"]:
            lines.append(f"  - {h['name']}: {h['status']}")
    if "matches_reference" in rep:
        lines.append(f"matches reference classification: {rep['matches_reference']}")
    return "\n".join(lines) + "\n"


def cmd_report(args) -> int:
    src = source_from_args(args)
    max_n = args.max_n if args.max_n is not None else 20
    if max_n < 1:
        raise UsageError("--max-n must be >= 1")
    rep = theorem_report(src, x0=args.x0, max_n=max_n)
    rep = {**header(args.seed, parse_tolerances(args.tol)), **rep}
    emit(args, render_report(rep) if args.format == "text" else dumps_json(rep))
    return EXIT_OK


def _center_ball(g, args, default_radius):
    x0 = g.root if args.x0 is None else g.vertex_index(args.x0)
    radius = default_radius if args.ball is None else args.ball
    return ball(g, x0, radius)


def cmd_assemble(args) -> int:
    if args.ball is None:
        args.ball = args.radius if args.radius is not None else 0
    g = graph_from_args(args, args.ball + 1)
    b = _center_ball(g, args, args.ball)
    op = assemble(g, b, symmetrize=True)
    if args.out:
        write_matrix(g, op, args.out)
    elif args.format == "json":
        sys.stdout.write(dumps_json({"csv": matrix_csv(g, op), **matrix_sidecar(g, op)}))
    else:
        sys.stdout.write(matrix_csv(g, op))
    return EXIT_OK


def cmd_spectrum(args) -> int:
    radius = args.radius
    g = graph_from_args(args, (radius if radius is not None else 5) + 1)
    b = _center_ball(g, args, radius if radius is not None else g.n_vertices)
    op = assemble(g, b, symmetrize=True)
    k = min(args.k or len(b), len(b))
    vals = spectrum_of(op, k)
    if args.format == "text":
        emit(args, eigenvalues_csv(vals))
    else:
        rep = {**header(args.seed), "graph_hash": g.content_hash(),
               "center": g.ids[b.center], "radius": b.radius, "size": len(b),
               "eigenvalues": [float(v) for v in vals]}
        emit(args, dumps_json(rep))
    return EXIT_OK


def cmd_metric(args) -> int:
    src = source_from_args(args)
    if args.source_id is None and args.target_id is None:
        max_n = args.max_n if args.max_n is not None else 10
        prof = completeness_profile(src, args.x0, max_n)
        if args.format == "text":
            emit(args, profile_csv(prof))
        else:
            emit(args, dumps_json({**header(), "metric_profile": prof.records(),
                                   "closed_form": prof.closed_form, "note": prof.note}))
        return EXIT_OK
    if args.source_id is None or args.target_id is None:
        raise UsageError("--from and --to go together")
    if hasattr(src, "generate"):
        g = src.generate(args.radius if args.radius is not None else 20) \
            if src.infinite else src.generate(1)
    else:
        g = src
    d = dist(g, args.source_id, args.target_id)
    if args.format == "text":
        emit(args, f"{d!r}\n")
    else:
        emit(args, dumps_json({**header(), "graph_hash": g.content_hash(),
                               "from": args.source_id, "to": args.target_id,
                               "dist": d, "truncation_radius": g.truncation_radius}))
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="magschro",
                                description="Magnetic Schrodinger operators on weighted graphs.")
    p.add_argument("--version", action="version", version=f"magschro {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt_default="json"):
        sp.add_argument("family_pos", nargs="?", metavar="FAMILY",
                        help=f"family name: {', '.join(FAMILIES + tuple(ALIASES))}")
        sp.add_argument("--family", help="family name (alternative to the positional)")
        sp.add_argument("--params", nargs="*", default=[], metavar="K=V",
                        help="family parameters; values are JSON or expressions in pi")
        sp.add_argument("--graph", metavar="PATH", help="graph JSON file")
        sp.add_argument("--n", type=int, help="shortcut for --params n=N")
        sp.add_argument("--flux", help="shortcut for --params flux=F (e.g. pi/3)")
        sp.add_argument("--radius", type=int, help="truncation / ball radius")
        sp.add_argument("--max-n", type=int, dest="max_n")
        sp.add_argument("--x0", help="center vertex id (default: the graph root)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", metavar="PATH")
        sp.add_argument("--tol", nargs="*", default=[], metavar="NAME=FLOAT")
        sp.add_argument("--format", choices=("json", "text"), default=fmt_default)
        return sp

    common(sub.add_parser("gen", help="materialize a family to a graph file")).set_defaults(
        func=cmd_gen)
    sp = common(sub.add_parser("check", help="run the identity and inequality checks"))
    sp.add_argument("--trials", type=int, default=10)
    sp.add_argument("--zero-fields", action="store_true",
                    help="use identically zero test fields (vacuous checks)")
    sp.set_defaults(func=cmd_check)
    common(sub.add_parser("report", help="criteria applicability report")).set_defaults(
        func=cmd_report)
    sp = common(sub.add_parser("assemble", help="Dirichlet truncation matrix as CSV"), "text")
    sp.add_argument("--ball", type=int, help="ball radius (default: --radius or 0)")
    sp.set_defaults(func=cmd_assemble)
    sp = common(sub.add_parser("spectrum", help="smallest eigenvalues of a truncation"))
    sp.add_argument("--ball", type=int, help="ball radius (default: the whole graph)")
    sp.add_argument("-k", type=int, help="number of eigenvalues (default: all)")
    sp.set_defaults(func=cmd_spectrum)
    sp = common(sub.add_parser("metric", help="weighted distances and sphere profiles"))
    sp.add_argument("--from", dest="source_id")
    sp.add_argument("--to", dest="target_id")
    sp.set_defaults(func=cmd_metric)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    # LinAlgError subclasses ValueError, so numeric failures are caught first
    except (SingularSystemError, EigensolverError, np.linalg.LinAlgError) as exc:
        print(f"magschro: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, GraphParseError, GraphValidationError, TruncationError,
            ValueError, KeyError, OSError) as exc:
        print(f"magschro: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

if __name__ == "__main__":
    sys.exit(main())
