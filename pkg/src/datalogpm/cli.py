"""Command-line interface: classify, graph, chase, query, rewrite."""
from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path
from typing import List, Optional

from . import positions as pos
from .chase import DEFAULT_MAX_STEPS, ChaseConfig, explain, run_chase
from .classify import classify_program
from .core import Constant, ModelError, Program
from .magic import DEFAULT_ADORNMENT_CAP, MagicError, answer_rewritten, magic_rewrite, verify_closure
from .parser import ParseError, load_program, parse_query, render, render_atom, render_term
from .qa import AnswerSet, Query, SchemaError, answer_query_with_chase

EXIT_OK, EXIT_USER, EXIT_INTERNAL = 0, 1, 2


class UserError(Exception):
    pass


class InvariantError(RuntimeError):
    pass


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("datalogpm") / "fixtures" / name))


def resolve_program_path(spec: str) -> Path:
    if spec.startswith("fixture:"):
        name = spec.split(":", 1)[1]
        return fixture_path(name if name.endswith(".dlp") else name + ".dlp")
    return Path(spec)


def _load(args) -> Program:
    path = resolve_program_path(args.program)
    if not path.is_file():
        raise UserError(f"{args.program}: no such program file")
    try:
        return load_program(path, getattr(args, "facts", None))
    except ParseError as exc:
        raise UserError("\n".join(f"{args.program}:{d}" for d in exc.diagnostics))


def _query(args) -> Query:
    if args.query and args.query_file:
        raise UserError("give either --query or --query-file, not both")
    text = args.query
    if args.query_file:
        text = Path(args.query_file).read_text(encoding="utf-8")
    if not text:
        raise UserError("a query is required (--query or --query-file)")
    try:
        return parse_query(text)
    except ParseError as exc:
        raise UserError("query:" + "\n".join(map(str, exc.diagnostics)))


def _finite(spec: str, tgds) -> pos.FinitePositionSet:
    if spec.startswith("user:"):
        try:
            return pos.load_user_positions(spec[5:], tgds)
        except (OSError, ValueError) as exc:
            raise UserError(str(exc))
    try:
        return pos.finite_positions(tgds, spec)
    except ValueError as exc:
        raise UserError(str(exc))


def _emit(text: str, out) -> None:
    if text:
        out.write(text if text.endswith("\n") else text + "\n")


# -- subcommands ---------------------------------------------------------------

def cmd_classify(args, out) -> int:
    prog = _load(args)
    rep = classify_program(prog.tgds)
    if rep.lattice_violations():
        raise InvariantError("class lattice violated: " + "; ".join(rep.lattice_violations()))
    if args.json:
        _emit(json.dumps(rep.as_dict(), sort_keys=True), out)
    else:
        rows = [f"{c:<24}{'yes' if v else 'no'}" for c, v in rep.as_dict().items()
                if c != "witnesses"]
        rows += [f"% {c}: {w}" for c, w in sorted(rep.witnesses.items())]
        _emit("\n".join(rows), out)
    return EXIT_OK


def cmd_graph(args, out) -> int:
    prog = _load(args)
    if args.edg:
        _emit(pos.edg_dot(pos.build_edg(prog.tgds)), out)
    else:
        _emit(pos.dependency_graph_dot(pos.build_dependency_graph(prog.tgds)), out)
    return EXIT_OK


def cmd_chase(args, out) -> int:
    prog = _load(args)
    engine = "standard" if args.engine == "standard" else "parsimonious"
    finite = _finite(args.finite_positions, prog.tgds)
    res = run_chase(prog, ChaseConfig(engine, finite, args.max_steps, args.resumptions))
    if args.json:
        _emit(json.dumps({
            "atoms": [render_atom(a) for a in res.instance.sorted_atoms()],
            "terminated": res.terminated,
            "steps_applied": res.steps_applied,
            "resumptions_used": res.resumptions_used,
            "frozen_null_count": res.frozen_null_count,
        }, sort_keys=True), out)
        return EXIT_OK
    _emit(explain(res.instance) if args.explain else render(res.instance), out)
    if not res.terminated:
        _emit(f"% step limit {args.max_steps} reached; the chase did not terminate", out)
    return EXIT_OK


def answers_json(ans: AnswerSet, method: str) -> dict:
    return {
        "answer_vars": [v.name for v in ans.answer_vars],
        "tuples": [[render_term(t) for t in tup] for tup in ans.sorted_tuples()],
        "boolean": ans.boolean_result,
        "complete": ans.complete,
        "finite_positions": method,
        "violations": [str(v) for v in ans.violations],
    }


def cmd_query(args, out) -> int:
    prog = _load(args)
    q = _query(args)
    try:
        if args.magic:
            rw = magic_rewrite(prog, q, args.max_adorned)
            fp = None
            if args.finite_positions.startswith("user:"):
                fp = _finite(args.finite_positions, prog.tgds)
            elif args.finite_positions != "edg":
                fp = _finite(args.finite_positions, rw.program.tgds)
            ans, res = answer_rewritten(rw, args.resumptions, args.max_steps, fp)
            if args.check_constraints:
                from .qa import check_constraints
                ans.violations = check_constraints(res.instance, prog.egds, prog.constraints)
        else:
            fp = _finite(args.finite_positions, prog.tgds)
            ans, _ = answer_query_with_chase(prog, q, fp, args.resumptions, args.max_steps,
                                             args.check_constraints)
    except (SchemaError, MagicError) as exc:
        raise UserError(str(exc))
    if any(not isinstance(t, Constant) for tup in ans.tuples for t in tup):
        raise InvariantError("a null leaked into the answers")
    method = args.finite_positions.split(":", 1)[0]
    if args.json:
        _emit(json.dumps(answers_json(ans, method), sort_keys=True), out)
    else:
        _emit(render(ans), out)
    return EXIT_OK


def cmd_rewrite(args, out) -> int:
    prog = _load(args)
    q = _query(args)
    try:
        rw = magic_rewrite(prog, q, args.max_adorned)
    except (SchemaError, MagicError) as exc:
        raise UserError(str(exc))
    _emit(render(rw.program), out)
    if args.verify_closure:
        rep = verify_closure(prog, rw, args.max_steps)
        _emit("% closure report", out)
        _emit(json.dumps(rep.as_dict(), sort_keys=True), out)
    return EXIT_OK


def cmd_selftest(args, out) -> int:
    from .selftest import run_selftest
    report = run_selftest(args.seed, args.count)
    _emit(json.dumps(report, sort_keys=True) if args.json else
          "\n".join(f"{k}: {v}" for k, v in report.items()), out)
    if report["failures"]:
        raise InvariantError(f"{report['failures']} property failures")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="datalogpm", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(p, facts=True):
        p.add_argument("program", help="program file (.dlp) or fixture:<name>")
        if facts:
            p.add_argument("--facts", metavar="DIR", help="directory of <pred>.csv fact files")
        p.add_argument("--json", action="store_true", help="JSON output")

    def finite(p):
        p.add_argument("--finite-positions", default="edg", metavar="none|rank|edg|user:FILE",
                       help="finite-position function (default: edg)")

    def query_opts(p):
        p.add_argument("--query", help='query text, e.g. "?(X) <- p(X)."')
        p.add_argument("--query-file")
        p.add_argument("--max-adorned", type=int, default=DEFAULT_ADORNMENT_CAP)

    p = sub.add_parser("classify", help="syntactic class membership")
    common(p, facts=False)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("graph", help="dependency graph or EDG in DOT")
    common(p, facts=False)
    p.add_argument("--edg", action="store_true", help="existential dependency graph instead")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("chase", help="run the standard or parsimonious chase")
    common(p)
    finite(p)
    p.add_argument("--engine", choices=["standard", "pchase"], default="standard")
    p.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    p.add_argument("--resumptions", type=int, default=0)
    p.add_argument("--explain", action="store_true", help="print the provenance tree")
    p.set_defaults(func=cmd_chase)

    p = sub.add_parser("query", help="answer a conjunctive query")
    common(p)
    finite(p)
    query_opts(p)
    p.add_argument("--resumptions", type=int, default=None,
                   help="override the number of resumptions")
    p.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    p.add_argument("--magic", action="store_true", help="apply magic-sets rewriting first")
    p.add_argument("--check-constraints", action="store_true")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("rewrite", help="magic-sets rewriting")
    common(p)
    query_opts(p)
    p.add_argument("--verify-closure", action="store_true")
    p.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    p.set_defaults(func=cmd_rewrite)

    p = sub.add_parser("selftest", help=argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv: Optional[List[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (UserError, ModelError, OSError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USER
    except (InvariantError, AssertionError) as exc:
        err.write(f"internal error: {exc}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
