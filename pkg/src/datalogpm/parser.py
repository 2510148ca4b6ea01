"""Text frontend for `.dlp` programs, conjunctive queries, and CSV fact directories.

Grammar (statements end with ``.``, ``%`` starts a comment)::

    p(a, "b c").                       fact
    h(X, Z) <- b1(X, Y), b2(Y).        tgd; Z is existential
    X = Y <- p(Z, X), p(Z, Y).         egd
    false <- p(X), q(X).               negative constraint
    ?(X) <- p(X, Y).                   query (parse_query only)

Variables start with an uppercase letter or ``_``; constants are lowercase
identifiers, numbers or quoted strings.
"""
from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .core import (Atom, Constant, Egd, Instance, ModelError, NegConstraint, Null,
                   Program, Tgd, Variable, body_variables)
from .qa import AnswerSet, Query

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>%[^\n]*)
  | (?P<arrow><-)
  | (?P<null>_:[nf][0-9]+)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<ident>[a-z][A-Za-z0-9_]*)
  | (?P<number>-?[0-9]+(?:\.[0-9]+)?)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<punct>[(),.=?])
""", re.VERBOSE)

_BARE_CONST = re.compile(r"[a-z][A-Za-z0-9_]*|-?[0-9]+(?:\.[0-9]+)?")


@dataclass
class Diagnostic:
    line: int
    column: int
    message: str

    def __str__(self):
        return f"{self.line}:{self.column}: {self.message}"


class ParseError(ValueError):
    def __init__(self, diagnostics: List[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(map(str, diagnostics)))


@dataclass
class Token:
    kind: str
    text: str
    line: int
    column: int


@dataclass
class SourceProgram:
    text: str
    parsed: Optional[Program]
    diagnostics: List[Diagnostic] = field(default_factory=list)


class _Fail(Exception):
    def __init__(self, tok: Token, message: str):
        self.diag = Diagnostic(tok.line, tok.column, message)


def tokenize(text: str) -> List[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError([Diagnostic(line, pos - line_start + 1,
                                         f"unexpected character {text[pos]!r}")])
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.arity: Dict[str, int] = {}
        self.diags: List[Diagnostic] = []

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind == "string":
            raise _Fail(self.tok, f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.next()

    def skip_statement(self):
        while self.tok.kind != "eof" and self.tok.text != ".":
            self.next()
        if self.tok.text == ".":
            self.next()

    def term(self):
        t = self.next()
        if t.kind == "var":
            return Variable(t.text)
        if t.kind in ("ident", "number"):
            return Constant(t.text)
        if t.kind == "string":
            return Constant(json.loads(t.text))
        if t.kind == "null":
            return Null(int(t.text[3:]), t.text[2] == "f")
        raise _Fail(t, f"expected a term, found {t.text or 'end of input'!r}")

    def atom(self) -> Tuple[Atom, Token]:
        start = self.tok
        if start.kind != "ident":
            raise _Fail(start, f"expected a predicate name, found {start.text or 'end of input'!r}")
        self.next()
        args = []
        if self.tok.text == "(":
            self.next()
            if self.tok.text != ")":
                args.append(self.term())
                while self.tok.text == ",":
                    self.next()
                    args.append(self.term())
            self.expect(")")
        a = Atom(start.text, tuple(args))
        known = self.arity.setdefault(a.predicate, a.arity)
        if known != a.arity:
            raise _Fail(start, f"arity mismatch: {a.predicate} used with {a.arity} "
                               f"arguments, earlier with {known}")
        return a, start

    def body(self) -> List[Atom]:
        atoms = [self.atom()[0]]
        while self.tok.text == ",":
            self.next()
            atoms.append(self.atom()[0])
        return atoms

    def statement(self, prog: Program, counters: Dict[str, int]):
        first = self.tok
        if first.kind == "ident" and first.text == "false" and self.toks[self.i + 1].kind == "arrow":
            self.next()
            self.next()
            body = self.body()
            self.expect(".")
            counters["c"] += 1
            prog.constraints.append(NegConstraint(f"c{counters['c']}", body))
            return
        if first.kind == "var" and self.toks[self.i + 1].text == "=":
            lhs = Variable(self.next().text)
            self.next()
            rt = self.next()
            if rt.kind != "var":
                raise _Fail(rt, "egd sides must be variables")
            rhs = Variable(rt.text)
            arrow = self.tok
            if arrow.kind != "arrow":
                raise _Fail(arrow, "expected '<-' after equality head")
            self.next()
            body = self.body()
            self.expect(".")
            bv = set(body_variables(body))
            if lhs not in bv:
                raise _Fail(first, f"variable {lhs} on the left of '=' does not occur in the body")
            if rhs not in bv:
                raise _Fail(rt, f"variable {rhs} on the right of '=' does not occur in the body")
            counters["e"] += 1
            try:
                prog.egds.append(Egd(f"e{counters['e']}", body, lhs, rhs))
            except ModelError as exc:
                raise _Fail(first, str(exc))
            return
        if first.text == "?":
            raise _Fail(first, "queries are not program statements; pass them separately")
        heads = [self.atom()]
        while self.tok.text == ",":
            self.next()
            heads.append(self.atom())
        if self.tok.kind == "arrow":
            if len(heads) > 1:
                raise _Fail(heads[1][1], "multi-atom heads are not supported; "
                                         "write one rule per head atom")
            self.next()
            body = self.body()
            self.expect(".")
            head = heads[0][0]
            if any(isinstance(t, Null) for a in (head, *body) for t in a.args):
                raise _Fail(first, "nulls may not appear in rules")
            counters["r"] += 1
            prog.tgds.append(Tgd(f"r{counters['r']}", tuple(body), head))
            return
        self.expect(".")
        for a, tok in heads:
            for t in a.args:
                if isinstance(t, Variable):
                    raise _Fail(tok, f"fact {a} contains variable {t}")
                if isinstance(t, Null):
                    raise _Fail(tok, f"fact {a} contains a null")
            prog.facts.append(a)

    def program(self) -> Program:
        prog = Program()
        counters = {"r": 0, "e": 0, "c": 0}
        while self.tok.kind != "eof":
            try:
                self.statement(prog, counters)
            except _Fail as exc:
                self.diags.append(exc.diag)
                self.skip_statement()
        prog.facts = list(dict.fromkeys(prog.facts))
        return prog

    def query(self) -> Query:
        self.expect("?")
        self.expect("(")
        answer = []
        toks = []
        if self.tok.text != ")":
            while True:
                t = self.next()
                if t.kind != "var":
                    raise _Fail(t, "answer positions must be variables")
                answer.append(Variable(t.text))
                toks.append(t)
                if self.tok.text != ",":
                    break
                self.next()
        self.expect(")")
        if self.tok.kind != "arrow":
            raise _Fail(self.tok, "expected '<-'")
        self.next()
        body = self.body()
        self.expect(".")
        if self.tok.kind != "eof":
            raise _Fail(self.tok, "trailing text after query")
        bv = set(body_variables(body))
        for v, t in zip(answer, toks):
            if v not in bv:
                raise _Fail(t, f"answer variable {v} does not occur in the query body")
        return Query(tuple(answer), tuple(body))


def parse_source(text: str) -> SourceProgram:
    """Parse, collecting diagnostics instead of raising."""
    try:
        p = _Parser(text)
    except ParseError as exc:
        return SourceProgram(text, None, exc.diagnostics)
    prog = p.program()
    return SourceProgram(text, None if p.diags else prog, p.diags)


def parse_program(text: str) -> Program:
    src = parse_source(text)
    if src.diagnostics:
        raise ParseError(src.diagnostics)
    return src.parsed


def parse_query(text: str) -> Query:
    text = text.strip()
    if not text.endswith("."):
        text += "."
    p = _Parser(text)
    try:
        return p.query()
    except _Fail as exc:
        raise ParseError([exc.diag])


def load_csv_facts(directory) -> List[Atom]:
    """Facts from a directory of ``<predicate>.csv`` files, one row per atom."""
    facts = []
    for path in sorted(Path(directory).glob("*.csv")):
        pred = path.stem
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.reader(fh):
                if not row or all(not c.strip() for c in row):
                    continue
                facts.append(Atom(pred, tuple(Constant(c.strip()) for c in row)))
    return facts


def load_program(path, facts_dir=None) -> Program:
    text = Path(path).read_text(encoding="utf-8")
    prog = parse_program(text)
    if facts_dir is not None:
        extra = load_csv_facts(facts_dir)
        schema = prog.schema()
        bad = [a for a in extra if schema.setdefault(a.predicate, a.arity) != a.arity]
        if bad:
            raise ParseError([Diagnostic(0, 0, f"arity mismatch in CSV facts: {bad[0]}")])
        prog.facts = list(dict.fromkeys([*prog.facts, *extra]))
    return prog


# -- rendering ---------------------------------------------------------------

def render_term(t) -> str:
    if isinstance(t, Constant):
        if _BARE_CONST.fullmatch(t.name) and t.name != "false":
            return t.name
        return json.dumps(t.name)
    return str(t)


def render_atom(a: Atom) -> str:
    return f"{a.predicate}({','.join(render_term(t) for t in a.args)})"


def _render_body(body) -> str:
    return ", ".join(render_atom(a) for a in body)


def render_rule(r) -> str:
    if isinstance(r, Tgd):
        return f"{render_atom(r.head)} <- {_render_body(r.body)}."
    if isinstance(r, Egd):
        return f"{r.lhs} = {r.rhs} <- {_render_body(r.body)}."
    if isinstance(r, NegConstraint):
        return f"false <- {_render_body(r.body)}."
    raise TypeError(type(r))


def render_query(q: Query) -> str:
    return f"?({','.join(v.name for v in q.answer_vars)}) <- {_render_body(q.body)}."


def render_answers(ans: AnswerSet) -> str:
    lines = []
    if not ans.answer_vars:
        lines.append("yes" if ans.boolean_result else "no")
    else:
        for tup in ans.sorted_tuples():
            lines.append(", ".join(f"{v.name}={render_term(t)}"
                                   for v, t in zip(ans.answer_vars, tup)))
        if not ans.tuples:
            lines.append("% no answers")
    if not ans.complete:
        lines.append("% incomplete: a chase phase hit the step limit")
    for v in ans.violations:
        lines.append(f"% violation: {v}")
    return "\n".join(lines)


def render(value) -> str:
    """Deterministic text for a Program, Instance or AnswerSet."""
    if isinstance(value, Program):
        lines = [render_rule(r) for r in (*value.tgds, *value.egds, *value.constraints)]
        lines += [render_atom(f) + "." for f in value.facts]
        return "\n".join(lines)
    if isinstance(value, Instance):
        return "\n".join(render_atom(a) + "." for a in value.sorted_atoms())
    if isinstance(value, AnswerSet):
        return render_answers(value)
    if isinstance(value, Query):
        return render_query(value)
    raise TypeError(f"cannot render {type(value).__name__}")
