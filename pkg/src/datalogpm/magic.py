"""Magic-sets rewriting for existential rules, with closure verification.

Adornments use left-to-right sideways information passing restricted to
null-free positions (those not downstream of any existential head position):

* an argument is bound iff its position is null-free and it is a constant, a
  bound head variable, or a variable of an earlier null-free body atom;
* a body atom is null-free when all of its positions are; only such atoms pass
  bindings sideways and only they are copied into magic-rule bodies.

Magic predicates therefore only ever hold constants, and the marks that magic
rules introduce stay on null-free positions, which keeps jointly-weakly-sticky
programs jointly-weakly-sticky.
"""
from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .chase import DEFAULT_MAX_STEPS, atoms_with_nulls_at
from .classify import ClassReport, classify_program
from .core import Atom, Constant, Program, Tgd, Variable
from .positions import (FinitePositionSet, Position, ext_finite_positions, nullable_positions,
                        program_positions)
from .qa import AnswerSet, Query, answer_query_with_chase, check_schema

DEFAULT_ADORNMENT_CAP = 256


class MagicError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Adornment:
    predicate: str
    pattern: str

    def __post_init__(self):
        if set(self.pattern) - {"b", "f"}:
            raise ValueError(f"bad adornment pattern {self.pattern!r}")

    def __str__(self):
        return f"{self.predicate}^{self.pattern}"


@dataclass
class RewrittenProgram:
    program: Program
    magic_predicates: Set[str]
    answer_predicate: Adornment
    query: Query
    source_fingerprint: str
    adornments: List[Adornment] = field(default_factory=list)

    def magic_positions(self) -> Set[Position]:
        schema = self.program.schema()
        return {Position(p, i + 1) for p in self.magic_predicates
                for i in range(schema.get(p, 0))}


def fingerprint(program: Program) -> str:
    from .parser import render
    return hashlib.sha256(render(program).encode("utf-8")).hexdigest()


class _Rewriter:
    def __init__(self, program: Program, cap: int):
        self.program = program
        self.cap = cap
        self.idb = program.idb_predicates
        self.nullable = nullable_positions(program.tgds)
        self.schema = program.schema()
        self.prefix = "m_"
        while any(p.startswith(self.prefix) for p in self.schema):
            self.prefix = "m" + self.prefix
        self.rules: List[Tgd] = []
        self.seen_rules: Set[Tuple[Atom, Tuple[Atom, ...]]] = set()
        self.seeds: List[Atom] = []
        self.magic: Set[str] = set()
        self.done: Dict[Adornment, None] = {}
        self.queue: deque = deque()

    def name(self, ad: Adornment) -> str:
        return f"{self.prefix}{ad.predicate}_{ad.pattern}"

    def adorn(self, a: Atom, bound: Set[Variable]) -> Adornment:
        pattern = []
        for i, t in enumerate(a.args):
            passes = isinstance(t, Constant) or t in bound
            pattern.append("b" if passes and Position(a.predicate, i + 1) not in self.nullable
                           else "f")
        return Adornment(a.predicate, "".join(pattern))

    def null_free(self, a: Atom) -> bool:
        return all(Position(a.predicate, i + 1) not in self.nullable for i in range(a.arity))

    def magic_atom(self, a: Atom, ad: Adornment) -> Atom:
        name = self.name(ad)
        self.magic.add(name)
        return Atom(name, tuple(t for t, c in zip(a.args, ad.pattern) if c == "b"))

    def request(self, ad: Adornment) -> None:
        if ad.predicate in self.idb and ad not in self.done:
            self.done[ad] = None
            if len(self.done) > self.cap:
                raise MagicError(f"more than {self.cap} adorned predicates; "
                                 f"raise the cap or simplify the query")
            self.queue.append(ad)

    def emit(self, rule_id: str, head: Atom, body: Sequence[Atom]) -> None:
        body = tuple(body)
        if head in body or (head, body) in self.seen_rules:
            return
        self.seen_rules.add((head, body))
        self.rules.append(Tgd(rule_id, body, head))

    def process_query(self, query: Query) -> Adornment:
        bound: Set[Variable] = set()
        passing: List[Atom] = []
        first = None
        for k, a in enumerate(query.body):
            ad = self.adorn(a, bound)
            if k == 0:
                first = ad
            if k == 0 or a.predicate in self.idb:
                m = self.magic_atom(a, ad)
                if not passing:
                    if m not in self.seeds:
                        self.seeds.append(m)
                else:
                    self.emit(f"q_m{k}", m, passing)
                self.request(ad)
            if self.null_free(a):
                passing.append(a)
                bound.update(a.variables())
        return first

    def process(self, ad: Adornment) -> None:
        for t in self.program.tgds:
            if t.head.predicate != ad.predicate:
                continue
            rid = f"{t.id}_{ad.pattern}"
            guard = self.magic_atom(t.head, ad)
            bound = {v for v, c in zip(t.head.args, ad.pattern)
                     if c == "b" and isinstance(v, Variable)}
            feeders = []
            passing: List[Atom] = []
            for k, b in enumerate(t.body):
                if b.predicate in self.idb:
                    bad = self.adorn(b, bound)
                    feeders.append((f"{rid}_m{k + 1}", self.magic_atom(b, bad),
                                    (guard, *passing)))
                    self.request(bad)
                if self.null_free(b):
                    passing.append(b)
                    bound.update(b.variables())
            self.emit(rid, t.head, (guard, *t.body))
            for args in feeders:
                self.emit(*args)

    def run(self, query: Query) -> RewrittenProgram:
        answer = self.process_query(query)
        while self.queue:
            self.process(self.queue.popleft())
        prog = Program(self.rules, list(self.program.egds), list(self.program.constraints),
                       [*self.program.facts, *self.seeds])
        return RewrittenProgram(prog, set(self.magic), answer, query,
                                fingerprint(self.program), list(self.done))


def magic_rewrite(program: Program, query: Query,
                  max_adorned: int = DEFAULT_ADORNMENT_CAP) -> RewrittenProgram:
    check_schema(program, query)
    return _Rewriter(program, max_adorned).run(query)


def rewritten_finite_positions(rw: RewrittenProgram) -> FinitePositionSet:
    """S^ext of the rewritten rules, with magic positions always treated as finite."""
    return ext_finite_positions(rw.program.tgds).union(rw.magic_positions())


def answer_rewritten(rw: RewrittenProgram, resumptions: Optional[int] = None,
                     max_steps: Optional[int] = DEFAULT_MAX_STEPS,
                     finite: Optional[FinitePositionSet] = None):
    fp = finite.union(rw.magic_positions()) if finite is not None else rewritten_finite_positions(rw)
    # the schema was validated against the source program at rewrite time
    return answer_query_with_chase(rw.program, rw.query, fp, resumptions, max_steps,
                                   validate_schema=False)


@dataclass
class PositionCharacter:
    position: Position
    original_finite: bool
    rewritten_finite: Optional[bool]  # None: position no longer used by any rule

    def as_dict(self):
        return {"position": str(self.position), "original_finite": self.original_finite,
                "rewritten_finite": self.rewritten_finite}


@dataclass
class ClosureReport:
    original: ClassReport
    rewritten: ClassReport
    characters: List[PositionCharacter]
    magic_nulls_free: bool
    chase_terminated: bool
    answers: AnswerSet

    @property
    def jws_closed(self) -> bool:
        return not self.original.jointly_weakly_sticky or self.rewritten.jointly_weakly_sticky

    @property
    def characters_preserved(self) -> bool:
        return all(c.rewritten_finite is None or c.rewritten_finite == c.original_finite
                   for c in self.characters)

    @property
    def closed(self) -> bool:
        return self.jws_closed and self.characters_preserved and self.magic_nulls_free

    def as_dict(self) -> dict:
        return {
            "closed": self.closed,
            "jws_closed": self.jws_closed,
            "characters_preserved": self.characters_preserved,
            "magic_nulls_free": self.magic_nulls_free,
            "chase_terminated": self.chase_terminated,
            "original": self.original.as_dict(),
            "rewritten": self.rewritten.as_dict(),
            "positions": [c.as_dict() for c in self.characters],
        }


def verify_closure(original: Program, rewritten: RewrittenProgram,
                   max_steps: Optional[int] = DEFAULT_MAX_STEPS) -> ClosureReport:
    if fingerprint(original) != rewritten.source_fingerprint:
        raise MagicError("rewritten program was not produced from this program")
    orig_ext = ext_finite_positions(original.tgds)
    rew_ext = ext_finite_positions(rewritten.program.tgds)
    rew_positions = program_positions(rewritten.program.tgds)
    chars = []
    for p in sorted(program_positions(original.tgds)):
        chars.append(PositionCharacter(p, p in orig_ext,
                                       (p in rew_ext) if p in rew_positions else None))
    ans, res = answer_rewritten(rewritten, max_steps=max_steps)
    leaked = atoms_with_nulls_at(res.instance, rewritten.magic_positions())
    return ClosureReport(classify_program(original.tgds),
                         classify_program(rewritten.program.tgds),
                         chars, not leaked, res.terminated, ans)
