"""Conjunctive query answering over the parsimonious chase with finite-position freezing."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .chase import DEFAULT_MAX_STEPS, ChaseConfig, ChaseResult, run_parsimonious_chase
from .core import (Atom, Constant, Egd, Instance, NegConstraint, Null, Program, Term,
                   Variable, body_variables, find_homomorphisms)
from .positions import FinitePositionSet


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class Query:
    answer_vars: Tuple[Variable, ...]
    body: Tuple[Atom, ...]

    def __post_init__(self):
        object.__setattr__(self, "answer_vars", tuple(self.answer_vars))
        object.__setattr__(self, "body", tuple(self.body))
        bv = set(body_variables(self.body))
        missing = [v for v in self.answer_vars if v not in bv]
        if missing:
            raise SchemaError(f"answer variable {missing[0]} does not occur in the query body")

    @property
    def existential_vars(self) -> List[Variable]:
        ans = set(self.answer_vars)
        return [v for v in body_variables(self.body) if v not in ans]

    @property
    def is_boolean(self) -> bool:
        return not self.answer_vars


@dataclass
class Violation:
    kind: str  # egd | nc
    rule_id: str
    homomorphism: Dict[Variable, Term]

    def __str__(self):
        binding = ", ".join(f"{v}={t}" for v, t in sorted(self.homomorphism.items(),
                                                          key=lambda vt: vt[0].name))
        return f"{self.kind} {self.rule_id} violated by {{{binding}}}"


@dataclass
class AnswerSet:
    answer_vars: Tuple[Variable, ...]
    tuples: Set[Tuple[Constant, ...]] = field(default_factory=set)
    complete: bool = True
    violations: List[Violation] = field(default_factory=list)

    @property
    def boolean_result(self) -> Optional[bool]:
        if self.answer_vars:
            return None
        return bool(self.tuples)

    def sorted_tuples(self) -> List[Tuple[Constant, ...]]:
        return sorted(self.tuples, key=lambda tup: tuple(c.name for c in tup))

    def names(self) -> Set[Tuple[str, ...]]:
        return {tuple(c.name for c in tup) for tup in self.tuples}


def check_schema(program: Program, query: Query) -> None:
    schema = program.schema()
    for a in query.body:
        if a.predicate not in schema:
            raise SchemaError(f"unknown predicate {a.predicate} in query")
        if schema[a.predicate] != a.arity:
            raise SchemaError(f"{a.predicate} has arity {schema[a.predicate]}, "
                              f"query uses {a.arity}")


def extract_answers(instance: Instance, query: Query) -> AnswerSet:
    out = AnswerSet(query.answer_vars)
    for h in find_homomorphisms(query.body, instance):
        tup = tuple(h[v] for v in query.answer_vars)
        if all(isinstance(t, Constant) for t in tup):
            out.tuples.add(tup)
            if query.is_boolean:
                break
    return out


def check_constraints(instance: Instance, egds: Sequence[Egd],
                      constraints: Sequence[NegConstraint]) -> List[Violation]:
    out = []
    for nc in constraints:
        for h in find_homomorphisms(nc.body, instance):
            out.append(Violation("nc", nc.id, h))
    for e in egds:
        for h in find_homomorphisms(e.body, instance):
            lhs, rhs = h[e.lhs], h[e.rhs]
            if lhs != rhs and _committed(lhs) and _committed(rhs):
                out.append(Violation("egd", e.id, h))
    return out


def _committed(t: Term) -> bool:
    return isinstance(t, Constant) or (isinstance(t, Null) and t.frozen)


def default_resumptions(query: Query) -> int:
    return len(query.existential_vars)


def answer_query(program: Program, query: Query, finite: FinitePositionSet,
                 resumptions: Optional[int] = None, max_steps: Optional[int] = DEFAULT_MAX_STEPS,
                 check: bool = False) -> AnswerSet:
    ans, _ = answer_query_with_chase(program, query, finite, resumptions, max_steps, check)
    return ans


def answer_query_with_chase(program: Program, query: Query, finite: FinitePositionSet,
                            resumptions: Optional[int] = None,
                            max_steps: Optional[int] = DEFAULT_MAX_STEPS,
                            check: bool = False,
                            validate_schema: bool = True) -> Tuple[AnswerSet, ChaseResult]:
    if validate_schema:
        check_schema(program, query)
    if resumptions is None:
        resumptions = default_resumptions(query)
    cfg = ChaseConfig("parsimonious", finite, max_steps, resumptions)
    res = run_parsimonious_chase(program, cfg)
    ans = extract_answers(res.instance, query)
    ans.complete = res.terminated
    if check:
        ans.violations = check_constraints(res.instance, program.egds, program.constraints)
    return ans, res
