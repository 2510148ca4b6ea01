"""Restricted chase and parsimonious chase with freezing and resumption.

Both engines work in breadth-first rounds. A trigger is examined in the first
round where it appears (it uses at least one atom added by the previous round)
and only against atoms that existed when the round started; rules are taken in
program order and matches in insertion order, so runs are reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence

from .core import (Atom, Instance, Null, Program, Provenance, Tgd, apply_atom,
                   find_homomorphisms, has_homomorphic_image, match_body)
from .positions import FinitePositionSet, Position, no_finite_positions

DEFAULT_MAX_STEPS = 10_000


@dataclass
class ChaseConfig:
    engine: str = "standard"  # standard | parsimonious
    finite_positions: FinitePositionSet = field(default_factory=no_finite_positions)
    max_steps: Optional[int] = DEFAULT_MAX_STEPS
    resumptions: int = 0

    def __post_init__(self):
        if self.engine not in ("standard", "parsimonious"):
            raise ValueError(f"unknown chase engine {self.engine!r}")
        if self.resumptions < 0:
            raise ValueError("resumptions must be >= 0")
        if self.max_steps is not None and self.max_steps < 0:
            raise ValueError("max_steps must be >= 0")


@dataclass
class ChaseResult:
    instance: Instance
    terminated: bool
    steps_applied: int
    resumptions_used: int = 0
    frozen_null_count: int = 0


class _StepBudget(Exception):
    pass


def _head_pattern(tgd: Tgd, h) -> Atom:
    """Head under h; existential variables stay as variables."""
    return apply_atom(tgd.head, h)


def restricted_applicable(tgd: Tgd, h, instance: Instance) -> bool:
    """No extension of h to the head variables maps the head into instance."""
    pattern = _head_pattern(tgd, h)
    for _ in find_homomorphisms([pattern], instance):
        return False
    return True


def pchase_step_applicable(tgd: Tgd, h, instance: Instance) -> bool:
    """The instantiated head (fresh unfrozen nulls for existentials) has no homomorphic image."""
    return not has_homomorphic_image(_head_pattern(tgd, h), instance)


class _Run:
    def __init__(self, program: Program, config: ChaseConfig):
        self.program = program
        self.config = config
        self.inst = Instance(program.facts)
        self.steps = 0

    def fire(self, tgd: Tgd, h, parents: Sequence[Atom], freeze_at: Optional[FinitePositionSet]):
        if self.config.max_steps is not None and self.steps >= self.config.max_steps:
            raise _StepBudget
        h = dict(h)
        head = tgd.head
        for z in tgd.existential_vars:
            frozen = False
            if freeze_at is not None:
                frozen = any(Position(head.predicate, i + 1) in freeze_at
                             for i, t in enumerate(head.args) if t == z)
            h[z] = self.inst.fresh_null(frozen)
        new = apply_atom(head, h)
        trigger = tuple(sorted(((v, t) for v, t in h.items()), key=lambda vt: vt[0].name))
        self.inst.add(new, Provenance(tgd.id, trigger, tuple(parents)))
        self.steps += 1

    def phase(self, applicable, freeze_at: Optional[FinitePositionSet]):
        """Run rounds to fixpoint; raises _StepBudget when the step limit is hit."""
        delta_from = 0
        while True:
            limit = len(self.inst.atoms)
            for tgd in self.program.tgds:
                for h, matched in match_body(tgd.body, self.inst, limit=limit,
                                             delta_from=delta_from):
                    if applicable(tgd, h, self.inst):
                        self.fire(tgd, h, matched, freeze_at)
            if len(self.inst.atoms) == limit:
                return
            delta_from = limit

    def result(self, terminated: bool, resumptions_used: int = 0) -> ChaseResult:
        frozen = sum(1 for n in self.inst.nulls() if n.frozen)
        return ChaseResult(self.inst, terminated, self.steps, resumptions_used, frozen)


def run_standard_chase(program: Program, config: Optional[ChaseConfig] = None) -> ChaseResult:
    config = config or ChaseConfig()
    run = _Run(program, config)
    try:
        run.phase(restricted_applicable, None)
    except _StepBudget:
        return run.result(False)
    return run.result(True)


def run_parsimonious_chase(program: Program, config: Optional[ChaseConfig] = None) -> ChaseResult:
    config = config or ChaseConfig(engine="parsimonious")
    run = _Run(program, config)
    finite = config.finite_positions
    used = 0
    try:
        run.phase(pchase_step_applicable, finite)
        for _ in range(config.resumptions):
            run.inst = run.inst.freeze_all()
            used += 1
            run.phase(pchase_step_applicable, finite)
    except _StepBudget:
        return run.result(False, used)
    return run.result(True, used)


def run_chase(program: Program, config: ChaseConfig) -> ChaseResult:
    if config.engine == "standard":
        return run_standard_chase(program, config)
    return run_parsimonious_chase(program, config)


def descendants(instance: Instance, root: Atom, children=None) -> List[Atom]:
    """Provenance descendants of root (excluding root), in insertion order."""
    kids = children if children is not None else instance.children()
    seen = set()
    todo = [root]
    while todo:
        a = todo.pop()
        for k in kids.get(a, ()):
            if k not in seen:
                seen.add(k)
                todo.append(k)
    return sorted(seen, key=instance.seq.__getitem__)


def explain(instance: Instance) -> str:
    """Provenance forest: every derived atom under its first parent, like a chase tree."""
    from .parser import render_atom

    kids: dict = {a: [] for a in instance.atoms}
    roots = []
    for a in instance.atoms:
        prov = instance.provenance.get(a)
        if prov is None or not prov.parents:
            roots.append(a)
        else:
            kids[prov.parents[-1]].append(a)
    lines: List[str] = []

    def walk(a: Atom, depth: int):
        prov = instance.provenance.get(a)
        tag = ""
        if prov is not None:
            others = [render_atom(p) for p in prov.parents[:-1]]
            tag = f"   [{prov.rule_id}" + (f"; with {', '.join(others)}" if others else "") + "]"
        lines.append("  " * depth + render_atom(a) + tag)
        for k in kids[a]:
            walk(k, depth + 1)

    for r in roots:
        walk(r, 0)
    return "\n".join(lines)


def atoms_with_nulls_at(instance: Instance, positions: Iterable[Position]) -> List[Atom]:
    wanted = set(positions)
    return [a for a in instance.atoms
            if any(isinstance(t, Null) and Position(a.predicate, i + 1) in wanted
                   for i, t in enumerate(a.args))]


__all__ = [
    "ChaseConfig", "ChaseResult", "DEFAULT_MAX_STEPS", "atoms_with_nulls_at", "descendants",
    "explain", "pchase_step_applicable", "restricted_applicable", "run_chase",
    "run_parsimonious_chase", "run_standard_chase",
]
