"""Syntactic class membership and the bounded semantic stickiness check."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .chase import ChaseConfig, descendants, run_standard_chase
from .core import Atom, Program, Term, Tgd, Variable
from .positions import (FinitePositionSet, Position, body_positions, build_edg,
                        ext_finite_positions, finite_rank_positions, head_positions,
                        program_positions)

Marked = Tuple[str, Variable]


@dataclass
class Marking:
    marked: Set[Marked] = field(default_factory=set)
    trace: List[Tuple[int, Marked, str]] = field(default_factory=list)

    def __contains__(self, item: Marked) -> bool:
        return item in self.marked


def sticky_marking(tgds: Sequence[Tgd]) -> Marking:
    m = Marking()
    for t in tgds:
        head_vars = set(t.head.variables())
        for v in t.body_vars:
            if v not in head_vars:
                m.marked.add((t.id, v))
                m.trace.append((0, (t.id, v), "does not occur in the head"))
    rnd = 0
    while True:
        rnd += 1
        marked_at: Dict[Position, Marked] = {}
        for t in tgds:
            for v in t.body_vars:
                if (t.id, v) in m.marked:
                    for p in body_positions(t, v):
                        marked_at.setdefault(p, (t.id, v))
        new = []
        for t in tgds:
            for v in t.frontier_vars:
                if (t.id, v) in m.marked:
                    continue
                for p in head_positions(t, v):
                    if p in marked_at:
                        src = marked_at[p]
                        new.append(((t.id, v), f"head position {p} holds marked {src[0]}.{src[1]}"))
                        break
        if not new:
            return m
        for item, reason in new:
            m.marked.add(item)
            m.trace.append((rnd, item, reason))


CLASSES = ("sticky", "weakly_acyclic", "jointly_acyclic", "weakly_sticky",
           "jointly_weakly_sticky")


@dataclass
class ClassReport:
    sticky: bool
    weakly_acyclic: bool
    jointly_acyclic: bool
    weakly_sticky: bool
    jointly_weakly_sticky: bool
    witnesses: Dict[str, str] = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {c: getattr(self, c) for c in CLASSES}
        out["witnesses"] = dict(sorted(self.witnesses.items()))
        return out

    def lattice_violations(self) -> List[str]:
        implications = [
            ("sticky", "weakly_sticky"),
            ("weakly_sticky", "jointly_weakly_sticky"),
            ("weakly_acyclic", "weakly_sticky"),
            ("jointly_acyclic", "jointly_weakly_sticky"),
            ("weakly_acyclic", "jointly_acyclic"),
        ]
        return [f"{a} => {b}" for a, b in implications
                if getattr(self, a) and not getattr(self, b)]


def _join_violation(tgds: Sequence[Tgd], marking: Marking,
                    finite: Optional[FinitePositionSet]) -> Optional[str]:
    """First marked repeated body variable with no occurrence in `finite`."""
    for t in tgds:
        for v in t.body_vars:
            if (t.id, v) not in marking or t.occurrences(v) < 2:
                continue
            ps = body_positions(t, v)
            if finite is None or not any(p in finite for p in ps):
                return (f"{t.id}.{v.name} is marked and repeated at "
                        f"{', '.join(map(str, ps))}")
    return None


def classify_program(tgds: Sequence[Tgd]) -> ClassReport:
    marking = sticky_marking(tgds)
    rank = finite_rank_positions(tgds)
    ext = ext_finite_positions(tgds)
    edg = build_edg(tgds)
    all_pos = program_positions(tgds)
    witnesses = {}

    sticky_w = _join_violation(tgds, marking, None)
    ws_w = _join_violation(tgds, marking, rank)
    jws_w = _join_violation(tgds, marking, ext)
    for name, w in (("sticky", sticky_w), ("weakly_sticky", ws_w),
                    ("jointly_weakly_sticky", jws_w)):
        if w:
            witnesses[name] = w

    inf_rank = sorted(all_pos - rank.positions)
    if inf_rank:
        witnesses["weakly_acyclic"] = "infinite-rank positions: " + ", ".join(map(str, inf_rank))
    cyclic = sorted(f"{r}.{v.name}" for r, v in edg.cyclic_closure())
    if cyclic:
        witnesses["jointly_acyclic"] = "cyclic existential dependencies via " + ", ".join(cyclic)

    return ClassReport(
        sticky=sticky_w is None,
        weakly_acyclic=not inf_rank,
        jointly_acyclic=edg.is_acyclic(),
        weakly_sticky=ws_w is None,
        jointly_weakly_sticky=jws_w is None,
        witnesses=witnesses,
    )


# -- semantic (chase) stickiness ----------------------------------------------

@dataclass
class StickinessWitness:
    value: Term
    rule_id: str
    trigger: Dict[Variable, Term]
    repeated_variable: Variable
    produced_atom: Atom
    escape_atom: Atom

    def __str__(self):
        return (f"value {self.value} bound to repeated {self.rule_id}.{self.repeated_variable} "
                f"in {self.produced_atom} is missing from descendant {self.escape_atom}")


@dataclass
class StickinessResult:
    outcome: str  # pass | witness | inconclusive
    witness: Optional[StickinessWitness] = None
    steps: int = 0


def tracked_variables(tgd: Tgd, finite: FinitePositionSet) -> List[Variable]:
    """Repeated body variables none of whose body positions is S-finite."""
    return [v for v in tgd.body_vars
            if tgd.occurrences(v) >= 2
            and not any(p in finite for p in body_positions(tgd, v))]


def check_chase_stickiness(program: Program, finite: FinitePositionSet,
                           max_steps: int = 200) -> StickinessResult:
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    res = run_standard_chase(program, ChaseConfig(max_steps=max_steps))
    inst = res.instance
    tracked = {t.id: tracked_variables(t, finite) for t in program.tgds}
    kids = inst.children()
    for a in inst.atoms:
        prov = inst.provenance.get(a)
        if prov is None or not tracked.get(prov.rule_id):
            continue
        h = prov.substitution()
        desc = None
        for x in tracked[prov.rule_id]:
            value = h[x]
            if desc is None:
                desc = [a, *descendants(inst, a, kids)]
            for d in desc:
                if value not in d.args:
                    return StickinessResult("witness", StickinessWitness(
                        value, prov.rule_id, h, x, a, d), res.steps_applied)
    return StickinessResult("pass" if res.terminated else "inconclusive", None,
                            res.steps_applied)

