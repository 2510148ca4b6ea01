"""Terms, atoms, rules, instances and homomorphism search."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Tuple, Union


@dataclass(frozen=True, order=True)
class Constant:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, order=True)
class Variable:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, order=True)
class Null:
    """Labeled null. A frozen null behaves like a constant under homomorphisms."""

    id: int
    frozen: bool = False

    def __post_init__(self):
        if self.id < 1:
            raise ValueError(f"null ids are positive, got {self.id}")

    def freeze(self) -> "Null":
        return self if self.frozen else Null(self.id, True)

    def __str__(self):
        return f"_:{'f' if self.frozen else 'n'}{self.id}"


Term = Union[Constant, Variable, Null]
Substitution = Dict[Variable, Term]

_KIND_ORDER = {Constant: 0, Null: 1, Variable: 2}


def term_key(t: Term):
    """Total order on terms: constants, then nulls, then variables."""
    if isinstance(t, Null):
        return (1, "", t.id, t.frozen)
    return (_KIND_ORDER[type(t)], t.name, 0, False)


def is_ground(t: Term) -> bool:
    return not isinstance(t, Variable)


def is_rigid(t: Term) -> bool:
    """Constants and frozen nulls map only to themselves."""
    return isinstance(t, Constant) or (isinstance(t, Null) and t.frozen)


@dataclass(frozen=True, order=True)
class Atom:
    predicate: str
    args: Tuple[Term, ...] = ()

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self) -> List[Variable]:
        return [t for t in self.args if isinstance(t, Variable)]

    def nulls(self) -> List[Null]:
        return [t for t in self.args if isinstance(t, Null)]

    def sort_key(self):
        return (self.predicate, tuple(term_key(t) for t in self.args))

    def __str__(self):
        return f"{self.predicate}({','.join(map(str, self.args))})"


def atom(predicate: str, *args) -> Atom:
    """Convenience constructor: uppercase strings become variables, others constants."""
    terms = []
    for a in args:
        if isinstance(a, (Constant, Variable, Null)):
            terms.append(a)
        elif a[:1].isupper() or a[:1] == "_":
            terms.append(Variable(a))
        else:
            terms.append(Constant(a))
    return Atom(predicate, tuple(terms))


def body_variables(body: Iterable[Atom]) -> List[Variable]:
    """Distinct variables of a conjunction, in first-occurrence order."""
    seen: Dict[Variable, None] = {}
    for a in body:
        for v in a.variables():
            seen.setdefault(v, None)
    return list(seen)


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class Tgd:
    id: str
    body: Tuple[Atom, ...]
    head: Atom

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))
        if not self.body:
            raise ModelError(f"tgd {self.id}: empty body")
        for a in self.body:
            if any(isinstance(t, Null) for t in a.args):
                raise ModelError(f"tgd {self.id}: nulls are not allowed in rules")

    @property
    def body_vars(self) -> List[Variable]:
        return body_variables(self.body)

    @property
    def existential_vars(self) -> List[Variable]:
        bv = set(self.body_vars)
        return [v for v in body_variables([self.head]) if v not in bv]

    @property
    def frontier_vars(self) -> List[Variable]:
        hv = set(self.head.variables())
        return [v for v in self.body_vars if v in hv]

    def occurrences(self, v: Variable) -> int:
        return sum(1 for a in self.body for t in a.args if t == v)

    def __str__(self):
        return f"{self.head} <- {', '.join(map(str, self.body))}."


@dataclass(frozen=True)
class Egd:
    id: str
    body: Tuple[Atom, ...]
    lhs: Variable
    rhs: Variable

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))
        bv = set(body_variables(self.body))
        if self.lhs == self.rhs:
            raise ModelError(f"egd {self.id}: both sides are {self.lhs}")
        for side in (self.lhs, self.rhs):
            if side not in bv:
                raise ModelError(f"egd {self.id}: variable {side} does not occur in the body")

    def __str__(self):
        return f"{self.lhs} = {self.rhs} <- {', '.join(map(str, self.body))}."


@dataclass(frozen=True)
class NegConstraint:
    id: str
    body: Tuple[Atom, ...]

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))
        if not self.body:
            raise ModelError(f"constraint {self.id}: empty body")

    def __str__(self):
        return f"false <- {', '.join(map(str, self.body))}."


@dataclass
class Program:
    tgds: List[Tgd] = field(default_factory=list)
    egds: List[Egd] = field(default_factory=list)
    constraints: List[NegConstraint] = field(default_factory=list)
    facts: List[Atom] = field(default_factory=list)

    def __post_init__(self):
        for f in self.facts:
            if not all(isinstance(t, Constant) for t in f.args):
                raise ModelError(f"fact {f} must be ground over constants")
        # duplicate facts collapse, first occurrence wins
        self.facts = list(dict.fromkeys(self.facts))

    @property
    def idb_predicates(self) -> set:
        return {t.head.predicate for t in self.tgds}

    @property
    def edb_predicates(self) -> set:
        return set(self.schema()) - self.idb_predicates

    def rule_atoms(self) -> Iterator[Atom]:
        for t in self.tgds:
            yield from t.body
            yield t.head
        for r in (*self.egds, *self.constraints):
            yield from r.body

    def schema(self) -> Dict[str, int]:
        """Predicate -> arity over rules and facts."""
        out: Dict[str, int] = {}
        for a in (*self.rule_atoms(), *self.facts):
            out.setdefault(a.predicate, a.arity)
        return out

    def tgd(self, rule_id: str) -> Tgd:
        for t in self.tgds:
            if t.id == rule_id:
                return t
        raise KeyError(rule_id)


@dataclass(frozen=True)
class Provenance:
    rule_id: str
    trigger: Tuple[Tuple[Variable, Term], ...]
    parents: Tuple[Atom, ...]

    def substitution(self) -> Substitution:
        return dict(self.trigger)


class Instance:
    """Append-only atom store with per-predicate and per-(position, term) indexes."""

    def __init__(self, atoms: Iterable[Atom] = ()):
        self.atoms: List[Atom] = []
        self.seq: Dict[Atom, int] = {}
        self.by_pred: Dict[str, List[Atom]] = {}
        self.by_arg: Dict[Tuple[str, int, Term], List[Atom]] = {}
        self.provenance: Dict[Atom, Provenance] = {}
        self.next_null_id = 1
        for a in atoms:
            self.add(a)

    def __len__(self):
        return len(self.atoms)

    def __contains__(self, a: Atom) -> bool:
        return a in self.seq

    def __iter__(self):
        return iter(self.atoms)

    def add(self, a: Atom, provenance: Optional[Provenance] = None) -> bool:
        if a in self.seq:
            return False
        if any(isinstance(t, Variable) for t in a.args):
            raise ModelError(f"instance atoms must be ground: {a}")
        for n in a.nulls():
            self.next_null_id = max(self.next_null_id, n.id + 1)
        self.seq[a] = len(self.atoms)
        self.atoms.append(a)
        self.by_pred.setdefault(a.predicate, []).append(a)
        for i, t in enumerate(a.args):
            self.by_arg.setdefault((a.predicate, i, t), []).append(a)
        if provenance is not None:
            self.provenance[a] = provenance
        return True

    def fresh_null(self, frozen: bool = False) -> Null:
        n = Null(self.next_null_id, frozen)
        self.next_null_id += 1
        return n

    def nulls(self) -> set:
        return {n for a in self.atoms for n in a.nulls()}

    def candidates(self, pattern: Atom, fixed: Mapping[int, Term]) -> List[Atom]:
        """Atoms of pattern's predicate, narrowed by the most selective fixed argument."""
        best = self.by_pred.get(pattern.predicate, [])
        for i, t in fixed.items():
            lst = self.by_arg.get((pattern.predicate, i, t), [])
            if len(lst) < len(best):
                best = lst
            if not best:
                break
        return best

    def map_terms(self, fn) -> "Instance":
        """Copy with every term rewritten by fn; order and provenance are carried over."""
        out = Instance()
        mapping = {a: Atom(a.predicate, tuple(fn(t) for t in a.args)) for a in self.atoms}
        for a in self.atoms:
            prov = self.provenance.get(a)
            if prov is not None:
                prov = Provenance(
                    prov.rule_id,
                    tuple((v, fn(t)) for v, t in prov.trigger),
                    tuple(mapping[p] for p in prov.parents),
                )
            out.add(mapping[a], prov)
        out.next_null_id = max(out.next_null_id, self.next_null_id)
        return out

    def freeze_all(self) -> "Instance":
        return self.map_terms(lambda t: t.freeze() if isinstance(t, Null) else t)

    def children(self) -> Dict[Atom, List[Atom]]:
        kids: Dict[Atom, List[Atom]] = {a: [] for a in self.atoms}
        for a in self.atoms:
            prov = self.provenance.get(a)
            if prov:
                for p in dict.fromkeys(prov.parents):
                    kids[p].append(a)
        return kids

    def sorted_atoms(self) -> List[Atom]:
        return sorted(self.atoms, key=Atom.sort_key)


# -- substitutions -----------------------------------------------------------

def apply_term(t: Term, s: Mapping[Variable, Term]) -> Term:
    if isinstance(t, Variable):
        return s.get(t, t)
    return t


def apply_atom(a: Atom, s: Mapping[Variable, Term]) -> Atom:
    return Atom(a.predicate, tuple(apply_term(t, s) for t in a.args))


def compose(g: Mapping[Variable, Term], h: Mapping[Variable, Term]) -> Substitution:
    """The substitution g∘h: apply h first, then g."""
    out = {v: apply_term(t, g) for v, t in h.items()}
    for v, t in g.items():
        out.setdefault(v, t)
    return out


def _unify_args(pattern: Atom, target: Atom, s: Substitution) -> Optional[Substitution]:
    if pattern.predicate != target.predicate or pattern.arity != target.arity:
        return None
    out = None
    for p, t in zip(pattern.args, target.args):
        if isinstance(p, Variable):
            bound = (s if out is None else out).get(p)
            if bound is None:
                if out is None:
                    out = dict(s)
                out[p] = t
            elif bound != t:
                return None
        elif p != t:
            return None
    return out if out is not None else dict(s)


def _match(body, instance: Instance, s: Substitution, i: int, limit: int,
           delta_from: int, used_new: bool, matched: list):
    if i == len(body):
        yield s, tuple(matched)
        return
    pattern = body[i]
    fixed = {}
    for k, t in enumerate(pattern.args):
        t = apply_term(t, s)
        if not isinstance(t, Variable):
            fixed[k] = t
    last = i == len(body) - 1
    for cand in instance.candidates(pattern, fixed):
        seq = instance.seq[cand]
        if seq >= limit:
            break
        if last and not used_new and seq < delta_from:
            continue
        s2 = _unify_args(pattern, cand, s)
        if s2 is None:
            continue
        matched.append(cand)
        yield from _match(body, instance, s2, i + 1, limit, delta_from,
                          used_new or seq >= delta_from, matched)
        matched.pop()


def match_body(body, instance: Instance, fixed: Optional[Mapping[Variable, Term]] = None,
               limit: Optional[int] = None, delta_from: int = 0):
    """Yield (substitution, matched atoms) for body into instance.

    Only atoms with insertion index < limit are used; at least one matched
    atom must have index >= delta_from.
    """
    body = tuple(body)
    if limit is None:
        limit = len(instance.atoms)
    if not body:
        if delta_from <= 0:
            yield dict(fixed or {}), ()
        return
    yield from _match(body, instance, dict(fixed or {}), 0, limit, delta_from,
                      delta_from <= 0, [])


def find_homomorphisms(body, instance: Instance,
                       fixed: Optional[Mapping[Variable, Term]] = None) -> Iterator[Substitution]:
    """All h extending `fixed` with h(A) in instance for every body atom A.

    Enumeration is left-to-right over the body, atoms in insertion order.
    """
    for s, _ in match_body(body, instance, fixed):
        yield s


def is_homomorphic_to(source: Atom, target: Atom) -> bool:
    """True iff some map on the unfrozen nulls of source sends it onto target."""
    if source.predicate != target.predicate or source.arity != target.arity:
        return False
    mu: Dict[Null, Term] = {}
    for s, t in zip(source.args, target.args):
        if isinstance(s, Null) and not s.frozen:
            if mu.setdefault(s, t) != t:
                return False
        elif s != t:
            return False
    return True


def has_homomorphic_image(source: Atom, instance: Instance) -> bool:
    """Is there an atom in instance that source maps onto (unfrozen nulls and variables free)?"""
    fixed = {i: t for i, t in enumerate(source.args)
             if not isinstance(t, Variable) and is_rigid(t)}
    for cand in instance.candidates(source, fixed):
        mu: Dict[Term, Term] = {}
        ok = True
        for s, t in zip(source.args, cand.args):
            if is_rigid(s):
                if s != t:
                    ok = False
                    break
            elif mu.setdefault(s, t) != t:
                ok = False
                break
        if ok:
            return True
    return False
