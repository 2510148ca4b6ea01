"""Random small programs and queries for property tests and `selftest`."""
from __future__ import annotations

import random
from typing import List, Optional

from .core import Atom, Constant, Program, Tgd, Variable
from .positions import build_edg
from .qa import Query


def random_schema(rng: random.Random, max_preds: int = 4, max_arity: int = 3) -> dict:
    n = rng.randint(1, max_preds)
    return {f"p{i}": rng.randint(1, max_arity) for i in range(n)}


def random_tgd(rng: random.Random, rule_id: str, schema: dict, max_body: int = 3,
               n_vars: int = 4, p_existential: float = 0.3) -> Tgd:
    preds = sorted(schema)
    pool = [Variable(f"X{i}") for i in range(n_vars)]
    body = []
    for _ in range(rng.randint(1, max_body)):
        p = rng.choice(preds)
        body.append(Atom(p, tuple(rng.choice(pool) for _ in range(schema[p]))))
    bvars = sorted({v for a in body for v in a.variables()}, key=lambda v: v.name)
    hp = rng.choice(preds)
    head_args = []
    n_ex = 0
    for _ in range(schema[hp]):
        if rng.random() < p_existential:
            # occasionally reuse an existential variable within the head
            if n_ex and rng.random() < 0.2:
                head_args.append(Variable(f"Z{rng.randrange(n_ex)}"))
            else:
                head_args.append(Variable(f"Z{n_ex}"))
                n_ex += 1
        else:
            head_args.append(rng.choice(bvars))
    return Tgd(rule_id, tuple(body), Atom(hp, tuple(head_args)))


def random_facts(rng: random.Random, schema: dict, max_facts: int = 10,
                 n_consts: int = 4) -> List[Atom]:
    consts = [Constant(f"c{i}") for i in range(n_consts)]
    preds = sorted(schema)
    out = []
    for _ in range(rng.randint(0, max_facts)):
        p = rng.choice(preds)
        out.append(Atom(p, tuple(rng.choice(consts) for _ in range(schema[p]))))
    return out


def random_program(rng: random.Random, max_rules: int = 6, max_preds: int = 4,
                   max_arity: int = 3, max_facts: int = 10,
                   p_existential: float = 0.3) -> Program:
    schema = random_schema(rng, max_preds, max_arity)
    tgds = [random_tgd(rng, f"r{i + 1}", schema, p_existential=p_existential)
            for i in range(rng.randint(1, max_rules))]
    return Program(tgds, facts=random_facts(rng, schema, max_facts))


def random_ja_program(rng: random.Random, attempts: int = 1000, **kw) -> Program:
    for _ in range(attempts):
        prog = random_program(rng, **kw)
        if build_edg(prog.tgds).is_acyclic():
            return prog
    raise RuntimeError("no jointly-acyclic program found")


def random_query(rng: random.Random, program: Program, max_atoms: int = 3,
                 p_constant: float = 0.15, n_vars: int = 4) -> Query:
    schema = program.schema()
    preds = sorted(schema)
    consts = sorted({t for f in program.facts for t in f.args}, key=lambda c: c.name)
    pool = [Variable(f"Q{i}") for i in range(n_vars)]
    body = []
    for _ in range(rng.randint(1, max_atoms)):
        p = rng.choice(preds)
        args = []
        for _ in range(schema[p]):
            if consts and rng.random() < p_constant:
                args.append(rng.choice(consts))
            else:
                args.append(rng.choice(pool))
        body.append(Atom(p, tuple(args)))
    bvars = sorted({v for a in body for v in a.variables()}, key=lambda v: v.name)
    k = rng.randint(0, len(bvars))
    answer = sorted(rng.sample(bvars, k), key=lambda v: v.name)
    return Query(tuple(answer), tuple(body))


def seeded(seed: Optional[int]) -> random.Random:
    return random.Random(seed)
