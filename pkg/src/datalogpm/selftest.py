"""Randomized property sweep behind the hidden `selftest` subcommand."""
from __future__ import annotations

import random

from .chase import ChaseConfig, run_standard_chase
from .classify import check_chase_stickiness, classify_program
from .generate import random_ja_program, random_program, random_query
from .magic import magic_rewrite, verify_closure
from .positions import ext_finite_positions, finite_rank_positions, no_finite_positions
from .qa import answer_query, extract_answers


def run_selftest(seed: int = 0, count: int = 200) -> dict:
    rng = random.Random(seed)
    fails = {"lattice": 0, "rank_in_ext": 0, "semantic": 0, "oracle": 0, "magic": 0}
    for _ in range(count):
        prog = random_program(rng)
        rep = classify_program(prog.tgds)
        rank = finite_rank_positions(prog.tgds)
        ext = ext_finite_positions(prog.tgds)
        fails["lattice"] += bool(rep.lattice_violations())
        fails["rank_in_ext"] += not rank.positions <= ext.positions
        for member, fp in ((rep.sticky, no_finite_positions()), (rep.weakly_sticky, rank),
                           (rep.jointly_weakly_sticky, ext)):
            if member and check_chase_stickiness(prog, fp, 200).outcome == "witness":
                fails["semantic"] += 1

        ja = random_ja_program(rng)
        q = random_query(rng, ja)
        std = run_standard_chase(ja, ChaseConfig(max_steps=20_000))
        if std.terminated:
            expected = extract_answers(std.instance, q).tuples
            fails["oracle"] += answer_query(ja, q, ext_finite_positions(ja.tgds)).tuples != expected
            closure = verify_closure(ja, magic_rewrite(ja, q))
            fails["magic"] += not closure.closed or closure.answers.tuples != expected
    return {"seed": seed, "count": count, "failures": sum(fails.values()), **fails}
