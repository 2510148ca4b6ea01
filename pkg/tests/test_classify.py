import random

import pytest

from datalogpm.classify import (ClassReport, check_chase_stickiness, classify_program,
                                sticky_marking, tracked_variables)
from datalogpm.core import Constant, Program, Variable
from datalogpm.generate import random_program
from datalogpm.parser import parse_program
from datalogpm.positions import (ext_finite_positions, finite_rank_positions,
                                 no_finite_positions)

from conftest import fixture


def marks(*pairs):
    return {(r, Variable(v)) for r, v in pairs}


def test_marking_sigma1(sigma1):
    m = sticky_marking(sigma1.tgds)
    assert m.marked == marks(("r1", "X"), ("r3", "X"), ("r3", "Z"), ("r2", "X"), ("r1", "Y"))
    rounds = {item: rnd for rnd, item, _ in m.trace}
    assert rounds[("r2", Variable("X"))] == 1 and rounds[("r1", Variable("Y"))] == 2


def test_marking_sigma2(sigma2):
    assert sticky_marking(sigma2.tgds).marked == marks(("r1", "X"))


def test_marking_empty():
    assert sticky_marking([]).marked == set()


def test_marked_pairs_are_body_variables():
    rng = random.Random(7)
    for _ in range(200):
        prog = random_program(rng)
        by_id = {t.id: t for t in prog.tgds}
        for rid, v in sticky_marking(prog.tgds).marked:
            assert v in by_id[rid].body_vars


def test_classify_fixtures(sigma1, sigma2, sigma3):
    r2 = classify_program(sigma2.tgds)
    assert all(r2.as_dict()[c] for c in ("sticky", "weakly_acyclic", "jointly_acyclic",
                                          "weakly_sticky", "jointly_weakly_sticky"))
    r1 = classify_program(sigma1.tgds)
    assert not r1.sticky and r1.weakly_sticky
    assert "r1.Y" in r1.witnesses["sticky"]
    r3 = classify_program(sigma3.tgds)
    assert r3.sticky and not r3.weakly_acyclic and not r3.jointly_acyclic
    jws = classify_program(fixture("sigma_jws").tgds)
    assert jws.jointly_weakly_sticky and not jws.weakly_sticky
    assert classify_program(fixture("sigma_jws2").tgds).weakly_sticky


def test_lattice_violation_detection():
    bad = ClassReport(True, False, False, False, True)
    assert bad.lattice_violations() == ["sticky => weakly_sticky"]


def test_classify_ignores_facts():
    rng = random.Random(3)
    for _ in range(100):
        prog = random_program(rng)
        assert classify_program(prog.tgds) == classify_program(Program(prog.tgds).tgds)


def test_stickiness_witness_sigma1(sigma1):
    res = check_chase_stickiness(sigma1, no_finite_positions(), 100)
    assert res.outcome == "witness"
    w = res.witness
    assert w.value == Constant("b")
    assert w.rule_id == "r1" and w.repeated_variable == Variable("Y")
    assert str(w.escape_atom) == "doctor(c)"


def test_stickiness_passes(sigma1, sigma2):
    assert check_chase_stickiness(sigma2, no_finite_positions(), 100).outcome == "pass"
    rank = finite_rank_positions(sigma1.tgds)
    assert all(not tracked_variables(t, rank) for t in sigma1.tgds)
    assert check_chase_stickiness(sigma1, rank, 100).outcome == "pass"


def test_stickiness_inconclusive_on_budget():
    prog = parse_program("r(Y,Z) <- r(X,Y).\nr(a,b).")
    assert check_chase_stickiness(prog, no_finite_positions(), 5).outcome == "inconclusive"
    with pytest.raises(ValueError):
        check_chase_stickiness(prog, no_finite_positions(), -1)


@pytest.mark.parametrize("seed", range(3))
def test_syntactic_membership_implies_no_witness(seed):
    rng = random.Random(100 + seed)
    for _ in range(80):
        prog = random_program(rng)
        rep = classify_program(prog.tgds)
        assert not rep.lattice_violations()
        for member, fp in ((rep.sticky, no_finite_positions()),
                           (rep.weakly_sticky, finite_rank_positions(prog.tgds)),
                           (rep.jointly_weakly_sticky, ext_finite_positions(prog.tgds))):
            if member:
                assert check_chase_stickiness(prog, fp, 200).outcome != "witness"
