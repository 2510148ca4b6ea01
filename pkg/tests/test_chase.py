import random

import pytest

from datalogpm.chase import (ChaseConfig, descendants, explain, pchase_step_applicable,
                             run_chase, run_parsimonious_chase, run_standard_chase)
from datalogpm.core import Atom, Constant, Instance, Null, Variable, atom, has_homomorphic_image
from datalogpm.generate import random_ja_program, random_program
from datalogpm.parser import parse_program, render
from datalogpm.positions import (FinitePositionSet, Position, ext_finite_positions, finite_rank_positions,
                                 no_finite_positions, program_positions)

from conftest import fixture

a, b = Constant("a"), Constant("b")


def derived(res, prog):
    return [str(x) for x in res.instance.atoms[len(prog.facts):]]


def test_standard_chase_sigma1(sigma1):
    res = run_standard_chase(sigma1, ChaseConfig(max_steps=100))
    assert res.terminated
    assert derived(res, sigma1) == ["nurse(b,c)", "specialist(b,c,_:n1)", "doctor(c)"]
    prov = res.instance.provenance[atom("doctor", "c")]
    assert prov.rule_id == "r3"


def test_standard_chase_recursive_hits_budget(sigma3):
    res = run_standard_chase(sigma3, ChaseConfig(max_steps=3))
    assert not res.terminated and res.steps_applied == 3
    assert derived(res, sigma3) == ["r(b,_:n1)", "r(_:n1,_:n2)", "r(_:n2,_:n3)"]


def test_no_rules():
    prog = parse_program("p(a).\nq(b).")
    res = run_standard_chase(prog)
    assert res.terminated and res.steps_applied == 0 and len(res.instance) == 2


def test_config_validation():
    with pytest.raises(ValueError):
        ChaseConfig(engine="oblivious")
    with pytest.raises(ValueError):
        ChaseConfig(resumptions=-1)


def test_pchase_applicability():
    prog = parse_program("r(Y,Z) <- r(X,Y).")
    t = prog.tgds[0]
    X, Y = Variable("X"), Variable("Y")
    n1 = Null(1)
    inst = Instance([atom("r", "a", "b"), Atom("r", (b, n1))])
    assert not pchase_step_applicable(t, {X: b, Y: n1}, inst)
    frozen = Instance([atom("r", "a", "b"), Atom("r", (b, n1.freeze()))])
    assert pchase_step_applicable(t, {X: b, Y: n1.freeze()}, frozen)
    # head already present
    inst2 = Instance([atom("r", "a", "b"), atom("r", "b", "c")])
    assert not pchase_step_applicable(parse_program("r(Y,c) <- r(X,Y).").tgds[0],
                                      {X: a, Y: b}, inst2)


def test_pchase_recursive_and_resumption(sigma3):
    none = no_finite_positions()
    res = run_parsimonious_chase(sigma3, ChaseConfig("parsimonious", none))
    assert res.terminated and render(res.instance) == "r(a,b).\nr(b,_:n1)."
    res = run_parsimonious_chase(sigma3, ChaseConfig("parsimonious", none, resumptions=1))
    assert render(res.instance) == "r(a,b).\nr(b,_:f1).\nr(_:f1,_:n2)."
    assert res.resumptions_used == 1 and res.frozen_null_count == 1


def test_pchase_sigma1_freezes_on_creation(sigma1):
    rank = finite_rank_positions(sigma1.tgds)
    res = run_parsimonious_chase(sigma1, ChaseConfig("parsimonious", rank))
    assert derived(res, sigma1) == ["nurse(b,c)", "specialist(b,c,_:f1)", "doctor(c)"]
    assert res.frozen_null_count == 1


def test_null_frozen_if_any_position_finite():
    prog = parse_program("p(Z,Z) <- q(X).\nq(a).")
    only_second = FinitePositionSet({Position("p", 2)}, "user")
    res = run_parsimonious_chase(prog, ChaseConfig("parsimonious", only_second))
    assert res.instance.atoms[-1].args == (Null(1, True), Null(1, True))


def test_determinism():
    for name in ("sigma1", "sigma3", "sigma_jws"):
        prog = fixture(name)
        cfg = ChaseConfig("parsimonious", ext_finite_positions(prog.tgds), 500, 2)
        outs = {render(run_chase(prog, cfg).instance) for _ in range(3)}
        assert len(outs) == 1


def test_explain_tree(sigma1):
    text = explain(run_standard_chase(sigma1).instance)
    assert "    specialist(b,c,_:n1)   [r2]" in text.splitlines()


def test_descendants(sigma1):
    inst = run_standard_chase(sigma1).instance
    assert [str(x) for x in descendants(inst, atom("assist", "a", "b"))] == \
        ["nurse(b,c)", "specialist(b,c,_:n1)", "doctor(c)"]


def test_jws_fixtures_terminate():
    for name in ("sigma_jws", "sigma_jws2", "sigma1", "sigma2"):
        prog = fixture(name)
        res = run_parsimonious_chase(prog, ChaseConfig(
            "parsimonious", ext_finite_positions(prog.tgds), resumptions=3))
        assert res.terminated


@pytest.mark.parametrize("seed", range(3))
def test_pchase_sound_against_standard(seed):
    rng = random.Random(seed)
    for _ in range(60):
        prog = random_ja_program(rng)
        std = run_standard_chase(prog, ChaseConfig(max_steps=5000))
        if not std.terminated:
            continue
        p = run_parsimonious_chase(prog, ChaseConfig(
            "parsimonious", ext_finite_positions(prog.tgds), 5000, resumptions=3))
        thawed = Instance(std.instance.atoms)
        for x in p.instance:
            unfrozen = Atom(x.predicate, tuple(Null(t.id) if isinstance(t, Null) else t
                                               for t in x.args))
            assert has_homomorphic_image(unfrozen, thawed)


@pytest.mark.parametrize("seed", range(3))
def test_larger_finite_set_only_adds_atoms(seed):
    rng = random.Random(50 + seed)
    for _ in range(60):
        prog = random_program(rng)
        small = run_parsimonious_chase(prog, ChaseConfig("parsimonious", no_finite_positions(), 300))
        big = run_parsimonious_chase(prog, ChaseConfig(
            "parsimonious", ext_finite_positions(prog.tgds), 300))
        if not (small.terminated and big.terminated):
            continue
        strip = lambda inst: {Atom(x.predicate, tuple(Null(t.id) if isinstance(t, Null) else t
                                                      for t in x.args)) for x in inst}
        big_atoms = Instance(sorted(strip(big.instance), key=Atom.sort_key))
        for x in strip(small.instance):
            assert has_homomorphic_image(x, big_atoms)
