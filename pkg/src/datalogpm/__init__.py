"""Datalog+/- reasoning: stickiness classes, parsimonious-chase query answering
parameterized by a finite-position set, and magic-sets rewriting."""

from .core import (Atom, Constant, Egd, Instance, NegConstraint, Null, Program, Tgd, Variable,
                   find_homomorphisms, is_homomorphic_to)
from .parser import parse_program, parse_query, render
from .positions import (FinitePositionSet, Position, ext_finite_positions,
                        finite_rank_positions, no_finite_positions)
from .classify import ClassReport, check_chase_stickiness, classify_program, sticky_marking
from .chase import ChaseConfig, ChaseResult, run_parsimonious_chase, run_standard_chase
from .qa import AnswerSet, Query, answer_query, check_constraints, extract_answers
from .magic import magic_rewrite, verify_closure

__version__ = "0.1.0"
