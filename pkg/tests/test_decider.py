from itertools import combinations

import pytest

from app import decider
from app.decider import (
    AbstractionMap,
    Status,
    bounded_model_oracle,
    dpll_sat,
    is_trivially_satisfiable,
    is_trivially_unsatisfiable,
    k_satisfiable,
)
from app.errors import BoundedOracleGuardError
from app.formula import Box, Formula, Literal, Prop, box, clause, neg, pos
from app.generator import generate_batch
from app.param_spec import GenParams, parse_spec
from app.parser import parse_formula

A1, A2 = Prop(1), Prop(2)


def test_dpll_enumerates_each_model_once():
    models = []
    assert dpll_sat([[1, 2]], num_vars=2, on_model=lambda m: models.append(tuple(sorted(m.items()))) and False)
    assert sorted(models) == [
        ((1, False), (2, True)),
        ((1, True), (2, False)),
        ((1, True), (2, True)),
    ]


def test_dpll_unsat_and_empty():
    assert not dpll_sat([[1], [-1]])
    assert dpll_sat([])


def test_dpll_stops_when_callback_returns_true():
    calls = []
    assert dpll_sat([[1, 2, 3]], num_vars=3, on_model=lambda m: calls.append(m) or True)
    assert len(calls) == 1


def test_abstraction_map_shares_variables_per_atom():
    b = box(1, pos(A1))
    abstraction = AbstractionMap([clause(pos(A1), pos(b)), clause(neg(b))])
    assert abstraction.num_vars == 2
    assert abstraction.clauses == [[1, 2], [-2]]
    assert abstraction.atom_of[2] == b


def test_triviality_examples():
    assert is_trivially_satisfiable(parse_formula("(and (or A1 (box 1 (or A2))))"))
    unsat = parse_formula("(and (or (box 1 (or A1))) (or (not (box 1 (or A1)))))")
    assert is_trivially_unsatisfiable(unsat)
    assert not is_trivially_satisfiable(unsat)


def test_k_satisfiable_reports_trivial_unsat():
    outcome = k_satisfiable(parse_formula("(and (or A1) (or (not A1)))"), timeout=5)
    assert outcome.status is Status.UNSAT
    assert outcome.trivially_unsat and not outcome.trivially_sat
    assert outcome.to_line().startswith("unsat trivially_sat=false trivially_unsat=true elapsed_ms=")


def test_modal_unsat_that_is_not_trivial():
    phi = parse_formula("(and (or (not (box 1 (or A1 A2)))) (or (box 1 (or A1))))")
    outcome = k_satisfiable(phi, timeout=5)
    assert outcome.status is Status.UNSAT
    assert not outcome.trivially_unsat and not outcome.trivially_sat
    assert outcome.stats.successor_checks >= 1


def test_boxes_of_different_index_do_not_interact():
    phi = parse_formula("(and (or (not (box 1 (or A1)))) (or (box 2 (or A1))))")
    assert k_satisfiable(phi, timeout=5).status is Status.SAT


def test_diamond_with_compatible_box_is_sat():
    phi = parse_formula("(and (or (not (box 1 (or A1)))) (or (box 1 (or (not A1)))))")
    assert k_satisfiable(phi, timeout=5).status is Status.SAT
    assert bounded_model_oracle(phi)


def test_depth_two_unsat():
    phi = parse_formula(
        "(and (or (not (box 1 (or (box 1 (or A1)))))) (or (box 1 (or A2 (box 1 (or A1))))) "
        "(or (box 1 (or (not A2)))))"
    )
    assert k_satisfiable(phi, timeout=5).status is Status.UNSAT
    assert bounded_status(phi) is Status.UNSAT


def bounded_status(phi):
    return Status.SAT if bounded_model_oracle(phi) else Status.UNSAT


class _SteppingClock:
    """Each reading is one second after the previous one."""

    def __init__(self):
        self.now = 0.0

    def monotonic(self):
        self.now += 1.0
        return self.now


def test_timeout_is_reported_not_raised(monkeypatch):
    monkeypatch.setattr(decider, "time", _SteppingClock())
    outcome = k_satisfiable(parse_formula("(and (or A1 A2) (or (not A1) A2))"), timeout=0.5)
    assert outcome.status is Status.TIMEOUT
    assert not outcome.trivially_sat and not outcome.trivially_unsat


def test_bounded_oracle_guard():
    phi = parse_formula("(and (or A4))")
    with pytest.raises(BoundedOracleGuardError):
        bounded_model_oracle(phi, max_vars=3)


def _tiny_space():
    """Every formula with d <= 1, N = 2, m = 1, clause length <= 2."""
    bodies = [clause(pos(a)) for a in (A1, A2)] + [clause(neg(a)) for a in (A1, A2)]
    bodies += [clause(Literal(A1, s1), Literal(A2, s2)) for s1 in (True, False) for s2 in (True, False)]
    atoms = [A1, A2] + [Box(1, b) for b in bodies]
    literals = [Literal(a, s) for a in atoms for s in (True, False)]
    clauses = [clause(lit) for lit in literals]
    clauses += [clause(a, b) for a, b in combinations(literals, 2) if a.atom != b.atom]
    return clauses


def test_decider_matches_bounded_oracle_on_single_clauses():
    for c in _tiny_space():
        phi = Formula((c,))
        assert k_satisfiable(phi, timeout=10).status is bounded_status(phi), str(phi)


def test_decider_matches_bounded_oracle_on_clause_pairs_sample():
    clauses = _tiny_space()
    for i, (a, b) in enumerate(combinations(clauses, 2)):
        if i % 97:
            continue
        phi = Formula((a, b))
        assert k_satisfiable(phi, timeout=10).status is bounded_status(phi), str(phi)


@pytest.mark.slow
def test_decider_matches_bounded_oracle_on_all_clause_pairs():
    for a, b in combinations(_tiny_space(), 2):
        phi = Formula((a, b))
        assert k_satisfiable(phi, timeout=10).status is bounded_status(phi), str(phi)


def _random_agreement(count, L):
    gp = GenParams(
        d=1, m=2, L=L, N=3,
        C=parse_spec("[[0,1],[1]]", "length"),
        p=parse_spec("[[[],[1,1,0]]]", "prop"),
        seed=99,
    )
    for phi in generate_batch(gp, count):
        assert k_satisfiable(phi, timeout=10).status is bounded_status(phi), str(phi)


def test_decider_matches_bounded_oracle_on_random_formulas():
    _random_agreement(50, L=2)


@pytest.mark.slow
def test_decider_matches_bounded_oracle_on_many_random_formulas():
    _random_agreement(1000, L=3)


def _never_both_trivial(count):
    gp = GenParams(
        d=1, m=1, L=6, N=3,
        C=parse_spec("[[0,1,1],[1]]", "length"),
        p=parse_spec("[[[],[1,1,1],[1,1,1,1]]]", "prop"),
        seed=7,
    )
    for phi in generate_batch(gp, count):
        outcome = k_satisfiable(phi, timeout=10)
        assert not (outcome.trivially_sat and outcome.trivially_unsat)
        assert not (is_trivially_satisfiable(phi) and is_trivially_unsatisfiable(phi))


def test_triviality_flags_exclusive():
    _never_both_trivial(300)


@pytest.mark.slow
def test_triviality_flags_exclusive_large():
    _never_both_trivial(10_000)
