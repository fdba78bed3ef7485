import math
from fractions import Fraction

import pytest

from app.errors import OracleIntractableError, WideningError
from app.formula import Formula, Prop, box, clause, neg, pos
from app.generator import FormulaGenerator
from app.param_spec import GenParams, LengthSpec, PropRateSpec, normalize_spec, parse_spec
from app.parser import parse_formula
from app.probability_oracle import (
    ProbabilityMode,
    ProbabilityOracle,
    Widening,
    check_monotonicity,
    clopper_pearson,
    enumerate_clause_distribution,
    formula_probability,
    monte_carlo_frequency,
    ordered_probability,
    sample_clause_frequencies,
)

A1, A2 = Prop(1), Prop(2)
ONE_CLAUSE = "(and (or A1 (box 1 (or A2))))"
TWO_CLAUSES = "(and (or A1 (box 1 (or A2))) (or (not A2) (not (box 1 (or A1)))))"


def propositional_params(N, C):
    return GenParams(d=0, m=1, L=1, N=N, C=LengthSpec((C,)), p=PropRateSpec(()))


def test_single_unary_clause_distribution():
    dist = enumerate_clause_distribution(0, 0, propositional_params(1, (1,)))
    assert dist.entries == {clause(pos(A1)): Fraction(1, 2), clause(neg(A1)): Fraction(1, 2)}


def test_binary_clause_distribution_folds_orderings():
    dist = enumerate_clause_distribution(0, 0, propositional_params(2, (0, 1)))
    assert len(dist) == 4
    assert set(dist.entries.values()) == {Fraction(1, 4)}
    assert dist.probability(clause(pos(A1), neg(A2))) == Fraction(1, 4)


def test_tiny_modal_distribution_sums_to_one(tiny_params):
    dist = enumerate_clause_distribution(1, 0, tiny_params)
    assert dist.total() == 1
    assert len(dist) == 4 * 8
    assert dist.probability(clause(pos(A1), pos(box(1, pos(A2))))) == Fraction(1, 32)


def test_single_clause_formula_probability(tiny_params):
    phi = parse_formula(ONE_CLAUSE)
    for mode in ProbabilityMode:
        assert formula_probability(phi, tiny_params, mode).value == Fraction(1, 32)


def test_ordered_and_set_probabilities(tiny_params):
    phi = parse_formula(TWO_CLAUSES)
    gp = tiny_params.with_clauses(2)
    oracle = ProbabilityOracle(gp)
    assert oracle.formula_probability(phi, "ordered").value == Fraction(1, 992)
    assert oracle.formula_probability(phi, "as_set").value == Fraction(1, 496)


def test_ordered_probability_redraw_until_new():
    assert ordered_probability([Fraction(1, 2), Fraction(1, 4)]) == Fraction(1, 4)
    assert ordered_probability([Fraction(1, 3)]) == Fraction(1, 3)


def test_zero_support_clause(tiny_params):
    phi = parse_formula("(and (or A1 A2))")
    result = formula_probability(phi, tiny_params)
    assert result.value == 0
    assert result.zero_support == [clause(pos(A1), pos(A2))]


def test_clause_count_mismatch_gives_zero(tiny_params):
    result = formula_probability(parse_formula(TWO_CLAUSES), tiny_params)
    assert result.value == 0
    assert "L=1" in result.note


def test_guard_refuses_large_enumeration(tiny_params):
    with pytest.raises(OracleIntractableError):
        enumerate_clause_distribution(1, 0, tiny_params, guard=10)


def test_as_set_limit(tiny_params):
    gp = tiny_params.with_clauses(2)
    with pytest.raises(OracleIntractableError):
        ProbabilityOracle(gp).formula_probability(parse_formula(TWO_CLAUSES), "as_set", max_as_set_clauses=1)


def test_monotonicity_check_on_prop_widening():
    phi = parse_formula(TWO_CLAUSES)
    report = check_monotonicity(phi, [Widening("p", ((0, 2, 0),))])
    assert report.P == Fraction(1, 496)
    assert report.positive and report.monotone
    assert 0 < report.P_widened < report.P
    assert report.premise_violations == []


def test_monotonicity_check_without_widening_is_equal():
    report = check_monotonicity(parse_formula(ONE_CLAUSE))
    assert report.P == report.P_widened == Fraction(1, 32)
    assert report.monotone


def test_length_widening_adds_prop_list_for_new_length():
    phi = parse_formula(TWO_CLAUSES)
    report = check_monotonicity(phi, [Widening("C", ((0, 1),))])
    assert report.widened_params.C.per_depth[0] == (1, 2)
    assert report.widened_params.p.weights_for(0, 1) == (1, 1)
    assert report.notes == ["added propositional-rate list [1, 1] at depth 0, length 1"]
    assert report.P == Fraction(1, 496)
    assert report.positive and report.monotone
    assert 0 < report.P_widened < report.P


def test_widening_that_stays_invalid_is_refused():
    # a length-3 clause at the deepest level needs 3 variables, N=2
    phi = parse_formula(ONE_CLAUSE)
    specs = (parse_spec("[[0,1],[1,0,0]]", "length"), parse_spec("[[[],[0,1,0]]]", "prop"))
    with pytest.raises(WideningError):
        check_monotonicity(phi, [Widening("C", ((1, 3),))], specs=specs)


def test_zero_support_clauses_are_premise_violations():
    phi = parse_formula(ONE_CLAUSE)
    specs = (parse_spec("[[0,1],[1]]", "length"), parse_spec("[[[],[0,0,1]]]", "prop"))
    report = check_monotonicity(phi, specs=specs)
    assert report.P == report.P_widened == 0
    assert not report.positive and not report.monotone
    assert len(report.premise_violations) == 2
    assert all("outside the generator's support" in v for v in report.premise_violations)


def test_explicit_depth_is_used():
    phi = parse_formula(ONE_CLAUSE)
    specs = (parse_spec("[[1,1],[1]]", "length"), parse_spec("[[[1,1],[1,1,0]]]", "prop"))
    shallow = check_monotonicity(phi, specs=specs)
    deep = check_monotonicity(phi, specs=specs, d=2)
    assert shallow.params.d == 1 and deep.params.d == 2
    assert shallow.P > 0 and deep.P > 0
    assert deep.P != shallow.P


@pytest.mark.slow
def test_top_level_length_widening_on_worked_example(formula_2, example_specs):
    C, p = (normalize_spec(s) for s in example_specs)
    report = check_monotonicity(formula_2, [Widening("C", ((0, 1),))], specs=(C, p))
    assert report.widened_params.C.per_depth[0] == (1, 1, 1)
    assert report.widened_params.p.weights_for(0, 1) == (1, 1)
    assert len(report.notes) == 1
    assert report.positive and report.monotone
    assert report.P_widened < report.P


def _random_monotonicity_checks(count):
    gp = GenParams(
        d=1, m=1, L=1, N=2,
        C=parse_spec("[[0,1],[1]]", "length"),
        p=parse_spec("[[[],[1,1,0]]]", "prop"),
    )
    checked = 0
    for seed in range(count):
        phi = FormulaGenerator(gp.with_clauses(1 + seed % 3)).generate(seed)
        report = check_monotonicity(phi, [Widening("p", ((0, 2, 2),))], N=2)
        assert report.P > 0
        assert 0 < report.P_widened <= report.P
        checked += 1
    return checked


def test_monotonicity_check_on_random_tiny_formulas():
    assert _random_monotonicity_checks(20) == 20


def test_clopper_pearson():
    assert clopper_pearson(0, 10)[0] == 0.0
    assert clopper_pearson(10, 10)[1] == 1.0
    low, high = clopper_pearson(5, 10, confidence=0.95)
    assert low == pytest.approx(0.1871, abs=1e-4)
    assert high == pytest.approx(0.8129, abs=1e-4)


def test_monte_carlo_agrees_with_exact_value(tiny_params):
    phi = parse_formula(ONE_CLAUSE)
    n = 4000
    mc = monte_carlo_frequency(phi, tiny_params, n, master_seed=5)
    exact = 1 / 32
    assert abs(mc.frequency - exact) <= 4 * math.sqrt(exact * (1 - exact) / n)
    assert mc.ci_low <= mc.frequency <= mc.ci_high


@pytest.mark.slow
def test_clause_frequencies_match_enumeration(tiny_params):
    dist = enumerate_clause_distribution(1, 0, tiny_params)
    n = 1_000_000
    counts = sample_clause_frequencies(tiny_params, 1, 0, n, master_seed=17)
    selected = sorted(dist.entries, key=lambda c: c.key)[:12]
    for c in selected:
        q = float(dist.probability(c))
        assert abs(counts[c] / n - q) <= 4 * math.sqrt(q * (1 - q) / n)
    assert set(counts) <= set(dist.entries)
