import pytest

from app.errors import FormulaSyntaxError, RepeatedAtomError, RepeatedClauseError
from app.formula import Prop, box, clause, neg, pos
from app.generator import generate_batch
from app.param_spec import GenParams, basic_to_advanced
from app.parser import parse_formula, parse_formulas, print_formula
from tests.conftest import FORMULA_2


def test_print_parse_round_trip(formula_2):
    text = print_formula(formula_2)
    assert parse_formula(text) == formula_2
    assert print_formula(parse_formula(text)) == text


def test_round_trip_on_generated_formulas(example_params):
    C, p = basic_to_advanced(3, 0.5, d=2)
    batches = [
        generate_batch(example_params, 20),
        generate_batch(GenParams(d=2, m=2, L=8, N=5, C=C, p=p, seed=5), 20),
    ]
    for phi in (f for batch in batches for f in batch):
        text = print_formula(phi)
        assert parse_formula(text) == phi
        assert print_formula(parse_formula(text)) == text


def test_printer_format():
    phi = parse_formula("(and (or (not (box 1 (or A2))) A1))")
    assert print_formula(phi) == "(and (or A1 (not (box 1 (or A2)))))"
    assert not print_formula(phi).endswith("\n")


def test_parse_builds_expected_structure():
    phi = parse_formula("(and (or A1 (box 2 (or (not A3)))) (or (not A2)))")
    assert phi.clauses == (
        clause(pos(Prop(1)), pos(box(2, neg(Prop(3))))),
        clause(neg(Prop(2))),
    )


def test_parse_accepts_free_whitespace():
    phi = parse_formula("(and\n  (or   A1\tA2)\n)")
    assert phi.clauses == (clause(pos(Prop(1)), pos(Prop(2))),)


def test_parse_several_formulas(formula_2):
    formulas = parse_formulas(FORMULA_2 + "\n(and (or A1))\n")
    assert len(formulas) == 2
    assert formulas[0] == formula_2


def test_syntax_error_position():
    with pytest.raises(FormulaSyntaxError) as excinfo:
        parse_formula("(and (or A0))")
    assert (excinfo.value.line, excinfo.value.column) == (1, 10)


def test_unbalanced_input():
    with pytest.raises(FormulaSyntaxError):
        parse_formula("(and (or A1)")


def test_repeated_atom_reports_clause_position():
    with pytest.raises(RepeatedAtomError) as excinfo:
        parse_formula("(and (or A1)\n  (or A1 (not A1)))")
    assert "line 2, column 3" in str(excinfo.value)


def test_repeated_clause_rejected():
    with pytest.raises(RepeatedClauseError):
        parse_formula("(and (or A1 A2) (or A2 A1))")


def test_single_formula_expected():
    with pytest.raises(FormulaSyntaxError):
        parse_formula("(and (or A1)) (and (or A2))")
