"""Shared fixtures: the worked example formula and its parameter specs."""

import pytest

from app.config import get_settings
from app.param_spec import GenParams, LengthSpec, PropRateSpec, parse_spec
from app.parser import parse_formula

FORMULA_2 = (
    "(and (or (not A3) (box 1 (or (not A4) (not (box 1 (or A1))))) (box 1 (or (not A1) (not (box 1 (or A2))))))"
    " (or (not A1) (box 1 (or A3 (not (box 1 (or A2))))) (not (box 1 (or (box 1 (or (not A4)))))))"
    " (or (not A4) (not (box 1 (or A2 (box 1 (or (not A1)))))))"
    " (or A1 (not (box 1 (or (not (box 1 (or A4))))))))"
)

EXAMPLE_C = "[[0,2,2],[2,4],[6]]"
EXAMPLE_P = "[[[],[0,2,0],[0,2,0,0]],[[2,0],[0,4,0]]]"


@pytest.fixture(autouse=True)
def fresh_settings():
    """Each test sees settings built from its own environment."""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def formula_2():
    return parse_formula(FORMULA_2)


@pytest.fixture
def example_specs():
    return parse_spec(EXAMPLE_C, "length"), parse_spec(EXAMPLE_P, "prop")


@pytest.fixture
def example_params(example_specs):
    C, p = example_specs
    return GenParams(d=2, m=1, L=4, N=4, C=C, p=p, seed=11)


@pytest.fixture
def tiny_params():
    """d=1, m=1, N=2: binary top clauses (one prop, one box), unary propositional bodies."""
    return GenParams(
        d=1, m=1, L=1, N=2,
        C=LengthSpec(((0, 1), (1,))),
        p=PropRateSpec((((), (0, 1, 0)),)),
    )
