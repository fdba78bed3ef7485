import math
from collections import Counter

import pytest

from app.errors import GenerationError, ParamsValidationError
from app.formula import count_shapes, depth
from app.generator import FormulaGenerator, generate_batch, generate_formula, rnd_length, rnd_propnum
from app.param_spec import (
    GenParams,
    LengthSpec,
    Method,
    PropRateSpec,
    basic_to_advanced,
    normalize_spec,
    parse_spec,
)
from app.parser import print_formula
from app.rng import RandomStream, derive_seed


def within_4_sigma(count, n, expected):
    return abs(count / n - expected) <= 4 * math.sqrt(expected * (1 - expected) / n)


def test_rnd_length_point_mass():
    rng = RandomStream(1)
    C = LengthSpec(((0, 0, 1),))
    assert {rnd_length(0, C, rng) for _ in range(50)} == {3}


def test_rnd_length_by_nesting_depth():
    rng = RandomStream(2)
    C = LengthSpec(((0, 1, 1), (1, 2), (1,)))
    n = 6000
    counts = Counter(rnd_length(1, C, rng) for _ in range(n))
    assert set(counts) == {1, 2}
    assert within_4_sigma(counts[1], n, 1 / 3)


def test_rnd_propnum_all_propositional_at_deepest_level():
    rng = RandomStream(3)
    p = PropRateSpec((((), (0, 1, 0)),))
    assert rnd_propnum(0, 1, 2, p, rng) == 2
    assert rnd_propnum(1, 0, 2, p, rng) == 1


def test_generation_is_deterministic(example_params):
    first = print_formula(generate_formula(example_params))
    assert first == print_formula(generate_formula(example_params))
    assert first != print_formula(generate_formula(example_params.with_seed(12)))


def test_generated_formula_respects_params(example_params):
    for seed in range(30):
        phi = FormulaGenerator(example_params).generate(seed)
        assert phi.num_clauses == example_params.L
        assert depth(phi) <= example_params.d
        assert phi.max_prop_index <= example_params.N
        assert phi.declared_params.seed == seed


def test_generated_shapes_have_positive_weight(example_params):
    C, p = normalize_spec(example_params.C), normalize_spec(example_params.p)
    for seed in range(30):
        shapes = count_shapes(FormulaGenerator(example_params).generate(seed))
        for i, by_length in shapes.items():
            for K, by_r in by_length.items():
                assert C.at_depth(i)[K - 1] > 0
                if i < example_params.d:
                    assert all(p.weights_for(i, K)[r] > 0 for r in by_r)


def test_normalizing_specs_never_changes_output(example_params):
    normalized = GenParams(
        d=2, m=1, L=4, N=4, C=normalize_spec(example_params.C), p=normalize_spec(example_params.p), seed=11
    )
    for seed in range(10):
        assert generate_formula(example_params.with_seed(seed)) == generate_formula(normalized.with_seed(seed))


def test_old_and_new_methods_coincide_at_p_zero():
    old_specs = basic_to_advanced(3, 0, d=2, method="old")
    new_specs = basic_to_advanced(3, 0, d=2, method="new")
    assert old_specs == new_specs
    for seed in range(10):
        old = GenParams(d=2, m=1, L=6, N=4, C=old_specs[0], p=old_specs[1], method=Method.OLD, seed=seed)
        new = GenParams(d=2, m=1, L=6, N=4, C=new_specs[0], p=new_specs[1], method=Method.NEW, seed=seed)
        assert generate_formula(old) == generate_formula(new)


def test_batch_seeds_are_derived(example_params):
    batch = generate_batch(example_params, 4)
    generator = FormulaGenerator(example_params)
    assert batch == [generator.generate(derive_seed(example_params.seed, 0, i)) for i in range(4)]


def test_shape_observer_sees_every_shape_draw():
    C, p = basic_to_advanced(3, 0.5, d=1, method="new")
    gp = GenParams(d=1, m=1, L=5, N=3, C=C, p=p, seed=4)
    seen = []
    FormulaGenerator(gp, shape_observer=lambda *shape: seen.append(shape)).generate()
    top = [s for s in seen if s[0] == 0]
    assert len(top) >= 5
    assert all(rd == 1 and K == 3 and P in (1, 2) for _, rd, K, P in top)
    assert all(rd == 0 and P == K for nd, rd, K, P in seen if nd == 1)


def test_too_few_distinct_clauses_raises_generation_error():
    gp = GenParams(d=0, m=1, L=3, N=1, C=LengthSpec(((1,),)), p=PropRateSpec(()))
    with pytest.raises(GenerationError) as excinfo:
        FormulaGenerator(gp, rejection_cap=50).generate()
    assert excinfo.value.exit_code == 2


def test_too_small_atom_pool_rejected_up_front():
    gp = GenParams(d=0, m=1, L=1, N=1, C=LengthSpec(((0, 1),)), p=PropRateSpec(()))
    with pytest.raises(ParamsValidationError):
        FormulaGenerator(gp)


def _top_shape_frequencies(n):
    gp = GenParams(
        d=1, m=2, L=1, N=3,
        C=parse_spec("[[0,1,1]]", "length"),
        p=parse_spec("[[[],[0,1,0],[0,3,3,0]]]", "prop"),
    )
    shapes = []
    generator = FormulaGenerator(gp, shape_observer=lambda nd, rd, K, P: nd == 0 and shapes.append((K, P)))
    rng = RandomStream(2024)
    for _ in range(n):
        generator.rnd_clause(1, 0, rng)
    return shapes


def _assert_shape_fidelity(shapes):
    n = len(shapes)
    lengths = Counter(K for K, _ in shapes)
    assert within_4_sigma(lengths[2], n, 0.5)
    assert within_4_sigma(lengths[3], n, 0.5)
    length3 = [P for K, P in shapes if K == 3]
    props = Counter(length3)
    assert set(props) == {1, 2}
    assert within_4_sigma(props[1], len(length3), 0.5)
    assert all(P == 1 for K, P in shapes if K == 2)


def test_shape_distribution_fidelity_small():
    _assert_shape_fidelity(_top_shape_frequencies(4000))


@pytest.mark.slow
def test_shape_distribution_fidelity():
    shapes = _top_shape_frequencies(100_000)
    assert len(shapes) == 100_000
    _assert_shape_fidelity(shapes)
    lengths = Counter(K for K, _ in shapes)
    assert abs(lengths[2] / len(shapes) - 0.5) <= 0.008


def _never_propositional_above_deepest(count):
    gp = GenParams(
        d=2, m=1, L=4, N=4,
        C=parse_spec("[[0,1,1]]", "length"),
        p=parse_spec("[[[],[1,1,0],[1,1,1,0]]]", "prop"),
    )
    for phi in generate_batch(gp, count):
        for i, by_length in count_shapes(phi).items():
            if i < gp.d:
                assert all(r < K for K, by_r in by_length.items() for r in by_r)


def test_no_purely_propositional_clause_above_deepest_level():
    _never_propositional_above_deepest(200)


@pytest.mark.slow
def test_no_purely_propositional_clause_above_deepest_level_large():
    _never_propositional_above_deepest(10_000)
