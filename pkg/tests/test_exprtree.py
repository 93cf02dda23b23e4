import random

import pytest
from hypothesis import given, settings, strategies as st

from andor.boolfn import BoolFn, full_mask
from andor.exprtree import (AND, LEAF, OR, EvalArityError, Gate, Literal, ParseError,
                            all_labellings, dual, eval_brute, eval_table, eval_tree, height,
                            literals, n_internal, n_nodes, parse, parse_shape, random_labelling,
                            root_split, saturation_level, serialize, shape_of, shape_to_text,
                            size, truncate, validate_shape)


def shapes(max_leaves=12):
    """Plane trees without unary nodes."""
    return st.recursive(st.just(LEAF), lambda kids: st.lists(kids, min_size=2, max_size=3).map(tuple),
                        max_leaves=max_leaves)


def labelled(k=3):
    lit = st.builds(Literal, st.integers(1, k), st.booleans())
    return st.recursive(lit, lambda kids: st.builds(Gate, st.sampled_from([AND, OR]),
                                                    st.lists(kids, min_size=2, max_size=3).map(tuple)),
                        max_leaves=10)


def test_parse_simple():
    t = parse("((x1 & x2) | ~x3)")
    assert t == Gate(OR, (Gate(AND, (Literal(1), Literal(2))), Literal(3, True)))
    assert serialize(t) == "((x1&x2)|~x3)"


def test_parse_single_literal_and_flat_groups():
    assert parse("x12") == Literal(12)
    assert parse("(x1|x2|x3)") == Gate(OR, (Literal(1), Literal(2), Literal(3)))


@pytest.mark.parametrize("text, message, pos", [
    ("(x1)", "unary group", 0),
    ("(x1&x2|x3)", "mixed operators in one group", 6),
    ("x01", "variable index with leading zero", 1),
    ("(x1&x2", "unclosed group", 0),
    ("x1 x2", "trailing characters", 3),
    ("(&x1)", "expected literal", 1),
    ("", "unexpected end of input", 0),
    ("T(x1)", "malformed constant marker", 0),
])
def test_parse_errors(text, message, pos):
    with pytest.raises(ParseError) as exc:
        parse(text)
    assert exc.value.message == message
    assert exc.value.pos == pos
    assert f"position {pos}" in str(exc.value)


def test_gate_leaves_roundtrip():
    t = parse("(x1&T()&(x2|F()))")
    assert serialize(t) == "(x1&T()&(x2|F()))"
    assert eval_table(t, 2) == eval_table(parse("(x1&x2)"), 2)
    assert eval_table(Gate(AND, ()), 2) == 0
    assert eval_table(Gate(OR, ()), 2) == full_mask(2)


@given(labelled())
def test_serialize_parse_roundtrip(t):
    assert parse(serialize(t)) == t


@given(labelled())
def test_eval_matches_brute_force(t):
    assert eval_tree(t, 3) == eval_brute(t, 3)


@given(labelled())
def test_dual_negates(t):
    assert eval_tree(dual(t), 3) == ~eval_tree(t, 3)


def test_eval_arity_error():
    with pytest.raises(EvalArityError):
        eval_table(parse("(x1&x4)"), 3)


def test_metrics():
    t = ((LEAF, LEAF), LEAF, (LEAF, (LEAF, LEAF)))
    assert size(t) == 6
    assert n_nodes(t) == 10
    assert n_internal(t) == 4
    assert height(t) == 3
    assert saturation_level(t) == 1
    assert root_split(t) == (2, 1, 3)
    assert truncate(t, 1) == (LEAF, LEAF, LEAF)
    assert truncate(t, 2) == ((LEAF, LEAF), LEAF, (LEAF, LEAF))
    assert truncate(t, 5) == t


def test_validate_shape():
    validate_shape(((LEAF, LEAF), LEAF))
    with pytest.raises(ValueError):
        validate_shape(((LEAF,), LEAF))


@given(shapes())
def test_shape_text_roundtrip(t):
    assert parse_shape(shape_to_text(t)) == t


@given(shapes(), st.integers(1, 4), st.integers(0, 2**32))
def test_random_labelling_keeps_shape(t, k, seed):
    lab = random_labelling(t, k, random.Random(seed))
    assert shape_of(lab) == t
    assert all(1 <= lit.var <= k for lit in literals(lab))


def test_random_labelling_literals_uniform():
    rng = random.Random(1)
    counts = {}
    n = 40000
    for _ in range(n):
        lit = random_labelling(LEAF, 2, rng)
        counts[lit] = counts.get(lit, 0) + 1
    assert len(counts) == 4
    for c in counts.values():
        assert abs(c / n - 0.25) < 4 * (0.25 * 0.75 / n) ** 0.5


def test_all_labellings_count():
    t = (LEAF, (LEAF, LEAF))
    assert len(list(all_labellings(t, 2))) == 2 ** 2 * 4 ** 3


def test_deep_trees_need_no_recursion():
    depth = 20000
    t = LEAF
    for _ in range(depth):
        t = (t, LEAF)
    lab = random_labelling(t, 2, random.Random(0))
    assert height(t) == depth
    text = serialize(lab)
    assert serialize(parse(text)) == text
    assert serialize(dual(dual(lab))) == text
    eval_table(lab, 2)
    assert shape_to_text(shape_of(lab)) == shape_to_text(t)


@settings(max_examples=50)
@given(labelled(2))
def test_tree_function_is_bool_fn(t):
    f = eval_tree(t, 2)
    assert isinstance(f, BoolFn) and f.arity == 2
