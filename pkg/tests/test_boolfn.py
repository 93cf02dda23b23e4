import itertools

import pytest
from hypothesis import given, strategies as st

from andor.boolfn import (ArityError, BoolFn, compress, decode, encode, essential_vars, evaluate,
                          extend, full_mask, literal_tables, negate_vars, permute, restrict,
                          shrink, variable_orbit)


def fns(max_k=4):
    return st.integers(1, max_k).flatmap(
        lambda k: st.integers(0, full_mask(k)).map(lambda t: BoolFn(k, t)))


def test_projection_matches_definition():
    for k in range(1, 6):
        for i in range(1, k + 1):
            f = BoolFn.var(k, i)
            for bits in itertools.product((0, 1), repeat=k):
                assert evaluate(f, bits) == bits[i - 1]


def test_literal_table_order():
    k = 3
    lits = literal_tables(k)
    assert len(lits) == 6
    for r, t in enumerate(lits):
        assert t == BoolFn.var(k, r // 2 + 1, bool(r & 1)).table


def test_constants_print_as_words():
    assert str(BoolFn.true(3)) == "True"
    assert str(BoolFn.false(2)) == "False"
    assert str(BoolFn.var(2, 1)) == "2:A"


def test_encoding_examples():
    assert encode(BoolFn.var(1, 1)) == "1:2"
    assert encode(BoolFn.var(2, 1) & BoolFn.var(2, 2)) == "2:8"
    assert encode(BoolFn.var(3, 3)) == "3:0F"
    assert decode("3:0F") == BoolFn.var(3, 3)


@pytest.mark.parametrize("bad", ["2", "2:AB", "x:1", "17:0", "0:0"])
def test_decode_rejects(bad):
    with pytest.raises(ValueError):
        decode(bad)


def test_evaluate_checks_length():
    with pytest.raises(ArityError):
        evaluate(BoolFn.var(2, 1), (1,))


def test_arity_mismatch():
    with pytest.raises(ArityError):
        BoolFn.var(2, 1) & BoolFn.var(3, 1)


def test_table_range_checked():
    with pytest.raises(ValueError):
        BoolFn(1, 16)
    with pytest.raises(ArityError):
        BoolFn(17, 0)


@given(fns(5))
def test_encode_roundtrip(f):
    assert decode(encode(f)) == f


@given(fns(4))
def test_de_morgan(f):
    g = BoolFn(f.arity, (f.table * 2654435761) & full_mask(f.arity))
    assert ~(f & g) == (~f | ~g)
    assert ~~f == f


@given(fns(4), st.data())
def test_restrict_ignores_variable(f, data):
    i = data.draw(st.integers(1, f.arity))
    b = data.draw(st.integers(0, 1))
    r = restrict(f, i, b)
    assert i not in essential_vars(r)
    for bits in itertools.product((0, 1), repeat=f.arity):
        fixed = list(bits)
        fixed[i - 1] = b
        assert evaluate(r, bits) == evaluate(f, fixed)


@given(fns(3), st.integers(0, 2))
def test_extend_then_shrink(f, extra):
    k = f.arity + extra
    g = extend(f, k)
    assert shrink(g, f.arity) == f
    assert essential_vars(g) == essential_vars(f)


def test_essential_variables():
    x1, x2, x3 = (BoolFn.var(3, i) for i in (1, 2, 3))
    assert essential_vars(x1 & x3) == {1, 3}
    assert essential_vars((x1 & x2) | (x1 & ~x2)) == {1}
    assert essential_vars(BoolFn.true(3)) == frozenset()


@given(fns(4), st.data())
def test_permute_inverse(f, data):
    perm = data.draw(st.permutations(range(1, f.arity + 1)))
    inv = [0] * f.arity
    for i, p in enumerate(perm):
        inv[p - 1] = i + 1
    assert permute(permute(f, perm), inv) == f


def test_permute_renames():
    f = BoolFn.var(3, 1) & ~BoolFn.var(3, 2)
    g = permute(f, [3, 1, 2])
    assert g == BoolFn.var(3, 3) & ~BoolFn.var(3, 1)


@given(fns(4), st.data())
def test_negate_vars_involution(f, data):
    vs = data.draw(st.sets(st.integers(1, f.arity)))
    assert negate_vars(negate_vars(f, vs), vs) == f


def test_compress_keeps_order():
    f = BoolFn.var(4, 2) & ~BoolFn.var(4, 4)
    assert compress(f, [2, 4]) == BoolFn.var(2, 1) & ~BoolFn.var(2, 2)
    assert compress(f, [4, 2]) == ~BoolFn.var(2, 1) & BoolFn.var(2, 2)


def test_orbit_sizes():
    assert len(variable_orbit(BoolFn.var(3, 1))) == 3
    assert len(variable_orbit(BoolFn.var(3, 1) & ~BoolFn.var(3, 2))) == 6
    assert len(variable_orbit(BoolFn.true(3))) == 1
