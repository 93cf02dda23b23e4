import random

from hypothesis import given, settings, strategies as st

from andor.exprtree import AND, OR, Gate, Literal, eval_tree, parse, size
from andor.rng import StreamFactory
from andor.treegen import CATALAN, GWSpine, make_finite
from andor.trimming import LabelledTreeModel, lazy_trim, report, repetitions, trim, trim_size
from test_exprtree import labelled


def test_trim_example():
    # the OR child needs x1 false, its parent AND needs x1 true
    t = parse("(x1&(x1|x2))")
    tt = trim(t)
    assert tt.tree == Gate(AND, (Literal(1), Gate(OR, ())))
    assert trim_size(tt) == 1
    assert tt.cut_nodes == 2
    assert tt.function(2) == eval_tree(t, 2)


def test_trim_keeps_consistent_trees():
    for text in ("((x1|x2)&(x3|x4))", "(x1&(~x1|x2))"):
        t = parse(text)
        assert trim(t).tree == t
        assert trim(t).cut_nodes == 0


def test_and_gate_leaf_is_false():
    t = parse("(~x1|(~x1&x2))")
    tt = trim(t)
    assert tt.tree == Gate(OR, (Literal(1, True), Gate(AND, ())))
    assert tt.function(2) == eval_tree(t, 2)


@given(labelled(3))
def test_trim_preserves_function(t):
    tt = trim(t)
    assert tt.function(3) == eval_tree(t, 3)
    assert trim_size(tt) <= size(t)
    assert repetitions(tt) <= repetitions(t)


@given(labelled(2))
def test_trim_is_idempotent(t):
    once = trim(t).tree
    assert trim(once).tree == once


@settings(max_examples=60)
@given(labelled(3))
def test_lazy_trim_matches_trim(t):
    res = lazy_trim(LabelledTreeModel(t), 3, random.Random(0), keep_tree=True)
    tt = trim(t)
    assert res.trim_size == trim_size(tt)
    assert res.repetitions == repetitions(tt)
    assert eval_tree(res.tree, 3) == eval_tree(t, 3)


def test_report_fields():
    r = report(parse("(x1&(x1|x2))"))
    assert r == {"input_size": 3, "trim_size": 1, "repetitions_before": 1,
                 "repetitions_after": 0, "cut_nodes": 2, "function": "2:A"}


def test_lazy_trim_on_spine_closes():
    fac = StreamFactory("spine-trim")
    sp = GWSpine(CATALAN)
    for i in range(200):
        res = lazy_trim(sp, 3, fac(i), keep_tree=True)
        assert not res.truncated
        assert res.depth >= 1
        assert size(res.tree) == res.trim_size


def test_lazy_trim_finite_random_model():
    fac = StreamFactory("finite-trim")
    m = make_finite("catalan", n=40)
    for i in range(100):
        res = lazy_trim(m, 4, fac(i))
        assert 1 <= res.trim_size <= 40
        assert 0 <= res.repetitions < res.trim_size
