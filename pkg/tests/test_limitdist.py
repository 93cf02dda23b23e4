import itertools
import json
import math
import pickle
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from andor.boolfn import BoolFn, negate_vars, permute
from andor.complexity import enumerate_shapes
from andor.exprtree import AND, LEAF, OR, Gate, all_labellings, eval_table, random_labelling
from andor.limitdist import (NOT_STABILIZED, REFUTED, CostGuardError, Evaluator, eval_spine,
                             exact_dist, fit_loglog, forest_stats, labelling_count, mc_dist,
                             mc_indicator, pair_prob, pair_prob_from_dist, pair_statistics,
                             repetition_bound_check, sandwich_report, scaling_exponent,
                             u_sequence)
from andor.rng import StreamFactory
from andor.treegen import CATALAN, GWSpine, NodeCapExceeded, make_spine, spine_generator
from andor.trimming import lazy_trim

CHERRY = (LEAF, LEAF)


def brute_dist(t, k):
    c = Counter(eval_table(tree, k) for tree in all_labellings(t, k))
    return dict(c)


def z_score(p_hat, p, n):
    return abs(p_hat - p) / math.sqrt(p * (1 - p) / n)


# ---------------------------------------------------------------- exact distributions

def test_single_leaf():
    d = exact_dist(LEAF, 3)
    assert d.trials == 6
    for f in d.functions():
        assert d.prob(f) == Fraction(1, 6)


def test_cherry_k1():
    d = exact_dist(CHERRY, 1)
    x, nx = BoolFn.var(1, 1), ~BoolFn.var(1, 1)
    assert d.trials == 8
    assert d.prob(x) == d.prob(nx) == Fraction(1, 4)
    assert d.prob(BoolFn.true(1)) == d.prob(BoolFn.false(1)) == Fraction(1, 4)


@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_exact_matches_brute_force(k, m):
    for t in enumerate_shapes(m):
        if labelling_count(t, k) > 20000:
            continue
        assert exact_dist(t, k).counts == brute_dist(t, k)


def test_guard():
    with pytest.raises(CostGuardError):
        exact_dist(tuple([LEAF] * 8), 3, guard=1000)


def test_exact_invariances():
    k = 3
    t = ((LEAF, LEAF), LEAF, (LEAF, LEAF))
    d = exact_dist(t, k)
    for tab, n in d.counts.items():
        f = BoolFn(k, tab)
        assert d.count(~f) == n
        assert d.count(negate_vars(f, {2})) == n
        assert d.count(permute(f, [2, 3, 1])) == n


# ---------------------------------------------------------------- Monte Carlo on fixed shapes

def test_mc_matches_exact():
    t = (LEAF, (LEAF, LEAF))
    k = 2
    ex = exact_dist(t, k)
    n = 20000
    mc = mc_dist(t, k, n, seed=5)
    assert mc.trials == n and mc.unclassified == 0
    worst = max(z_score(mc.p(f), float(ex.prob(f)), n) for f in ex.functions())
    assert worst < 4.5
    assert set(mc.counts) <= set(ex.counts)


def test_mc_deterministic_across_threads():
    a = mc_dist("spine:catalan", 2, 4500, seed=9, threads=1)
    b = mc_dist("spine:catalan", 2, 4500, seed=9, threads=3)
    assert a.counts == b.counts and a.unclassified == b.unclassified


def test_sentinels_pickle_as_singletons():
    assert pickle.loads(pickle.dumps(NOT_STABILIZED)) is NOT_STABILIZED
    assert pickle.loads(pickle.dumps(REFUTED)) is REFUTED


# ---------------------------------------------------------------- spine evaluation

def naive_spine_value(levels_iter, k, rng, max_levels=400):
    """Evaluate an explicit truncated spine tree with both constant stubs.

    The tree is extended a few levels at a time until the stub no longer
    matters. Labels are drawn once per node and kept.
    """
    gates, hung = [], []
    while len(gates) < max_levels:
        for _ in range(4):
            hs, pos = next(levels_iter)
            gates.append(AND if rng.random() < 0.5 else OR)
            hung.append(([random_labelling(h, k, rng) for h in hs], pos))
        vals = []
        for stub in (Gate(AND, ()), Gate(OR, ())):
            tree = stub
            for op, (kids, pos) in zip(reversed(gates), reversed(hung)):
                tree = Gate(op, tuple(kids[:pos]) + (tree,) + tuple(kids[pos:]))
            vals.append(eval_table(tree, k))
        if vals[0] == vals[1]:
            return vals[0]
    return None


def test_spine_matches_naive_truncation():
    """Explicit trees agree with the masked evaluator.

    Trials whose hung trees exceed the node cap are dropped. They can shift
    each naive frequency by at most the dropped fraction, which is added to
    the tolerance.
    """
    k = 1
    n = 2000
    fac = StreamFactory("naive")
    naive = Counter()
    for i in range(n):
        rng = fac(i)
        try:
            naive[naive_spine_value(spine_generator(CATALAN, rng, 10**6, node_cap=20000), k, rng)] += 1
        except NodeCapExceeded:
            naive["dropped"] += 1
    dropped = (naive["dropped"] + naive[None]) / n
    assert dropped < 0.05
    mc = mc_dist("spine:catalan", k, 20000, seed="lazy")
    for tab in range(4):
        p_lazy = mc.p(tab)
        p_naive = naive[tab] / n
        se = math.hypot(math.sqrt(p_lazy * (1 - p_lazy) / mc.trials),
                        math.sqrt(p_naive * (1 - p_naive) / n))
        assert p_naive - 4 * se <= p_lazy <= p_naive + dropped + 4 * se


def test_depth_cap_only_adds_results():
    """A trial stabilized under a cap gives the same value under a larger cap."""
    model = make_spine("spine:catalan")
    fac = StreamFactory("cap")
    small = Evaluator(model, 3, depth_cap=5)
    large = Evaluator(model, 3, depth_cap=10)
    n_small = 0
    for i in range(2000):
        a, b = small(fac(i)), large(fac(i))
        if a is not NOT_STABILIZED:
            n_small += 1
            assert a == b
    assert n_small > 1000


def test_indicator_agrees_with_full_distribution():
    k = 2
    x1 = BoolFn.var(2, 1)
    T = BoolFn.true(2)
    ind = mc_indicator("spine:catalan", k, [x1, T], 6000, seed=3)
    full = mc_dist("spine:catalan", k, 6000, seed=3)
    assert ind.counts[x1.table] == full.count(x1)
    assert ind.counts[T.table] == full.count(T)


def test_indicator_extends_low_arity_targets():
    ind = mc_indicator("spine:catalan", 3, [BoolFn.var(1, 1)], 2000, seed=1)
    full = mc_dist("spine:catalan", 3, 2000, seed=1)
    assert ind.p(BoolFn.var(1, 1)) == full.p(BoolFn.var(3, 1))


def test_eval_spine_results():
    model = make_spine("spine:catalan")
    fac = StreamFactory("ev")
    for i in range(50):
        r = eval_spine(model, 2, fac(i))
        assert isinstance(r, BoolFn) and r.arity == 2
    r = eval_spine(model, 2, fac(0), targets=[BoolFn.var(2, 1)])
    assert r is REFUTED or r == BoolFn.var(2, 1) or r is NOT_STABILIZED
    with pytest.raises(TypeError):
        eval_spine(make_spine("spine:catalan").hung, 2, fac(0))


def test_spine_symmetric_under_negation():
    d = mc_dist("spine:catalan", 1, 20000, seed=4)
    t, f = BoolFn.true(1), BoolFn.false(1)
    x, nx = BoolFn.var(1, 1), ~BoolFn.var(1, 1)
    for a, b in ((t, f), (x, nx)):
        se = math.sqrt((d.p(a) + d.p(b)) / d.trials)
        assert abs(d.p(a) - d.p(b)) < 4 * se


def test_lazy_trim_function_law_matches_spine():
    """The trimmed spine tree computes a function with the evaluator's law."""
    k = 1
    n = 4000
    fac = StreamFactory("trim-law")
    sp = GWSpine(CATALAN)
    c = Counter(eval_table(lazy_trim(sp, k, fac(i), keep_tree=True).tree, k) for i in range(n))
    mc = mc_dist(sp, k, 20000, seed="trim-law-mc")
    for tab in range(4):
        p1, p2 = c[tab] / n, mc.p(tab)
        se = math.hypot(math.sqrt(p1 * (1 - p1) / n), math.sqrt(p2 * (1 - p2) / mc.trials))
        assert abs(p1 - p2) < 4 * se + 1e-3


# ---------------------------------------------------------------- pair recursion

@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5), st.data())
def test_pair_prob_matches_marginal(m, data):
    k = data.draw(st.integers(1, 2))
    t = data.draw(st.sampled_from(enumerate_shapes(m)))
    if labelling_count(t, k) > 10**5:
        return
    d = exact_dist(t, k)
    for a, b in itertools.permutations(itertools.product((0, 1), repeat=k), 2):
        for alpha, beta in itertools.product((0, 1), repeat=2):
            assert pair_prob(t, k, a, b, alpha, beta) == pair_prob_from_dist(d, a, b, alpha, beta)


def test_pair_prob_cherry():
    # cherry at k=1: f(0) = 1, f(1) = 0 only for the function ~x1
    assert pair_prob(CHERRY, 1, (1,), (0,), 0, 1) == Fraction(1, 4)
    assert pair_prob(CHERRY, 1, (1,), (0,), 1, 1) == Fraction(1, 4)
    with pytest.raises(ValueError):
        pair_prob(CHERRY, 1, (1,), (1,), 0, 1)


def test_u_sequence():
    u = u_sequence(0.5, 6)
    assert u[:3] == [0.5, 0.25, 0.1875]
    assert u_sequence(0.0, 3) == [0.0, 0.0, 0.0]
    assert all(x > y > 0 for x, y in zip(u, u[1:]))
    with pytest.raises(ValueError):
        u_sequence(0.7, 3)


# ---------------------------------------------------------------- forests

@pytest.mark.parametrize("forest, expected", [
    ([CHERRY], (1, 1)),
    ([LEAF, LEAF], (0, 1)),
    ([LEAF], (None, 0)),
    ([LEAF, LEAF, LEAF], (0, 3)),
    ([CHERRY, LEAF], (1, 3)),
    ([(LEAF, LEAF, LEAF)], (1, 3)),
    ([((LEAF, LEAF), LEAF), (LEAF, LEAF)], (1, 1)),
    ([(LEAF, (LEAF, LEAF)), LEAF], (1, 1)),
    ([((LEAF, LEAF), LEAF), LEAF], (1, 1)),
    ([((LEAF, LEAF), (LEAF, LEAF))], (2, 2)),
])
def test_pair_statistics(forest, expected):
    assert pair_statistics(forest) == expected


@settings(max_examples=60)
@given(st.lists(st.recursive(st.just(LEAF), lambda kids: st.lists(kids, min_size=2, max_size=3).map(tuple),
                             max_leaves=8), min_size=1, max_size=3))
def test_pair_statistics_brute(forest):
    # distinct node identities are needed, so rebuild each tree freshly
    def fresh(t):
        return LEAF if t == LEAF else [fresh(c) for c in t]

    def freeze(t):
        return LEAF if t == LEAF else tuple(freeze(c) for c in t)

    nodes = [fresh(t) for t in forest]
    leaves = []

    def walk(t, path):
        if t == LEAF:
            leaves.append(frozenset(path))
            return
        for c in t:
            walk(c, path + [id(t)])
    for t in nodes:
        walk(t, [])
    costs = Counter(len(a | b) for a, b in itertools.combinations(leaves, 2))
    expected = (min(costs), costs[min(costs)]) if costs else (None, 0)
    assert pair_statistics([freeze(t) for t in nodes]) == expected


def test_forest_stats_threads_and_samples():
    a = forest_stats("spine:catalan", 4, 4100, seed=2, threads=1, keep_samples=True)
    b = forest_stats("spine:catalan", 4, 4100, seed=2, threads=2)
    assert a.sum_ratio == b.sum_ratio and a.sum_L2 == b.sum_L2
    assert len(a.samples) == 4100
    assert all(L >= 0 for _, _, L in a.samples)
    assert 0 < a.mean_ratio <= 1
    with pytest.raises(TypeError):
        forest_stats((LEAF, LEAF), 4, 10, seed=0)


def test_sandwich_small_run():
    k = 4
    ind = mc_indicator("spine:catalan", k, [BoolFn.true(k), BoolFn.false(k)], 20000, seed=8)
    fs = forest_stats("spine:catalan", k, 20000, seed=9)
    rep = sandwich_report(ind, fs)
    assert rep.passed
    assert rep.details["lower"] <= rep.details["upper"]
    json.dumps(rep.to_dict())


# ---------------------------------------------------------------- scaling and repetitions

def test_fit_loglog_exact_power_law():
    ks = [2, 4, 8, 16]
    slope, intercept, r2 = fit_loglog(ks, [3 * k ** -1.5 for k in ks])
    assert slope == pytest.approx(-1.5)
    assert intercept == pytest.approx(math.log(3))
    assert r2 == pytest.approx(1.0)


def test_scaling_report_formats():
    rep = scaling_exponent("spine:catalan", BoolFn.var(1, 1), [1, 2, 4], 3000, seed=1)
    assert rep.slope is not None and rep.slope < 0
    lines = rep.to_csv().splitlines()
    assert lines[0] == "k,p_hat,stderr,log_k,log_p"
    assert lines[-2] == "slope,intercept,r2"
    js = rep.to_json()
    assert [r["k"] for r in js["rows"]] == [1, 2, 4]
    with pytest.raises(ValueError):
        scaling_exponent("spine:catalan", BoolFn.var(2, 1), [1, 2], 10, seed=1)


def test_repetition_check_small():
    with pytest.warns(UserWarning):
        rep = repetition_bound_check("spine:catalan", 4, 500, seed=3)
    d = rep.details
    assert 0 <= d["p_repetition"] <= 1
    assert d["E_trim2"] >= d["E_trim"] ** 2
    assert d["truncated"] == 0


# ---------------------------------------------------------------- output schemas

def test_json_and_csv_schema():
    d = exact_dist(CHERRY, 1)
    js = d.to_json()
    assert set(js) == {"model", "k", "trials", "seed", "unclassified", "entries"}
    assert js["model"] == "shape:(o,o)"
    e = js["entries"][0]
    assert set(e) == {"fn", "count", "p", "stderr", "p_exact"}
    assert sum(Fraction(x["p_exact"]) for x in js["entries"]) == 1
    mc = mc_dist("spine:catalan", 1, 100, seed=0)
    assert "p_exact" not in mc.to_json()["entries"][0]
    lines = mc.to_csv().splitlines()
    assert lines[0] == "fn,count,p,stderr"
    assert lines[-1].startswith("unclassified,")
