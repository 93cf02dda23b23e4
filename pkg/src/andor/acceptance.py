"""The acceptance suite: fourteen numbered end-to-end checks.

Each ``criterion_<n>(seed, threads)`` returns a :class:`CriterionResult`.
Monte Carlo runs that several criteria share (the True/False indicator runs
on the Catalan spine) are computed once per seed and cached.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from . import limitdist as ld
from .boolfn import BoolFn, full_mask
from .complexity import build_complexity_table, enumerate_shapes, schroeder_counts
from .exprtree import all_labellings, eval_table, n_nodes, random_labelling, size
from .rng import StreamFactory
from .treegen import (CATALAN, BSTModel, alpha_gamma_split_pmf, alpha_split_pmf,
                      associative_offspring, balanced_binary, min_leaf_depth, partitions,
                      sample_alpha, sample_gw_conditioned, unordered_binary_counts)
from .trimming import trim


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"criterion {self.number:2d}: {'PASS' if self.passed else 'FAIL'}  {self.title}"


_cache: dict = {}


def _indicator(model, k, targets, N, seed, threads):
    key = (model, k, tuple(t.encode() for t in targets), N, repr(seed))
    if key not in _cache:
        _cache[key] = ld.mc_indicator(model, k, targets, N, seed, threads)
    return _cache[key]


def _tf(k):
    return [BoolFn.true(k), BoolFn.false(k)]


def clear_cache() -> None:
    _cache.clear()


# ---------------------------------------------------------------- 1

def criterion_1(seed=42, threads=None) -> CriterionResult:
    cherry = balanced_binary(1)
    ex = ld.exact_dist(cherry, 1)
    quarter = Fraction(1, 4)
    fns = [BoolFn.var(1, 1), BoolFn.var(1, 1, True), BoolFn.true(1), BoolFn.false(1)]
    exact_ok = len(ex.counts) == 4 and all(ex.prob(f) == quarter for f in fns)
    mc = ld.mc_dist(cherry, 1, 10**5, (seed, 1), threads)
    dev = {str(f): abs(mc.p(f) - 0.25) / mc.stderr(f) for f in fns}
    mc_ok = all(v <= 3 for v in dev.values()) and sum(mc.counts.values()) == mc.trials
    return CriterionResult(1, "exact cherry distribution and Monte Carlo agreement",
                           exact_ok and mc_ok, {"exact_ok": exact_ok, "z_scores": dev})


# ---------------------------------------------------------------- 2

def criterion_2(seed=42, threads=None) -> CriterionResult:
    violations = 0
    checked = 0
    for k in (1, 2):
        for m in range(1, 6):
            for shape in enumerate_shapes(m):
                for tree in all_labellings(shape, k):
                    checked += 1
                    if eval_table(trim(tree).tree, k) != eval_table(tree, k):
                        violations += 1
    fac = StreamFactory((seed, 2))
    random_checked = 0
    for i in range(10**4):
        rng = fac(i)
        leaves = 1 + int(rng.random() * 51)  # at most 2*51-1 = 101 nodes
        shape = sample_gw_conditioned(CATALAN, leaves, "leaves", rng, method="cycle")
        tree = random_labelling(shape, 3, rng)
        random_checked += 1
        if eval_table(trim(tree).tree, 3) != eval_table(tree, 3):
            violations += 1
    return CriterionResult(2, "trimming preserves the computed function", violations == 0,
                           {"exhaustive_trees": checked, "random_trees": random_checked,
                            "violations": violations})


# ---------------------------------------------------------------- 3

def criterion_3(seed=42, threads=None) -> CriterionResult:
    bad = []
    shapes_checked = 0
    for k in (1, 2, 3):
        full = full_mask(k)
        for m in range(1, 9):
            for shape in enumerate_shapes(m):
                if ld.labelling_count(shape, k) > 10**7:
                    continue
                d = ld.exact_dist(shape, k)
                shapes_checked += 1
                for t, c in d.counts.items():
                    if d.counts.get(full ^ t, 0) != c:
                        bad.append((k, m))
                        break
    mc = ld.mc_dist("spine:catalan", 2, 10**5, (seed, 3), threads)
    full = full_mask(2)
    worst = 0.0
    for t in set(mc.counts) | {full ^ t for t in mc.counts}:
        p, q = mc.p(t), mc.p(full ^ t)
        se = math.hypot(mc.stderr(t), mc.stderr(full ^ t))
        z = abs(p - q) / se if se > 0 else (0.0 if p == q else math.inf)
        worst = max(worst, z)
    ok = not bad and worst <= 4
    return CriterionResult(3, "negation symmetry, exact and on the Catalan spine", ok,
                           {"shapes_checked": shapes_checked, "asymmetric": bad[:5],
                            "worst_z": worst, "unclassified": mc.unclassified})


# ---------------------------------------------------------------- 4

def criterion_4(seed=42, threads=None) -> CriterionResult:
    pool = [s for m in range(1, 8) for s in enumerate_shapes(m) if n_nodes(s) <= 8]
    rng = StreamFactory((seed, 4))(0)
    shapes = [pool[rng.randrange(len(pool))] for _ in range(50)]
    mismatches = 0
    cases = 0
    for shape in shapes:
        for k in (1, 2):
            d = ld.exact_dist(shape, k)
            points = list(product((0, 1), repeat=k))
            for a in points:
                for b in points:
                    if a == b:
                        continue
                    for al, be in product((0, 1), repeat=2):
                        cases += 1
                        if ld.pair_prob(shape, k, a, b, al, be) != ld.pair_prob_from_dist(d, a, b, al, be):
                            mismatches += 1
    return CriterionResult(4, "pair recursion equals exact marginals", mismatches == 0,
                           {"shapes": len(shapes), "cases": cases, "mismatches": mismatches})


# ---------------------------------------------------------------- 5

def criterion_5(seed=42, threads=None) -> CriterionResult:
    u = ld.u_sequence(0.5, 10**4)
    val = 10**4 * u[-1]
    return CriterionResult(5, "sigma * u_sigma tends to 1", abs(val - 1) <= 0.05,
                           {"sigma_u_sigma": val})


# ---------------------------------------------------------------- 6

def criterion_6(seed=42, threads=None) -> CriterionResult:
    k, N = 2, 10**5
    rows = []
    floors_ok = True
    for h in (2, 4, 6):
        d = ld.mc_dist(balanced_binary(h), k, N, (seed, 6, h), threads)
        pc = d.p(BoolFn.true(k)) + d.p(BoolFn.false(k))
        se = math.sqrt(pc * (1 - pc) / N)
        pn = 1 - pc
        floor = 2.0 ** -h
        floors_ok &= pn >= floor - 3 * se
        rows.append({"height": h, "p_constant": pc, "stderr": se, "floor": floor})
    increasing = all(b["p_constant"] - a["p_constant"] > 2 * math.hypot(a["stderr"], b["stderr"])
                     for a, b in zip(rows, rows[1:]))
    return CriterionResult(6, "constant mass grows with height; non-constant floor",
                           increasing and floors_ok, {"rows": rows})


# ---------------------------------------------------------------- 7

def criterion_7(seed=42, threads=None) -> CriterionResult:
    n = 10**5
    fac = StreamFactory((seed, 7, "saturation"))
    model = BSTModel(n)
    depths = [min_leaf_depth(model, fac(i)) for i in range(100)]
    ratio = sum(depths) / len(depths) / math.log(n)
    rows = []
    for m in (10**2, 10**3, 10**4):
        d = ld.mc_dist(BSTModel(m), 2, 2 * 10**4, (seed, 7, m), threads)
        pc = d.p(BoolFn.true(2)) + d.p(BoolFn.false(2))
        rows.append({"n": m, "p_constant": pc, "stderr": math.sqrt(pc * (1 - pc) / d.trials)})
    increasing = all(b["p_constant"] > a["p_constant"] for a, b in zip(rows, rows[1:]))
    ok = 0.30 <= ratio <= 0.45 and increasing
    return CriterionResult(7, "BST saturation level and degeneracy", ok,
                           {"mean_saturation_over_log_n": ratio, "rows": rows})


# ---------------------------------------------------------------- 8

def criterion_8(seed=42, threads=None) -> CriterionResult:
    N = 10**6
    scaled = {}
    for k in (4, 8, 16):
        ind = _indicator("spine:catalan", k, _tf(k), N, (seed, "tf", k), threads)
        scaled[k] = k * ind.p(BoolFn.true(k))
    ratio = max(scaled.values()) / min(scaled.values())
    fs = ld.forest_stats("spine:catalan", 8, N, (seed, 8, "forest"), threads)
    sw = ld.sandwich_report(_indicator("spine:catalan", 8, _tf(8), N, (seed, "tf", 8), threads), fs)
    ok = ratio <= 3 and sw.passed
    return CriterionResult(8, "k * P_k(True) stays bounded; moment sandwich at k=8", ok,
                           {"k_times_p_true": scaled, "ratio": ratio, "sandwich": sw.details})


# ---------------------------------------------------------------- 9

def _slope(model, f, ks, N, seed, threads, shared_tf=False):
    ps = []
    for k in ks:
        if shared_tf:
            ind = _indicator(model, k, _tf(k), N, (seed, "tf", k), threads)
        else:
            ind = _indicator(model, k, [f], N, (seed, f.encode(), k), threads)
        ps.append(ind.p(f))
    if min(ps) == 0:
        return None, ps
    return ld.fit_loglog(ks, ps)[0], ps


def criterion_9(seed=42, threads=None) -> CriterionResult:
    x1 = BoolFn.var(1, 1)
    x1x2 = BoolFn.var(2, 1) & BoolFn.var(2, 2)
    s_true, p_true = _slope("spine:catalan", BoolFn.true(1), (2, 4, 8, 16), 10**6, seed,
                            threads, shared_tf=True)
    s_x1, p_x1 = _slope("spine:catalan", x1, (2, 4, 8, 16), 10**6, seed, threads)
    s_and, p_and = _slope("spine:catalan", x1x2, (3, 4, 6, 8), 4 * 10**6, seed, threads)
    ok = (s_true is not None and -1.3 <= s_true <= -0.7
          and s_x1 is not None and -2.4 <= s_x1 <= -1.6
          and s_and is not None and -3.5 <= s_and <= -2.5)
    return CriterionResult(9, "log-log slopes on the Catalan spine", ok,
                           {"slope_true": s_true, "slope_x1": s_x1, "slope_x1_and_x2": s_and,
                            "p_true": p_true, "p_x1": p_x1, "p_x1_and_x2": p_and})


# ---------------------------------------------------------------- 10

def criterion_10(seed=42, threads=None) -> CriterionResult:
    n, N = 10, 10**5
    tvs = {}
    for a in (0.3, 0.5, 0.8):
        fac = StreamFactory((seed, 10, a))
        counts = [0] * n
        for i in range(N):
            counts[size(sample_alpha(n, a, fac(i))[0])] += 1
        tvs[a] = 0.5 * sum(abs(counts[j] / N - alpha_split_pmf(n, a, j)) for j in range(1, n))
    grid = [i / 10 for i in range(1, 10)]
    worst = min(alpha_split_pmf(m, a, 1) - a / 2 for a in grid for m in range(2, 1001))
    slope, ps = _slope("spine:alpha:0.5", BoolFn.var(1, 1), (2, 4, 8, 16), 2 * 10**5, seed,
                       threads)
    ok = max(tvs.values()) <= 0.02 and worst >= 0 and slope is not None and -2.4 <= slope <= -1.6
    return CriterionResult(10, "alpha trees: split law, leaf-split floor, slope", ok,
                           {"tv": tvs, "min_q1_minus_half_alpha": worst, "slope_x1": slope,
                            "p_x1": ps})


# ---------------------------------------------------------------- 11

def criterion_11(seed=42, threads=None) -> CriterionResult:
    shapes_ok = [len(enumerate_shapes(m)) for m in range(1, 7)] == schroeder_counts(6) == [1, 1, 3, 11, 45, 197]
    y = unordered_binary_counts(201)
    y_ok = y[:6] == [1, 1, 1, 2, 3, 6]
    ratios = [y[m] / y[m - 1] for m in range(50, 201)]  # y_{n+1}/y_n for n = 50..200
    ratio_ok = all(2 < r < 4 for r in ratios)
    sums = {}
    for a, g in ((0.5, 0.3), (0.7, 0.7)):
        sums[(a, g)] = math.fsum(alpha_gamma_split_pmf(8, a, g, p) for p in partitions(8) if len(p) >= 2)
    sums_ok = all(abs(s - 1) <= 1e-9 for s in sums.values())
    means = {k: associative_offspring(k).mean() for k in (1, 2, 5, 10)}
    crit_ok = all(abs(m - 1) <= 1e-9 for m in means.values())
    ok = shapes_ok and y_ok and ratio_ok and sums_ok and crit_ok
    return CriterionResult(11, "combinatorial oracles", ok,
                           {"shapes": shapes_ok, "y": y[:6], "ratio_range": [min(ratios), max(ratios)],
                            "alpha_gamma_sums": {str(k): v for k, v in sums.items()},
                            "offspring_means": means})


# ---------------------------------------------------------------- 12

def criterion_12(seed=42, threads=None) -> CriterionResult:
    tab = build_complexity_table(2, 4)
    brute = build_complexity_table(2, 4, method="enumerate")
    x1, x2 = BoolFn.var(2, 1), BoolFn.var(2, 2)
    lits = [BoolFn.var(2, i, neg) for i in (1, 2) for neg in (False, True)]
    checks = {
        "constants": tab.L(BoolFn.true(2)) == tab.L(BoolFn.false(2)) == 0,
        "literals": all(tab.L(f) == 1 for f in lits),
        "and_or": tab.L(x1 & x2) == tab.L(x1 | x2) == 2,
        "xor_xnor": tab.L(x1 ^ x2) == tab.L(~(x1 ^ x2)) == 4,
        "all_16": len(tab) == 16,
        "brute_force": {t: e[0] for t, e in tab.entries.items()}
        == {t: e[0] for t, e in brute.entries.items()},
    }
    return CriterionResult(12, "complexity table for two variables", all(checks.values()), checks)


# ---------------------------------------------------------------- 13

def criterion_13(seed=42, threads=None) -> CriterionResult:
    reports = {k: ld.repetition_bound_check("spine:catalan", k, 2 * 10**4, (seed, 13, k), threads)
               for k in (16, 32)}
    return CriterionResult(13, "repetition bound on the trimmed spine tree",
                           all(r.passed for r in reports.values()),
                           {k: r.details for k, r in reports.items()})


# ---------------------------------------------------------------- 14

DETERMINISM_COMMANDS = (
    ["sample", "--model", "catalan", "--leaves", "6", "--k", "3", "--trials", "300"],
    ["sample", "--model", "alpha:0.5", "--n", "10", "--stats", "split", "--trials", "3000"],
    ["sample", "--model", "bst", "--n", "1000", "--stats", "saturation", "--trials", "50"],
    ["dist", "--model", "catalan", "--n", "20", "--k", "2", "--trials", "5000"],
    ["dist", "--model", "spine:catalan", "--k", "2", "--trials", "5000", "--format", "csv"],
    ["scaling", "--model", "spine:catalan", "--fn", "1:2", "--ks", "2,4", "--trials", "4000"],
)


def criterion_14(seed=42, threads=None) -> CriterionResult:
    from .cli import main

    differing = []
    with tempfile.TemporaryDirectory() as tmp:
        for i, cmd in enumerate(DETERMINISM_COMMANDS):
            outs = []
            for th in (1, 3):
                path = os.path.join(tmp, f"out{i}_{th}")
                code = main(cmd + ["--seed", str(seed), "--threads", str(th), "--output", path])
                if code != 0:
                    differing.append((" ".join(cmd), f"exit {code}"))
                    break
                with open(path, "rb") as fh:
                    outs.append(fh.read())
            if len(outs) == 2 and outs[0] != outs[1]:
                differing.append((" ".join(cmd), "output differs"))
    return CriterionResult(14, "same seed gives byte-identical output for any thread count",
                           not differing, {"commands": len(DETERMINISM_COMMANDS),
                                           "differing": differing})


CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 15)}


def run(numbers=None, seed=42, threads=None, report=print) -> list[CriterionResult]:
    """Run the selected criteria (all by default) and report one line each."""
    out = []
    for n in numbers or sorted(CRITERIA):
        r = CRITERIA[n](seed, threads)
        if report:
            report(r.line())
        out.append(r)
    return out
