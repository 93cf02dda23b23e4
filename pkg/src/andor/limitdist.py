"""Distributions induced on Boolean functions by random and/or trees.

Three estimators live here:

* :func:`exact_dist` enumerates every labelling of a small shape, with
  integer weights, by a bottom-up convolution over the shape.
* :func:`mc_dist` samples finite trees or infinite one-ended trees (spines).
* :func:`eval_spine` evaluates one random infinite tree by walking down its
  spine until the value no longer depends on what lies below.

Evaluation is lazy and masked. A subtree is asked for its value only on the
set ``U`` of assignments (a bitmask over the truth table) where that value
can still matter; an AND node stops at the first child that is 0 on all of
``U``, an OR node at the first child that is 1 on all of it. Children that
are never asked for are never generated. Along a spine, ``U`` is the set of
assignments on which the root still depends on the unrevealed tail; the
value has stabilized once ``U`` is empty. This is the same stopping rule as
comparing the tree with its tail replaced by True and by False.
"""

from __future__ import annotations

import math
import statistics
import warnings
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from .boolfn import BoolFn, extend, full_mask, literal_tables
from .exprtree import TreeShape, fold, n_internal, saturation_level, shape_to_text, size
from .rng import StreamFactory, chunk_ranges, default_threads, parallel_map
from .treegen import (FixedShapeModel, GWModel, LazyModel, NodeCapExceeded, SpineModel,
                      make_finite, make_spine)

CHUNK = 2000  # trials per parallel task; fixed so results ignore the worker count


class _Sentinel:
    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name

    def __reduce__(self):
        return (_sentinel, (self.name,))


def _sentinel(name):
    return NOT_STABILIZED if name == "NOT_STABILIZED" else REFUTED


NOT_STABILIZED = _Sentinel("NOT_STABILIZED")
#: returned in indicator mode once the value provably differs from every target
REFUTED = _Sentinel("REFUTED")


class CostGuardError(ValueError):
    """Exhaustive enumeration would be too large."""


# ---------------------------------------------------------------- results

@dataclass
class DistEstimate:
    """Counts of functions over ``trials`` draws; exact when ``exact`` is set."""

    model: str
    k: int
    trials: int
    seed: object
    counts: dict  # truth-table int -> count
    unclassified: int = 0
    exact: bool = False

    def _key(self, f) -> int:
        if isinstance(f, BoolFn):
            if f.arity != self.k:
                raise ValueError(f"function has arity {f.arity}, estimate has k={self.k}")
            return f.table
        return int(f)

    def count(self, f) -> int:
        return self.counts.get(self._key(f), 0)

    def p(self, f) -> float:
        return self.count(f) / self.trials

    def prob(self, f) -> Fraction:
        """Exact mass as a fraction (meaningful for exact estimates)."""
        return Fraction(self.count(f), self.trials)

    def stderr(self, f) -> float:
        if self.exact:
            return 0.0
        p = self.p(f)
        return math.sqrt(p * (1 - p) / self.trials)

    @property
    def p_unclassified(self) -> float:
        return self.unclassified / self.trials

    def functions(self) -> list[BoolFn]:
        return [BoolFn(self.k, t) for t in self._order()]

    def _order(self):
        return sorted(self.counts, key=lambda t: (-self.counts[t], t))

    def to_json(self) -> dict:
        entries = []
        for t in self._order():
            f = BoolFn(self.k, t)
            e = {"fn": f.encode(), "count": self.counts[t], "p": self.p(t),
                 "stderr": self.stderr(t)}
            if self.exact:
                e["p_exact"] = str(self.prob(t))
            entries.append(e)
        return {"model": self.model, "k": self.k, "trials": self.trials, "seed": self.seed,
                "unclassified": self.unclassified, "entries": entries}

    def to_csv(self) -> str:
        lines = ["fn,count,p,stderr"]
        for t in self._order():
            lines.append(f"{BoolFn(self.k, t).encode()},{self.counts[t]},{self.p(t)!r},{self.stderr(t)!r}")
        lines.append(f"unclassified,{self.unclassified},{self.p_unclassified!r},")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- exact enumeration

def labelling_count(t: TreeShape, k: int) -> int:
    """Number of labellings: 2 gates per internal node, 2k literals per leaf."""
    return 2 ** n_internal(t) * (2 * k) ** size(t)


def exact_dist(t: TreeShape, k: int, guard: int | None = 10**7) -> DistEstimate:
    """Exact distribution of the function computed by a random labelling of t.

    The weight of every function is an integer count of labellings; the
    probabilities are those counts over :func:`labelling_count`.
    """
    if k < 1:
        raise ValueError("k must be positive")
    total = labelling_count(t, k)
    if guard is not None and total > guard:
        raise CostGuardError(f"{total} labellings exceed the guard {guard}")
    full = full_mask(k)
    leaf_dist = dict(Counter(literal_tables(k)))
    memo: dict = {}

    def node(shape, kid_dists):
        got = memo.get(shape)
        if got is not None:
            return got
        acc_and = {full: 1}
        acc_or = {0: 1}
        for kd in kid_dists:
            nxt_and: dict = {}
            for a, na in acc_and.items():
                for b, nb in kd.items():
                    v = a & b
                    nxt_and[v] = nxt_and.get(v, 0) + na * nb
            nxt_or: dict = {}
            for a, na in acc_or.items():
                for b, nb in kd.items():
                    v = a | b
                    nxt_or[v] = nxt_or.get(v, 0) + na * nb
            acc_and, acc_or = nxt_and, nxt_or
        out = dict(acc_and)
        for v, n in acc_or.items():
            out[v] = out.get(v, 0) + n
        memo[shape] = out
        return out

    counts = fold(t, lambda leaf: leaf_dist, node)
    return DistEstimate(model=f"shape:{shape_to_text(t)}", k=k, trials=total, seed=None,
                        counts=dict(counts), exact=True)


# ---------------------------------------------------------------- masked lazy evaluation

def _draw_fn(d, rand):
    """Zero-argument offspring sampler bound to a stream."""
    p = d.p
    if len(p) == 3:  # support {0, 2}
        p0 = p[0]
        return lambda: 0 if rand() < p0 else 2
    import bisect
    cum = d._cum
    last = len(p) - 1
    br = bisect.bisect_right

    def draw():
        i = br(cum, rand())
        return i if i < last else last
    return draw


def _eval_gw(draw, M, rand, lits, two_k, budget):
    """Value on mask M of a fresh Galton-Watson tree (drawn as it is read).

    Returns ``(value, nodes revealed)``.
    """
    c = draw()
    if c == 0:
        return lits[int(rand() * two_k)] & M, 1
    nodes = 1
    # frame: [is_and, undecided, children left, mask]
    stack = [[rand() < 0.5, M, c, M]]
    ret = -1
    while True:
        fr = stack[-1]
        if ret >= 0:
            if fr[0]:
                fr[1] = ret
            else:
                fr[1] ^= ret
            ret = -1
        U = fr[1]
        if U == 0 or fr[2] == 0:
            stack.pop()
            ret = U if fr[0] else fr[3] ^ U
            if not stack:
                return ret, nodes
            continue
        fr[2] -= 1
        c = draw()
        nodes += 1
        if c == 0:
            ret = lits[int(rand() * two_k)] & U
        else:
            if nodes > budget:
                raise NodeCapExceeded("node budget exhausted during evaluation")
            stack.append([rand() < 0.5, U, c, U])


def _eval_lazy(model: LazyModel, state, M, rng, lits, two_k, budget):
    """Same as :func:`_eval_gw` for any lazy model."""
    children = model.children
    rand = rng.random
    kids = children(state, rng)
    if not kids:
        return lits[int(rand() * two_k)] & M, 1
    nodes = 1
    stack = [[rand() < 0.5, M, kids, 0, M]]
    ret = -1
    while True:
        fr = stack[-1]
        if ret >= 0:
            if fr[0]:
                fr[1] = ret
            else:
                fr[1] ^= ret
            ret = -1
        U = fr[1]
        if U == 0 or fr[3] == len(fr[2]):
            stack.pop()
            ret = U if fr[0] else fr[4] ^ U
            if not stack:
                return ret, nodes
            continue
        st = fr[2][fr[3]]
        fr[3] += 1
        ck = children(st, rng)
        nodes += 1
        if not ck:
            ret = lits[int(rand() * two_k)] & U
        else:
            if nodes > budget:
                raise NodeCapExceeded("node budget exhausted during evaluation")
            stack.append([rand() < 0.5, U, ck, 0, U])


class Evaluator:
    """Evaluates random labelled trees of one model at one k.

    ``targets`` switches on indicator mode: evaluation of a spine stops as
    soon as the assignments already decided rule out every target, and the
    result is then :data:`REFUTED`.
    """

    def __init__(self, model, k: int, depth_cap: int = 10**4, targets=None,
                 node_budget: int = 10**7):
        if k < 1:
            raise ValueError("k must be positive")
        if depth_cap < 1:
            raise ValueError("depth_cap must be at least 1")
        self.model = model
        self.k = k
        self.full = full_mask(k)
        self.lits = literal_tables(k)
        self.two_k = 2 * k
        self.depth_cap = depth_cap
        self.targets = tuple(targets) if targets else None
        self.node_budget = node_budget
        self.is_spine = isinstance(model, SpineModel)
        hung = model.hung if self.is_spine else model
        self.gw = hung.d if isinstance(hung, GWModel) else None
        self.hat = model.hat if self.is_spine and hasattr(model, "hat") else None

    def __call__(self, rng):
        if self.is_spine:
            return self.spine(rng)
        if self.gw is not None:
            v, _ = _eval_gw(_draw_fn(self.gw, rng.random), self.full, rng.random, self.lits,
                            self.two_k, self.node_budget)
            return v
        m = self.model
        v, _ = _eval_lazy(m, m.root_state(rng), self.full, rng, self.lits, self.two_k,
                          self.node_budget)
        return v

    def spine(self, rng):
        rand = rng.random
        lits, two_k, full = self.lits, self.two_k, self.full
        budget = self.node_budget
        targets = self.targets
        if self.gw is not None:
            draw = _draw_fn(self.gw, rand)
            hat_draw = _draw_fn(self.hat, rand) if self.hat is not None else None
        else:
            hung = self.model.hung
        U = full
        val = 0
        for _ in range(self.depth_cap):
            is_and = rand() < 0.5
            if self.gw is not None:
                n_hung = (hat_draw() if hat_draw else self.model.hat.draw(rng)) - 1
                states = None
            else:
                states = self.model.hung_states(rng)
                n_hung = len(states)
            for i in range(n_hung):
                if states is None:
                    v, used = _eval_gw(draw, U, rand, lits, two_k, budget)
                else:
                    v, used = _eval_lazy(hung, states[i], U, rng, lits, two_k, budget)
                budget -= used
                if is_and:
                    U = v
                else:
                    val |= v
                    U ^= v
                if U == 0:
                    return val
            if targets is not None:
                decided = full ^ U
                for t in targets:
                    if (val ^ t) & decided == 0:
                        break
                else:
                    return REFUTED
        return NOT_STABILIZED


def eval_spine(model: SpineModel, k: int, rng, depth_cap: int = 10**4, targets=None,
               node_budget: int = 10**7):
    """Function computed by a random labelling of a one-ended infinite tree.

    Returns a :class:`BoolFn`, :data:`NOT_STABILIZED` when ``depth_cap``
    spine levels did not suffice, or :data:`REFUTED` in indicator mode.
    """
    if not isinstance(model, SpineModel):
        raise TypeError("eval_spine needs a spine model")
    ev = Evaluator(model, k, depth_cap, [_table(t, k) for t in targets] if targets else None,
                   node_budget)
    r = ev(rng)
    if isinstance(r, _Sentinel):
        return r
    return BoolFn(k, r)


def eval_random(model, k: int, rng, depth_cap: int = 10**4):
    """One draw of the function of a random labelled tree (finite or spine)."""
    r = Evaluator(model, k, depth_cap)(rng)
    return r if isinstance(r, _Sentinel) else BoolFn(k, r)


def _table(f, k):
    if isinstance(f, BoolFn):
        if f.arity > k:
            raise ValueError("target arity exceeds k")
        return extend(f, k).table if f.arity < k else f.table
    return int(f)


# ---------------------------------------------------------------- Monte Carlo drivers

def resolve_model(name: str, n: int | None = None, h: int | None = None,
                  size_mode: str | None = None):
    """Model preset string to a lazy finite model or a spine model."""
    if name.startswith("spine:"):
        return make_spine(name)
    return make_finite(name, n=n, h=h, size_mode=size_mode)


def _as_model(model):
    if isinstance(model, (LazyModel, SpineModel)):
        return model
    if isinstance(model, str):
        return resolve_model(model)
    if isinstance(model, tuple):
        return FixedShapeModel(model, f"shape:{shape_to_text(model)}")
    raise TypeError(f"cannot interpret {model!r} as a model")


def _mc_task(args):
    model, k, seed, lo, hi, depth_cap, targets, budget = args
    ev = Evaluator(model, k, depth_cap, targets, budget)
    fac = StreamFactory(seed)
    counts: dict = {}
    unclassified = 0
    for trial in range(lo, hi):
        r = ev(fac(trial))
        if r is NOT_STABILIZED:
            unclassified += 1
        elif r is not REFUTED:
            counts[r] = counts.get(r, 0) + 1
    return counts, unclassified


def _run_mc(model, k, N, seed, threads, depth_cap, targets, budget):
    if N < 1:
        raise ValueError("number of trials must be positive")
    if threads is None:
        threads = default_threads()
    tasks = [(model, k, seed, lo, hi, depth_cap, targets, budget)
             for lo, hi in chunk_ranges(N, CHUNK)]
    counts: dict = {}
    unclassified = 0
    for c, u in parallel_map(_mc_task, tasks, threads):
        unclassified += u
        for t, n in c.items():
            counts[t] = counts.get(t, 0) + n
    return counts, unclassified


def mc_dist(model, k: int, N: int, seed, threads: int | None = None,
            depth_cap: int = 10**4, node_budget: int = 10**7) -> DistEstimate:
    """Monte Carlo estimate of the function distribution of a model.

    ``model`` is a lazy model, a spine model, a preset name or a fixed shape.
    Trial ``i`` uses the stream ``(seed, i)``, so the estimate does not
    depend on ``threads``.
    """
    m = _as_model(model)
    counts, unclassified = _run_mc(m, k, N, seed, threads, depth_cap, None, node_budget)
    return DistEstimate(model=m.name, k=k, trials=N, seed=seed, counts=counts,
                        unclassified=unclassified)


@dataclass
class IndicatorEstimate:
    """Counts of draws equal to each of a few target functions."""

    model: str
    k: int
    trials: int
    seed: object
    counts: dict  # target table -> count
    unclassified: int

    def p(self, f) -> float:
        return self.counts.get(_table(f, self.k), 0) / self.trials

    def stderr(self, f) -> float:
        p = self.p(f)
        return math.sqrt(p * (1 - p) / self.trials)


def mc_indicator(model, k: int, targets, N: int, seed, threads: int | None = None,
                 depth_cap: int = 10**4, node_budget: int = 10**7) -> IndicatorEstimate:
    """Estimate P(f = g) for a few targets g only; much cheaper than :func:`mc_dist`.

    Targets of lower arity are extended to k variables. On spines a trial
    stops as soon as its value is known to differ from every target.
    """
    m = _as_model(model)
    tabs = tuple(dict.fromkeys(_table(t, k) for t in targets))
    counts, unclassified = _run_mc(m, k, N, seed, threads, depth_cap, tabs, node_budget)
    kept = {t: counts.get(t, 0) for t in tabs}
    return IndicatorEstimate(m.name, k, N, seed, kept, unclassified)


# ---------------------------------------------------------------- pair recursion

def pair_prob(t: TreeShape, k: int, a, b, alpha: int, beta: int) -> Fraction:
    """P(f(a) = alpha and f(b) = beta) for a random k-labelling of t, exactly.

    With ``P10`` the probability of (1, 0), the root recursion is
    ``P10 = 2^-r - prod(1/2 - P10_i)`` for both gates. A leaf gives (1, 0)
    for exactly the literals separating a from b in that direction: one per
    coordinate where they differ, out of 2k. By negation symmetry
    ``P01 = P10`` and ``P11 = P00 = 1/2 - P10``.
    """
    a, b = tuple(a), tuple(b)
    if len(a) != k or len(b) != k:
        raise ValueError("assignments must have length k")
    if a == b:
        raise ValueError("the two assignments must differ")
    if alpha not in (0, 1) or beta not in (0, 1):
        raise ValueError("alpha and beta are bits")
    d = sum(x != y for x, y in zip(a, b))
    half = Fraction(1, 2)
    leaf = Fraction(d, 2 * k)

    def node(shape, vals):
        prod = Fraction(1)
        for v in vals:
            prod *= half - v
        return Fraction(1, 2 ** len(vals)) - prod

    p10 = fold(t, lambda leaf_: leaf, node)
    return p10 if alpha != beta else half - p10


def pair_prob_from_dist(dist: DistEstimate, a, b, alpha: int, beta: int) -> Fraction:
    """Marginalize an exact distribution over the event {f(a)=alpha, f(b)=beta}."""
    ia = sum(bit << i for i, bit in enumerate(a))
    ib = sum(bit << i for i, bit in enumerate(b))
    total = 0
    for t, n in dist.counts.items():
        if (t >> ia) & 1 == alpha and (t >> ib) & 1 == beta:
            total += n
    return Fraction(total, dist.trials)


def u_sequence(u1: float, sigma_max: int) -> list[float]:
    """u_1, ..., u_sigma_max for the map u -> u - u^2."""
    if not 0 <= u1 <= 0.5:
        raise ValueError("u1 must lie in [0, 1/2]")
    if sigma_max < 1:
        raise ValueError("sigma_max must be positive")
    out = [u1]
    u = u1
    for _ in range(sigma_max - 1):
        u = u - u * u
        out.append(u)
    return out


# ---------------------------------------------------------------- reports

@dataclass
class Report:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def nonconstant_lower_bound_check(t: TreeShape, k: int, N: int, seed,
                                  threads: int | None = None) -> Report:
    """Check P(f not constant) >= 2^-sigma, with sigma the saturation level of t."""
    sigma = saturation_level(t)
    est = mc_dist(t, k, N, seed, threads)
    const = est.count(BoolFn.true(k)) + est.count(BoolFn.false(k))
    p = 1 - const / N
    se = math.sqrt(p * (1 - p) / N)
    floor = 2.0 ** -sigma
    return Report("nonconstant_lower_bound", p >= floor - 3 * se,
                  {"sigma": sigma, "k": k, "trials": N, "p_nonconstant": p, "stderr": se,
                   "floor": floor})


# ---------------------------------------------------------------- hanging forests

class _Forest:
    """A lazily revealed labelled forest with memoized children and labels."""

    def __init__(self, model: LazyModel, roots, rng, k: int, node_cap: int = 10**7):
        self.model = model
        self.rng = rng
        self.two_k = 2 * k
        self.states = list(roots)
        self.kids: list = [None] * len(self.states)
        self.depth = [0] * len(self.states)
        self.gate: dict = {}
        self.lit: dict = {}
        self.node_cap = node_cap
        self.roots = list(range(len(self.states)))

    def children(self, i):
        ks = self.kids[i]
        if ks is None:
            cs = self.model.children(self.states[i], self.rng)
            base = len(self.states)
            if base + len(cs) > self.node_cap:
                raise NodeCapExceeded("forest too large")
            self.states.extend(cs)
            self.kids.extend([None] * len(cs))
            self.depth.extend([self.depth[i] + 1] * len(cs))
            ks = tuple(range(base, base + len(cs)))
            self.kids[i] = ks
        return ks

    def gate_of(self, i):
        g = self.gate.get(i)
        if g is None:
            g = self.gate[i] = self.rng.random() < 0.5  # True for AND
        return g

    def literal_of(self, i):
        r = self.lit.get(i)
        if r is None:
            r = self.lit[i] = int(self.rng.random() * self.two_k)
        return r


def _pair_stats(forest: _Forest) -> tuple:
    """(C, N) for the forest, or (None, 0) when it has fewer than two leaves.

    C is the least number of internal nodes on the union of the root paths
    of two distinct leaves, N the number of unordered leaf pairs attaining
    it. The forest is revealed breadth-first only as deep as needed: the
    root path of a leaf at depth d alone has d internal nodes, so once the
    best pair among revealed leaves costs at most the revealed depth, no
    deeper leaf can tie or beat it.
    """
    frontier = list(forest.roots)
    D = 0
    while True:
        nxt = []
        for i in frontier:
            nxt.extend(forest.children(i))
        # h and cnt over revealed nodes; unrevealed subtrees count as leafless
        best, count = _best_pair(forest, D)
        if best is not None and best <= D:
            return best, count
        if not nxt:
            return (best, count) if best is not None else (None, 0)
        frontier = nxt
        D += 1


def _best_pair(forest: _Forest, D: int):
    INF = math.inf
    kids = forest.kids
    depth = forest.depth
    n = len(forest.states)
    h = [INF] * n
    cnt = [0] * n
    best = INF
    total = 0
    # children have larger ids than parents, so a reverse scan is post-order
    for i in range(n - 1, -1, -1):
        ks = kids[i]
        if ks is None or depth[i] > D:
            continue
        if not ks:
            h[i] = 0
            cnt[i] = 1
            continue
        c, tot = _two_smallest(ks, h, cnt)
        hm = min((h[j] for j in ks), default=INF)
        if hm < INF:
            h[i] = hm + 1
            cnt[i] = sum(cnt[j] for j in ks if h[j] == hm)
        if c < INF:
            c += depth[i] + 1
            if c < best:
                best, total = c, tot
            elif c == best:
                total += tot
    c, tot = _two_smallest(forest.roots, h, cnt)
    if c < best:
        best, total = c, tot
    elif c == best and c < INF:
        total += tot
    if best == INF:
        return None, 0
    return int(best), total


def _two_smallest(ids, h, cnt):
    """Least h(a)+h(b) over distinct a, b in ids, and the number of leaf pairs attaining it."""
    INF = math.inf
    vals = sorted(h[j] for j in ids)
    if len(vals) < 2 or vals[1] == INF:
        return INF, 0
    h1, h2 = vals[0], vals[1]
    if h1 == h2:
        cs = [cnt[j] for j in ids if h[j] == h1]
        s = sum(cs)
        return h1 + h2, (s * s - sum(x * x for x in cs)) // 2
    c1 = sum(cnt[j] for j in ids if h[j] == h1)
    c2 = sum(cnt[j] for j in ids if h[j] == h2)
    return h1 + h2, c1 * c2


def _forest_trim_size(forest: _Forest, root_is_and: bool) -> int:
    """Trimmed leaf count of the forest placed under one extra gate."""
    size_ = 0
    stack = [(forest.roots, root_is_and, 0, 0)]
    while stack:
        ids, is_and, pos, neg = stack.pop()
        inner = []
        for j in ids:
            if forest.children(j):
                inner.append(j)
                continue
            r = forest.literal_of(j)
            bit = 1 << (r >> 1)
            # under AND the literal must be true, under OR false
            if is_and != bool(r & 1):
                pos |= bit
            else:
                neg |= bit
        if pos & neg:
            continue
        size_ += len(ids) - len(inner)
        for j in inner:
            stack.append((forest.children(j), forest.gate_of(j), pos, neg))
    return size_


def pair_statistics(shapes) -> tuple:
    """(C, N) for a fixed forest given as a sequence of shapes."""
    forest = _Forest(FixedShapeModel((), "forest"), list(shapes), None, 1)
    return _pair_stats(forest)


@dataclass
class ForestStats:
    model: str
    k: int
    trials: int
    seed: object
    sum_ratio: float = 0.0  # sum of N / 2^C
    sum_ratio2: float = 0.0
    sum_L: int = 0
    sum_L2: int = 0
    sum_L3: int = 0
    sum_L4: int = 0
    samples: list | None = None  # (C, N, L) per forest when requested

    @property
    def mean_ratio(self) -> float:
        return self.sum_ratio / self.trials

    @property
    def mean_L(self) -> float:
        return self.sum_L / self.trials

    @property
    def mean_L2(self) -> float:
        return self.sum_L2 / self.trials

    def se_ratio(self) -> float:
        n = self.trials
        var = max(self.sum_ratio2 / n - self.mean_ratio ** 2, 0.0)
        return math.sqrt(var / n)

    def upper_terms_se(self) -> float:
        """Standard error of (2e+1) L + L^2 averaged over forests."""
        n = self.trials
        c = 2 * math.e + 1
        m1, m2 = self.mean_L, self.mean_L2
        m3, m4 = self.sum_L3 / n, self.sum_L4 / n
        second = c * c * m2 + 2 * c * m3 + m4
        first = c * m1 + m2
        return math.sqrt(max(second - first * first, 0.0) / n)

    def to_dict(self) -> dict:
        return {"model": self.model, "k": self.k, "trials": self.trials, "seed": self.seed,
                "E_ratio": self.mean_ratio, "E_L": self.mean_L, "E_L2": self.mean_L2}


def _forest_task(args):
    model, k, seed, lo, hi, keep = args
    fac = StreamFactory(seed)
    hung = model.hung
    acc = [0.0, 0.0, 0, 0, 0, 0]
    samples = [] if keep else None
    for trial in range(lo, hi):
        rng = fac(trial)
        forest = _Forest(hung, model.hung_states(rng), rng, k)
        root_is_and = rng.random() < 0.5
        C, Npairs = _pair_stats(forest)
        L = _forest_trim_size(forest, root_is_and)
        ratio = Npairs / 2.0 ** C if C is not None else 0.0
        acc[0] += ratio
        acc[1] += ratio * ratio
        acc[2] += L
        acc[3] += L * L
        acc[4] += L ** 3
        acc[5] += L ** 4
        if keep:
            samples.append((C, Npairs, L))
    return acc, samples


def forest_stats(model, k: int, N: int, seed, threads: int | None = None,
                 keep_samples: bool = False) -> ForestStats:
    """Pair statistics and trimmed sizes of the forests hung on a spine."""
    m = _as_model(model)
    if not isinstance(m, SpineModel):
        raise TypeError("forest_stats needs a spine model")
    if threads is None:
        threads = default_threads()
    tasks = [(m, k, seed, lo, hi, keep_samples) for lo, hi in chunk_ranges(N, CHUNK)]
    fs = ForestStats(m.name, k, N, seed, samples=[] if keep_samples else None)
    for acc, samples in parallel_map(_forest_task, tasks, threads):
        fs.sum_ratio += acc[0]
        fs.sum_ratio2 += acc[1]
        fs.sum_L += acc[2]
        fs.sum_L2 += acc[3]
        fs.sum_L3 += acc[4]
        fs.sum_L4 += acc[5]
        if keep_samples:
            fs.samples.extend(samples)
    return fs


def theta_true_sandwich(model, k: int, N: int, seed, threads: int | None = None,
                        depth_cap: int = 10**4) -> Report:
    """Compare P_k(True) on a spine with the two forest-moment bounds.

    The lower bound is E[N/2^C]/k and the upper bound ((2e+1)E[L] + E[L^2])/k.
    Every comparison allows three combined standard errors. P_k(True) and
    P_k(False) are estimated from the same trials.
    """
    m = _as_model(model)
    fs = forest_stats(m, k, N, (seed, "forest"), threads)
    ind = mc_indicator(m, k, [BoolFn.true(k), BoolFn.false(k)], N, (seed, "spine"), threads,
                       depth_cap)
    return sandwich_report(ind, fs)


def sandwich_report(ind: IndicatorEstimate, fs: ForestStats) -> Report:
    """The sandwich comparison from an indicator run on True/False and forest statistics."""
    k = ind.k
    if fs.k != k:
        raise ValueError("indicator run and forest statistics use different k")
    T, F = BoolFn.true(k), BoolFn.false(k)
    pt, pf = ind.p(T), ind.p(F)
    st, sf = ind.stderr(T), ind.stderr(F)
    lower = fs.mean_ratio / k
    upper = ((2 * math.e + 1) * fs.mean_L + fs.mean_L2) / k
    s_low = math.hypot(st, fs.se_ratio() / k)
    s_up = math.hypot(st, fs.upper_terms_se() / k)
    ok_low = lower - 3 * s_low <= pt
    ok_up = pt <= upper + 3 * s_up
    ok_sym = abs(pt - pf) <= 4 * math.hypot(st, sf)
    return Report("theta_true_sandwich", ok_low and ok_up,
                  {"k": k, "trials": ind.trials, "p_true": pt, "p_false": pf,
                   "stderr_true": st, "stderr_false": sf, "lower": lower, "upper": upper,
                   "lower_ok": ok_low, "upper_ok": ok_up, "symmetric": ok_sym,
                   "E_ratio": fs.mean_ratio, "E_L": fs.mean_L, "E_L2": fs.mean_L2,
                   "forests": fs.trials, "unclassified": ind.unclassified})


# ---------------------------------------------------------------- scaling

@dataclass
class ScalingReport:
    model: str
    fn: str
    trials: int
    seed: object
    rows: list  # (k, p_hat, stderr, log_k, log_p)
    slope: float | None
    intercept: float | None
    r2: float | None
    excluded: list = field(default_factory=list)
    unclassified: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        lines = ["k,p_hat,stderr,log_k,log_p"]
        for k, p, se, lk, lp in self.rows:
            lines.append(f"{k},{p!r},{se!r},{lk!r},{lp!r}")
        lines.append(f"slope,intercept,r2")
        lines.append(f"{self.slope!r},{self.intercept!r},{self.r2!r}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {"model": self.model, "fn": self.fn, "trials": self.trials, "seed": self.seed,
                "rows": [dict(zip(("k", "p_hat", "stderr", "log_k", "log_p"), r))
                         for r in self.rows],
                "slope": self.slope, "intercept": self.intercept, "r2": self.r2,
                "excluded": self.excluded}


def fit_loglog(ks, ps) -> tuple:
    """Least-squares line through (log k, log p); returns slope, intercept, r^2."""
    xs = [math.log(k) for k in ks]
    ys = [math.log(p) for p in ps]
    slope, intercept = statistics.linear_regression(xs, ys)
    r = statistics.correlation(xs, ys)
    return slope, intercept, r * r


def scaling_exponent(model, f: BoolFn, ks, N: int, seed, threads: int | None = None,
                     depth_cap: int = 10**4) -> ScalingReport:
    """Fit log P_k(f) against log k over the given k values.

    ``f`` has arity k0 and is extended to each k >= k0. A k with no hit is
    reported in ``excluded`` and left out of the fit.
    """
    m = _as_model(model)
    ks = list(ks)
    if any(k < f.arity for k in ks):
        raise ValueError("every k must be at least the arity of f")
    rows, excluded, uncl = [], [], {}
    for k in ks:
        ind = mc_indicator(m, k, [f], N, (seed, k), threads, depth_cap)
        p, se = ind.p(f), ind.stderr(f)
        uncl[k] = ind.unclassified
        if p == 0:
            excluded.append(k)
            warnings.warn(f"no trial produced the target at k={k}; excluded from the fit")
            continue
        rows.append((k, p, se, math.log(k), math.log(p)))
    slope = intercept = r2 = None
    if len(rows) >= 2:
        slope, intercept, r2 = fit_loglog([r[0] for r in rows], [r[1] for r in rows])
    return ScalingReport(m.name, f.encode(), N, seed, rows, slope, intercept, r2, excluded, uncl)


# ---------------------------------------------------------------- repetitions

def _rep_task(args):
    from .trimming import lazy_trim

    model, k, seed, lo, hi, depth_cap = args
    fac = StreamFactory(seed)
    acc = [0, 0, 0, 0]  # hits, sum of sizes, sum of squared sizes, truncated runs
    for trial in range(lo, hi):
        r = lazy_trim(model, k, fac(trial), depth_cap=depth_cap)
        if r.truncated:
            acc[3] += 1
            continue
        acc[0] += r.repetitions >= 1
        acc[1] += r.trim_size
        acc[2] += r.trim_size ** 2
    return acc


def repetition_bound_check(model, k: int, N: int, seed, threads: int | None = None,
                           depth_cap: int = 10**4) -> Report:
    """P(trim has a repetition) against (E|trim|^2 + 2e E|trim|)/k, with 3 sigma slack."""
    if k < 16:
        warnings.warn("the repetition bound is asymptotic; k >= 16 is recommended")
    m = _as_model(model)
    if threads is None:
        threads = default_threads()
    tasks = [(m, k, seed, lo, hi, depth_cap) for lo, hi in chunk_ranges(N, CHUNK)]
    tot = [0, 0, 0, 0]
    for acc in parallel_map(_rep_task, tasks, threads):
        tot = [a + b for a, b in zip(tot, acc)]
    p = tot[0] / N
    se = math.sqrt(p * (1 - p) / N)
    m1, m2 = tot[1] / N, tot[2] / N
    bound = (m2 + 2 * math.e * m1) / k
    return Report("repetition_bound", p <= bound + 3 * se,
                  {"k": k, "trials": N, "p_repetition": p, "stderr": se, "E_trim": m1,
                   "E_trim2": m2, "bound": bound, "truncated": tot[3]})
