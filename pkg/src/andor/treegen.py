"""Random tree shapes: Galton-Watson trees, their spines, BSTs, alpha trees.

Two kinds of objects live here.

* Samplers that return a complete :data:`~andor.exprtree.TreeShape`.
* Lazy models used by the Monte Carlo evaluators. A lazy model describes a
  random tree through ``root_state(rng)`` and ``children(state, rng)``; a
  node is expanded only when an evaluator asks for it. Because the subtrees
  of distinct nodes are independent in every model below, revealing nodes
  in any order (or never) does not change the law of what is revealed.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, lgamma, log

from .exprtree import LEAF, TreeShape


class NodeCapExceeded(RuntimeError):
    """A sampler generated more nodes than allowed."""


class BudgetExhausted(RuntimeError):
    """Rejection sampling ran out of its node-generation budget."""


class UnattainableSize(ValueError):
    pass


# ---------------------------------------------------------------- offspring laws

@dataclass(frozen=True)
class OffspringDist:
    """Offspring law ``p[i] = P(xi = i)`` with finite (possibly truncated) support."""

    p: tuple
    critical: bool = True
    name: str = "gw"
    _cum: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        p = tuple(float(x) for x in self.p)
        object.__setattr__(self, "p", p)
        if any(x < 0 for x in p):
            raise ValueError("negative offspring probability")
        total = math.fsum(p)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"offspring probabilities sum to {total}, not 1")
        if len(p) > 1 and p[1] != 0.0:
            raise ValueError("p_1 must be 0 (no unary nodes)")
        if self.critical and abs(self.mean() - 1.0) > 1e-9:
            raise ValueError(f"flagged critical but mean is {self.mean()}")
        cum = []
        acc = 0.0
        for x in p:
            acc += x
            cum.append(acc)
        object.__setattr__(self, "_cum", tuple(cum))

    def mean(self) -> float:
        return math.fsum(i * x for i, x in enumerate(self.p))

    def second_moment(self) -> float:
        return math.fsum(i * i * x for i, x in enumerate(self.p))

    def support(self) -> list[int]:
        return [i for i, x in enumerate(self.p) if x > 0]

    def size_biased(self) -> "OffspringDist":
        """Law of xi-hat: ``P(xi-hat = i) = i * p_i`` (needs mean 1)."""
        m = self.mean()
        return OffspringDist(tuple(i * x / m for i, x in enumerate(self.p)),
                             critical=False, name=self.name + "^")

    def draw(self, rng) -> int:
        i = bisect.bisect_right(self._cum, rng.random())
        return min(i, len(self.p) - 1)

    def to_json(self) -> dict:
        return {"p": {str(i): x for i, x in enumerate(self.p) if x > 0},
                "critical": self.critical}

    @classmethod
    def from_json(cls, obj: dict, name: str = "gw") -> "OffspringDist":
        if "p" not in obj or not isinstance(obj["p"], dict):
            raise ValueError("offspring config needs an object field 'p'")
        raw = {int(k): float(v) for k, v in obj["p"].items()}
        if not raw or min(raw) < 0:
            raise ValueError("offspring arities must be non-negative integers")
        p = [0.0] * (max(raw) + 1)
        for i, x in raw.items():
            p[i] = x
        return cls(tuple(p), critical=bool(obj.get("critical", False)), name=name)

    @classmethod
    def from_file(cls, path: str) -> "OffspringDist":
        with open(path) as fh:
            return cls.from_json(json.load(fh), name=f"gw:{path}")


CATALAN = OffspringDist((0.5, 0.0, 0.5), critical=True, name="catalan")


def associative_offspring(k: int, tol: float = 1e-15) -> OffspringDist:
    """Critical offspring law of the associative model with k variables.

    Weights ``w_0 = k``, ``w_1 = 0``, ``w_i = 1`` tilted by ``r**i`` with
    ``r = sqrt(k) / (1 + sqrt(k))``. The geometric tail is cut once its
    remaining mass falls below ``tol``.
    """
    if k < 1:
        raise ValueError("k must be positive")
    s = math.sqrt(k)
    r = s / (1 + s)
    c = 1.0 / (k * (1 + 1 / (1 + s)))
    p = [c * k, 0.0]
    i = 2
    while True:
        term = c * r ** i
        p.append(term)
        tail = c * r ** (i + 1) / (1 - r)
        if tail < tol:
            break
        i += 1
    return OffspringDist(tuple(p), critical=True, name=f"assoc:{k}")


# ---------------------------------------------------------------- GW samplers

def _build_preorder(counts) -> TreeShape:
    """Tree from its preorder child-count (Lukasiewicz) word."""
    stack = []
    for c in reversed(counts):
        if c == 0:
            stack.append(LEAF)
        else:
            stack.append(tuple(stack.pop() for _ in range(c)))
    if len(stack) != 1:
        raise ValueError("not a valid Lukasiewicz word")
    return stack[0]


def sample_gw(d: OffspringDist, rng, node_cap: int = 10**6) -> TreeShape:
    """Unconditioned Galton-Watson tree; raises NodeCapExceeded past node_cap."""
    counts = []
    need = 1
    draw = d.draw
    while need:
        c = draw(rng)
        counts.append(c)
        need += c - 1
        if len(counts) > node_cap:
            raise NodeCapExceeded(f"more than {node_cap} nodes")
    return _build_preorder(counts)


def _representable(target: int, parts: list[int]) -> bool:
    if target < 0:
        return False
    ok = [False] * (target + 1)
    ok[0] = True
    for t in range(1, target + 1):
        ok[t] = any(p <= t and ok[t - p] for p in parts)
    return ok[target]


def size_attainable(d: OffspringDist, n: int, mode: str = "leaves") -> bool:
    """Whether a tree of the given size has positive probability under d."""
    if n < 1 or d.p[0] == 0:
        return False
    sup = [i for i in d.support() if i >= 2]
    if mode == "leaves":
        # leaves = 1 + sum over internal nodes of (arity - 1)
        return _representable(n - 1, [i - 1 for i in sup])
    if mode == "total_nodes":
        # nodes - 1 = number of edges = sum of internal arities
        return _representable(n - 1, sup)
    raise ValueError(f"unknown size mode {mode!r}")


def sample_gw_conditioned(d: OffspringDist, n: int, mode: str = "leaves", rng=None,
                          method: str = "rejection", budget: int = 10**7) -> TreeShape:
    """GW tree conditioned on its size.

    ``method="rejection"`` resamples unconditioned trees, stopping each
    attempt as soon as it is too large, until one has the right size; node
    generations across attempts are limited by ``budget``.
    ``method="cycle"`` (total_nodes mode, or Catalan-type leaves mode) draws
    n i.i.d. offspring counts conditioned on summing to n-1 and rotates the
    word to its unique valid cyclic shift; it is exact and linear in n.
    """
    if not size_attainable(d, n, mode):
        raise UnattainableSize(f"size {n} ({mode}) has probability 0")
    if method == "cycle":
        if mode == "leaves":
            nodes = _nodes_for_leaves(d, n)
            if nodes is None:
                raise ValueError("cycle method in leaves mode needs a single internal arity")
            return _cycle_sample(d, nodes, rng, budget)
        return _cycle_sample(d, n, rng, budget)
    if method != "rejection":
        raise ValueError(f"unknown method {method!r}")
    spent = 0
    draw = d.draw
    while spent < budget:
        counts = []
        need = 1
        leaves = 0
        ok = True
        while need:
            c = draw(rng)
            counts.append(c)
            need += c - 1
            if c == 0:
                leaves += 1
            if (mode == "leaves" and leaves > n) or (mode == "total_nodes" and len(counts) > n):
                ok = False
                break
        spent += len(counts)
        if not ok:
            continue
        size = leaves if mode == "leaves" else len(counts)
        if size == n:
            return _build_preorder(counts)
    raise BudgetExhausted(f"no tree of size {n} within {budget} node generations")


def _nodes_for_leaves(d: OffspringDist, n: int):
    sup = [i for i in d.support() if i >= 2]
    if len(sup) != 1:
        return None
    a = sup[0]
    internal, rem = divmod(n - 1, a - 1)
    if rem:
        return None
    return n + internal


def _cycle_sample(d: OffspringDist, n: int, rng, budget: int) -> TreeShape:
    spent = 0
    draw = d.draw
    while spent < budget:
        word = [draw(rng) for _ in range(n)]
        spent += n
        if sum(word) != n - 1:
            continue
        # the unique rotation whose partial sums of (c - 1) stay >= 0 until the end
        s = 0
        best = 0
        best_i = 0
        for i, c in enumerate(word):
            s += c - 1
            if s < best:
                best = s
                best_i = i + 1
        rot = word[best_i:] + word[:best_i]
        return _build_preorder(rot)
    raise BudgetExhausted(f"no word of length {n} within {budget} draws")


# ---------------------------------------------------------------- other shapes

def balanced_binary(h: int) -> TreeShape:
    if h < 0:
        raise ValueError("height must be non-negative")
    t = LEAF
    for _ in range(h):
        t = (t, t)
    return t


def sample_bst(n: int, rng) -> TreeShape:
    """Random binary search tree on n-1 keys, with its n external nodes as leaves.

    Inserting a uniform random permutation makes the root's left subtree hold
    a uniform number of the n external positions in 1..n-1, and the subtrees
    are again independent random BSTs; this is sampled directly.
    """
    if n < 1:
        raise ValueError("n must be positive")
    # iterative post-order build over sizes
    out = []
    stack = [(n, False)]
    while stack:
        m, done = stack.pop()
        if m == 1:
            out.append(LEAF)
        elif done:
            right = out.pop()
            left = out.pop()
            out.append((left, right))
        else:
            j = 1 + int(rng.random() * (m - 1))
            stack.append((m, True))
            stack.append((m - j, False))
            stack.append((j, False))
    return out[0]


def sample_alpha(n: int, alpha: float, rng) -> TreeShape:
    """Ford alpha tree with n leaves grown by weighted edge insertion.

    Each step picks an edge with weight alpha (internal edges, the edge above
    the root included) or 1-alpha (edges ending at a leaf), subdivides it,
    and hangs the new leaf from the new node on a uniformly chosen side.
    Selection is cumulative-weight inversion over the internal block
    followed by the external block.
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    if n < 1:
        raise ValueError("n must be positive")
    # node 0 is the first leaf; children[v] is None for leaves
    parent = [-1]
    children: list = [None]
    leaves = [0]
    internals: list[int] = []
    root = 0
    for m in range(1, n):
        # m leaves, m-1 internal nodes; the edge above node v is "edge v"
        n_int_edges = len(internals) if m > 1 else 0
        if m == 1:
            target = 0  # only one edge exists
        else:
            w_int = alpha * n_int_edges
            u = rng.random() * (w_int + (1 - alpha) * m)
            if u < w_int:
                target = internals[min(int(u / alpha), n_int_edges - 1)]
            else:
                target = leaves[min(int((u - w_int) / (1 - alpha)), m - 1)]
        new_leaf = len(parent)
        new_node = new_leaf + 1
        parent.extend([new_node, parent[target]])
        children.extend([None, None])
        if rng.random() < 0.5:
            children[new_node] = [target, new_leaf]
        else:
            children[new_node] = [new_leaf, target]
        p = parent[target]
        if p == -1:
            root = new_node
        else:
            kids = children[p]
            kids[kids.index(target)] = new_node
        parent[target] = new_node
        leaves.append(new_leaf)
        internals.append(new_node)
    return _to_shape(root, children)


def _to_shape(root, children) -> TreeShape:
    out = []
    stack = [(root, False)]
    while stack:
        v, done = stack.pop()
        kids = children[v]
        if kids is None:
            out.append(LEAF)
        elif done:
            vals = out[-len(kids):]
            del out[-len(kids):]
            out.append(tuple(vals))
        else:
            stack.append((v, True))
            for c in reversed(kids):
                stack.append((c, False))
    return out[0]


# ---------------------------------------------------------------- split laws

def _log_gamma_ratio(y: float, u: float, v: float) -> float:
    """log Gamma(y+u) - log Gamma(y+v), accurate also for huge y."""
    if y < 1e4:
        return lgamma(y + u) - lgamma(y + v)

    def b(x):
        return (x * x - x + 1 / 6,
                x ** 3 - 1.5 * x * x + 0.5 * x,
                x ** 4 - 2 * x ** 3 + x * x - 1 / 30,
                x ** 5 - 2.5 * x ** 4 + 5 / 3 * x ** 3 - x / 6)

    bu, bv = b(u), b(v)
    s = (u - v) * log(y)
    for idx, n in enumerate((2, 3, 4, 5)):
        s += (-1) ** n * (bu[idx] - bv[idx]) / (n * (n - 1) * y ** (n - 1))
    return s


def alpha_split_pmf(n: int, alpha: float, j: int) -> float:
    """Probability that the left subtree of the size-n alpha tree has j leaves."""
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    if n < 2 or not 1 <= j <= n - 1:
        raise ValueError("need n >= 2 and 1 <= j <= n-1")
    if n == 2:
        return 1.0
    if alpha == 1.0:
        return 0.5 if j in (1, n - 1) else 0.0
    if n < 1000:
        lg = lgamma(j - alpha) + lgamma(n - j - alpha) - lgamma(n - alpha) - lgamma(1 - alpha)
        return math.exp(lg) * (alpha / 2 * comb(n, j) + (1 - 2 * alpha) * comb(n - 2, j - 1))
    # a(x) = Gamma(x - alpha) / Gamma(x + 1) form avoids huge binomials
    la = (_log_gamma_ratio(j, -alpha, 1) + _log_gamma_ratio(n - j, -alpha, 1)
          - _log_gamma_ratio(n, -alpha, 1) - lgamma(1 - alpha))
    return math.exp(la) * (alpha / 2 + (1 - 2 * alpha) * j * (n - j) / (n * (n - 1)))


def partitions(n: int, max_part: int | None = None):
    """Partitions of n as non-increasing tuples."""
    if max_part is None:
        max_part = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in partitions(n - first, first):
            yield (first,) + rest


def alpha_gamma_split_pmf(n: int, alpha: float, gamma: float, parts) -> float:
    """Split probability of the alpha-gamma model for a partition of n into >= 2 blocks."""
    if not (0 < gamma <= alpha <= 1):
        raise ValueError("need 0 < gamma <= alpha <= 1")
    parts = tuple(parts)
    if any(p < 1 for p in parts) or list(parts) != sorted(parts, reverse=True):
        raise ValueError("partition must be non-increasing positive integers")
    if sum(parts) != n:
        raise ValueError("partition does not sum to n")
    k = len(parts)
    if k < 2 or n < 2:
        raise ValueError("a split needs at least two blocks")
    s = sum(parts) ** 2 - sum(p * p for p in parts)  # sum over i != j of n_i n_j
    shape = gamma + (1 - alpha - gamma) / (n * (n - 1)) * s
    multi = factorial(n)
    for p in parts:
        multi //= factorial(p)
    mult_fact = 1
    for v in set(parts):
        mult_fact *= factorial(parts.count(v))
    # Gamma(k-1-g/a)/Gamma(1-g/a) as a finite product, valid at gamma == alpha
    ratio = 1.0
    for i in range(1, k - 1):
        ratio *= i - gamma / alpha
    if alpha == 1.0:
        # Gamma(0) limit: only (n-m, 1, ..., 1) survives; the all-ones
        # partition pairs the pole of Gamma(1-alpha) with shape = 1-alpha
        big = [p for p in parts if p >= 2]
        if len(big) > 1:
            return 0.0
        if not big:
            return multi / mult_fact * ratio * math.exp(-lgamma(n - 1))
        return shape * multi / mult_fact * ratio * math.exp(lgamma(big[0] - 1) - lgamma(n - 1))
    lg = lgamma(1 - alpha) - lgamma(n - alpha)
    for p in parts:
        lg += lgamma(p - alpha) - lgamma(1 - alpha)
    return shape * multi / mult_fact * alpha ** (k - 2) * ratio * math.exp(lg)


def unordered_binary_counts(nmax: int) -> list[int]:
    """Wedderburn-Etherington numbers y_1..y_nmax (unlabelled non-plane binary trees)."""
    if nmax < 1:
        raise ValueError("nmax must be positive")
    y = [0, 1]
    for n in range(2, nmax + 1):
        tot = 0
        for i in range(1, (n + 1) // 2):
            tot += y[i] * y[n - i]
        if n % 2 == 0:
            h = y[n // 2]
            tot += h * (h + 1) // 2
        y.append(tot)
    return y[1:]


def unordered_split_pmf(n: int, i: int) -> Fraction:
    """P(smaller root subtree has i leaves) for uniform unordered binary trees, i < n/2."""
    if not (1 <= i and 2 * i < n):
        raise ValueError("defined only for 1 <= i < n/2")
    y = _we_counts(n)
    return Fraction(y[n - i] * y[i], y[n])


@lru_cache(maxsize=64)
def _we_counts(n: int) -> tuple:
    return (0,) + tuple(unordered_binary_counts(n))


# ---------------------------------------------------------------- Sibuya law

def sibuya_survival(j: int, alpha: float) -> float:
    """P(J > j) for the Sibuya(alpha) law, the small root split of huge alpha trees."""
    if j <= 0:
        return 1.0
    if alpha == 1.0:
        return 0.0
    return math.exp(_log_gamma_ratio(j, 1 - alpha, 1) - lgamma(1 - alpha))


def sibuya_pmf(j: int, alpha: float) -> float:
    if j < 1:
        return 0.0
    if alpha == 1.0:
        return 1.0 if j == 1 else 0.0
    return alpha * math.exp(_log_gamma_ratio(j, -alpha, 1) - lgamma(1 - alpha))


def sample_sibuya(alpha: float, rng) -> int:
    """Inversion sampling; exact product recursion for small j, bisection beyond."""
    u = rng.random()
    s = 1.0
    j = 0
    while j < 2000:
        j += 1
        s *= (j - alpha) / j
        if s < u:
            return j
    if u <= 0.0:
        u = 2.0 ** -60
    lo = j
    hi = j * 2
    while sibuya_survival(hi, alpha) >= u:
        lo = hi
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if sibuya_survival(mid, alpha) >= u:
            lo = mid
        else:
            hi = mid
    return hi


# ---------------------------------------------------------------- lazy models

class LazyModel:
    """Random finite tree revealed on demand.

    Subclasses implement ``root_state(rng)`` and ``children(state, rng)``;
    an empty tuple of children means a leaf.
    """

    name = "lazy"

    def root_state(self, rng):
        raise NotImplementedError

    def children(self, state, rng) -> tuple:
        raise NotImplementedError

    def sample_shape(self, rng, node_cap: int = 10**6) -> TreeShape:
        """Reveal the whole tree."""
        out = []
        stack = [(self.root_state(rng), None)]
        count = 0
        while stack:
            st, kids = stack.pop()
            if kids is None:
                count += 1
                if count > node_cap:
                    raise NodeCapExceeded(f"more than {node_cap} nodes")
                kids = self.children(st, rng)
                if not kids:
                    out.append(LEAF)
                    continue
                stack.append((st, kids))
                for c in reversed(kids):
                    stack.append((c, None))
            else:
                vals = out[-len(kids):]
                del out[-len(kids):]
                out.append(tuple(vals))
        return out[0]


class GWModel(LazyModel):
    """Unconditioned Galton-Watson tree; every node state is None."""

    def __init__(self, d: OffspringDist):
        self.d = d
        self.name = d.name

    def root_state(self, rng):
        return None

    def children(self, state, rng):
        return (None,) * self.d.draw(rng)


class BSTModel(LazyModel):
    def __init__(self, n: int):
        if n < 1:
            raise ValueError("n must be positive")
        self.n = n
        self.name = f"bst:{n}"

    def root_state(self, rng):
        return self.n

    def children(self, m, rng):
        if m == 1:
            return ()
        j = 1 + int(rng.random() * (m - 1))
        return (j, m - j)


class BalancedModel(LazyModel):
    def __init__(self, h: int):
        if h < 0:
            raise ValueError("height must be non-negative")
        self.h = h
        self.name = f"balanced:{h}"

    def root_state(self, rng):
        return self.h

    def children(self, h, rng):
        return () if h == 0 else (h - 1, h - 1)


class FixedShapeModel(LazyModel):
    def __init__(self, shape: TreeShape, name: str = "fixed"):
        self.shape = shape
        self.name = name

    def root_state(self, rng):
        return self.shape

    def children(self, node, rng):
        return node


class ShapeSamplerModel(LazyModel):
    """Draw a full shape with ``sampler(rng)`` at the root, then walk it."""

    def __init__(self, sampler, name: str):
        self.sampler = sampler
        self.name = name

    def root_state(self, rng):
        return self.sampler(rng)

    def children(self, node, rng):
        return node


class AlphaSplitter:
    """Samples root splits of alpha trees of any size.

    Small sizes use a cached inversion table of the exact split law. Larger
    sizes use rejection from a Sibuya proposal for the smaller block,
    followed by a fair coin for its side.
    """

    TABLE_MAX = 256

    def __init__(self, alpha: float):
        if not 0 < alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        self.alpha = alpha
        self._tables: dict[int, list[float]] = {}

    def _table(self, m):
        t = self._tables.get(m)
        if t is None:
            acc = 0.0
            t = []
            for j in range(1, m):
                acc += alpha_split_pmf(m, self.alpha, j)
                t.append(acc)
            self._tables[m] = t
        return t

    def split(self, m: int, rng) -> tuple[int, int]:
        a = self.alpha
        if m <= self.TABLE_MAX or a == 1.0:
            if a == 1.0 and m > 2:
                return (1, m - 1) if rng.random() < 0.5 else (m - 1, 1)
            t = self._table(m)
            j = bisect.bisect_right(t, rng.random() * t[-1]) + 1
            j = min(j, m - 1)
            return (j, m - j)
        half = m // 2
        lam = _log_gamma_ratio(m, -a, 1)
        # bound on target/proposal over s <= m/2
        ratio_a = math.exp(_log_gamma_ratio(m - half, -a, 1) - lam)
        bmax = a / 2 + max(0.0, 1 - 2 * a) * m / (4 * (m - 1))
        bound = (2 / a) * ratio_a * bmax
        while True:
            s = sample_sibuya(a, rng)
            if s > half:
                continue
            w = (2 / a) * math.exp(_log_gamma_ratio(m - s, -a, 1) - lam) * (
                a / 2 + (1 - 2 * a) * s * (m - s) / (m * (m - 1)))
            if 2 * s == m:
                w /= 2
            if rng.random() * bound < w:
                break
        return (s, m - s) if rng.random() < 0.5 else (m - s, s)


class AlphaModel(LazyModel):
    """Alpha tree with n leaves as a Markov branching tree (exact split law)."""

    def __init__(self, n: int, alpha: float, splitter: AlphaSplitter | None = None):
        self.n = n
        self.alpha = alpha
        self.splitter = splitter or AlphaSplitter(alpha)
        self.name = f"alpha:{alpha}:{n}"

    def root_state(self, rng):
        return self.n

    def children(self, m, rng):
        if m == 1:
            return ()
        return self.splitter.split(m, rng)


class SpineModel:
    """Infinite tree with one end: a spine u_0, u_1, ... with finite forests hung on it.

    ``hung_states(rng)`` draws the roots of the forest at the next spine node
    (states of ``self.hung``). ``level(rng)`` additionally returns the
    position of the spine child among all children of that spine node.
    """

    name = "spine"
    hung: LazyModel

    def hung_states(self, rng) -> tuple:
        raise NotImplementedError

    def level(self, rng):
        hs = self.hung_states(rng)
        pos = int(rng.random() * (len(hs) + 1))
        return hs, pos


class GWSpine(SpineModel):
    """Size-biased GW spine: spine nodes have xi-hat children."""

    def __init__(self, d: OffspringDist):
        if not d.critical:
            raise ValueError("spine needs a critical offspring law")
        self.d = d
        self.hat = d.size_biased()
        self.hung = GWModel(d)
        self.name = f"spine:{d.name}"

    def hung_states(self, rng):
        return (None,) * (self.hat.draw(rng) - 1)


class AlphaSpine(SpineModel):
    """Local limit of alpha trees: one hung alpha tree of Sibuya size per level."""

    def __init__(self, alpha: float):
        self.alpha = alpha
        self.hung = AlphaModel(1, alpha)
        self.name = f"spine:alpha:{alpha}"

    def hung_states(self, rng):
        return (sample_sibuya(self.alpha, rng),)


def spine_generator(d: OffspringDist, rng, depth: int, node_cap: int = 10**6):
    """Yield ``depth`` spine levels as (hung shapes, spine child position)."""
    sp = GWSpine(d)
    for _ in range(depth):
        hs, pos = sp.level(rng)
        yield tuple(sp.hung.sample_shape(rng, node_cap) for _ in hs), pos


# ---------------------------------------------------------------- presets

FINITE_PRESETS = ("catalan", "bst", "balanced", "alpha:<a>", "assoc:<k>", "gw:<file>")


def parse_offspring_preset(name: str) -> OffspringDist:
    if name == "catalan":
        return CATALAN
    if name.startswith("assoc:"):
        return associative_offspring(int(name.split(":", 1)[1]))
    if name.startswith("gw:"):
        return OffspringDist.from_file(name.split(":", 1)[1])
    raise ValueError(f"not a Galton-Watson preset: {name!r}")


def make_spine(name: str) -> SpineModel:
    """``spine:catalan``, ``spine:assoc:<k>``, ``spine:gw:<file>``, ``spine:alpha:<a>``."""
    if not name.startswith("spine:"):
        raise ValueError(f"not a spine preset: {name!r}")
    base = name[len("spine:"):]
    if base.startswith("alpha:"):
        return AlphaSpine(_parse_alpha(base))
    return GWSpine(parse_offspring_preset(base))


def _parse_alpha(base: str) -> float:
    try:
        a = float(base.split(":", 1)[1])
    except (IndexError, ValueError):
        raise ValueError(f"bad alpha preset {base!r}") from None
    if not 0 < a <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    return a


def make_finite(name: str, n: int | None = None, h: int | None = None,
                size_mode: str | None = None) -> LazyModel:
    """Finite-tree preset as a lazy model.

    GW-type presets (catalan, assoc, gw) are conditioned on size n when n is
    given and unconditioned otherwise. Catalan and gw count leaves by
    default, assoc counts all nodes.
    """
    if name == "bst":
        if n is None:
            raise ValueError("bst needs --n")
        return BSTModel(n)
    if name == "balanced":
        if h is None:
            raise ValueError("balanced needs --height")
        return BalancedModel(h)
    if name.startswith("alpha:"):
        if n is None:
            raise ValueError("alpha needs --n")
        return AlphaModel(n, _parse_alpha(name))
    d = parse_offspring_preset(name)
    if n is None:
        return GWModel(d)
    mode = size_mode or ("total_nodes" if name.startswith("assoc:") else "leaves")
    if not size_attainable(d, n, mode):
        raise UnattainableSize(f"size {n} ({mode}) unattainable for {name}")
    method = "cycle" if (mode == "total_nodes" or _nodes_for_leaves(d, n)) else "rejection"

    return ShapeSamplerModel(_ConditionedSampler(d, n, mode, method), f"{name}:{n}")


@dataclass(frozen=True)
class _ConditionedSampler:
    """Picklable closure over ``sample_gw_conditioned`` (worker processes need it)."""

    d: OffspringDist
    n: int
    mode: str
    method: str

    def __call__(self, rng):
        return sample_gw_conditioned(self.d, self.n, self.mode, rng, method=self.method)


def min_leaf_depth(model: LazyModel, rng, node_cap: int = 10**7) -> int:
    """Saturation level of a lazily revealed tree (breadth-first, stops at the first leaf)."""
    level = [model.root_state(rng)]
    depth = 0
    seen = 0
    while True:
        nxt = []
        for st in level:
            kids = model.children(st, rng)
            if not kids:
                return depth
            nxt.extend(kids)
        seen += len(nxt)
        if seen > node_cap:
            raise NodeCapExceeded(f"more than {node_cap} nodes")
        level = nxt
        depth += 1
