"""Constraint propagation that removes provably irrelevant subtrees.

Every node u carries a set of constraints C_u, a partial assignment stored as
two bitmasks over variable indices (``pos``: variables forced to 1, ``neg``:
forced to 0). The root has no constraint. The children of an AND node
inherit C_u plus "this literal is true" for every literal child; children of
an OR node inherit C_u plus "this literal is false". Every child of u sees
the same set, its own label included, so the children of u are either all
consistent or all inconsistent. Inconsistent children are removed and u
becomes a gate-leaf (AND-leaf = False, OR-leaf = True).
"""

from __future__ import annotations

from dataclasses import dataclass

from .boolfn import BoolFn
from .exprtree import AND, OR, Gate, Literal, AndOrTree, eval_tree, literals, n_nodes, size
from .treegen import LazyModel, SpineModel


@dataclass(frozen=True)
class TrimmedTree:
    tree: AndOrTree
    cut_nodes: int  # nodes of the input that were removed

    @property
    def size(self) -> int:
        return trim_size(self)

    def function(self, k: int) -> BoolFn:
        return eval_tree(self.tree, k)


def _contribution(op: str, children) -> tuple[int, int]:
    pos = neg = 0
    for c in children:
        if isinstance(c, Literal):
            bit = 1 << c.var
            # under AND the literal must be true, under OR false
            wants_true = (op == AND)
            if c.negated:
                wants_true = not wants_true
            if wants_true:
                pos |= bit
            else:
                neg |= bit
    return pos, neg


def trim(tree: AndOrTree) -> TrimmedTree:
    """Apply the trimming procedure to a finite labelled tree."""
    cut = 0
    # iterative post-order; frames hold (node, pos, neg, expanded)
    out = []
    stack = [(tree, 0, 0, False)]
    while stack:
        node, pos, neg, expanded = stack.pop()
        if isinstance(node, Literal) or not node.children:
            out.append(node)
            continue
        if expanded:
            m = len(node.children)
            kids = tuple(out[-m:])
            del out[-m:]
            out.append(Gate(node.op, kids))
            continue
        dp, dn = _contribution(node.op, node.children)
        cpos, cneg = pos | dp, neg | dn
        if cpos & cneg:
            cut += n_nodes(node) - 1
            out.append(Gate(node.op, ()))
            continue
        stack.append((node, pos, neg, True))
        for c in reversed(node.children):
            stack.append((c, cpos, cneg, False))
    return TrimmedTree(out[0], cut)


def trim_size(t) -> int:
    """Number of literal leaves (gate-leaves count zero)."""
    if isinstance(t, TrimmedTree):
        t = t.tree
    return size(t)


def repetitions(t) -> int:
    """Literal leaves minus distinct variables among them."""
    if isinstance(t, TrimmedTree):
        t = t.tree
    lits = literals(t)
    return len(lits) - len({lit.var for lit in lits})


def report(tree: AndOrTree, k: int | None = None) -> dict:
    """Summary used by the command line ``trim`` command."""
    if k is None:
        k = max([lit.var for lit in literals(tree)] or [1])
    tt = trim(tree)
    f = eval_tree(tree, k)
    return {
        "input_size": size(tree),
        "trim_size": trim_size(tt),
        "repetitions_before": repetitions(tree),
        "repetitions_after": repetitions(tt),
        "cut_nodes": tt.cut_nodes,
        "function": str(f),
    }


# ---------------------------------------------------------------- lazy trimming

@dataclass
class LazyTrimResult:
    trim_size: int
    repetitions: int
    depth: int  # spine levels revealed (0 for finite models)
    truncated: bool  # depth cap reached before the trimmed tree closed
    tree: AndOrTree | None = None


class _Labeller:
    """Random labels; ``LabelledTreeModel`` overrides with fixed ones."""

    def __init__(self, k, rng):
        self.two_k = 2 * k
        self.rng = rng

    def gate(self, state):
        return AND if self.rng.random() < 0.5 else OR

    def literal(self, state):
        r = int(self.rng.random() * self.two_k)
        return Literal(r // 2 + 1, bool(r & 1))


class LabelledTreeModel(LazyModel):
    """A fixed labelled tree seen as a lazy model (for cross-checks)."""

    def __init__(self, tree: AndOrTree):
        self.tree = tree

    def root_state(self, rng):
        return self.tree

    def children(self, node, rng):
        return () if isinstance(node, Literal) else node.children

    class labeller:
        def __init__(self, k, rng):
            pass

        def gate(self, node):
            return node.op

        def literal(self, node):
            return node


def lazy_trim(model, k: int, rng, depth_cap: int = 10**4, node_cap: int = 10**7,
              keep_tree: bool = False) -> LazyTrimResult:
    """Trim a random labelled tree while revealing only consistent nodes.

    ``model`` is a :class:`LazyModel` (finite tree) or a :class:`SpineModel`
    (the trimmed infinite tree is finite almost surely; ``depth_cap`` bounds
    the number of spine levels revealed). Labels are drawn when a node is
    reached, so cut subtrees are never generated.
    """
    lab = model.labeller(k, rng) if isinstance(model, LabelledTreeModel) else _Labeller(k, rng)
    if isinstance(model, SpineModel):
        return _lazy_trim_spine(model, k, rng, lab, depth_cap, node_cap, keep_tree)
    root = model.root_state(rng)
    kids = model.children(root, rng)
    if not kids:
        lit = lab.literal(root)
        return LazyTrimResult(1, 0, 0, False, lit if keep_tree else None)
    count = [0, {}]
    tree = _trim_finite(model, root, kids, 0, 0, rng, lab, count, node_cap, keep_tree)
    n = count[0]
    return LazyTrimResult(n, n - len(count[1]), 0, False, tree)


def _record(count, lit):
    count[0] += 1
    count[1][lit.var] = True


def _trim_finite(model, state, kids, pos, neg, rng, lab, count, node_cap, keep_tree):
    """Trim the subtree at an internal node whose constraint (pos, neg) is consistent.

    ``kids`` are the already revealed child states. Iterative to cope with
    deep trees. Returns the trimmed subtree when ``keep_tree`` is set.
    """
    revealed = 0
    stack = [_open(model, state, kids, pos, neg, rng, lab)]
    result = None
    while stack:
        fr = stack[-1]
        op, entries, idx, built, cpos, cneg = fr
        if result is not None:
            built.append(result)
            result = None
        if cpos & cneg or idx == len(entries):
            stack.pop()
            if keep_tree:
                result = Gate(op, () if cpos & cneg else tuple(built))
            continue
        fr[2] = idx + 1
        kind, payload, ckids = entries[idx]
        if kind == "lit":
            _record(count, payload)
            if keep_tree:
                result = payload
            continue
        revealed += 1
        if revealed > node_cap:
            raise RuntimeError("node cap exceeded during trimming")
        stack.append(_open(model, payload, ckids, cpos, cneg, rng, lab))
    return result

def _open(model, state, kids, pos, neg, rng, lab):
    op = lab.gate(state)
    entries = []
    for c in kids:
        ck = model.children(c, rng)
        if ck:
            entries.append(("int", c, ck))
        else:
            entries.append(("lit", lab.literal(c), None))
    dp, dn = _contribution(op, [e[1] for e in entries if e[0] == "lit"])
    return [op, entries, 0, [], pos | dp, neg | dn]


def _lazy_trim_spine(spine: SpineModel, k, rng, lab, depth_cap, node_cap, keep_tree):
    hung = spine.hung
    count = [0, {}]
    pos = neg = 0
    depth = 0
    spine_gates = []
    hung_trees = []
    while True:
        if depth >= depth_cap:
            n = count[0]
            return LazyTrimResult(n, n - len(count[1]), depth, True, None)
        depth += 1
        op = lab.gate(None)
        states = spine.hung_states(rng)
        entries = []
        lits = []
        for s in states:
            ck = hung.children(s, rng)
            if ck:
                entries.append((s, ck))
            else:
                lit = lab.literal(s)
                lits.append(lit)
                entries.append((lit, None))
        dp, dn = _contribution(op, lits)
        pos |= dp
        neg |= dn
        spine_gates.append(op)
        if pos & neg:
            # every child of this spine node, the spine child included, is cut
            hung_trees.append(None)
            break
        level = []
        for s, ck in entries:
            if ck is None:
                _record(count, s)
                level.append(s)
            else:
                level.append(_trim_finite(hung, s, ck, pos, neg, rng, lab, count, node_cap, keep_tree))
        hung_trees.append(level)
    n = count[0]
    tree = None
    if keep_tree:
        # rebuild bottom-up; the cut level is a gate-leaf; hung trees go first
        tree = Gate(spine_gates[-1], ())
        for op, level in zip(reversed(spine_gates[:-1]), reversed(hung_trees[:-1])):
            tree = Gate(op, tuple(level) + (tree,))
    return LazyTrimResult(n, n - len(count[1]), depth, False, tree)
