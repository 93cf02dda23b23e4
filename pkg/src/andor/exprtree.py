"""And/or trees: shapes, labelled trees, parsing and evaluation.

Shapes are nested tuples: a leaf is ``()`` and an internal node is the tuple
of its children. Labelled trees use two node types, :class:`Literal` and
:class:`Gate`. A gate with no children is a *gate-leaf* (only produced by
trimming): an AND gate-leaf computes False and an OR gate-leaf computes True.
"""

from __future__ import annotations

import random
from typing import NamedTuple, Union

from .boolfn import BoolFn, full_mask, literal_tables

AND = "&"
OR = "|"

TreeShape = tuple  # recursive: tuple[TreeShape, ...]; () is a leaf
LEAF: TreeShape = ()


class Literal(NamedTuple):
    var: int
    negated: bool = False

    def __str__(self):
        return ("~" if self.negated else "") + f"x{self.var}"


class Gate(NamedTuple):
    op: str
    children: tuple

    def __str__(self):
        return serialize(self)


AndOrTree = Union[Literal, Gate]


class ParseError(ValueError):
    """Syntax error in an expression; ``pos`` is the 0-based offset."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.message = message
        self.pos = pos


class EvalArityError(ValueError):
    pass


# ---------------------------------------------------------------- shapes

def is_leaf(node) -> bool:
    if isinstance(node, Literal):
        return True
    if isinstance(node, Gate):
        return False
    return len(node) == 0


def _kids(node):
    if isinstance(node, Gate):
        return node.children
    if isinstance(node, Literal):
        return ()
    return node


def fold(t, leaf_fn, node_fn):
    """Post-order fold without recursion (trees can be thousands deep).

    ``leaf_fn(node)`` handles nodes without children, ``node_fn(node, vals)``
    combines the folded children of an internal node.
    """
    out = []
    stack = [(t, False)]
    while stack:
        node, done = stack.pop()
        kids = _kids(node)
        if not kids:
            out.append(leaf_fn(node))
        elif done:
            m = len(kids)
            vals = out[-m:]
            del out[-m:]
            out.append(node_fn(node, vals))
        else:
            stack.append((node, True))
            for c in reversed(kids):
                stack.append((c, False))
    return out[0]


def shape_of(tree: AndOrTree) -> TreeShape:
    """Forget the labels. Gate-leaves become ordinary leaves."""
    return fold(tree, lambda n: LEAF, lambda n, vals: tuple(vals))


def size(t) -> int:
    """Number of leaves. For labelled trees only literal leaves are counted."""
    count = 0
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, Literal):
            count += 1
        elif isinstance(node, Gate):
            stack.extend(node.children)
        elif len(node) == 0:
            count += 1
        else:
            stack.extend(node)
    return count


def n_nodes(t) -> int:
    count = 0
    stack = [t]
    while stack:
        node = stack.pop()
        count += 1
        stack.extend(_kids(node))
    return count


def n_internal(t) -> int:
    return n_nodes(t) - size(t)


def height(t) -> int:
    best = 0
    stack = [(t, 0)]
    while stack:
        node, d = stack.pop()
        kids = _kids(node)
        if kids:
            stack.extend((c, d + 1) for c in kids)
        elif d > best:
            best = d
    return best


def saturation_level(t) -> int:
    """Depth of the shallowest leaf (breadth-first, stops at the first leaf)."""
    level = [t]
    depth = 0
    while level:
        nxt = []
        for node in level:
            kids = _kids(node)
            if not kids:
                return depth
            nxt.extend(kids)
        level = nxt
        depth += 1
    raise ValueError("tree has no leaf")


def truncate(t: TreeShape, h: int) -> TreeShape:
    """Keep the nodes at distance at most h from the root."""
    if h < 0:
        raise ValueError("truncation height must be non-negative")
    if h == 0 or len(t) == 0:
        return LEAF
    level = 0
    # breadth-first copy down to depth h, rebuilt bottom-up
    layers = [[t]]
    while level < h:
        nxt = [c for node in layers[-1] for c in node]
        if not nxt:
            break
        layers.append(nxt)
        level += 1
    built = [LEAF] * len(layers[-1])
    for depth in range(len(layers) - 2, -1, -1):
        it = iter(built)
        built = [tuple(next(it) for _ in node) if node else LEAF for node in layers[depth]]
    return built[0]


def validate_shape(t: TreeShape) -> None:
    """Raise ValueError if some node has exactly one child."""
    stack = [t]
    while stack:
        node = stack.pop()
        kids = _kids(node)
        if len(kids) == 1:
            raise ValueError("unary node in tree")
        stack.extend(kids)


def root_split(t: TreeShape) -> tuple[int, ...]:
    """Leaf counts of the root's subtrees, in order."""
    return tuple(size(c) for c in t)


# ---------------------------------------------------------------- labelling

def random_labelling(t: TreeShape, k: int, rng: random.Random) -> AndOrTree:
    """Uniform independent gates and literals on the shape t."""
    if k < 1:
        raise ValueError("k must be positive")
    two_k = 2 * k

    rand = rng.random
    out = []
    stack = [(t, None)]
    while stack:
        node, op = stack.pop()
        if op is None:
            if len(node) == 0:
                r = int(rand() * two_k)
                out.append(Literal(r // 2 + 1, bool(r & 1)))
                continue
            # the gate is drawn before the subtree, in preorder
            stack.append((node, AND if rand() < 0.5 else OR))
            for c in reversed(node):
                stack.append((c, None))
        else:
            m = len(node)
            kids = tuple(out[-m:])
            del out[-m:]
            out.append(Gate(op, kids))
    return out[0]


def all_labellings(t: TreeShape, k: int):
    """Yield every labelling of t with literals among x1..xk (exhaustive)."""
    if len(t) == 0:
        for v in range(1, k + 1):
            yield Literal(v, False)
            yield Literal(v, True)
        return
    from itertools import product
    for op in (AND, OR):
        for kids in product(*[list(all_labellings(c, k)) for c in t]):
            yield Gate(op, tuple(kids))


def dual(tree: AndOrTree) -> AndOrTree:
    """Swap every gate and negate every literal; computes the negation."""
    return fold(tree,
                lambda n: Literal(n.var, not n.negated) if isinstance(n, Literal)
                else Gate(OR if n.op == AND else AND, ()),
                lambda n, vals: Gate(OR if n.op == AND else AND, tuple(vals)))


def max_var(tree: AndOrTree) -> int:
    best = 0
    stack = [tree]
    while stack:
        node = stack.pop()
        if isinstance(node, Literal):
            best = max(best, node.var)
        else:
            stack.extend(node.children)
    return best


def literals(tree: AndOrTree) -> list[Literal]:
    """Literal leaves from left to right."""
    out = []
    stack = [tree]
    while stack:
        node = stack.pop()
        if isinstance(node, Literal):
            out.append(node)
        else:
            stack.extend(reversed(node.children))
    return out


# ---------------------------------------------------------------- evaluation

def eval_table(tree: AndOrTree, k: int) -> int:
    """Truth table (as int) of the function computed by ``tree``."""
    if max_var(tree) > k:
        raise EvalArityError(f"literal exceeds arity {k}")
    lits = literal_tables(k)
    full = full_mask(k)
    if isinstance(tree, Literal):
        return lits[2 * (tree.var - 1) + tree.negated]
    # iterative short-circuit evaluation; frame = [node, acc, next child index]
    stack = [[tree, 0 if tree.op == OR else full, 0]]
    ret = None
    while True:
        fr = stack[-1]
        node = fr[0]
        is_and = node.op == AND
        if ret is not None:
            fr[1] = fr[1] & ret if is_and else fr[1] | ret
            ret = None
        acc = fr[1]
        kids = node.children
        if not kids:
            acc = 0 if is_and else full
        if not kids or fr[2] == len(kids) or acc == (0 if is_and else full):
            stack.pop()
            if not stack:
                return acc
            ret = acc
            continue
        child = kids[fr[2]]
        fr[2] += 1
        if isinstance(child, Literal):
            ret = lits[2 * (child.var - 1) + child.negated]
        else:
            stack.append([child, 0 if child.op == OR else full, 0])


def eval_tree(tree: AndOrTree, k: int) -> BoolFn:
    return BoolFn(k, eval_table(tree, k))


def eval_brute(tree: AndOrTree, k: int) -> BoolFn:
    """Assignment-by-assignment evaluation; slow, used as an oracle."""

    def ev(node, bits):
        if isinstance(node, Literal):
            return bits[node.var - 1] ^ node.negated
        if not node.children:
            return int(node.op == OR)
        vals = [ev(c, bits) for c in node.children]
        if node.op == AND:
            return int(all(vals))
        return int(any(vals))

    values = []
    for idx in range(1 << k):
        bits = [(idx >> i) & 1 for i in range(k)]
        values.append(ev(tree, bits))
    return BoolFn.from_values(k, values)


# ---------------------------------------------------------------- text form

def serialize(tree: AndOrTree) -> str:
    """Canonical text: no whitespace, gate-leaves written T() / F()."""
    def leaf(n):
        if isinstance(n, Literal):
            return str(n)
        return "F()" if n.op == AND else "T()"

    return fold(tree, leaf, lambda n, vals: "(" + n.op.join(vals) + ")")


def parse(text: str) -> AndOrTree:
    """Parse an expression such as ``((x1&x2)|~x3)``.

    Whitespace is ignored. The markers ``T()`` and ``F()`` denote gate-leaves
    so that trimmed trees round-trip. Nesting depth is not limited by the
    interpreter stack.
    """
    s = text
    n = len(s)
    pos = 0

    def skip():
        nonlocal pos
        while pos < n and s[pos].isspace():
            pos += 1

    def atom():
        """A literal or constant marker at ``pos``."""
        nonlocal pos
        ch = s[pos]
        start = pos
        if ch in "TF":
            pos += 1
            skip()
            if pos < n and s[pos] == "(":
                pos += 1
                skip()
                if pos < n and s[pos] == ")":
                    pos += 1
                    return Gate(OR if ch == "T" else AND, ())
            raise ParseError("malformed constant marker", start)
        negated = False
        if ch == "~":
            negated = True
            pos += 1
            skip()
        if pos >= n or s[pos] != "x":
            raise ParseError("expected literal", min(pos, n))
        pos += 1
        dstart = pos
        while pos < n and s[pos].isdigit():
            pos += 1
        digits = s[dstart:pos]
        if not digits:
            raise ParseError("missing variable index", dstart)
        if digits[0] == "0":
            raise ParseError("variable index with leading zero", dstart)
        return Literal(int(digits), negated)

    # each open group: [start position, operator or None, children]
    groups = []
    result = None
    while True:
        skip()
        if pos >= n:
            if groups:
                raise ParseError("unclosed group", groups[-1][0])
            raise ParseError("unexpected end of input", pos)
        if s[pos] == "(":
            groups.append([pos, None, []])
            pos += 1
            continue
        node = atom()
        # attach node, then close as many groups as the text closes
        while True:
            if not groups:
                result = node
                break
            g = groups[-1]
            g[2].append(node)
            skip()
            if pos >= n:
                raise ParseError("unclosed group", g[0])
            ch = s[pos]
            if ch == ")":
                pos += 1
                groups.pop()
                if len(g[2]) < 2:
                    raise ParseError("unary group", g[0])
                node = Gate(g[1], tuple(g[2]))
                continue
            if ch not in (AND, OR):
                raise ParseError(f"expected operator or ')' but found {ch!r}", pos)
            if g[1] is None:
                g[1] = ch
            elif ch != g[1]:
                raise ParseError("mixed operators in one group", pos)
            pos += 1
            break
        if result is not None:
            break
    skip()
    if pos != n:
        raise ParseError("trailing characters", pos)
    return result


# ---------------------------------------------------------------- shape text

def shape_to_text(t: TreeShape) -> str:
    """Compact shape notation: ``o`` for a leaf, ``(a,b,...)`` for a node."""
    return fold(t, lambda leaf: "o", lambda n, vals: "(" + ",".join(vals) + ")")


def parse_shape(text: str) -> TreeShape:
    """Inverse of :func:`shape_to_text`; whitespace is ignored."""
    s = "".join(text.split())
    stack: list[list] = []
    result = None
    i = 0
    for i, ch in enumerate(s):
        if result is not None:
            raise ParseError("trailing characters", i)
        if ch in "(o" and stack and stack[-1] and s[i - 1] != ",":
            raise ParseError("expected ','", i)
        if ch == "(":
            stack.append([])
        elif ch == "o":
            if stack:
                stack[-1].append(LEAF)
            else:
                result = LEAF
        elif ch == ")":
            if not stack:
                raise ParseError("unbalanced ')'", i)
            kids = stack.pop()
            if len(kids) < 2:
                raise ParseError("unary group", i)
            node = tuple(kids)
            if stack:
                stack[-1].append(node)
            else:
                result = node
        elif ch == ",":
            if not stack or not stack[-1] or s[i - 1] == ",":
                raise ParseError("misplaced ','", i)
        else:
            raise ParseError(f"unexpected character {ch!r}", i)
    if stack:
        raise ParseError("unclosed group", len(s))
    if result is None:
        raise ParseError("unexpected end of input", len(s))
    return result
