"""Complexity L(f): the fewest leaves of an and/or tree computing f.

The default table builder works on sets of functions rather than trees. A
gate with r >= 2 children computes the same function as a chain of r-1
binary gates of the same kind over the same leaves, so the functions
computable with exactly n leaves are

    F(1) = literals,  F(n) = { g op h : g in F(i), h in F(n-i), op in {AND, OR} }.

The first n with f in F(n) is L(f). ``method="enumerate"`` instead walks
every plane shape and every labelling, which is far slower but literal.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations, product
from math import comb

from .boolfn import BoolFn, compress, essential_vars, full_mask, literal_tables, permute
from .exprtree import AND, OR, Gate, Literal, AndOrTree, TreeShape, LEAF, eval_table, serialize


class UnknownFunction(KeyError):
    """The function is not in the table (its complexity exceeds max_size)."""


# ---------------------------------------------------------------- shapes

def _compositions(m: int, parts: int):
    if parts == 1:
        yield (m,)
        return
    for first in range(1, m - parts + 2):
        for rest in _compositions(m - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _shapes(m: int) -> tuple:
    if m == 1:
        return (LEAF,)
    out = []
    for r in range(2, m + 1):
        for comp in _compositions(m, r):
            for kids in product(*[_shapes(c) for c in comp]):
                out.append(tuple(kids))
    return tuple(out)


def enumerate_shapes(m: int) -> list[TreeShape]:
    """All plane trees without unary nodes and with exactly m leaves (m <= 8)."""
    if not 1 <= m <= 8:
        raise ValueError("enumerate_shapes supports 1 <= m <= 8")
    return list(_shapes(m))


def schroeder_counts(mmax: int) -> list[int]:
    """Little Schroeder numbers s_1..s_mmax from their three-term recurrence."""
    s = [0, 1, 1]
    for n in range(2, mmax):
        # (n+1) s_{n+1} = 3(2n-1) s_n - (n-2) s_{n-1}
        s.append((3 * (2 * n - 1) * s[n] - (n - 2) * s[n - 1]) // (n + 1))
    return s[1:mmax + 1]


# ---------------------------------------------------------------- table

@dataclass
class ComplexityTable:
    k: int
    max_size: int
    entries: dict  # table int -> (L, witness tree or None for constants)

    def __contains__(self, f: BoolFn) -> bool:
        return f.arity == self.k and f.table in self.entries

    def __len__(self):
        return len(self.entries)

    def L(self, f: BoolFn) -> int:
        return self._get(f)[0]

    def witness(self, f: BoolFn) -> AndOrTree:
        """A minimal tree; constants get the bare gate-leaves T() and F()."""
        w = self._get(f)[1]
        if w is None:
            return Gate(OR, ()) if f.table else Gate(AND, ())
        return w

    def _get(self, f: BoolFn):
        if f.arity != self.k:
            raise ValueError(f"table has arity {self.k}, function has {f.arity}")
        try:
            return self.entries[f.table]
        except KeyError:
            raise UnknownFunction(f"unknown: complexity of {f.encode()} exceeds {self.max_size}") from None

    def functions(self):
        return [BoolFn(self.k, t) for t in sorted(self.entries)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["fn", "L", "Ess", "read_once", "witness"])
        for f in self.functions():
            w.writerow([f.encode(), self.L(f), len(essential_vars(f)),
                        str(is_read_once(f, self)).lower(), serialize(self.witness(f))])
        return buf.getvalue()


def _flatten(op, left, right):
    kids = []
    for t in (left, right):
        if isinstance(t, Gate) and t.op == op:
            kids.extend(t.children)
        else:
            kids.append(t)
    return Gate(op, tuple(kids))


def build_complexity_table(k: int, max_size: int, method: str = "dp") -> ComplexityTable:
    """Complexity of every function of k variables that needs at most max_size leaves."""
    if method == "enumerate":
        if k > 3 or max_size > 6:
            raise ValueError("exhaustive enumeration limited to k <= 3 and max_size <= 6")
        return _build_enumerate(k, max_size)
    if method != "dp":
        raise ValueError(f"unknown method {method!r}")
    if k > 4 or max_size > 12:
        raise ValueError("table limited to k <= 4 and max_size <= 12")
    full = full_mask(k)
    entries: dict[int, tuple] = {0: (0, None), full: (0, None)}
    by_size: list[dict] = [dict()]
    lits = literal_tables(k)
    first: dict[int, AndOrTree] = {}
    for r, t in enumerate(lits):
        if t not in first:
            first[t] = Literal(r // 2 + 1, bool(r & 1))
    by_size.append(first)
    for t, w in first.items():
        entries.setdefault(t, (1, w))
    for n in range(2, max_size + 1):
        level: dict[int, AndOrTree] = {}
        for i in range(1, n // 2 + 1):
            left, right = by_size[i], by_size[n - i]
            for g, wg in left.items():
                for h, wh in right.items():
                    for op, val in ((AND, g & h), (OR, g | h)):
                        if val not in level:
                            level[val] = _flatten(op, wg, wh)
        by_size.append(level)
        for t, w in level.items():
            if t not in entries:
                entries[t] = (n, w)
    return ComplexityTable(k, max_size, entries)


def _build_enumerate(k: int, max_size: int) -> ComplexityTable:
    from .exprtree import all_labellings

    full = full_mask(k)
    entries: dict[int, tuple] = {0: (0, None), full: (0, None)}
    for m in range(1, max_size + 1):
        for shape in enumerate_shapes(m):
            for tree in all_labellings(shape, k):
                t = eval_table(tree, k)
                if t not in entries:
                    entries[t] = (m, tree)
    return ComplexityTable(k, max_size, entries)


def is_read_once(f: BoolFn, table: ComplexityTable) -> bool:
    """True when a minimal tree uses each essential variable exactly once."""
    L = table.L(f)
    if f.is_constant():
        return False
    return L == len(essential_vars(f))


def orbit_size(f: BoolFn, k: int | None = None) -> int:
    """Number of distinct functions obtained from f by permuting k variables.

    The orbit is determined by where the essential variables go (a choice of
    ``Ess(f)`` positions) and by the permutations of f restricted to its
    essential variables, so only ``Ess(f)!`` permutations are tried.
    """
    if k is None:
        k = f.arity
    if f.arity > k:
        raise ValueError("function arity exceeds k")
    ess = sorted(essential_vars(f))
    e = len(ess)
    if e == 0:
        return 1
    if e > 8:
        raise ValueError("orbit enumeration limited to 8 essential variables")
    g = compress(f, ess)
    distinct = {permute(g, p).table for p in permutations(range(1, e + 1))}
    return comb(k, e) * len(distinct)
