"""Boolean functions of k variables stored as truth tables.

A function of arity k is a Python int holding 2**k bits. The bit at index
``sum(b_i * 2**(i-1))`` is the value at the assignment (b_1, ..., b_k), so
variable x_i has weight 2**(i-1). Every other module uses this convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import Iterable, Sequence

MAX_ARITY = 16


class ArityError(ValueError):
    """Raised when arities disagree or fall outside 1..MAX_ARITY."""


def _check_arity(k: int) -> None:
    if not isinstance(k, int) or k < 1 or k > MAX_ARITY:
        raise ArityError(f"arity must be an integer in 1..{MAX_ARITY}, got {k!r}")


@lru_cache(maxsize=None)
def full_mask(k: int) -> int:
    """All-ones table of arity k."""
    return (1 << (1 << k)) - 1


@lru_cache(maxsize=None)
def projection_table(k: int, i: int) -> int:
    """Table of the projection x_i among k variables."""
    half = 1 << (i - 1)
    table = ((1 << half) - 1) << half
    width = half << 1
    n = 1 << k
    while width < n:
        table |= table << width
        width <<= 1
    return table


@lru_cache(maxsize=None)
def literal_tables(k: int) -> tuple[int, ...]:
    """Tables of the 2k literals indexed by ``2*(i-1) + negated``.

    Index r therefore encodes variable ``r // 2 + 1`` with negation ``r & 1``;
    drawing r uniformly in range(2k) is a uniform literal.
    """
    full = full_mask(k)
    out = []
    for i in range(1, k + 1):
        p = projection_table(k, i)
        out.append(p)
        out.append(full ^ p)
    return tuple(out)


@dataclass(frozen=True)
class BoolFn:
    arity: int
    table: int

    def __post_init__(self):
        _check_arity(self.arity)
        if self.table < 0 or self.table > full_mask(self.arity):
            raise ValueError("table does not fit 2**arity bits")

    # constructors

    @classmethod
    def true(cls, k: int) -> "BoolFn":
        return cls(k, full_mask(k))

    @classmethod
    def false(cls, k: int) -> "BoolFn":
        return cls(k, 0)

    @classmethod
    def var(cls, k: int, i: int, negated: bool = False) -> "BoolFn":
        if not 1 <= i <= k:
            raise ArityError(f"variable x{i} out of range for arity {k}")
        t = projection_table(k, i)
        return cls(k, full_mask(k) ^ t if negated else t)

    @classmethod
    def from_values(cls, k: int, values: Sequence[int]) -> "BoolFn":
        """Build from the list of 2**k output bits in index order."""
        if len(values) != 1 << k:
            raise ArityError("need exactly 2**k values")
        t = 0
        for idx, v in enumerate(values):
            if v:
                t |= 1 << idx
        return cls(k, t)

    # queries

    def is_constant(self) -> bool:
        return self.table == 0 or self.table == full_mask(self.arity)

    def __call__(self, *bits: int) -> int:
        return evaluate(self, bits)

    def __and__(self, other: "BoolFn") -> "BoolFn":
        return combine("AND", self, other)

    def __or__(self, other: "BoolFn") -> "BoolFn":
        return combine("OR", self, other)

    def __invert__(self) -> "BoolFn":
        return combine("NOT", self)

    def __xor__(self, other: "BoolFn") -> "BoolFn":
        _same_arity(self, other)
        return BoolFn(self.arity, self.table ^ other.table)

    def encode(self) -> str:
        return encode(self)

    def __str__(self) -> str:
        if self.table == 0:
            return "False"
        if self.table == full_mask(self.arity):
            return "True"
        return encode(self)


def _same_arity(f: BoolFn, g: BoolFn) -> None:
    if f.arity != g.arity:
        raise ArityError(f"arity mismatch: {f.arity} vs {g.arity}")


def assignment_index(bits: Sequence[int]) -> int:
    return sum((1 << i) for i, b in enumerate(bits) if b)


def evaluate(f: BoolFn, assignment: Sequence[int]) -> int:
    """Value of f at a length-k bit vector."""
    if len(assignment) != f.arity:
        raise ArityError(f"assignment has length {len(assignment)}, expected {f.arity}")
    return (f.table >> assignment_index(assignment)) & 1


def combine(op: str, f: BoolFn, g: BoolFn | None = None) -> BoolFn:
    """Pointwise AND / OR / NOT."""
    op = op.upper()
    if op == "NOT":
        if g is not None:
            raise TypeError("NOT takes a single function")
        return BoolFn(f.arity, full_mask(f.arity) ^ f.table)
    if g is None:
        raise TypeError(f"{op} needs two functions")
    _same_arity(f, g)
    if op == "AND":
        return BoolFn(f.arity, f.table & g.table)
    if op == "OR":
        return BoolFn(f.arity, f.table | g.table)
    raise ValueError(f"unknown connective {op!r}")


def restrict(f: BoolFn, i: int, b: int) -> BoolFn:
    """Fix x_i = b while keeping the arity; the result ignores x_i."""
    if not 1 <= i <= f.arity:
        raise ArityError(f"variable x{i} out of range for arity {f.arity}")
    mask = projection_table(f.arity, i)
    shift = 1 << (i - 1)
    if b:
        kept = f.table & mask
        return BoolFn(f.arity, kept | (kept >> shift))
    kept = f.table & ~mask & full_mask(f.arity)
    return BoolFn(f.arity, kept | (kept << shift))


def depends_on(f: BoolFn, i: int) -> bool:
    mask = projection_table(f.arity, i)
    shift = 1 << (i - 1)
    return ((f.table & mask) >> shift) != (f.table & ~mask & full_mask(f.arity))


def essential_vars(f: BoolFn) -> frozenset[int]:
    return frozenset(i for i in range(1, f.arity + 1) if depends_on(f, i))


def ess(f: BoolFn) -> int:
    return len(essential_vars(f))


def extend(f: BoolFn, k: int) -> BoolFn:
    """View f as a function of k >= f.arity variables that ignores the new ones."""
    _check_arity(k)
    if k < f.arity:
        raise ArityError(f"cannot extend arity {f.arity} down to {k}")
    t = f.table
    width = 1 << f.arity
    n = 1 << k
    while width < n:
        t |= t << width
        width <<= 1
    return BoolFn(k, t)


def shrink(f: BoolFn, k0: int) -> BoolFn:
    """Inverse of extend: keep the sub-table where x_{k0+1..k} are 0.

    Only meaningful when f does not depend on those variables.
    """
    _check_arity(k0)
    if k0 > f.arity:
        raise ArityError("cannot shrink to a larger arity")
    return BoolFn(k0, f.table & full_mask(k0))


def permute(f: BoolFn, perm: Sequence[int]) -> BoolFn:
    """Rename variables: x_i becomes x_{perm[i-1]} (perm is 1-based images).

    The result g satisfies g(y) = f(x) where y_{perm[i-1]} = x_i.
    """
    k = f.arity
    if sorted(perm) != list(range(1, k + 1)):
        raise ValueError("perm must be a permutation of 1..k")
    out = 0
    t = f.table
    for idx in range(1 << k):
        if (t >> idx) & 1:
            j = 0
            for i in range(k):
                if (idx >> i) & 1:
                    j |= 1 << (perm[i] - 1)
            out |= 1 << j
    return BoolFn(k, out)


def negate_vars(f: BoolFn, variables: Iterable[int]) -> BoolFn:
    """Substitute x_i -> not x_i for every i in variables."""
    k = f.arity
    flip = 0
    for i in variables:
        flip |= 1 << (i - 1)
    out = 0
    t = f.table
    for idx in range(1 << k):
        if (t >> idx) & 1:
            out |= 1 << (idx ^ flip)
    return BoolFn(k, out)


def compress(f: BoolFn, variables: Sequence[int]) -> BoolFn:
    """Function of len(variables) inputs obtained by keeping only those
    variables (in the given order) and setting the others to 0."""
    m = len(variables)
    out = 0
    for idx in range(1 << m):
        j = 0
        for pos, v in enumerate(variables):
            if (idx >> pos) & 1:
                j |= 1 << (v - 1)
        if (f.table >> j) & 1:
            out |= 1 << idx
    return BoolFn(m, out)


def variable_orbit(f: BoolFn) -> set[BoolFn]:
    """All functions obtained from f by permuting its k variables (k <= 8)."""
    if f.arity > 8:
        raise ArityError("explicit orbit enumeration limited to arity 8")
    return {permute(f, p) for p in permutations(range(1, f.arity + 1))}


# text encoding "k:HEX", nibble 0 (bits 0..3) first

def encode(f: BoolFn) -> str:
    n_nibbles = max(1, (1 << f.arity) // 4)
    t = f.table
    digits = []
    for _ in range(n_nibbles):
        digits.append("0123456789ABCDEF"[t & 0xF])
        t >>= 4
    return f"{f.arity}:{''.join(digits)}"


def decode(text: str) -> BoolFn:
    try:
        k_str, hexpart = text.strip().split(":")
        k = int(k_str)
    except ValueError:
        raise ValueError(f"malformed function encoding {text!r}") from None
    _check_arity(k)
    n_nibbles = max(1, (1 << k) // 4)
    if len(hexpart) != n_nibbles:
        raise ValueError(f"expected {n_nibbles} hex digits for arity {k}, got {len(hexpart)}")
    t = 0
    for pos, ch in enumerate(hexpart):
        t |= int(ch, 16) << (4 * pos)
    return BoolFn(k, t)
