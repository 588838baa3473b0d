"""Boolean functions, relations, and the indicator objects built from them.

Inputs ``x`` in ``{0,1}^n`` are encoded as integers: bit ``i`` (1-indexed)
is the coefficient of ``2**(i-1)``.  A composed input ``(x_1, ..., x_N)``
with blocks of ``m`` bits stores block ``p`` in bits ``(p-1)m+1 .. pm``, so
block 1 occupies the least-significant ``m`` bits.

Bit positions ``i`` and output symbols ``a`` are 1-indexed throughout the
public API, matching ``[n] = {1, ..., n}`` and ``[K] = {1, ..., K}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_ARITY = 12
MAX_ALPHABET = 64


class DomainError(ValueError):
    """An index or input label lies outside the domain of an object."""


class SizeError(ValueError):
    """A construction would exceed the configured size caps."""


def get_bit(x: int, i: int) -> int:
    return (x >> (i - 1)) & 1


def to_bits(x: int, n: int) -> tuple[int, ...]:
    """Bits ``(x_1, ..., x_n)`` of ``x``."""
    return tuple((x >> k) & 1 for k in range(n))


def from_bits(bits: Sequence[int]) -> int:
    return sum((int(b) & 1) << k for k, b in enumerate(bits))


def split_blocks(x: int, N: int, m: int) -> tuple[int, ...]:
    """Split a composed label into its ``N`` block labels of ``m`` bits."""
    mask = (1 << m) - 1
    return tuple((x >> (p * m)) & mask for p in range(N))


def join_blocks(blocks: Sequence[int], m: int) -> int:
    return sum(int(b) << (p * m) for p, b in enumerate(blocks))


def popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True)
class BooleanFunction:
    """A truth table ``g: {0,1}^arity -> {0,1}``."""

    arity: int
    table: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= self.arity <= MAX_ARITY:
            raise SizeError(f"arity {self.arity} outside [1, {MAX_ARITY}]")
        table = tuple(int(b) for b in self.table)
        if len(table) != 1 << self.arity:
            raise DomainError(
                f"table has {len(table)} entries, expected {1 << self.arity}"
            )
        if any(b not in (0, 1) for b in table):
            raise DomainError("table entries must be 0 or 1")
        object.__setattr__(self, "table", table)

    @property
    def size(self) -> int:
        return 1 << self.arity

    def __call__(self, x: int) -> int:
        return evaluate(self, x)

    def as_array(self) -> np.ndarray:
        return np.array(self.table, dtype=np.int64)

    def zeros(self) -> list[int]:
        """0-inputs in ascending order."""
        return [x for x, b in enumerate(self.table) if b == 0]

    def ones(self) -> list[int]:
        return [x for x, b in enumerate(self.table) if b == 1]

    def to_json(self) -> dict:
        return {"arity": self.arity, "table": list(self.table)}

    @classmethod
    def from_json(cls, data: dict) -> "BooleanFunction":
        return cls(int(data["arity"]), tuple(data["table"]))

    @classmethod
    def from_callable(cls, arity: int, fn) -> "BooleanFunction":
        """Tabulate ``fn(bits) -> bool`` over all inputs."""
        return cls(arity, tuple(int(bool(fn(to_bits(x, arity)))) for x in range(1 << arity)))


@dataclass(frozen=True)
class Relation:
    """A relation ``f`` contained in ``{0,1}^arity x [k]`` as an incidence table.

    ``incidence[x][a-1]`` is true iff ``(x, a)`` is in ``f``.  Rows may be empty
    until :func:`totalize` is applied.
    """

    arity: int
    k: int
    incidence: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not 1 <= self.arity <= MAX_ARITY:
            raise SizeError(f"arity {self.arity} outside [1, {MAX_ARITY}]")
        if not 1 <= self.k <= MAX_ALPHABET:
            raise SizeError(f"alphabet size {self.k} outside [1, {MAX_ALPHABET}]")
        rows = tuple(tuple(int(b) for b in row) for row in self.incidence)
        if len(rows) != 1 << self.arity:
            raise DomainError(f"incidence has {len(rows)} rows, expected {1 << self.arity}")
        for row in rows:
            if len(row) != self.k or any(b not in (0, 1) for b in row):
                raise DomainError(f"incidence rows must be {self.k} bits")
        object.__setattr__(self, "incidence", rows)

    @property
    def size(self) -> int:
        return 1 << self.arity

    def contains(self, x: int, a: int) -> bool:
        _check_symbol(self, a)
        _check_input(self.arity, x)
        return bool(self.incidence[x][a - 1])

    def is_total(self) -> bool:
        return all(any(row) for row in self.incidence)

    def support(self) -> list[tuple[int, int]]:
        """All pairs ``(x, a)`` in the relation, ``x`` major."""
        return [
            (x, a + 1)
            for x, row in enumerate(self.incidence)
            for a, b in enumerate(row)
            if b
        ]

    def as_array(self) -> np.ndarray:
        return np.array(self.incidence, dtype=np.int64)

    def to_json(self) -> dict:
        return {
            "arity": self.arity,
            "k": self.k,
            "incidence": [list(row) for row in self.incidence],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Relation":
        return cls(int(data["arity"]), int(data["k"]), tuple(map(tuple, data["incidence"])))

    @classmethod
    def from_function(cls, g: BooleanFunction) -> "Relation":
        """View ``g`` as a relation over ``[2]``: symbol ``a`` stands for output ``a-1``."""
        return cls(g.arity, 2, tuple((1 - b, b) for b in g.table))


def _check_input(arity: int, x: int) -> None:
    if not 0 <= x < (1 << arity):
        raise DomainError(f"input {x} outside [0, {1 << arity})")


def _check_symbol(f: Relation, a: int) -> None:
    if not 1 <= a <= f.k:
        raise DomainError(f"symbol {a} outside [1, {f.k}]")


def evaluate(g: BooleanFunction, x: int) -> int:
    _check_input(g.arity, x)
    return g.table[x]


def _composed_arity(N: int, m: int) -> int:
    total = N * m
    if total > MAX_ARITY:
        raise SizeError(f"composed arity {N}*{m} exceeds {MAX_ARITY}")
    return total


def tilde(g: BooleanFunction, x: int, N: int) -> int:
    """The ``N``-bit label ``(g(x_1), ..., g(x_N))`` of a composed input."""
    _check_input(N * g.arity, x)
    return from_bits([g.table[b] for b in split_blocks(x, N, g.arity)])


def tilde_map(g: BooleanFunction, N: int) -> np.ndarray:
    """``tilde`` tabulated over every composed input."""
    _composed_arity(N, g.arity)
    m = g.arity
    xs = np.arange(1 << (N * m))
    table = g.as_array()
    out = np.zeros_like(xs)
    for p in range(N):
        out |= table[(xs >> (p * m)) & ((1 << m) - 1)] << p
    return out


def compose_function(f: BooleanFunction, g: BooleanFunction) -> BooleanFunction:
    """``h(x_1, ..., x_N) = f(g(x_1), ..., g(x_N))`` with ``N = f.arity``."""
    arity = _composed_arity(f.arity, g.arity)
    outer = f.as_array()
    return BooleanFunction(arity, tuple(int(v) for v in outer[tilde_map(g, f.arity)]))


def compose_relation(f: Relation, g: BooleanFunction) -> Relation:
    """``(x, a)`` is in the composition iff ``(tilde(x), a)`` is in ``f``."""
    arity = _composed_arity(f.arity, g.arity)
    rows = f.as_array()[tilde_map(g, f.arity)]
    return Relation(arity, f.k, tuple(map(tuple, rows.tolist())))


def totalize(f: Relation) -> Relation:
    """Accept every symbol on inputs that have no valid output."""
    rows = tuple(row if any(row) else (1,) * f.k for row in f.incidence)
    return Relation(f.arity, f.k, rows)


def chi_vector(f: Relation, a: int) -> np.ndarray:
    """0/1 indicator of the inputs for which ``a`` is a valid output."""
    _check_symbol(f, a)
    return f.as_array()[:, a - 1].astype(float)


def phi_vector(f: Relation, g: BooleanFunction, a: int) -> np.ndarray:
    """``chi_a`` of ``f`` pulled back through ``tilde`` to composed inputs."""
    return chi_vector(f, a)[tilde_map(g, f.arity)]


def relation_slice(f: Relation, a: int) -> BooleanFunction:
    """The Boolean function ``f_a(x) = 1`` iff ``(x, a)`` is in ``f``."""
    _check_symbol(f, a)
    return BooleanFunction(f.arity, tuple(row[a - 1] for row in f.incidence))


def difference_matrix(n: int, i: int) -> np.ndarray:
    """``D_i(x, y) = 1`` iff ``x`` and ``y`` differ in bit ``i``."""
    if not 1 <= i <= n:
        raise DomainError(f"bit {i} outside [1, {n}]")
    bits = (np.arange(1 << n) >> (i - 1)) & 1
    return (bits[:, None] != bits[None, :]).astype(float)


# --- named library -------------------------------------------------------


def identity1() -> BooleanFunction:
    return BooleanFunction(1, (0, 1))


def not1() -> BooleanFunction:
    return BooleanFunction(1, (1, 0))


def and_n(n: int) -> BooleanFunction:
    return BooleanFunction.from_callable(n, all)


def or_n(n: int) -> BooleanFunction:
    return BooleanFunction.from_callable(n, any)


def parity_n(n: int) -> BooleanFunction:
    return BooleanFunction.from_callable(n, lambda bits: sum(bits) % 2)


def maj3() -> BooleanFunction:
    return BooleanFunction.from_callable(3, lambda bits: sum(bits) >= 2)


def constant(n: int, value: int) -> BooleanFunction:
    return BooleanFunction(n, (value,) * (1 << n))


def find_one(n: int) -> Relation:
    """``(x, a)`` is valid iff ``x_a = 1``; the all-zero input accepts anything."""
    partial = Relation(
        n, n, tuple(to_bits(x, n) for x in range(1 << n))
    )
    return totalize(partial)


def all_pairs(n: int, k: int = 1) -> Relation:
    return Relation(n, k, ((1,) * k,) * (1 << n))


NAMED_FUNCTIONS = {
    "identity1": identity1,
    "not1": not1,
    "and2": lambda: and_n(2),
    "or2": lambda: or_n(2),
    "parity2": lambda: parity_n(2),
    "and3": lambda: and_n(3),
    "or3": lambda: or_n(3),
    "parity3": lambda: parity_n(3),
    "maj3": maj3,
}

NAMED_RELATIONS = {
    "findone2": lambda: find_one(2),
    "findone3": lambda: find_one(3),
    "allpairs1": lambda: all_pairs(1),
    "allpairs2": lambda: all_pairs(2),
    "parity2-rel": lambda: Relation.from_function(parity_n(2)),
    "identity1-rel": lambda: Relation.from_function(identity1()),
    "or2-rel": lambda: Relation.from_function(or_n(2)),
    "and2-rel": lambda: Relation.from_function(and_n(2)),
}
