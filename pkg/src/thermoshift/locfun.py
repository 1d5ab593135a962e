"""Locally constant functions on a one-sided Markov shift.

A function of depth ``m`` depends only on the first ``m`` coordinates and is
stored as a table over the admissible ``m``-words.  Integer-valued continuous
functions (time changes, cocycles) and all potentials used here are of this
form.  Binary operations promote both sides to the larger depth.
"""

from __future__ import annotations

import math
import numbers
import operator
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import NotAdmissible, WordTooShort
from .sft import TransitionMatrix, Word

KINDS = ("int", "real")


@dataclass(frozen=True)
class LocallyConstantFunction:
    matrix: TransitionMatrix
    depth: int
    values: tuple  # aligned with matrix.words(depth)
    kind: str = "real"

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        expected = len(self.matrix.words(self.depth))
        if len(self.values) != expected:
            raise ValueError(f"expected {expected} values, got {len(self.values)}")
        if self.kind == "int":
            vals = []
            for v in self.values:
                if isinstance(v, numbers.Integral):
                    vals.append(int(v))
                elif float(v).is_integer():
                    vals.append(int(v))
                else:
                    raise ValueError(f"integer-kind function got non-integer value {v!r}")
        else:
            vals = [float(v) for v in self.values]
        object.__setattr__(self, "values", tuple(vals))

    # -- views -------------------------------------------------------------

    @property
    def words(self) -> tuple[Word, ...]:
        return self.matrix.words(self.depth)

    @cached_property
    def table(self) -> dict[Word, float | int]:
        return dict(zip(self.words, self.values))

    @cached_property
    def array(self) -> np.ndarray:
        a = np.array(self.values, dtype=float)
        a.setflags(write=False)
        return a

    def min(self):
        return min(self.values)

    def max(self):
        return max(self.values)

    # -- evaluation and depth ----------------------------------------------

    def evaluate(self, word: Sequence[int]):
        word = tuple(word)
        if len(word) < self.depth:
            raise WordTooShort(f"need at least {self.depth} symbols, got {len(word)}")
        if not self.matrix.is_admissible(word):
            raise NotAdmissible(f"word {word} is not admissible")
        return self.table[word[: self.depth]]

    __call__ = evaluate

    def promote(self, depth: int) -> LocallyConstantFunction:
        """The same function tabulated at a larger depth."""
        if depth < self.depth:
            raise ValueError(f"cannot promote depth {self.depth} down to {depth}")
        if depth == self.depth:
            return self
        t = self.table
        d = self.depth
        vals = tuple(t[w[:d]] for w in self.matrix.words(depth))
        return LocallyConstantFunction(self.matrix, depth, vals, self.kind)

    def reduce(self) -> LocallyConstantFunction:
        """Rewrite at the smallest depth that reproduces the function."""
        t = self.table
        for d in range(1, self.depth):
            seen: dict[Word, object] = {}
            for w, v in t.items():
                if seen.setdefault(w[:d], v) != v:
                    break
            else:
                vals = tuple(seen[w] for w in self.matrix.words(d))
                return LocallyConstantFunction(self.matrix, d, vals, self.kind)
        return self

    # -- algebra -----------------------------------------------------------

    def _combine(self, other, op: Callable) -> LocallyConstantFunction:
        if isinstance(other, LocallyConstantFunction):
            if other.matrix != self.matrix:
                raise ValueError("functions live on different shifts")
            d = max(self.depth, other.depth)
            a, b = self.promote(d), other.promote(d)
            kind = "int" if a.kind == b.kind == "int" else "real"
            vals = tuple(op(x, y) for x, y in zip(a.values, b.values))
            return LocallyConstantFunction(self.matrix, d, vals, kind)
        if isinstance(other, numbers.Real):
            kind = "int" if self.kind == "int" and isinstance(other, numbers.Integral) else "real"
            vals = tuple(op(x, other) for x in self.values)
            return LocallyConstantFunction(self.matrix, self.depth, vals, kind)
        return NotImplemented

    def __add__(self, other):
        return self._combine(other, operator.add)

    def __sub__(self, other):
        return self._combine(other, operator.sub)

    def __mul__(self, other):
        return self._combine(other, operator.mul)

    __radd__ = __add__
    __rmul__ = __mul__

    def __rsub__(self, other):
        return self._combine(other, lambda x, y: y - x)

    def __neg__(self):
        return self._combine(-1, operator.mul)

    def pointwise(self, other: LocallyConstantFunction, op: str) -> LocallyConstantFunction:
        """``op`` is one of ``"add"``, ``"sub"``, ``"mul"``."""
        return self._combine(other, {"add": operator.add, "sub": operator.sub, "mul": operator.mul}[op])

    def scale(self, s: float) -> LocallyConstantFunction:
        return self._combine(s, operator.mul)

    def exp(self) -> LocallyConstantFunction:
        return self.map(math.exp)

    def exp_base(self, base: float) -> LocallyConstantFunction:
        """The function ``base ** self``."""
        if base <= 0:
            raise ValueError("base must be positive")
        b = float(base)
        return self.map(lambda v: b**v)

    def map(self, fn: Callable[[float], float]) -> LocallyConstantFunction:
        return LocallyConstantFunction(
            self.matrix, self.depth, tuple(fn(v) for v in self.values), "real"
        )

    # -- dynamics ----------------------------------------------------------

    def compose_shift(self) -> LocallyConstantFunction:
        """``f o sigma``: evaluate on the word with its first symbol dropped."""
        t = self.table
        vals = tuple(t[w[1:]] for w in self.matrix.words(self.depth + 1))
        return LocallyConstantFunction(self.matrix, self.depth + 1, vals, self.kind)

    def birkhoff(self, n: int) -> LocallyConstantFunction:
        """Birkhoff sum ``f + f o sigma + ... + f o sigma**(n-1)``."""
        if n < 1:
            raise ValueError("n must be >= 1")
        if n == 1:
            return self
        t = self.table
        d = self.depth
        vals = tuple(
            sum(t[w[i : i + d]] for i in range(n)) for w in self.matrix.words(d + n - 1)
        )
        return LocallyConstantFunction(self.matrix, d + n - 1, vals, self.kind)

    # -- comparison and serialisation --------------------------------------

    def sup_distance(self, other: LocallyConstantFunction) -> float:
        d = max(self.depth, other.depth)
        return float(np.abs(self.promote(d).array - other.promote(d).array).max())

    def to_json(self) -> dict:
        fmt = self.matrix.format_word
        return {
            "depth": self.depth,
            "kind": self.kind,
            "values": {fmt(w): v for w, v in zip(self.words, self.values)},
        }

    def __repr__(self):
        body = ", ".join(f"{self.matrix.format_word(w)}: {v}" for w, v in self.table.items())
        return f"LocallyConstantFunction(depth={self.depth}, kind={self.kind}, {{{body}}})"


def from_table(
    m: TransitionMatrix, depth: int, table: Mapping[Word, float | int], kind: str = "real"
) -> LocallyConstantFunction:
    missing = [w for w in m.words(depth) if w not in table]
    if missing:
        raise ValueError(f"no value for admissible words {missing[:5]}")
    extra = [w for w in table if len(w) != depth or not m.is_admissible(w)]
    if extra:
        raise NotAdmissible(f"values given for non-admissible or wrong-length words {extra[:5]}")
    return LocallyConstantFunction(m, depth, tuple(table[w] for w in m.words(depth)), kind)


def from_symbol_table(m: TransitionMatrix, table, kind: str | None = None) -> LocallyConstantFunction:
    """Depth-1 function ``f(x) = table[x_1]``.

    ``table`` is a mapping from symbol to value or a sequence indexed from
    symbol 1.  The kind defaults to ``"int"`` when every value is integral.
    """
    if isinstance(table, Mapping):
        vals = tuple(table[s] for s in range(1, m.size + 1))
    else:
        vals = tuple(table)
    if kind is None:
        kind = "int" if all(isinstance(v, numbers.Integral) for v in vals) else "real"
    return LocallyConstantFunction(m, 1, vals, kind)


def constant(m: TransitionMatrix, value=1) -> LocallyConstantFunction:
    kind = "int" if isinstance(value, numbers.Integral) else "real"
    return LocallyConstantFunction(m, 1, (value,) * m.size, kind)


def indicator(m: TransitionMatrix, word: Sequence[int]) -> LocallyConstantFunction:
    """Characteristic function of the cylinder defined by ``word``."""
    word = tuple(word)
    if not word:
        return constant(m, 1)
    if not m.is_admissible(word):
        raise NotAdmissible(f"word {word} is not admissible")
    k = len(word)
    return LocallyConstantFunction(m, k, tuple(int(w == word) for w in m.words(k)), "int")


def from_json(m: TransitionMatrix, data: Mapping) -> LocallyConstantFunction:
    """Parse ``{"depth": m, "kind": "int"|"real", "values": {"word": v}}``."""
    try:
        depth = int(data["depth"])
        kind = data.get("kind", "real")
        raw = data["values"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed function literal: {exc}") from None
    if not isinstance(raw, Mapping):
        raise ValueError("'values' must be an object keyed by words")
    table = {m.parse_word(k): v for k, v in raw.items()}
    return from_table(m, depth, table, kind)
