"""Markov measures on cylinder sets.

A :class:`MarkovMeasure` is the diagonal restriction of a KMS state: a
probability measure on ``X_A`` given by masses of cylinder sets.  It is fixed
by a base table of masses on words of some depth ``m`` together with the
eigen-relation ``mass(j nu) = exp(phi(j nu)) / r * mass(nu)``, which is how
longer cylinders are obtained on demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .locfun import LocallyConstantFunction, constant
from .sft import TransitionMatrix, Word


@dataclass(frozen=True, eq=False)
class MarkovMeasure:
    matrix: TransitionMatrix
    depth: int
    base: np.ndarray  # masses of the depth-m words, sums to 1
    potential: LocallyConstantFunction
    eigenvalue: float
    generator: str = ""

    def __post_init__(self):
        if self.potential.depth > self.depth:
            raise ValueError("base depth must be at least the potential depth")
        base = np.array(self.base, dtype=float)
        if base.shape != (len(self.matrix.words(self.depth)),):
            raise ValueError("base masses do not match the admissible words")
        base.setflags(write=False)
        object.__setattr__(self, "base", base)

    @cached_property
    def _marginals(self) -> list[np.ndarray]:
        # _marginals[k] holds masses of the k-words for k <= depth
        m = self.matrix
        out = [self.base]
        for k in range(self.depth - 1, -1, -1):
            idx = m.word_index(k)
            arr = np.zeros(len(idx))
            for w, v in zip(m.words(k + 1), out[-1]):
                arr[idx[w[:k]]] += v
            out.append(arr)
        out.reverse()
        return out

    @cached_property
    def _weights(self) -> dict[Word, float]:
        # exp(phi(w)) / r on the potential's words
        r = self.eigenvalue
        return {w: math.exp(v) / r for w, v in self.potential.table.items()}

    def mass(self, word: Sequence[int]) -> float:
        """Mass of the cylinder ``U_word``; zero for inadmissible words."""
        word = tuple(word)
        m = self.matrix
        if not m.is_admissible(word):
            return 0.0
        k = len(word)
        if k <= self.depth:
            return float(self._marginals[k][m.word_index(k)[word]])
        d = self.potential.depth
        w = self._weights
        factor = 1.0
        for i in range(k - self.depth):
            factor *= w[word[i : i + d]]
        tail = word[k - self.depth :]
        return factor * float(self.base[m.word_index(self.depth)[tail]])

    def table(self, k: int) -> np.ndarray:
        """Masses of all ``k``-words, aligned with ``matrix.words(k)``."""
        if k <= self.depth:
            return self._marginals[k].copy()
        m = self.matrix
        d = self.potential.depth
        w = self._weights
        prev = self.table(k - 1)
        prev_idx = m.word_index(k - 1)
        return np.array([w[u[:d]] * prev[prev_idx[u[1:]]] for u in m.words(k)])

    def masses(self, max_depth: int) -> dict[Word, float]:
        """Masses of every cylinder up to length ``max_depth``.

        Shorter levels are marginals of the deepest level, each parent being
        the sum of its children in lexicographic order, so the exported
        table satisfies the consistency relation term for term.
        """
        m = self.matrix
        level = dict(zip(m.words(max_depth), self.table(max_depth).tolist()))
        out = dict(level)
        for k in range(max_depth - 1, -1, -1):
            parent: dict[Word, float] = {}
            for w in m.words(k + 1):
                parent[w[:k]] = parent.get(w[:k], 0.0) + level[w]
            out.update(parent)
            level = parent
        return out

    def expectation(self, g: LocallyConstantFunction) -> float:
        return expectation(self, g)


def expectation(measure: MarkovMeasure, g: LocallyConstantFunction) -> float:
    """Integral of a locally constant function: ``sum_w g(w) mass(w)``."""
    if g.matrix != measure.matrix:
        raise ValueError("function and measure live on different shifts")
    return float(np.dot(g.array, measure.table(g.depth)))


def consistency_defect(masses: dict[Word, float], m: TransitionMatrix) -> float:
    """Largest ``|sum_j mass(mu j) - mass(mu)|`` over a mass table."""
    worst = 0.0
    for mu, v in masses.items():
        kids = [masses[mu + (j,)] for j in (m.followers(mu[-1]) if mu else range(1, m.size + 1))
                if mu + (j,) in masses]
        if kids:
            worst = max(worst, abs(sum(kids) - v))
    return worst


def zero_potential(m: TransitionMatrix) -> LocallyConstantFunction:
    return constant(m, 0.0)
