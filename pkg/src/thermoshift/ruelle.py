"""Ruelle transfer operators on locally constant functions.

For a potential ``phi`` the operator is

    (L_phi f)(x) = sum over y with sigma(y) = x of exp(phi(y)) f(y),

i.e. a sum over one-symbol extensions ``jx`` with ``A(j, x_1) = 1``.  On
depth-``m`` functions it is a finite nonnegative matrix indexed by the
admissible ``m``-words, supported on the edges of the higher-block graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import DepthTooSmall
from .locfun import LocallyConstantFunction, constant
from .measure import MarkovMeasure, expectation
from .sft import EPS_EIG, MAX_ITER, TransitionMatrix, power_iteration


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """Transfer operator restricted to depth-``m`` functions.

    Row ``nu`` has at most ``N`` nonzero entries, in the columns
    ``eta = j nu_1 ... nu_{m-1}`` with ``A(j, nu_1) = 1``; the entry there is
    ``exp(phi(eta))``.  ``columns[i, j-1]`` is that column index (or -1) and
    ``weights[i, j-1]`` its entry.
    """

    matrix: TransitionMatrix
    depth: int
    potential: LocallyConstantFunction
    columns: np.ndarray
    weights: np.ndarray

    @cached_property
    def entries(self) -> np.ndarray:
        n = self.columns.shape[0]
        dense = np.zeros((n, n))
        rows, slots = np.nonzero(self.columns >= 0)
        dense[rows, self.columns[rows, slots]] = self.weights[rows, slots]
        return dense

    @property
    def words(self):
        return self.matrix.words(self.depth)

    def dot(self, values: np.ndarray) -> np.ndarray:
        """Apply to a value table of a depth-``m`` function."""
        values = np.asarray(values, dtype=float)
        safe = np.where(self.columns >= 0, self.columns, 0)
        out = self.weights[:, 0] * values[safe[:, 0]]
        for j in range(1, self.columns.shape[1]):
            out = out + self.weights[:, j] * values[safe[:, j]]
        return out

    def dot_left(self, values: np.ndarray) -> np.ndarray:
        """Row vector times the matrix (the dual action on measures)."""
        return np.asarray(values, dtype=float) @ self.entries


def build_matrix(phi: LocallyConstantFunction, depth: int) -> TransferMatrix:
    if depth < max(phi.depth, 2):
        raise DepthTooSmall(f"depth must be >= max(depth(phi), 2) = {max(phi.depth, 2)}")
    return _build(phi, depth)


@lru_cache(maxsize=128)
def _build(phi: LocallyConstantFunction, depth: int) -> TransferMatrix:
    m = phi.matrix
    words = m.words(depth)
    index = m.word_index(depth)
    d = phi.depth
    table = phi.table
    cols = np.full((len(words), m.size), -1, dtype=np.int64)
    wts = np.zeros((len(words), m.size))
    for i, nu in enumerate(words):
        for j in m.predecessors(nu[0]):
            eta = (j,) + nu[:-1]
            cols[i, j - 1] = index[eta]
            wts[i, j - 1] = math.exp(table[eta[:d]])
    cols.setflags(write=False)
    wts.setflags(write=False)
    return TransferMatrix(m, depth, phi, cols, wts)


def apply(phi: LocallyConstantFunction, f: LocallyConstantFunction) -> LocallyConstantFunction:
    """``L_phi f`` at depth ``max(depth(phi), depth(f), 2) - 1``."""
    if phi.matrix != f.matrix:
        raise ValueError("potential and function live on different shifts")
    m = phi.matrix
    depth = max(phi.depth, f.depth, 2)
    tm = build_matrix(phi, depth)
    full = tm.dot(f.promote(depth).array)
    # the image depends only on the first depth-1 symbols
    index = m.word_index(depth)
    first = {}
    for w in m.words(depth):
        first.setdefault(w[:-1], index[w])
    vals = tuple(float(full[first[w]]) for w in m.words(depth - 1))
    return LocallyConstantFunction(m, depth - 1, vals, "real")


def apply_power(phi: LocallyConstantFunction, f: LocallyConstantFunction, n: int) -> LocallyConstantFunction:
    for _ in range(n):
        f = apply(phi, f)
    return f


@dataclass(frozen=True, eq=False)
class RpfData:
    """Eigenvalue, eigenfunction and eigenmeasure of a transfer operator.

    Normalised so that the eigenmeasure is a probability measure and
    ``eigenmeasure(eigenfunction) == 1``.
    """

    eigenvalue: float
    eigenfunction: LocallyConstantFunction
    eigenmeasure: MarkovMeasure
    iterations: int = 0

    @property
    def potential(self) -> LocallyConstantFunction:
        return self.eigenmeasure.potential

    def to_json(self, measure_depth: int | None = None) -> dict:
        m = self.eigenfunction.matrix
        depth = self.eigenmeasure.depth if measure_depth is None else measure_depth
        table = self.eigenmeasure.table(depth)
        return {
            "eigenvalue": self.eigenvalue,
            "eigenfunction": self.eigenfunction.to_json(),
            "measure_depth_table": {m.format_word(w): float(v) for w, v in zip(m.words(depth), table)},
        }


def rpf(
    phi: LocallyConstantFunction,
    tol: float = EPS_EIG,
    max_iter: int = MAX_ITER,
    depth: int | None = None,
) -> RpfData:
    """Ruelle-Perron-Frobenius data for the potential ``phi``."""
    m = max(phi.depth, 2, depth or 0)
    tm = build_matrix(phi, m)
    r, g, it_r = power_iteration(tm.entries, tol, max_iter)
    r_left, u, it_l = power_iteration(tm.entries.T, tol, max_iter)
    u = u / u.sum()
    g = g / float(u @ g)
    measure = MarkovMeasure(phi.matrix, m, u, phi, r, generator="rpf")
    eigfun = LocallyConstantFunction(phi.matrix, m, tuple(g.tolist()), "real")
    return RpfData(r, eigfun, measure, max(it_r, it_l))


def power_identity_check(phi: LocallyConstantFunction, a: LocallyConstantFunction, n: int) -> float:
    """Sup-norm gap between ``L_phi^n(a)`` and ``L_0^n(a * exp(phi^n))``."""
    zero = constant(phi.matrix, 0.0)
    lhs = apply_power(phi, a, n)
    rhs = apply_power(zero, a * phi.birkhoff(n).exp(), n)
    return lhs.sup_distance(rhs)


def convergence_profile(
    phi: LocallyConstantFunction,
    a: LocallyConstantFunction,
    n_max: int,
    data: RpfData | None = None,
) -> list[float]:
    """``gap_n = || L^n(a) / r^n - mu(a) g ||_sup`` for ``n = 1..n_max``."""
    depth = max(phi.depth, a.depth, 2)
    if data is None or data.eigenfunction.depth < depth:
        data = rpf(phi, depth=depth)
    depth = data.eigenfunction.depth
    tm = build_matrix(phi, depth)
    target = expectation(data.eigenmeasure, a) * data.eigenfunction.array
    h = a.promote(depth).array
    gaps = []
    for _ in range(n_max):
        h = tm.dot(h) / data.eigenvalue
        gaps.append(float(np.abs(h - target).max()))
    return gaps


def decay_ratio(gaps, floor: float = 1e-13, burn_in: int = 2) -> float:
    """Geometric-mean ratio of successive gaps above the rounding floor.

    Returns 0.0 when the sequence sits at the floor from the start.
    """
    tail = [g for g in gaps[burn_in:] if g > floor]
    if len(tail) < 2:
        return 0.0
    return (tail[-1] / tail[0]) ** (1.0 / (len(tail) - 1))
