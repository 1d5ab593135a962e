"""One-sided topological Markov shifts defined by 0-1 transition matrices.

Symbols are the integers ``1..N``.  A word is a plain tuple of symbols and a
cylinder set is identified with the word that defines it.  Every ordering of
words in this package is lexicographic with ``1 < 2 < ... < N``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    IsPermutation,
    NoConvergence,
    NotIrreducible,
    NotSquare,
    NotZeroOne,
    TooSmall,
)

Word = tuple[int, ...]

EPS_EIG = 1e-12
MAX_ITER = 100_000
# power-iteration stride for matrices up to this size
STRIDE = 4
STRIDE_MAX_SIZE = 64


@dataclass(frozen=True)
class TransitionMatrix:
    """Irreducible, non-permutation 0-1 matrix.

    Construction validates; an instance that exists is always valid.
    """

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.rows)
        _check_rows(rows)
        # equality and hashing need canonical int tuples
        object.__setattr__(self, "rows", tuple(tuple(int(v) for v in r) for r in rows))

    @property
    def size(self) -> int:
        return len(self.rows)

    @cached_property
    def array(self) -> np.ndarray:
        a = np.array(self.rows, dtype=np.int64)
        a.setflags(write=False)
        return a

    def __call__(self, i: int, j: int) -> int:
        return self.rows[i - 1][j - 1]

    def followers(self, i: int) -> tuple[int, ...]:
        return _followers(self.rows)[i - 1]

    def predecessors(self, j: int) -> tuple[int, ...]:
        return _predecessors(self.rows)[j - 1]

    def is_admissible(self, word: Sequence[int]) -> bool:
        n = self.size
        if any(not (1 <= s <= n) for s in word):
            return False
        return all(self.rows[a - 1][b - 1] for a, b in zip(word, word[1:]))

    def words(self, k: int) -> tuple[Word, ...]:
        """Admissible words of length ``k`` in lexicographic order."""
        return _words(self.rows, k)

    def word_index(self, k: int) -> dict[Word, int]:
        return _word_index(self.rows, k)

    def format_word(self, word: Sequence[int]) -> str:
        return format_word(word, self.size)

    def parse_word(self, text: str) -> Word:
        return parse_word(text, self.size)

    def __repr__(self):
        return f"TransitionMatrix({[list(r) for r in self.rows]})"


def _check_rows(rows) -> None:
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise NotSquare(f"expected {n} columns in every row")
    if any(v not in (0, 1) for r in rows for v in r):
        raise NotZeroOne("entries must be 0 or 1")
    if n < 2:
        raise TooSmall(f"need N >= 2, got N = {n}")
    if any(sum(r) == 0 for r in rows):
        raise NotIrreducible("zero row")
    if any(sum(r[j] for r in rows) == 0 for j in range(n)):
        raise NotIrreducible("zero column")
    succ = [[j for j in range(n) if rows[i][j]] for i in range(n)]
    pred = [[i for i in range(n) if rows[i][j]] for j in range(n)]
    if len(_reach(succ, 0)) < n or len(_reach(pred, 0)) < n:
        raise NotIrreducible("transition graph is not strongly connected")
    if all(sum(r) == 1 for r in rows) and all(
        sum(r[j] for r in rows) == 1 for j in range(n)
    ):
        raise IsPermutation("matrix is a permutation matrix")


def _reach(adj, start) -> set:
    seen = {start}
    todo = [start]
    while todo:
        v = todo.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return seen


def validate(matrix) -> TransitionMatrix:
    """Build a :class:`TransitionMatrix` from a nested sequence or array.

    Raises a subclass of :class:`~thermoshift.errors.InvalidMatrix` naming the
    first failed invariant.
    """
    if isinstance(matrix, TransitionMatrix):
        return matrix
    try:
        rows = tuple(tuple(int(v) if float(v) == int(v) else -1 for v in r) for r in matrix)
    except (TypeError, ValueError) as exc:
        raise NotZeroOne(f"non-numeric entry: {exc}") from None
    if not rows:
        raise TooSmall("empty matrix")
    return TransitionMatrix(rows)


@lru_cache(maxsize=64)
def _followers(rows) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(j + 1 for j, v in enumerate(r) if v) for r in rows)


@lru_cache(maxsize=64)
def _predecessors(rows) -> tuple[tuple[int, ...], ...]:
    n = len(rows)
    return tuple(tuple(i + 1 for i in range(n) if rows[i][j]) for j in range(n))


@lru_cache(maxsize=512)
def _words(rows, k: int) -> tuple[Word, ...]:
    if k < 0:
        raise ValueError("word length must be >= 0")
    if k == 0:
        return ((),)
    if k == 1:
        return tuple((s,) for s in range(1, len(rows) + 1))
    fol = _followers(rows)
    return tuple(w + (j,) for w in _words(rows, k - 1) for j in fol[w[-1] - 1])


@lru_cache(maxsize=512)
def _word_index(rows, k: int) -> dict[Word, int]:
    return {w: i for i, w in enumerate(_words(rows, k))}


def admissible_words(m: TransitionMatrix, k: int) -> list[Word]:
    """All words of ``B_k``; ``k = 0`` yields just the empty word."""
    return list(m.words(k))


def format_word(word: Sequence[int], n: int) -> str:
    if n <= 9:
        return "".join(str(s) for s in word)
    return ",".join(str(s) for s in word)


def parse_word(text: str, n: int) -> Word:
    text = text.strip()
    if not text:
        return ()
    if n <= 9 and "," not in text:
        return tuple(int(c) for c in text)
    return tuple(int(c) for c in text.split(","))


# -- periodic points ---------------------------------------------------------


def _int_matmul(a, b):
    n = len(a)
    return [
        [sum(a[i][k] * b[k][j] for k in range(n) if a[i][k]) for j in range(n)]
        for i in range(n)
    ]


def int_matrix_power(m: TransitionMatrix, n: int) -> list[list[int]]:
    """Exact ``m**n`` with Python integers (no overflow)."""
    size = m.size
    result = [[int(i == j) for j in range(size)] for i in range(size)]
    base = [list(r) for r in m.rows]
    while n:
        if n & 1:
            result = _int_matmul(result, base)
        n >>= 1
        if n:
            base = _int_matmul(base, base)
    return result


def periodic_point_count(m: TransitionMatrix, n: int) -> int:
    """Number of points of period ``n``: the trace of ``A**n``, exact."""
    if n < 1:
        raise ValueError("n must be >= 1")
    p = int_matrix_power(m, n)
    return sum(p[i][i] for i in range(m.size))


def _least_period(word: Word) -> int:
    p = len(word)
    for d in range(1, p + 1):
        if p % d == 0 and word == word[d:] + word[:d]:
            return d
    return p


def enumerate_cycles(m: TransitionMatrix, p: int, primitive: bool = False) -> list[Word]:
    """Admissible words ``w`` of length ``p`` that close up, ``A(w_p, w_1) = 1``.

    Each such word is the repeating block of a period-``p`` point.  With
    ``primitive=True`` only one representative (the least rotation) of each
    orbit of least period exactly ``p`` is returned.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    out = [w for w in m.words(p) if m(w[-1], w[0])]
    if primitive:
        out = [
            w
            for w in out
            if _least_period(w) == p and w == min(w[i:] + w[:i] for i in range(p))
        ]
    return out


# -- Perron-Frobenius data ---------------------------------------------------


def power_iteration(
    matrix: np.ndarray, tol: float = EPS_EIG, max_iter: int = MAX_ITER
) -> tuple[float, np.ndarray, int]:
    """Dominant eigenpair of an irreducible nonnegative matrix.

    Iterates with ``I + matrix`` (which is primitive whenever ``matrix`` is
    irreducible), normalising in the sup norm.  Small matrices are stepped
    with a precomputed power of ``I + matrix`` to cut per-step overhead; each
    such step counts as that many iterations.  The eigenvalue is the
    Rayleigh quotient of ``matrix`` itself.  Returns ``(r, v, iterations)``
    with ``max(v) == 1``.
    """
    m = np.asarray(matrix, dtype=float)
    n = m.shape[0]
    shifted = m + np.eye(n)
    stride = STRIDE if n <= STRIDE_MAX_SIZE else 1
    step = np.linalg.matrix_power(shifted, stride) if stride > 1 else shifted
    x = np.ones(n)
    recent: deque[float] = deque(maxlen=3)
    it = 0
    while it < max_iter:
        it += stride
        mx = m @ x
        rq = float(x @ mx) / float(x @ x)
        recent.append(rq)
        y = step @ x
        x = y / y.max()
        if len(recent) == 3 and max(recent) - min(recent) < tol:
            mx = m @ x
            rq = float(x @ mx) / float(x @ x)
            resid = np.abs(mx - rq * x).max()
            if resid <= tol * max(1.0, abs(rq)):
                return _polish(m, shifted, x, rq, resid, it, max_iter)
    raise NoConvergence(f"power iteration did not converge in {max_iter} steps")


def _polish(m, shifted, x, rq, resid, it, max_iter):
    # keep iterating while the residual still halves, down to rounding level
    for _ in range(min(it, max_iter - it)):
        y = shifted @ x
        x_new = y / y.max()
        mx = m @ x_new
        rq_new = float(x_new @ mx) / float(x_new @ x_new)
        resid_new = np.abs(mx - rq_new * x_new).max()
        if resid_new > 0.5 * resid:
            break
        x, rq, resid = x_new, rq_new, resid_new
        it += 1
    return rq, x, it


@dataclass(frozen=True)
class PerronData:
    eigenvalue: float
    right_vector: np.ndarray = field(repr=False)
    left_vector: np.ndarray = field(repr=False)
    iterations: int = 0
    # max(v) == 1, then u rescaled so that u . v == 1
    normalization: tuple[str, str] = ("right:max=1", "left:u.v=1")

    def residuals(self, m: TransitionMatrix) -> tuple[float, float]:
        a = m.array
        r = self.eigenvalue
        v, u = self.right_vector, self.left_vector
        return float(np.abs(a @ v - r * v).max()), float(np.abs(u @ a - r * u).max())


def perron(m: TransitionMatrix, tol: float = EPS_EIG, max_iter: int = MAX_ITER) -> PerronData:
    """Perron eigenvalue with positive right and left eigenvectors."""
    a = m.array
    r, v, it_r = power_iteration(a, tol, max_iter)
    r_left, u, it_l = power_iteration(a.T, tol, max_iter)
    u = u / float(u @ v)
    return PerronData((r + r_left) / 2.0, v, u, max(it_r, it_l))


def entropy(m: TransitionMatrix, tol: float = EPS_EIG, max_iter: int = MAX_ITER) -> float:
    """Topological entropy ``log r_A``."""
    return math.log(perron(m, tol, max_iter).eigenvalue)


# -- zeta function -----------------------------------------------------------


def _bareiss_det(mat: list[list[int]]) -> int:
    a = [row[:] for row in mat]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def det_polynomial(m: TransitionMatrix) -> list[int]:
    """Integer coefficients of ``det(I - zA)``, constant term first.

    Evaluates the determinant exactly at ``N + 1`` integer points and
    interpolates.
    """
    n = m.size
    points = list(range(n + 1))
    values = [
        _bareiss_det([[int(i == j) - t * m.rows[i][j] for j in range(n)] for i in range(n)])
        for t in points
    ]
    coeffs = [Fraction(0)] * (n + 1)
    for i, (xi, yi) in enumerate(zip(points, values)):
        basis = [Fraction(1)]
        denom = 1
        for j, xj in enumerate(points):
            if j == i:
                continue
            basis = [Fraction(0)] + basis
            for k in range(len(basis) - 1):
                basis[k] -= xj * basis[k + 1]
            denom *= xi - xj
        for k, c in enumerate(basis):
            coeffs[k] += yi * c / denom
    if any(c.denominator != 1 for c in coeffs):
        raise ArithmeticError("non-integral determinant coefficient")
    out = [int(c) for c in coeffs]
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def format_polynomial(coeffs: Iterable[int], var: str = "z") -> str:
    parts: list[str] = []
    for k, c in enumerate(coeffs):
        if c == 0:
            continue
        mag = abs(c)
        if k == 0:
            body = str(mag)
        else:
            mono = var if k == 1 else f"{var}^{k}"
            body = mono if mag == 1 else f"{mag}{mono}"
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(("+ " if c > 0 else "- ") + body)
    return " ".join(parts) if parts else "0"


@dataclass(frozen=True)
class ZetaSeries:
    coefficients: tuple[int, ...]  # degrees 0..K
    denominator: tuple[int, ...]  # det(I - zA), constant term first
    traces: tuple[int, ...]  # Per_1..Per_K

    @property
    def rational(self) -> str:
        return f"1/({format_polynomial(self.denominator)})"


def zeta_series(m: TransitionMatrix, k: int) -> ZetaSeries:
    """Taylor coefficients of the Artin-Mazur zeta function up to ``z**k``.

    Two independent routes are computed and must agree: the exponential of
    the log-series ``sum Per_n z^n / n`` and the series of ``1/det(I - zA)``.
    """
    if k < 1:
        raise ValueError("need at least one term")
    traces = [periodic_point_count(m, n) for n in range(1, k + 1)]
    # zeta' = zeta * sum_n Per_n z^(n-1)
    z = [1]
    for j in range(1, k + 1):
        s = sum(traces[i - 1] * z[j - i] for i in range(1, j + 1))
        q, rem = divmod(s, j)
        if rem:
            raise ArithmeticError("non-integral zeta coefficient")
        z.append(q)
    den = det_polynomial(m)
    inv = [1]
    for j in range(1, k + 1):
        inv.append(-sum(den[i] * inv[j - i] for i in range(1, min(j, len(den) - 1) + 1)))
    if z != inv:
        raise ArithmeticError("zeta series routes disagree")
    return ZetaSeries(tuple(z), tuple(den), tuple(traces))


def zeta_radius(m: TransitionMatrix) -> float:
    """Radius of convergence ``1/r_A`` of the zeta function."""
    return 1.0 / perron(m).eigenvalue
