"""Continuous orbit equivalence between Markov shifts given by substitution codes.

A witness is a substitution code ``h`` (each source symbol ``a`` is replaced
by a fixed target word ``tau(a)``) together with nonnegative integer time
changes ``k1, l1`` on the source and ``k2, l2`` on the target such that

    sigma_B^k1(x) h(sigma_A x) = sigma_B^l1(x) h(x)
    sigma_A^k2(y) h^-1(sigma_B y) = sigma_A^l2(y) h^-1(y).

The cocycles ``c1 = l1 - k1`` and ``c2 = l2 - k2`` drive the entropy limits
computed here.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import NotAdmissible, NotDecodable
from .kms import gauge_kms
from .locfun import LocallyConstantFunction, from_symbol_table
from .ruelle import build_matrix
from .sft import TransitionMatrix, Word, enumerate_cycles, perron, validate

FULL_2 = ((1, 1), (1, 1))
GOLDEN_MEAN = ((1, 1), (1, 0))


@dataclass(frozen=True)
class SubstitutionCode:
    source: TransitionMatrix
    target: TransitionMatrix
    tau: tuple[Word, ...]  # tau[a - 1] is the image of symbol a

    def __post_init__(self):
        if len(self.tau) != self.source.size:
            raise ValueError("need one image word per source symbol")
        for a, img in enumerate(self.tau, start=1):
            if not img or not self.target.is_admissible(img):
                raise NotAdmissible(f"image of {a} is empty or not target-admissible")
        for a, b in self.source.words(2):
            if not self.target.is_admissible(self.tau[a - 1] + self.tau[b - 1]):
                raise NotAdmissible(f"images of the admissible pair {a}{b} do not concatenate")

    def image(self, a: int) -> Word:
        return self.tau[a - 1]

    @property
    def max_length(self) -> int:
        return max(len(t) for t in self.tau)

    @property
    def is_prefix_code(self) -> bool:
        imgs = self.tau
        return len(set(imgs)) == len(imgs) and not any(
            i != j and b[: len(a)] == a for i, a in enumerate(imgs) for j, b in enumerate(imgs)
        )

    def check_injective(self, depth: int) -> bool:
        """Distinct source words of each length up to ``depth`` have distinct images."""
        for k in range(1, depth + 1):
            images = [apply_code(self, w) for w in self.source.words(k)]
            if len(set(images)) != len(images):
                return False
        return True


def substitution(source, target, tau: Mapping) -> SubstitutionCode:
    """Build a code from a symbol -> word mapping (words as tuples or strings)."""
    source, target = validate(source), validate(target)
    imgs = []
    for a in range(1, source.size + 1):
        img = tau[a] if a in tau else tau[str(a)]
        imgs.append(target.parse_word(img) if isinstance(img, str) else tuple(img))
    return SubstitutionCode(source, target, tuple(imgs))


def apply_code(code: SubstitutionCode, word: Sequence[int]) -> Word:
    """``tau(w_1) tau(w_2) ... tau(w_k)``."""
    word = tuple(word)
    if not code.source.is_admissible(word):
        raise NotAdmissible(f"{word} is not source-admissible")
    out = tuple(s for a in word for s in code.tau[a - 1])
    if not code.target.is_admissible(out):
        raise NotAdmissible(f"image {out} is not target-admissible")
    return out


def decode(code: SubstitutionCode, word: Sequence[int]) -> tuple[Word, Word]:
    """Invert ``h`` on a finite target word.

    Returns the longest source word whose image is a prefix of ``word`` and
    the unconsumed remainder (a proper prefix of some image word).  The code
    must be a prefix code so that the parse is unique.
    """
    word = tuple(word)
    if not code.is_prefix_code:
        raise NotDecodable("image words do not form a prefix code")
    if not code.target.is_admissible(word):
        raise NotAdmissible(f"{word} is not target-admissible")
    state, src = _decoder_step(code, (), word)
    if not code.source.is_admissible(src):
        raise NotDecodable(f"decoded word {src} is not source-admissible")
    return src, state


def _decoder_step(code: SubstitutionCode, buffer: Word, symbols: Sequence[int]) -> tuple[Word, Word]:
    buf = buffer + tuple(symbols)
    out = []
    while buf:
        for a, img in enumerate(code.tau, start=1):
            if buf[: len(img)] == img:
                out.append(a)
                buf = buf[len(img) :]
                break
        else:
            if any(img[: len(buf)] == buf for img in code.tau):
                break
            raise NotDecodable(f"no image word starts {buf}")
    return buf, tuple(out)


def _encoder_step(code: SubstitutionCode, state: Word, symbols: Sequence[int]) -> tuple[Word, Word]:
    return (), tuple(s for a in symbols for s in code.tau[a - 1])


@dataclass(frozen=True)
class CoeWitness:
    code: SubstitutionCode
    k1: LocallyConstantFunction
    l1: LocallyConstantFunction
    k2: LocallyConstantFunction
    l2: LocallyConstantFunction

    def __post_init__(self):
        for name in ("k1", "l1", "k2", "l2"):
            fn = getattr(self, name)
            expected = self.code.source if name.endswith("1") else self.code.target
            if fn.matrix != expected:
                raise ValueError(f"{name} is defined on the wrong shift")
            if fn.kind != "int" or fn.min() < 0:
                raise ValueError(f"{name} must be a nonnegative integer function")

    @property
    def source(self) -> TransitionMatrix:
        return self.code.source

    @property
    def target(self) -> TransitionMatrix:
        return self.code.target

    @property
    def max_depth(self) -> int:
        return max(f.depth for f in (self.k1, self.l1, self.k2, self.l2))


# -- verifying the orbit relations --------------------------------------------


@dataclass(frozen=True)
class EquivalenceReport:
    depth: int
    violations: tuple[tuple[str, str], ...] = ()  # (relation, word)

    @property
    def passed(self) -> bool:
        return not self.violations


class _Mismatch(Exception):
    pass


def _compare(cmp, left_tokens, right_tokens):
    """Feed tokens into the two dropped-and-buffered streams and match them up."""
    ldrop, lpend, rdrop, rpend, matched = cmp
    k = min(ldrop, len(left_tokens))
    ldrop -= k
    lpend = lpend + tuple(left_tokens[k:])
    k = min(rdrop, len(right_tokens))
    rdrop -= k
    rpend = rpend + tuple(right_tokens[k:])
    n = min(len(lpend), len(rpend))
    if lpend[:n] != rpend[:n]:
        raise _Mismatch
    if n:
        matched = True
    return (ldrop, lpend[n:], rdrop, rpend[n:], matched)


def _check_relation(matrix, step, kfun, lfun, depth):
    """First violating word per prefix for ``sigma^k S(sigma w) = sigma^l S(w)``.

    ``step`` is the stream transducer (encoder or decoder).  After a prefix
    long enough to fix ``k`` and ``l``, both streams receive the same symbols,
    so the search is memoised on the comparison state.
    """
    p = max(kfun.depth, lfun.depth, 1)
    memo: dict = {}

    def dfs(last, remaining, lstate, rstate, cmp):
        if remaining == 0:
            return None if cmp[4] else ()
        key = (last, remaining, lstate, rstate, cmp)
        if key in memo:
            return memo[key]
        result = None
        for s in matrix.followers(last):
            try:
                ls, lt = step(lstate, (s,))
                rs, rt = step(rstate, (s,))
                nxt = _compare(cmp, lt, rt)
            except (_Mismatch, NotDecodable):
                result = (s,) + _any_extension(matrix, s, remaining - 1)
                break
            sub = dfs(s, remaining - 1, ls, rs, nxt)
            if sub is not None:
                result = (s,) + sub
                break
        memo[key] = result
        return result

    bad = []
    for pre in matrix.words(min(p, depth)):
        k, l = kfun(pre), lfun(pre)
        try:
            ls, lt = step((), pre[1:])
            rs, rt = step((), pre)
            cmp = _compare((k, (), l, (), False), lt, rt)
        except (_Mismatch, NotDecodable):
            bad.append(pre + _any_extension(matrix, pre[-1], depth - len(pre)))
            continue
        sub = dfs(pre[-1], depth - len(pre), ls, rs, cmp)
        if sub is not None:
            bad.append(pre + sub)
    return bad


def _any_extension(matrix, last, n) -> Word:
    out = []
    for _ in range(n):
        last = matrix.followers(last)[0]
        out.append(last)
    return tuple(out)


def verify_equivalence(witness: CoeWitness, depth: int) -> EquivalenceReport:
    """Check both orbit relations on every admissible word of length ``depth``.

    Each side is compared on the overlap of what a length-``depth`` cylinder
    determines; the overlap must be nonempty.  A failure is conclusive, a
    pass certifies the relations only up to this depth.  The report lists
    one violating word per short prefix.
    """
    need = witness.max_depth + witness.code.max_length + 2
    if depth < need:
        raise ValueError(f"depth must be at least {need}")
    code = witness.code
    enc = lambda st, syms: _encoder_step(code, st, syms)  # noqa: E731
    dec = lambda st, syms: _decoder_step(code, st, syms)  # noqa: E731
    violations = [
        ("forward", code.source.format_word(w))
        for w in _check_relation(code.source, enc, witness.k1, witness.l1, depth)
    ]
    if code.is_prefix_code:
        violations += [
            ("backward", code.target.format_word(w))
            for w in _check_relation(code.target, dec, witness.k2, witness.l2, depth)
        ]
    else:
        violations.append(("backward", "<not a prefix code>"))
    return EquivalenceReport(depth, tuple(violations))


def find_time_changes(
    code: SubstitutionCode, side: int, max_value: int = 3, depth: int | None = None
) -> tuple[LocallyConstantFunction, LocallyConstantFunction] | None:
    """Search depth-1 time changes ``(k, l)`` for one side of a code.

    Best effort: tries every pair of symbol tables with values in
    ``0..max_value`` and returns the first pair that passes verification, or
    None.  A None says nothing about deeper or larger time changes.
    """
    matrix = code.source if side == 1 else code.target
    n = matrix.size
    if depth is None:
        depth = code.max_length + 8
    if side == 1:
        step = lambda st, syms: _encoder_step(code, st, syms)  # noqa: E731
    else:
        if not code.is_prefix_code:
            return None
        step = lambda st, syms: _decoder_step(code, st, syms)  # noqa: E731
    for vals in itertools.product(range(max_value + 1), repeat=2 * n):
        k = from_symbol_table(matrix, vals[:n], "int")
        l = from_symbol_table(matrix, vals[n:], "int")
        if not _check_relation(matrix, step, k, l, depth):
            return k, l
    return None


# -- cocycles and coboundaries ------------------------------------------------


def cocycle(witness: CoeWitness, side: int) -> LocallyConstantFunction:
    """``c1 = l1 - k1`` on the source (side 1) or ``c2 = l2 - k2`` on the target."""
    if side == 1:
        return witness.l1 - witness.k1
    if side == 2:
        return witness.l2 - witness.k2
    raise ValueError("side must be 1 or 2")


def cycle_sum(c: LocallyConstantFunction, cycle: Sequence[int]):
    """Birkhoff sum of ``c`` over one period of the periodic point ``cycle^inf``."""
    cycle = tuple(cycle)
    p = len(cycle)
    reps = -(-(p + c.depth) // p)
    long = cycle * reps
    return sum(c.table[long[i : i + c.depth]] for i in range(p))


def coboundary_solve(
    m: TransitionMatrix, c: LocallyConstantFunction, kappa=1
) -> LocallyConstantFunction | None:
    """Solve ``c = kappa + b - b o sigma`` exactly, or return None.

    ``b`` lives on the vertices of the higher-block graph of ``c`` (words of
    length ``max(depth(c), 2) - 1``).  It is propagated along a spanning tree
    from the first vertex, where it is set to 0, and then checked on every
    edge.
    """
    if c.matrix != m:
        raise ValueError("cocycle lives on a different shift")
    kappa = Fraction(kappa)
    d = max(c.depth, 2)
    cc = c.promote(d)
    weight = {w: Fraction(v) - kappa for w, v in cc.table.items()}
    vertices = m.words(d - 1)
    out_edges: dict[Word, list[Word]] = {v: [] for v in vertices}
    for w in m.words(d):
        out_edges[w[:-1]].append(w)
    b = {vertices[0]: Fraction(0)}
    todo = [vertices[0]]
    while todo:
        v = todo.pop()
        for w in out_edges[v]:
            dst = w[1:]
            if dst not in b:
                b[dst] = b[v] - weight[w]
                todo.append(dst)
    for w, wt in weight.items():
        if b[w[:-1]] - b[w[1:]] != wt:
            return None
    vals = tuple(b[v] for v in vertices)
    if all(x.denominator == 1 for x in vals):
        return LocallyConstantFunction(m, d - 1, tuple(int(x) for x in vals), "int")
    return LocallyConstantFunction(m, d - 1, tuple(float(x) for x in vals), "real")


@dataclass(frozen=True)
class ScoeResult:
    holds: bool
    coboundary: LocallyConstantFunction | None = None
    cycle: Word | None = None
    cycle_sum: int | None = None

    def certificate(self, m: TransitionMatrix) -> dict:
        if self.holds:
            return {"scoe": True, "b1": self.coboundary.to_json()}
        return {"scoe": False, "cycle": m.format_word(self.cycle), "cycle_sum": self.cycle_sum,
                "period": len(self.cycle)}


def is_scoe(witness: CoeWitness) -> ScoeResult:
    """Decide whether ``c1`` is cohomologous to the constant 1.

    A negative answer carries a periodic orbit whose ``c1`` sum differs from
    its period.
    """
    m = witness.source
    c1 = cocycle(witness, 1)
    b = coboundary_solve(m, c1, 1)
    if b is not None:
        return ScoeResult(True, coboundary=b)
    n_vertices = len(m.words(max(c1.depth, 2) - 1))
    for p in range(1, n_vertices + 1):
        for w in enumerate_cycles(m, p, primitive=True):
            s = cycle_sum(c1, w)
            if s != p:
                return ScoeResult(False, cycle=w, cycle_sum=s)
    raise AssertionError("no obstructing cycle found for a non-coboundary")


# -- entropy limits -------------------------------------------------------------


class LimitTerm(NamedTuple):
    n: int
    value: float  # E_n
    entropy_estimate: float  # -log(E_n) / n
    scaled: float  # r**n * E_n


def _side_data(witness: CoeWitness, side: int):
    if side == 1:
        own, other = witness.source, witness.target
    elif side == 2:
        own, other = witness.target, witness.source
    else:
        raise ValueError("side must be 1 or 2")
    return own, other, cocycle(witness, side)


def entropy_limit_sequence(witness: CoeWitness, side: int, n_max: int) -> list[LimitTerm]:
    """``E_n = phi(r_other ** -c^n)`` for ``n = 1..n_max`` under the gauge KMS state.

    Computed as ``E_n = r_own**-n * phi(L_psi^n 1)`` with
    ``psi = -c log r_other``, using ``phi o L^n = r_own^n phi`` for the gauge
    state.  Cost is linear in ``n_max``.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    own, other, c = _side_data(witness, side)
    r_own = perron(own).eigenvalue
    r_other = perron(other).eigenvalue
    psi = c * (-math.log(r_other))
    depth = max(psi.depth, 2)
    tm = build_matrix(psi, depth)
    weights = gauge_kms(own).table(depth)
    h = np.ones(len(own.words(depth)))
    out = []
    for n in range(1, n_max + 1):
        h = tm.dot(h)
        scaled = float(weights @ h)
        value = scaled / r_own**n
        out.append(LimitTerm(n, value, -math.log(value) / n, scaled))
    return out


@dataclass(frozen=True)
class LimitConstants:
    sequence: tuple[float, ...]  # r_own**n * E_n, n = 1..n_max
    last: float
    oscillation: float  # max - min over the final quarter


def limit_constants(witness: CoeWitness, side: int, n_max: int) -> LimitConstants:
    seq = tuple(t.scaled for t in entropy_limit_sequence(witness, side, n_max))
    tail = seq[-max(1, len(seq) // 4) :]
    return LimitConstants(seq, seq[-1], max(tail) - min(tail))


# -- the worked example ---------------------------------------------------------


def golden_example() -> CoeWitness:
    """Full 2-shift to golden mean shift via ``1 -> 1``, ``2 -> 21``."""
    a, b = validate(FULL_2), validate(GOLDEN_MEAN)
    code = SubstitutionCode(a, b, ((1,), (2, 1)))
    return CoeWitness(
        code,
        k1=from_symbol_table(a, (0, 0), "int"),
        l1=from_symbol_table(a, (1, 2), "int"),
        k2=from_symbol_table(b, (0, 1), "int"),
        l2=from_symbol_table(b, (1, 1), "int"),
    )


def identity_witness(m: TransitionMatrix) -> CoeWitness:
    m = validate(m)
    code = SubstitutionCode(m, m, tuple((s,) for s in range(1, m.size + 1)))
    zero = from_symbol_table(m, (0,) * m.size, "int")
    one = from_symbol_table(m, (1,) * m.size, "int")
    return CoeWitness(code, zero, one, zero, one)


def hn_diagonal(n: int) -> dict[int, int]:
    """Diagonal element ``sum_nu 2^{#2(nu)} S_nu^* S_nu`` on the golden mean shift.

    Returns its value on each cylinder ``U_1, U_2``:
    ``H_n(y) = sum over nu in B_n with B(nu_n, y_1) = 1 of 2^{#2(nu)}``.
    """
    b = validate(GOLDEN_MEAN)
    weight = {1: 1, 2: 2}
    ending = dict(weight)  # words of length 1 by last symbol
    for _ in range(n - 1):
        ending = {t: weight[t] * sum(ending[s] for s in b.predecessors(t)) for t in (1, 2)}
    return {y: sum(ending[s] for s in (1, 2) if b(s, y)) for y in (1, 2)}


def hn_closed_form(n: int) -> dict[int, Fraction]:
    const = Fraction(2 ** (n + 1) + (-1) ** n, 3)
    coeff = Fraction(2 ** (n + 1) + 2 * (-1) ** (n - 1), 3)
    return {1: const + coeff, 2: const}


def hn_check(n: int):
    """Exact deviation between ``H_n`` and its closed form (0 when they agree)."""
    if not 1 <= n <= 30:
        raise ValueError("n must be in 1..30")
    direct, closed = hn_diagonal(n), hn_closed_form(n)
    return max(abs(direct[y] - closed[y]) for y in (1, 2))
