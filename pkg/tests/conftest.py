import itertools

import numpy as np
import pytest
from hypothesis import strategies as st

from thermoshift import coe
from thermoshift.errors import InvalidMatrix
from thermoshift.sft import TransitionMatrix


@pytest.fixture(scope="session")
def A():
    return TransitionMatrix(coe.FULL_2)


@pytest.fixture(scope="session")
def B():
    return TransitionMatrix(coe.GOLDEN_MEAN)


@pytest.fixture(scope="session")
def golden():
    return coe.golden_example()


def _try_matrix(rows):
    try:
        return TransitionMatrix(rows)
    except InvalidMatrix:
        return None


@st.composite
def shift_matrices(draw, max_size=4):
    """Irreducible non-permutation 0-1 matrices of size 2..max_size."""
    n = draw(st.integers(2, max_size))
    # a full cycle plus random extra edges keeps most draws irreducible
    extra = draw(st.lists(st.booleans(), min_size=n * n, max_size=n * n))
    rows = [[1 if (j == (i + 1) % n) or extra[i * n + j] else 0 for j in range(n)] for i in range(n)]
    if all(sum(r) == 1 for r in rows):
        rows[0][0] = 1
    return TransitionMatrix(rows)


def brute_words(m, k):
    """Admissible k-words by filtering the full product."""
    return [w for w in itertools.product(range(1, m.size + 1), repeat=k)
            if all(m(w[i], w[i + 1]) for i in range(k - 1))]


def random_function(m, depth, rng, lo=-0.5, hi=0.5):
    from thermoshift.locfun import from_table
    return from_table(m, depth, {w: float(rng.uniform(lo, hi)) for w in m.words(depth)})


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
