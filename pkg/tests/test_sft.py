import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import brute_words, shift_matrices
from thermoshift import sft
from thermoshift.errors import (
    IsPermutation,
    NoConvergence,
    NotIrreducible,
    NotSquare,
    NotZeroOne,
    TooSmall,
)
from thermoshift.sft import TransitionMatrix

GOLDEN_RATIO = (1 + math.sqrt(5)) / 2


def lucas(n):
    a, b = 2, 1
    for _ in range(n):
        a, b = b, a + b
    return a


class TestValidation:
    def test_accepts_examples(self, A, B):
        assert A.size == 2 and B.size == 2
        assert B(2, 2) == 0

    @pytest.mark.parametrize(
        "rows, exc",
        [
            ([[1, 1, 0], [1, 0, 1]], NotSquare),
            ([[1, 2], [1, 0]], NotZeroOne),
            ([[1]], TooSmall),
            ([[1, 0], [0, 1]], NotIrreducible),
            ([[1, 1], [0, 1]], NotIrreducible),
            ([[0, 0], [1, 1]], NotIrreducible),
            ([[0, 1], [1, 0]], IsPermutation),
        ],
    )
    def test_rejects(self, rows, exc):
        with pytest.raises(exc):
            sft.validate(rows)

    def test_validate_passes_through(self, B):
        assert sft.validate(B) is B

    def test_errors_are_value_errors(self):
        with pytest.raises(ValueError):
            TransitionMatrix([[0, 1], [1, 0]])


class TestWords:
    def test_golden_words(self, B):
        assert B.words(2) == ((1, 1), (1, 2), (2, 1))
        assert len(B.words(5)) == 13

    def test_empty_word(self, B):
        assert B.words(0) == ((),)

    @settings(max_examples=40, deadline=None)
    @given(shift_matrices(max_size=4))
    def test_words_match_brute_force(self, m):
        for k in range(1, 5):
            assert list(m.words(k)) == brute_words(m, k)

    def test_format_and_parse(self, B):
        assert B.format_word((1, 2, 1)) == "121"
        assert B.parse_word("121") == (1, 2, 1)
        assert sft.format_word((10, 2), 11) == "10,2"
        assert sft.parse_word("10,2", 11) == (10, 2)


class TestPeriodicPoints:
    def test_lucas(self, B):
        assert [sft.periodic_point_count(B, n) for n in range(1, 21)] == [lucas(n) for n in range(1, 21)]

    def test_full_shift(self, A):
        assert [sft.periodic_point_count(A, n) for n in range(1, 11)] == [2**n for n in range(1, 11)]

    @settings(max_examples=30, deadline=None)
    @given(shift_matrices(max_size=3))
    def test_trace_equals_closed_words(self, m):
        for n in range(1, 6):
            closed = [w for w in itertools.product(range(1, m.size + 1), repeat=n)
                      if all(m(w[i], w[(i + 1) % n]) for i in range(n))]
            assert sft.periodic_point_count(m, n) == len(closed)
            assert len(sft.enumerate_cycles(m, n)) == len(closed)

    def test_primitive_cycles(self, B):
        assert sft.enumerate_cycles(B, 1, primitive=True) == [(1,)]
        assert sft.enumerate_cycles(B, 2, primitive=True) == [(1, 2)]
        assert sft.enumerate_cycles(B, 4, primitive=True) == [(1, 1, 1, 2)]

    @settings(max_examples=20, deadline=None)
    @given(shift_matrices(max_size=3))
    def test_primitive_orbit_count(self, m):
        # Per_n = sum over d | n of d * (number of primitive orbits of length d)
        for n in range(1, 7):
            total = sum(d * len(sft.enumerate_cycles(m, d, primitive=True))
                        for d in range(1, n + 1) if n % d == 0)
            assert total == sft.periodic_point_count(m, n)


class TestPerron:
    def test_values(self, A, B):
        assert abs(sft.perron(A).eigenvalue - 2) < 1e-12
        assert abs(sft.perron(B).eigenvalue - GOLDEN_RATIO) < 1e-12
        assert abs(sft.entropy(B) - math.log(GOLDEN_RATIO)) < 1e-12

    def test_vectors(self, B):
        pd = sft.perron(B)
        assert pd.right_vector.max() == 1.0
        assert abs(pd.left_vector @ pd.right_vector - 1) < 1e-14
        assert max(pd.residuals(B)) < 1e-14

    @settings(max_examples=40, deadline=None)
    @given(shift_matrices(max_size=5))
    def test_matches_eigvals_oracle(self, m):
        oracle = max(abs(np.linalg.eigvals(m.array)))
        pd = sft.perron(m)
        assert abs(pd.eigenvalue - oracle) < 1e-9
        assert np.all(pd.right_vector > 0) and np.all(pd.left_vector > 0)
        assert max(pd.residuals(m)) < 1e-9

    def test_iteration_cap(self, B):
        with pytest.raises(NoConvergence):
            sft.perron(B, max_iter=2)


class TestZeta:
    def test_golden(self, B):
        z = sft.zeta_series(B, 10)
        assert z.coefficients == (1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89)
        assert z.rational == "1/(1 - z - z^2)"
        assert z.traces == tuple(lucas(n) for n in range(1, 11))

    def test_full_shift(self, A):
        z = sft.zeta_series(A, 6)
        assert z.rational == "1/(1 - 2z)"
        assert z.coefficients == tuple(2**n for n in range(7))

    def test_needs_terms(self, B):
        with pytest.raises(ValueError):
            sft.zeta_series(B, 0)

    def test_radius(self, B):
        assert abs(sft.zeta_radius(B) - 1 / GOLDEN_RATIO) < 1e-12

    @settings(max_examples=30, deadline=None)
    @given(shift_matrices(max_size=4))
    def test_denominator_matches_numpy(self, m):
        # coefficients of det(I - zA) from the characteristic polynomial of A
        char = np.poly(m.array)  # det(xI - A), leading first
        expected = np.round(char).astype(int).tolist()
        den = list(sft.det_polynomial(m))
        den += [0] * (len(expected) - len(den))
        assert den == expected

    def test_polynomial_format(self):
        assert sft.format_polynomial([1, -3, 0, 2]) == "1 - 3z + 2z^3"
