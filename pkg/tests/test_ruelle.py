import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_function, shift_matrices
from thermoshift import coe, ruelle
from thermoshift.errors import DepthTooSmall
from thermoshift.locfun import constant, indicator
from thermoshift.measure import expectation

R_B = (1 + math.sqrt(5)) / 2


def brute_apply(phi, f, x):
    """Oracle: sum over one-symbol extensions of a concrete long word."""
    m = phi.matrix
    return sum(math.exp(phi((j,) + x)) * f((j,) + x) for j in m.predecessors(x[0]))


class TestApply:
    def test_full_shift_counts_preimages(self, A):
        out = ruelle.apply(constant(A, 0.0), constant(A, 1))
        assert out.depth == 1 and out.values == (2.0, 2.0)

    def test_golden_counts_preimages(self, B):
        assert ruelle.apply(constant(B, 0.0), constant(B, 1)).values == (2.0, 1.0)

    def test_golden_indicator(self, B):
        assert ruelle.apply(constant(B, 0.0), indicator(B, (1,))).values == (1.0, 1.0)

    @settings(max_examples=40, deadline=None)
    @given(shift_matrices(max_size=3), st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**32 - 1))
    def test_matches_extension_sum(self, m, dp, df, seed):
        rng = np.random.default_rng(seed)
        phi, f = random_function(m, dp, rng), random_function(m, df, rng, -2, 2)
        out = ruelle.apply(phi, f)
        d = max(dp, df, 2)
        assert out.depth == d - 1
        for x in m.words(d):
            assert abs(out(x) - brute_apply(phi, f, x)) < 1e-12

    @settings(max_examples=30, deadline=None)
    @given(shift_matrices(max_size=3), st.integers(2, 4), st.integers(0, 2**32 - 1))
    def test_apply_equals_matrix_action_exactly(self, m, d, seed):
        rng = np.random.default_rng(seed)
        phi, f = random_function(m, 2, rng), random_function(m, d, rng)
        tm = ruelle.build_matrix(phi, d)
        full = tm.dot(f.array)
        out = ruelle.apply(phi, f).promote(d)
        # the image only depends on the first d-1 symbols, so this is exact
        assert np.array_equal(out.array, full)


class TestBuildMatrix:
    def test_full_shift_row_sums(self, A):
        tm = ruelle.build_matrix(constant(A, 0.0), 2)
        assert tm.entries.shape == (4, 4)
        assert np.all(tm.entries.sum(axis=1) == 2)

    def test_golden_spectral_radius(self, B):
        tm = ruelle.build_matrix(constant(B, 0.0), 2)
        assert tm.entries.shape == (3, 3)
        assert abs(max(abs(np.linalg.eigvals(tm.entries))) - R_B) < 1e-12

    def test_weights_are_exp_phi(self, B, rng):
        phi = random_function(B, 2, rng)
        tm = ruelle.build_matrix(phi, 3)
        words = B.words(3)
        for i, j in zip(*np.nonzero(tm.entries)):
            assert tm.entries[i, j] == math.exp(phi.table[words[j][:2]])

    def test_depth_too_small(self, B, rng):
        with pytest.raises(DepthTooSmall):
            ruelle.build_matrix(random_function(B, 3, rng), 2)
        with pytest.raises(DepthTooSmall):
            ruelle.build_matrix(constant(B, 0.0), 1)


class TestRpf:
    def test_full_shift_zero(self, A):
        data = ruelle.rpf(constant(A, 0.0))
        assert abs(data.eigenvalue - 2) < 1e-12
        assert np.allclose(data.eigenfunction.array, 1, atol=1e-12)
        for w in A.words(5):
            assert abs(data.eigenmeasure.mass(w) - 2.0**-5) < 1e-15

    def test_golden_zero(self, B):
        assert abs(ruelle.rpf(constant(B, 0.0)).eigenvalue - R_B) < 1e-12

    def test_cross_values(self, golden):
        a, b = golden.source, golden.target
        c1, c2 = coe.cocycle(golden, 1), coe.cocycle(golden, 2)
        assert abs(ruelle.rpf((1 - c2) * math.log(2)).eigenvalue - 2) < 1e-12
        assert abs(ruelle.rpf((1 - c1) * math.log(R_B)).eigenvalue - R_B) < 1e-12
        assert c1.matrix == a and c2.matrix == b

    @settings(max_examples=40, deadline=None)
    @given(shift_matrices(max_size=3), st.integers(1, 3), st.integers(0, 2**32 - 1))
    def test_against_eigvals_oracle(self, m, d, seed):
        rng = np.random.default_rng(seed)
        phi = random_function(m, d, rng, -1, 1)
        data = ruelle.rpf(phi)
        dense = ruelle.build_matrix(phi, max(d, 2)).entries
        assert abs(data.eigenvalue - max(abs(np.linalg.eigvals(dense)))) < 1e-9 * data.eigenvalue
        # positivity and normalisation
        assert data.eigenfunction.min() > 0
        assert np.all(data.eigenmeasure.base > 0)
        assert abs(expectation(data.eigenmeasure, data.eigenfunction) - 1) < 1e-12
        assert abs(data.eigenmeasure.base.sum() - 1) < 1e-12

    def test_eigenfunction_relation(self, B, rng):
        phi = random_function(B, 2, rng)
        data = ruelle.rpf(phi)
        lg = ruelle.apply(phi, data.eigenfunction)
        assert lg.sup_distance(data.eigenfunction * data.eigenvalue) < 1e-12

    @pytest.mark.parametrize("seed", range(5))
    def test_duality(self, seed):
        rng = np.random.default_rng(seed)
        for m in (coe.golden_example().source, coe.golden_example().target):
            phi = random_function(m, 2, rng)
            data = ruelle.rpf(phi)
            mu, r = data.eigenmeasure, data.eigenvalue
            for k in range(1, 6):
                for w in m.words(k):
                    lhs = expectation(mu, ruelle.apply(phi, indicator(m, w)))
                    assert abs(lhs - r * mu.mass(w)) < 1e-10

    def test_to_json_keys(self, B):
        out = ruelle.rpf(constant(B, 0.0)).to_json()
        assert set(out) == {"eigenvalue", "eigenfunction", "measure_depth_table"}
        assert set(out["measure_depth_table"]) == {"11", "12", "21"}


class TestPowerIdentity:
    def test_trivial(self, A):
        assert ruelle.power_identity_check(constant(A, 0.0), constant(A, 1), 3) == 0.0

    def test_n_one_is_exact(self, B, rng):
        phi, a = random_function(B, 2, rng), random_function(B, 2, rng)
        assert ruelle.power_identity_check(phi, a, 1) == 0.0

    def test_golden_example(self, golden, rng):
        c2 = coe.cocycle(golden, 2)
        a = random_function(golden.target, 3, rng)
        assert ruelle.power_identity_check(c2 * math.log(2), a, 4) <= 1e-11


class TestConvergence:
    def test_exact_eigenfunction(self, A):
        assert ruelle.convergence_profile(constant(A, 0.0), constant(A, 1), 10) == [0.0] * 10

    def test_golden_ratio_of_decay(self, B):
        gaps = ruelle.convergence_profile(constant(B, 0.0), indicator(B, (1,)), 30)
        # second eigenvalue of the golden matrix is -1/r_B
        assert abs(ruelle.decay_ratio(gaps) - R_B**-2) < 1e-3
        assert all(b < a for a, b in zip(gaps, gaps[1:]) if b > 1e-13)

    def test_decay_ratio_floor(self):
        assert ruelle.decay_ratio([0.0] * 10) == 0.0
        assert abs(ruelle.decay_ratio([1.0, 0.5, 0.25, 0.125, 0.0625]) - 0.5) < 1e-15


def test_periodic_orbit_weights(B, rng):
    # trace of L^n on a deep enough level counts periodic orbits with weight exp(S_n phi)
    phi = random_function(B, 1, rng)
    n = 4
    tm = ruelle.build_matrix(phi, 2)
    trace = np.trace(np.linalg.matrix_power(tm.entries, n))
    oracle = sum(math.exp(sum(phi((w[i],)) for i in range(n)))
                 for w in itertools.product((1, 2), repeat=n)
                 if all(B(w[i], w[(i + 1) % n]) for i in range(n)))
    assert abs(trace - oracle) < 1e-12
