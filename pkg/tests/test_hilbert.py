import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from phasestab.hilbert import (
    HermitianOperator,
    ScalarField,
    lift,
    lifted_pair_opnorm,
    quotient_distance,
    quotient_vs_lift_bound,
)

from conftest import random_vector

REAL, COMPLEX = ScalarField.REAL, ScalarField.COMPLEX


def grid_distance(f, g, field):
    """Brute-force inf over unimodular alpha (grid plus refinement)."""
    if field is REAL:
        return min(np.linalg.norm(f - g), np.linalg.norm(f + g))
    th = np.linspace(0, 2 * np.pi, 4096, endpoint=False)
    vals = [np.linalg.norm(f - np.exp(1j * t) * g) for t in th]
    t0 = th[int(np.argmin(vals))]
    fine = np.linspace(t0 - 2e-3, t0 + 2e-3, 4001)
    return min(np.linalg.norm(f - np.exp(1j * t) * g) for t in fine)


class TestQuotientDistance:
    def test_identical(self):
        assert quotient_distance([1, 0], [1, 0]) == 0.0

    def test_orthogonal_real(self):
        assert quotient_distance([1.0, 0], [0, 1.0], REAL) == pytest.approx(math.sqrt(2), abs=1e-15)

    def test_phase_complex(self):
        assert quotient_distance([1, 0], [1j, 0], COMPLEX) == pytest.approx(0.0, abs=1e-15)

    def test_phase_real_field(self):
        # only alpha = +-1 is allowed: |1 - i| = |1 + i| = sqrt 2
        f, g = np.array([1, 0]), np.array([1j, 0])
        assert quotient_distance(f, g, REAL) == pytest.approx(math.sqrt(2), abs=1e-15)
        assert quotient_distance(f, g, REAL) == pytest.approx(grid_distance(f, g, REAL), abs=1e-15)

    def test_mismatch(self):
        with pytest.raises(ValueError):
            quotient_distance([1, 0], [1, 0, 0])

    @pytest.mark.parametrize("field", [REAL, COMPLEX])
    def test_against_grid(self, rng, field):
        for _ in range(20):
            M = int(rng.integers(1, 6))
            f = random_vector(rng, M, field is COMPLEX)
            g = random_vector(rng, M, field is COMPLEX)
            assert quotient_distance(f, g, field) == pytest.approx(grid_distance(f, g, field), abs=1e-9)

    def test_unimodular_invariance(self, rng):
        for _ in range(50):
            f, g = random_vector(rng, 4, True), random_vector(rng, 4, True)
            a = np.exp(1j * rng.uniform(0, 2 * np.pi))
            assert abs(quotient_distance(f, a * g) - quotient_distance(f, g)) <= 1e-12
            assert abs(quotient_distance(f, -g, REAL) - quotient_distance(f, g, REAL)) <= 1e-12

    def test_homogeneity_and_triangle(self, rng):
        for _ in range(200):
            f, g, h = (random_vector(rng, 3, True) for _ in range(3))
            c = rng.uniform(0, 5)
            assert quotient_distance(c * f, c * g) == pytest.approx(c * quotient_distance(f, g), rel=1e-12, abs=1e-12)
            assert quotient_distance(f, h) <= quotient_distance(f, g) + quotient_distance(g, h) + 1e-10


finite = st.floats(-1e3, 1e3, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, 4, elements=finite), arrays(np.float64, 4, elements=finite))
def test_distance_symmetric_nonnegative(f, g):
    d = quotient_distance(f, g, REAL)
    assert d >= 0
    assert d == pytest.approx(quotient_distance(g, f, REAL), abs=1e-9 * (1 + np.linalg.norm(f) + np.linalg.norm(g)))
    assert d <= min(np.linalg.norm(f - g), np.linalg.norm(f + g)) + 1e-9 * (1 + np.linalg.norm(f) ** 2)


class TestHermitian:
    def test_lift_examples(self):
        assert np.array_equal(lift([1.0, 0.0]).matrix, [[1, 0], [0, 0]])
        assert np.array_equal(lift([0.0, 0.0]).matrix, np.zeros((2, 2)))
        X = lift(np.array([1.0, 1.0]) / math.sqrt(2)).matrix
        assert np.allclose(X, [[0.5, 0.5], [0.5, 0.5]], atol=1e-15)

    def test_exact_hermitian(self, rng):
        a = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        X = HermitianOperator.from_lower(a).matrix
        assert np.array_equal(X, X.conj().T)
        assert not X.flags.writeable

    def test_lift_trace_rank(self, rng):
        f = random_vector(rng, 4, True)
        X = lift(f)
        assert np.trace(X.matrix).real == pytest.approx(np.vdot(f, f).real, rel=1e-14)
        assert np.linalg.matrix_rank(X.matrix) == 1

    def test_arithmetic(self):
        X = lift([1.0, 0.0]) - lift([0.0, 1.0])
        assert X.opnorm() == 1.0
        assert (2 * X).opnorm() == 2.0
        assert (X + X).hs_norm() == pytest.approx(2 * math.sqrt(2))


class TestLiftedOpnorm:
    def test_examples(self):
        assert lifted_pair_opnorm([1, 0], [0, 1]) == 1.0
        assert lifted_pair_opnorm([1, 0], [0, 0]) == 1.0
        assert lifted_pair_opnorm([1, 0], [1, 0]) == 0.0

    @pytest.mark.parametrize("cplx", [False, True])
    def test_matches_eigensolver(self, rng, cplx):
        for _ in range(500):
            M = int(rng.integers(2, 9))
            f = random_vector(rng, M, cplx) * rng.uniform(0.1, 3)
            g = random_vector(rng, M, cplx) * rng.uniform(0.1, 3)
            want = np.max(np.abs(np.linalg.eigvalsh(np.outer(f, f.conj()) - np.outer(g, g.conj()))))
            assert lifted_pair_opnorm(f, g) == pytest.approx(want, rel=1e-10)


class TestEq3:
    def test_examples(self):
        lhs, rhs = quotient_vs_lift_bound([1.0, 0], [0, 1.0])
        assert (lhs, rhs) == (pytest.approx(math.sqrt(2)), pytest.approx(2.0))
        assert quotient_vs_lift_bound([1.0, 0], [1.0, 0]) == (0.0, 0.0)

    def test_precondition(self):
        with pytest.raises(ValueError):
            quotient_vs_lift_bound([2.0, 0], [0, 1.0])
        with pytest.raises(ValueError):
            quotient_vs_lift_bound([1.0, 0], [0, 1.5])

    @pytest.mark.parametrize("field", [REAL, COMPLEX])
    def test_random_pairs(self, rng, field):
        for _ in range(1000):
            M = int(rng.integers(1, 7))
            f = random_vector(rng, M, field is COMPLEX)
            g = random_vector(rng, M, field is COMPLEX)
            f /= np.linalg.norm(f)
            g *= rng.uniform() / np.linalg.norm(g)
            lhs, rhs = quotient_vs_lift_bound(f, g, field)
            assert lhs <= rhs + 1e-12
