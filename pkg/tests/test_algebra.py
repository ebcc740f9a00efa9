import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ucpdilate.algebra import (
    MatrixSubalgebra,
    State,
    adjoint,
    conditional_expectation,
    hermitian_eig,
    matrix_from_json,
    matrix_to_json,
    membership_residual,
    operator_norm,
)
from ucpdilate.errors import DimensionMismatch, NotHermitian

from conftest import SX, random_hermitian, random_matrix


class TestHermitianEig:
    def test_diagonal_spectrum(self):
        w, _ = hermitian_eig(np.diag([2.0, 1.0]))
        np.testing.assert_allclose(w, [1.0, 2.0])

    def test_pauli_spectrum(self):
        w, _ = hermitian_eig(SX)
        np.testing.assert_allclose(w, [-1.0, 1.0], atol=1e-14)

    def test_reconstruction_residual(self):
        rng = np.random.default_rng(0)
        m = random_hermitian(rng, 8)
        w, u = hermitian_eig(m)
        resid = operator_norm(m - u @ np.diag(w) @ adjoint(u))
        assert resid <= 1e-10 * max(1.0, operator_norm(m))

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitian):
            hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))

    @given(seed=st.integers(0, 10_000), d=st.integers(2, 6))
    @settings(max_examples=40, deadline=None)
    def test_reconstruction_property(self, seed, d):
        m = random_hermitian(np.random.default_rng(seed), d)
        w, u = hermitian_eig(m)
        assert np.all(np.diff(w) >= -1e-12)
        resid = operator_norm(m - u @ np.diag(w) @ adjoint(u))
        assert resid <= 1e-10 * max(1.0, operator_norm(m))


class TestConditionalExpectation:
    def test_off_diagonal_killed(self):
        diag = MatrixSubalgebra.diagonal(2)
        np.testing.assert_allclose(conditional_expectation(diag, SX), 0, atol=1e-14)

    def test_identity_fixed(self):
        for alg in (MatrixSubalgebra.diagonal(3), MatrixSubalgebra.full(3)):
            np.testing.assert_allclose(
                conditional_expectation(alg, np.eye(3)), np.eye(3), atol=1e-14)

    def test_upper_triangular_projection(self):
        # direct HS projection by hand: diagonal part survives
        diag = MatrixSubalgebra.diagonal(2)
        x = np.array([[1.0, 1.0], [0.0, 2.0]], dtype=np.complex128)
        np.testing.assert_allclose(
            conditional_expectation(diag, x), np.diag([1.0, 2.0]), atol=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            conditional_expectation(MatrixSubalgebra.diagonal(2), np.eye(3))

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_idempotent_unital_star(self, seed):
        rng = np.random.default_rng(seed)
        alg = MatrixSubalgebra.diagonal(3)
        x = random_matrix(rng, 3, norm=False)
        ex = conditional_expectation(alg, x)
        assert operator_norm(conditional_expectation(alg, ex) - ex) <= 1e-12
        assert operator_norm(
            conditional_expectation(alg, adjoint(x)) - adjoint(ex)) <= 1e-12


class TestMembershipResidual:
    def test_basis_elements_inside(self):
        alg = MatrixSubalgebra.diagonal(3)
        for b in alg.basis:
            assert membership_residual(alg, b) <= 1e-12

    def test_orthogonal_element_norm(self):
        # σ_x is HS-orthogonal to the diagonal algebra, so its projection is 0
        assert abs(membership_residual(MatrixSubalgebra.diagonal(2), SX) - 1.0) <= 1e-10

    def test_projection_idempotence(self):
        rng = np.random.default_rng(4)
        alg = MatrixSubalgebra.diagonal(4)
        y = random_matrix(rng, 4, norm=False)
        assert membership_residual(alg, conditional_expectation(alg, y)) <= 1e-12


class TestSubalgebraConstruction:
    def test_from_spanning_orthonormalizes(self):
        mats = [np.eye(2), 2.0 * np.eye(2), np.diag([1.0, -1.0])]
        alg = MatrixSubalgebra.from_spanning(2, mats)
        assert alg.dim == 2
        gram = np.array([[np.vdot(a, b) for b in alg.basis] for a in alg.basis])
        np.testing.assert_allclose(gram, np.eye(2), atol=1e-12)

    def test_rejects_non_closed_span(self):
        # span{I, E01} is not adjoint-closed
        e01 = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=np.complex128)
        with pytest.raises(ValueError):
            MatrixSubalgebra.from_spanning(2, [np.eye(2), e01])


class TestState:
    def test_maximally_mixed(self):
        s = State.maximally_mixed(2)
        assert s.faithful
        assert abs(s.expect(np.eye(2)) - 1.0) <= 1e-14

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            State.from_density(np.diag([1.5, -0.5]))

    def test_rejects_trace(self):
        with pytest.raises(ValueError):
            State.from_density(np.diag([0.7, 0.7]))

    def test_faithfulness_flag(self):
        assert not State.from_density(np.diag([1.0, 0.0])).faithful
        assert State.from_density(np.diag([0.9, 0.1])).faithful


def test_matrix_json_round_trip():
    rng = np.random.default_rng(9)
    m = random_matrix(rng, 3, norm=False)
    np.testing.assert_allclose(matrix_from_json(matrix_to_json(m)), m, atol=0)
