import numpy as np
import pytest

from ucpdilate import channel as ch
from ucpdilate.algebra import MatrixSubalgebra, State, adjoint, operator_norm
from ucpdilate.errors import (
    DimensionMismatch,
    NonFaithfulState,
    NotCompletelyPositive,
    NotInvariant,
)

from conftest import SX, SZ, random_matrix

M2 = MatrixSubalgebra.full(2)


class TestApply:
    def test_identity_channel(self):
        phi = ch.identity_channel(2)
        rng = np.random.default_rng(0)
        a = random_matrix(rng, 2)
        np.testing.assert_allclose(phi.apply(a), a, atol=1e-14)

    def test_depolarizing_on_traceless(self, depolarizing_half):
        # closed form: traceless input is scaled by 1 − p
        np.testing.assert_allclose(depolarizing_half.apply(SZ), 0.5 * SZ, atol=1e-12)

    def test_conjugation(self, phase_unitary):
        phi = ch.conjugation(phase_unitary)
        rng = np.random.default_rng(1)
        a = random_matrix(rng, 2)
        np.testing.assert_allclose(
            phi.apply(a), adjoint(phase_unitary) @ a @ phase_unitary, atol=1e-14)

    def test_unitality_enforced(self):
        with pytest.raises(ValueError):
            ch.UcpMap(kraus=(np.diag([1.0, 0.5]),))

    def test_dimension_mismatch(self, depolarizing_half):
        with pytest.raises(DimensionMismatch):
            depolarizing_half.apply(np.eye(3))


class TestChoi:
    def test_identity_rank_one(self):
        assert ch.choi(ch.identity_channel(2)).rank() == 1

    def test_depolarizing_rank_four(self, depolarizing_half):
        # oracle: J = (1−p)·J(id) + (p/2)·I_4 has four positive eigenvalues
        j_id = ch.choi(ch.identity_channel(2)).matrix
        oracle = 0.5 * j_id + 0.25 * np.eye(4)
        np.testing.assert_allclose(
            np.linalg.eigvalsh(ch.choi(depolarizing_half).matrix),
            np.linalg.eigvalsh(oracle), atol=1e-12)
        assert ch.choi(depolarizing_half).rank() == 4

    def test_round_trip_action(self, depolarizing_half):
        back = ch.kraus_from_choi(ch.choi(depolarizing_half))
        worst = max(operator_norm(back.apply(b) - depolarizing_half.apply(b))
                    for b in M2.basis)
        assert worst <= 1e-9

    def test_negative_eigenvalue_rejected(self):
        c = ch.ChoiMatrix(dim=2, matrix=np.diag([1.0, 1.0, 1.0, -0.1]))
        with pytest.raises(NotCompletelyPositive):
            ch.kraus_from_choi(c)

    def test_cp_and_unital_for_random_maps(self):
        for seed in range(5):
            phi = ch.random_ucp(3, 2, seed=seed)
            assert ch.choi(phi).eigenvalues()[0] >= -1e-8
            np.testing.assert_allclose(phi.apply(np.eye(3)), np.eye(3), atol=1e-10)


class TestInvariantState:
    def test_depolarizing_maximally_mixed(self, depolarizing_half):
        fp = ch.invariant_state(depolarizing_half)
        np.testing.assert_allclose(fp.state.rho, np.eye(2) / 2, atol=1e-10)
        assert fp.unique

    def test_phase_conjugation_flags_non_uniqueness(self, phase_unitary):
        fp = ch.invariant_state(ch.conjugation(phase_unitary))
        assert not fp.unique
        # most faithful representative of the diagonal fixed simplex
        assert fp.state.min_eigenvalue() > 0.49

    def test_amplitude_damping_pure_fixed_point(self):
        fp = ch.invariant_state(ch.amplitude_damping(0.4))
        np.testing.assert_allclose(fp.state.rho, np.diag([1.0, 0.0]), atol=1e-9)
        assert not fp.state.faithful

    def test_fixed_point_residual(self):
        for seed in range(4):
            phi = ch.random_ucp(2, 2, seed=seed)
            fp = ch.invariant_state(phi)
            assert fp.residual <= 1e-8


class TestMultiplicativeDomain:
    def test_identity_always_member(self, depolarizing_half):
        assert ch.multiplicative_domain_member(depolarizing_half, np.eye(2))

    def test_automorphism_full_domain(self, phase_unitary):
        assert ch.multiplicative_domain_member(ch.conjugation(phase_unitary), SX)

    def test_depolarizing_excludes_sigma_z(self, depolarizing_half):
        # Φ(σ_z)² = 0.25·I ≠ I = Φ(σ_z²)
        img = depolarizing_half.apply(SZ)
        np.testing.assert_allclose(img @ img, 0.25 * np.eye(2), atol=1e-12)
        assert not ch.multiplicative_domain_member(depolarizing_half, SZ)

    def test_is_multiplicative(self, depolarizing_half, phase_unitary):
        assert ch.is_multiplicative(ch.conjugation(phase_unitary))
        assert ch.is_multiplicative(ch.identity_channel(2))
        assert not ch.is_multiplicative(depolarizing_half)

    def test_multiplicative_implies_domain_membership(self, phase_unitary):
        phi = ch.conjugation(phase_unitary)
        assert all(ch.multiplicative_domain_member(phi, b) for b in M2.basis)


class TestPhiAdjoint:
    def test_depolarizing_self_adjoint(self, depolarizing_half):
        adj = ch.phi_adjoint(depolarizing_half, State.maximally_mixed(2))
        assert isinstance(adj, ch.UcpMap)
        worst = max(operator_norm(adj.apply(b) - depolarizing_half.apply(b))
                    for b in M2.basis)
        assert worst <= 1e-9

    def test_conjugation_adjoint_is_inverse(self, phase_unitary):
        adj = ch.phi_adjoint(ch.conjugation(phase_unitary), State.maximally_mixed(2))
        assert isinstance(adj, ch.UcpMap)
        worst = max(
            operator_norm(adj.apply(b) - phase_unitary @ b @ adjoint(phase_unitary))
            for b in M2.basis)
        assert worst <= 1e-9

    def test_non_faithful_state_rejected(self):
        phi = ch.amplitude_damping(0.4)
        fp = ch.invariant_state(phi)
        with pytest.raises(NonFaithfulState):
            ch.phi_adjoint(phi, fp.state)

    def test_non_invariant_state_rejected(self, depolarizing_half):
        with pytest.raises(NotInvariant):
            ch.phi_adjoint(depolarizing_half, State.from_density(np.diag([0.9, 0.1])))

    def test_defining_identity_on_basis_pairs(self, rank2_channel, rank2_state,
                                              rank2_adjoint):
        rho = rank2_state.rho
        worst = 0.0
        for bi in M2.basis:
            for bj in M2.basis:
                lhs = np.trace(rho @ rank2_channel.apply(bi) @ bj)
                rhs = np.trace(rho @ bi @ rank2_adjoint.apply(bj))
                worst = max(worst, abs(lhs - rhs))
        assert worst <= 1e-9

    def test_cp_failure_reported_not_raised(self):
        # a faithful invariant state that does not commute with the channel
        # structure makes the candidate fail complete positivity
        for seed in range(40):
            phi = ch.random_ucp(2, 3, seed=seed)
            fp = ch.invariant_state(phi)
            if not fp.state.faithful or not fp.unique:
                continue
            if operator_norm(fp.state.rho - np.eye(2) / 2) < 0.2:
                continue
            result = ch.phi_adjoint(phi, fp.state)
            if isinstance(result, ch.AdjointAbsent):
                assert result.failed_check in (
                    "defining_identity", "unitality",
                    "adjoint_preservation", "complete_positivity")
                return
        pytest.skip("no candidate channel with absent adjoint in the sweep")


class TestPresets:
    def test_mixed_unitary_fixes_trace(self):
        phi = ch.random_mixed_unitary(2, 2, seed=3)
        np.testing.assert_allclose(
            phi.schrodinger_apply(np.eye(2) / 2), np.eye(2) / 2, atol=1e-12)

    def test_rank2_faithful_search(self, rank2_channel, rank2_state):
        assert rank2_channel.kraus_count == 2
        assert rank2_state.min_eigenvalue() > 0.1

    def test_channel_spec_round_trip(self, depolarizing_half):
        spec = ch.channel_to_spec(depolarizing_half)
        back = ch.channel_from_spec(spec)
        worst = max(operator_norm(back.apply(b) - depolarizing_half.apply(b))
                    for b in M2.basis)
        assert worst <= 1e-12

    def test_preset_spec(self):
        phi = ch.channel_from_spec(
            {"kind": "preset", "preset": {"name": "depolarizing",
                                          "params": {"d": 2, "p": 0.5}}})
        np.testing.assert_allclose(phi.apply(SZ), 0.5 * SZ, atol=1e-12)
