import numpy as np
import pytest

from phaseshadow import oracle
from phaseshadow.circuits import gate, ghz_star_prep, plus_product_prep
from phaseshadow.ensemble import NoiseModel, PhaseCircuit, Snapshot
from phaseshadow.pauli import PauliString
from phaseshadow.shadow import StabObservable


class TestUnionOperator:
    def test_single_qubit_two_copies(self):
        # ones exactly at (00,00),(01,01),(10,10),(11,11),(01,10),(10,01)
        op = oracle.union_permutation_operator(1, 2).entries
        want = np.zeros((4, 4), dtype=np.int64)
        for r, c in [(0, 0), (1, 1), (2, 2), (3, 3), (1, 2), (2, 1)]:
            want[r, c] = 1
        assert np.array_equal(op, want)

    def test_identity_swap_parity_identity(self):
        for n in (1, 2, 3):
            d = 1 << n
            union = oracle.union_permutation_operator(n, 2).entries
            ident = np.eye(d * d, dtype=np.int64)
            swap = np.zeros((d * d, d * d), dtype=np.int64)
            for a in range(d):
                for b in range(d):
                    swap[b * d + a, a * d + b] = 1
            delta = np.zeros((d * d, d * d), dtype=np.int64)
            for a in range(d):
                delta[a * d + a, a * d + a] = 1
            assert np.array_equal(union, ident + swap - delta)

    def test_row_sums_and_symmetry(self):
        for n, m in [(1, 2), (2, 2), (1, 3)]:
            op = oracle.union_permutation_operator(n, m).entries
            assert (op.sum(axis=1) >= 1).all()
            assert np.array_equal(op, op.T)

    def test_cap(self):
        with pytest.raises(ValueError):
            oracle.union_permutation_operator(7, 2)


class TestMoments:
    def test_single_qubit_matches_quarter_union(self):
        m = oracle.moment_exact(1, 2)
        union = oracle.union_permutation_operator(1, 2).entries
        assert np.abs(m.entries - union / 4).max() < 1e-13

    def test_two_qubits(self):
        m = oracle.moment_exact(2, 2)
        union = oracle.union_permutation_operator(2, 2).entries
        assert np.abs(m.entries - union / 16).max() < 1e-12

    def test_third_moment_small(self):
        m = oracle.moment_exact(1, 3)
        union = oracle.union_permutation_operator(1, 3).entries
        assert np.abs(m.entries - union / 8).max() < 1e-12

    def test_entries_are_dyadic(self):
        m = oracle.moment_exact(2, 2).entries
        scaled = m * 16
        assert np.abs(scaled - np.round(scaled.real)).max() < 1e-12


class TestNoisyMoment:
    def test_noiseless_reduces_to_ideal(self):
        got = oracle.noisy_moment2_exact(2, NoiseModel.zz(0.0)).entries
        want = oracle.moment_exact(2, 2).entries
        assert np.abs(got - want).max() < 1e-13

    @pytest.mark.parametrize("kind,pe", [("zz", 0.2), ("zz", 0.05), ("extended", 0.2)])
    def test_closed_form(self, kind, pe):
        nm = NoiseModel(kind, pe)
        got = oracle.noisy_moment2_exact(2, nm).entries
        want = oracle.noisy_moment2_closed_form(2, nm).entries
        assert np.abs(got - want).max() < 1e-10


class TestGaussianChannel:
    def test_zero_width(self):
        assert oracle.gaussian_channel_equivalence(0.0) == 0.0

    def test_analytic(self):
        assert oracle.gaussian_channel_equivalence(0.1) < 1e-12

    def test_monte_carlo(self):
        assert oracle.gaussian_channel_equivalence(0.1, samples=1_000_000, seed=9) < 1e-3

    def test_pe_reference(self):
        assert abs(oracle.angle_to_pe_reference(0.04) - 0.0099007) < 1e-7


class TestBruteEstimator:
    def test_single_qubit_worked_example(self):
        snap = Snapshot.offdiag(PhaseCircuit.from_upper_bits(1, 0), 0)
        obs = StabObservable([gate("H", 0)], 1)
        val = oracle.brute_offdiag_estimator(snap, obs, NoiseModel.noiseless())
        assert abs(val - 1.0) < 1e-12

    def test_zero_state_observable_is_diag_only(self):
        rng = np.random.default_rng(60)
        obs = StabObservable([], 3)
        from phaseshadow.ensemble import sample_phase_circuit

        for _ in range(10):
            c = sample_phase_circuit(3, rng)
            snap = Snapshot.offdiag(c, int(rng.integers(8)))
            val = oracle.brute_offdiag_estimator(snap, obs, NoiseModel.zz(0.05))
            assert abs(val) < 1e-12

    def test_cap(self):
        obs = StabObservable([], 7)
        snap = Snapshot.offdiag(PhaseCircuit.trivial(7), 0)
        with pytest.raises(ValueError):
            oracle.brute_offdiag_estimator(snap, obs, NoiseModel.noiseless())


class TestEstimatorExpectation:
    def test_plus_state_single_qubit(self):
        obs = StabObservable([gate("H", 0)], 1)
        val = oracle.exact_estimator_expectation(
            [gate("H", 0)], obs, NoiseModel.noiseless(), "robust"
        )
        assert abs(val - 1.0) < 1e-12

    def test_ghz_star_noisy_robust_unbiased(self):
        prep = ghz_star_prep(2)
        obs = StabObservable(prep, 2)
        val = oracle.exact_estimator_expectation(prep, obs, NoiseModel.zz(0.1), "robust")
        assert abs(val - 1.0) < 1e-9

    def test_plain_is_biased(self):
        prep = ghz_star_prep(2)
        obs = StabObservable(prep, 2)
        val = oracle.exact_estimator_expectation(prep, obs, NoiseModel.zz(0.1), "plain")
        assert val < 1.0 - 1e-3


def test_shared_group_size_examples():
    # equal circuits share the full group; Hadamard layer against the
    # zero state shares only the identity
    a0 = np.zeros((3, 3), dtype=np.int64)
    assert oracle.shared_group_size(a0, plus_product_prep(3)) == 8
    assert oracle.shared_group_size(a0, []) == 1


def test_circuit_enumeration_cap():
    with pytest.raises(ValueError):
        list(oracle.iter_symmetric_matrices(6))
