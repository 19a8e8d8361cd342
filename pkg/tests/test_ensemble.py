import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phaseshadow import core, oracle
from phaseshadow.bitlin import BitVec, int_to_words
from phaseshadow.circuits import gate, ghz_canonical_prep, plus_product_prep
from phaseshadow.ensemble import (
    NoiseModel,
    PhaseCircuit,
    ShotSampler,
    Snapshot,
    angle_to_pe,
    read_snapshots,
    sample_diag_shot,
    sample_phase_circuit,
    shot_rng,
    simulate_shot,
    to_tableau,
    write_snapshots,
)
from phaseshadow.pauli import PauliString
from phaseshadow.tableau import StabState


class _ConstantRng:
    """Minimal stand-in whose byte stream is a repeated constant."""

    def __init__(self, byte):
        self.byte = byte

    def bytes(self, k):
        return bytes([self.byte]) * k


class TestSampling:
    def test_all_ones_rng(self):
        c = sample_phase_circuit(4, _ConstantRng(0xFF))
        assert c.upper_bits() == (1 << 10) - 1
        assert all(c.a.get(i, j) == 1 for i in range(4) for j in range(4))

    def test_single_qubit_two_outcomes(self):
        rng = np.random.default_rng(40)
        seen = {sample_phase_circuit(1, rng).upper_bits() for _ in range(200)}
        assert seen == {0, 1}
        counts = [0, 0]
        for _ in range(4000):
            counts[sample_phase_circuit(1, rng).upper_bits()] += 1
        assert abs(counts[0] - 2000) < 3 * math.sqrt(1000)

    def test_entry_means(self):
        rng = np.random.default_rng(41)
        n, draws = 4, 20_000
        nfree = n * (n + 1) // 2
        totals = np.zeros(nfree)
        for _ in range(draws):
            bits = sample_phase_circuit(n, rng).upper_bits()
            totals += [(bits >> k) & 1 for k in range(nfree)]
        sigma = 0.5 / math.sqrt(draws)
        assert np.all(np.abs(totals / draws - 0.5) < 3 * sigma)

    def test_symmetry_enforced(self):
        with pytest.raises(ValueError):
            PhaseCircuit(2, __import__("phaseshadow.bitlin", fromlist=["BitMatrix"]).BitMatrix(
                2, 2, (0b10, 0b00)
            ))


class TestToTableau:
    def test_single_qubit_hadamard(self):
        t = to_tableau(PhaseCircuit.from_upper_bits(1, 0))
        assert t.conjugate(PauliString.from_label("Z")) == PauliString.from_label("X")

    def test_all_zero_is_hadamard_layer(self):
        t = to_tableau(PhaseCircuit.trivial(3))
        for q in range(3):
            z = PauliString.single(3, q, "Z")
            x = PauliString.single(3, q, "X")
            assert t.conjugate(z) == x
            assert t.conjugate(x) == z

    def test_against_dense(self):
        rng = np.random.default_rng(42)
        for n in (2, 3):
            for _ in range(8):
                c = sample_phase_circuit(n, rng)
                t = to_tableau(c)
                u = oracle.phase_circuit_unitary(c.to_array())
                for _ in range(5):
                    p = PauliString(
                        n, int(rng.integers(1 << n)), int(rng.integers(1 << n)), 0
                    )
                    expected = u @ oracle.pauli_matrix(p) @ u.conj().T
                    assert np.allclose(expected, oracle.pauli_matrix(t.conjugate(p)), atol=1e-12)


class TestShots:
    def test_noiseless_trivial_circuit_uniform(self):
        n, draws = 2, 40_000
        c = PhaseCircuit.trivial(n)
        counts = np.zeros(1 << n)
        for i in range(draws):
            snap = simulate_shot([], c, NoiseModel.noiseless(), shot_rng(1, 0, i))
            counts[snap.outcome.bits] += 1
        assert 0.5 * np.abs(counts / draws - 0.25).sum() < 0.02

    def test_full_strength_noise_deterministic_error(self):
        # every shot applies the pair error; distribution matches dense
        n = 2
        c = PhaseCircuit.from_upper_bits(n, 0b010)  # only the CZ(0,1) entry
        nm = NoiseModel.zz(0.5)  # rate cap; compare against dense either way
        probs = oracle.dense_noisy_born([gate("H", 0)], c.to_array(), nm)
        draws = 40_000
        counts = np.zeros(4)
        for i in range(draws):
            snap = simulate_shot([gate("H", 0)], c, nm, shot_rng(2, 0, i))
            counts[snap.outcome.bits] += 1
        assert 0.5 * np.abs(counts / draws - probs).sum() < 0.02

    def test_noisy_distribution_tv(self):
        n = 3
        a = np.array([[1, 1, 0], [1, 0, 1], [0, 1, 1]])
        c = PhaseCircuit.from_array(a)
        nm = NoiseModel.zz(0.1)
        prep = ghz_canonical_prep(n)
        probs = oracle.dense_noisy_born(prep, a, nm)
        draws = 100_000
        counts = np.zeros(8)
        sampler = ShotSampler(prep, n, nm)
        for i in range(draws):
            counts[sampler.shot_for_circuit(c, shot_rng(3, 0, i)).outcome.bits] += 1
        assert 0.5 * np.abs(counts / draws - probs).sum() < 0.01

    def test_extended_model_distribution(self):
        n = 2
        c = PhaseCircuit.from_upper_bits(n, 0b010)
        nm = NoiseModel.extended(0.4)
        prep = plus_product_prep(n)
        probs = oracle.dense_noisy_born(prep, c.to_array(), nm)
        draws = 60_000
        counts = np.zeros(4)
        for i in range(draws):
            snap = simulate_shot(prep, c, nm, shot_rng(4, 0, i))
            counts[snap.outcome.bits] += 1
        assert 0.5 * np.abs(counts / draws - probs).sum() < 0.015

    def test_error_placement_irrelevance(self):
        # interleaving each pair error right after its CZ gives exactly
        # the same state as accumulating the whole mask at the end
        rng = np.random.default_rng(43)
        n = 3
        prep = ghz_canonical_prep(n)
        base = StabState.from_circuit(prep, n)
        for _ in range(20):
            c = sample_phase_circuit(n, rng)
            edges = c.edges()
            flips = [bool(rng.integers(2)) for _ in edges]
            interleaved = [gate("S", i) for i in range(n) if c.a.get(i, i)]
            mask = 0
            for (i, j), f in zip(edges, flips):
                interleaved.append(gate("CZ", i, j))
                if f:
                    interleaved += [gate("Z", i), gate("Z", j)]
                    mask ^= (1 << i) | (1 << j)
            interleaved += [gate("H", q) for q in range(n)]
            replay = base.apply_circuit(interleaved)
            x, z, ph = base._x.copy(), base._z.copy(), base._ph.copy()
            arows = np.zeros((n, core.nwords(n)), dtype=np.uint64)
            for i in range(n):
                arows[i] = int_to_words(c.a.row_ints[i] & ~(1 << i), n)
            core.apply_phase_circuit(
                x, z, ph, n,
                arows,
                int_to_words(c.diag_bits(), n),
                int_to_words(mask, n),
            )
            assert np.array_equal(x, replay._x)
            assert np.array_equal(z, replay._z)
            assert np.array_equal(ph, replay._ph)

    def test_gate_dependence_no_cz_no_noise(self):
        # with a trivial interaction matrix the zz model cannot fire
        c = PhaseCircuit.trivial(3)
        for i in range(50):
            a = simulate_shot([], c, NoiseModel.noiseless(), shot_rng(5, 0, i))
            b = simulate_shot([], c, NoiseModel.zz(0.4), shot_rng(5, 0, i))
            assert a.outcome == b.outcome

    def test_shot_determinism(self):
        c = PhaseCircuit.from_upper_bits(3, 0b101010)
        nm = NoiseModel.zz(0.2)
        one = simulate_shot([], c, nm, shot_rng(6, 1, 9))
        two = simulate_shot([], c, nm, shot_rng(6, 1, 9))
        assert one == two

    def test_diag_shots(self):
        for i in range(20):
            snap = sample_diag_shot([], 3, shot_rng(7, 0, i))
            assert snap.kind == "diag"
            assert snap.outcome.bits == 0
            assert snap.circuit.is_trivial()
        seen = set()
        for i in range(400):
            snap = sample_diag_shot(ghz_canonical_prep(3), 3, shot_rng(8, 0, i))
            seen.add(snap.outcome.bits)
        assert seen == {0, 0b111}

    def test_plus_prep_diag_uniform(self):
        counts = np.zeros(4)
        draws = 40_000
        for i in range(draws):
            counts[sample_diag_shot(plus_product_prep(2), 2, shot_rng(9, 0, i)).outcome.bits] += 1
        assert 0.5 * np.abs(counts / draws - 0.25).sum() < 0.02


class TestAngleConversion:
    def test_zero(self):
        assert angle_to_pe(0.0) == 0.0

    def test_worked_value(self):
        assert abs(angle_to_pe(0.04) - 0.0099007) < 1e-7

    def test_asymptote(self):
        assert abs(angle_to_pe(1e6) - 0.5) < 1e-12

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            angle_to_pe(-0.1)


class TestNoiseModel:
    def test_validation(self):
        with pytest.raises(ValueError):
            NoiseModel("bogus")
        with pytest.raises(ValueError):
            NoiseModel.zz(0.7)
        with pytest.raises(ValueError):
            NoiseModel.zz_het(((0.0, 0.1), (0.2, 0.0)))

    def test_het_roundtrip(self):
        rates = ((0.0, 0.01), (0.01, 0.0))
        nm = NoiseModel.zz_het(rates)
        assert nm.rate(0, 1) == 0.01
        assert NoiseModel.from_json(nm.to_json()) == nm


class TestSnapshotStore:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(44)
        n = 5
        nm = NoiseModel.zz(0.03)
        snaps = []
        for i in range(30):
            snaps.append(simulate_shot([], sample_phase_circuit(n, rng), nm, shot_rng(10, 0, i)))
            snaps.append(sample_diag_shot([], n, shot_rng(10, 1, i)))
        path = tmp_path / "snaps.psnap"
        write_snapshots(path, snaps, n, nm, seed=10, prep_name="plus-product")
        header, loaded = read_snapshots(path)
        assert header["n"] == n
        assert header["prep"] == "plus-product"
        assert NoiseModel.from_json(header["noise"]) == nm
        assert loaded == snaps

    @given(st.integers(1, 9), st.data())
    @settings(max_examples=40, deadline=None)
    def test_upper_bits_bijection(self, n, data):
        nfree = n * (n + 1) // 2
        bits = data.draw(st.integers(0, (1 << nfree) - 1))
        c = PhaseCircuit.from_upper_bits(n, bits)
        assert c.upper_bits() == bits
        assert c.a.is_symmetric()

    def test_diag_snapshot_requires_trivial_circuit(self):
        c = PhaseCircuit.from_upper_bits(2, 0b111)
        with pytest.raises(ValueError):
            Snapshot(c, BitVec(2, 0), "diag")
