"""Bit-for-bit equivalence of the pure and compiled kernel backends.

Every kernel is driven with identical inputs (including the random
words) and must produce identical outputs and identical in-place
mutations.
"""

import numpy as np
import pytest

from phaseshadow import core

try:
    compiled = core.get_backend("compiled")
    HAVE_COMPILED = True
except ImportError:  # pragma: no cover - depends on the build
    HAVE_COMPILED = False

pure = core.get_backend("pure")

pytestmark = pytest.mark.skipif(not HAVE_COMPILED, reason="compiled core not built")


def random_table(rng, rows, n):
    w = core.nwords(n)
    mask = (1 << min(64, n)) - 1 if n < 64 * w else (1 << 64) - 1
    x = rng.integers(0, 1 << 63, size=(rows, w), dtype=np.uint64) << np.uint64(1)
    x |= rng.integers(0, 2, size=(rows, w), dtype=np.uint64)
    z = rng.integers(0, 1 << 63, size=(rows, w), dtype=np.uint64) << np.uint64(1)
    z |= rng.integers(0, 2, size=(rows, w), dtype=np.uint64)
    # clear pad bits
    top = n & 63
    if top:
        padmask = np.uint64((1 << top) - 1)
        x[:, -1] &= padmask
        z[:, -1] &= padmask
    ph = rng.integers(0, 4, size=rows, dtype=np.uint8)
    return x, z, ph


@pytest.mark.parametrize("n", [3, 17, 64, 100])
def test_apply_gates_equivalence(n):
    rng = np.random.default_rng(80)
    x, z, ph = random_table(rng, 2 * n, n)
    ops = []
    for _ in range(60):
        code = int(rng.integers(0, 8))
        a = int(rng.integers(n))
        b = int(rng.integers(n))
        if code in (6, 7) and a == b:
            b = (a + 1) % n
        ops.append((code, a, b))
    ops = np.array(ops, dtype=np.int64)
    args1 = (x.copy(), z.copy(), ph.copy())
    args2 = (x.copy(), z.copy(), ph.copy())
    pure.apply_gates(*args1, ops)
    compiled.apply_gates(*args2, ops)
    for a, b in zip(args1, args2):
        assert np.array_equal(a, b)


@pytest.mark.parametrize("n", [5, 40, 70])
def test_mul_and_fold_equivalence(n):
    rng = np.random.default_rng(81)
    x, z, ph = random_table(rng, 2 * n, n)
    qx, qz, qph = random_table(rng, 1, n)
    a1 = (x.copy(), z.copy(), ph.copy())
    a2 = (x.copy(), z.copy(), ph.copy())
    pure.mul_rows(*a1[:2], a1[2], 3, *a1[:2], a1[2], 7)
    compiled.mul_rows(*a2[:2], a2[2], 3, *a2[:2], a2[2], 7)
    for p, c in zip(a1, a2):
        assert np.array_equal(p, c)
    r1 = pure.conjugate_fold(x, z, ph, n, qx[0], qz[0], int(qph[0]))
    r2 = compiled.conjugate_fold(x, z, ph, n, qx[0], qz[0], int(qph[0]))
    assert np.array_equal(r1[0], r2[0])
    assert np.array_equal(r1[1], r2[1])
    assert r1[2] == r2[2]


@pytest.mark.parametrize("rows,nbits,wide", [(6, 6, 1), (20, 20, 2), (40, 30, 3)])
@pytest.mark.parametrize("reduce_above", [False, True])
def test_ge_equivalence(rows, nbits, wide, reduce_above):
    rng = np.random.default_rng(82)
    for _ in range(20):
        main = rng.integers(0, 1 << 62, size=(rows, wide), dtype=np.uint64)
        aux = rng.integers(0, 1 << 62, size=(rows, 2), dtype=np.uint64)
        m1, a1 = main.copy(), aux.copy()
        m2, a2 = main.copy(), aux.copy()
        r1 = pure.ge(m1, a1, nbits, reduce_above)
        r2 = compiled.ge(m2, a2, nbits, reduce_above)
        assert r1[0] == r2[0]
        assert list(r1[1]) == list(r2[1])
        assert np.array_equal(m1, m2)
        assert np.array_equal(a1, a2)


@pytest.mark.parametrize("n", [2, 9, 33, 65])
def test_measure_all_equivalence(n):
    # evolve a fresh state with the same gates, then measure with the
    # same random words: outcomes and post-measurement tableaus match
    rng = np.random.default_rng(83)
    w = core.nwords(n)
    for trial in range(10):
        x = np.zeros((2 * n, w), dtype=np.uint64)
        z = np.zeros((2 * n, w), dtype=np.uint64)
        ph = np.zeros(2 * n, dtype=np.uint8)
        for q in range(n):
            x[q, q >> 6] = np.uint64(1) << np.uint64(q & 63)
            z[n + q, q >> 6] = np.uint64(1) << np.uint64(q & 63)
        ops = []
        for _ in range(6 * n):
            code = int(rng.integers(0, 8))
            a = int(rng.integers(n))
            b = int(rng.integers(n))
            if code in (6, 7) and a == b:
                b = (a + 1) % n
            ops.append((code, a, b))
        ops = np.array(ops, dtype=np.int64)
        pure.apply_gates(x, z, ph, ops)
        rwords = rng.integers(0, 1 << 63, size=w, dtype=np.uint64)
        s1 = (x.copy(), z.copy(), ph.copy())
        s2 = (x.copy(), z.copy(), ph.copy())
        o1 = pure.measure_all(*s1, n, rwords)
        o2 = compiled.measure_all(*s2, n, rwords)
        assert np.array_equal(o1, o2)
        for a, b in zip(s1, s2):
            assert np.array_equal(a, b)


@pytest.mark.parametrize("n", [4, 21, 64, 80])
def test_apply_phase_circuit_equivalence(n):
    rng = np.random.default_rng(84)
    w = core.nwords(n)
    for _ in range(10):
        x, z, ph = random_table(rng, 2 * n, n)
        sym = rng.integers(0, 2, size=(n, n), dtype=np.uint64)
        sym = np.triu(sym, 1)
        sym = sym + sym.T
        arows = np.zeros((n, w), dtype=np.uint64)
        for i in range(n):
            for j in range(n):
                if sym[i, j]:
                    arows[i, j >> 6] |= np.uint64(1) << np.uint64(j & 63)
        smask = np.zeros(w, dtype=np.uint64)
        emask = np.zeros(w, dtype=np.uint64)
        for q in range(n):
            if rng.integers(2):
                smask[q >> 6] |= np.uint64(1) << np.uint64(q & 63)
            if rng.integers(2):
                emask[q >> 6] |= np.uint64(1) << np.uint64(q & 63)
        s1 = (x.copy(), z.copy(), ph.copy())
        s2 = (x.copy(), z.copy(), ph.copy())
        pure.apply_phase_circuit(*s1, n, arows, smask, emask)
        compiled.apply_phase_circuit(*s2, n, arows, smask, emask)
        for a, b in zip(s1, s2):
            assert np.array_equal(a, b)


def test_snapshot_level_equivalence(monkeypatch):
    """Full shot generation gives identical snapshots on both backends."""
    import phaseshadow.core as core_mod
    from phaseshadow.circuits import ghz_star_prep
    from phaseshadow.ensemble import NoiseModel, ShotSampler, shot_rng

    results = {}
    for name in ("pure", "compiled"):
        impl = core.get_backend(name)
        monkeypatch.setattr(core_mod, "apply_phase_circuit", impl.apply_phase_circuit)
        monkeypatch.setattr(core_mod, "measure_all", impl.measure_all)
        monkeypatch.setattr(core_mod, "apply_gates", impl.apply_gates)
        sampler = ShotSampler(ghz_star_prep(9), 9, NoiseModel.zz(0.05))
        results[name] = [sampler.offdiag_shot(shot_rng(9, 0, i)) for i in range(200)]
    assert results["pure"] == results["compiled"]
