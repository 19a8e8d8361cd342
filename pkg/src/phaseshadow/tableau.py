"""Unitary Clifford tableaus and stabilizer-state simulation.

Conventions, fixed once and validated against dense matrices:

* a CliffordTableau stores the conjugation images U P U-dagger; the
  adjoint direction is obtained through invert(),
* apply_gate composes the gate after the current unitary (program
  order), so from_circuit([g1, g2]) represents g2 . g1,
* a StabState keeps destabilizer rows 0..n-1 and stabilizer rows
  n..2n-1 with exact phases; phases are stripped only inside
  z_tableau_phaseless.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import core
from .bitlin import BitMatrix, BitVec, words_to_int
from .circuits import GateOp, encode_ops, validate_targets
from .pauli import PauliString, multiply

_U64 = np.uint64


_IDENTITY_CACHE: dict[int, tuple] = {}


def _identity_rows(n: int):
    cached = _IDENTITY_CACHE.get(n)
    if cached is None:
        w = core.nwords(n)
        x = np.zeros((2 * n, w), dtype=_U64)
        z = np.zeros((2 * n, w), dtype=_U64)
        ph = np.zeros(2 * n, dtype=np.uint8)
        for q in range(n):
            x[q, q >> 6] = _U64(1) << _U64(q & 63)
            z[n + q, q >> 6] = _U64(1) << _U64(q & 63)
        cached = _IDENTITY_CACHE[n] = (x, z, ph)
    return cached[0].copy(), cached[1].copy(), cached[2].copy()


def _row_pauli(n: int, x, z, ph, i: int) -> PauliString:
    return PauliString(n, words_to_int(x[i]), words_to_int(z[i]), int(ph[i]))


class _PackedRows:
    """Shared plumbing for the two tableau flavours."""

    def __init__(self, n: int, x, z, ph):
        if n < 1:
            raise ValueError("need at least one qubit")
        self.n = n
        self._x = x
        self._z = z
        self._ph = ph

    def _copy_arrays(self):
        return self._x.copy(), self._z.copy(), self._ph.copy()

    def _apply(self, gates: Sequence[GateOp]):
        validate_targets(gates, self.n)
        x, z, ph = self._copy_arrays()
        core.apply_gates(x, z, ph, encode_ops(gates))
        return type(self)(self.n, x, z, ph)

    def apply_gate(self, g: GateOp):
        """A fresh value with g applied after the current content."""
        return self._apply([g])

    def apply_circuit(self, gates: Sequence[GateOp]):
        return self._apply(list(gates))


class CliffordTableau(_PackedRows):
    """Images of the generators X_i (rows 0..n-1) and Z_i (rows n..2n-1)."""

    @classmethod
    def identity(cls, n: int) -> "CliffordTableau":
        return cls(n, *_identity_rows(n))

    @classmethod
    def from_circuit(cls, gates: Sequence[GateOp], n: int) -> "CliffordTableau":
        return cls.identity(n).apply_circuit(gates)

    def x_image(self, j: int) -> PauliString:
        return _row_pauli(self.n, self._x, self._z, self._ph, j)

    def z_image(self, j: int) -> PauliString:
        return _row_pauli(self.n, self._x, self._z, self._ph, self.n + j)

    def conjugate(self, p: PauliString) -> PauliString:
        """U p U-dagger with exact sign."""
        if p.n != self.n:
            raise ValueError("size mismatch")
        qx, qz, qph = p.to_packed()
        ox, oz, op = core.conjugate_fold(self._x, self._z, self._ph, self.n, qx, qz, qph)
        return PauliString(self.n, words_to_int(ox), words_to_int(oz), op)

    def conjugate_packed(self, qx, qz, qph: int):
        return core.conjugate_fold(self._x, self._z, self._ph, self.n, qx, qz, qph)

    def invert(self) -> "CliffordTableau":
        """Tableau of the adjoint map P -> U-dagger P U."""
        n = self.n
        # binary part: symplectic inverse, inv[i, j] = M[swap(j), swap(i)]
        # with swap exchanging the X and Z halves of the index range
        bits = np.zeros((2 * n, 2 * n), dtype=np.uint8)
        for i in range(2 * n):
            xi = words_to_int(self._x[i])
            zi = words_to_int(self._z[i])
            for q in range(n):
                bits[i, q] = (xi >> q) & 1
                bits[i, n + q] = (zi >> q) & 1
        swap = np.concatenate([np.arange(n, 2 * n), np.arange(n)])
        inv_bits = bits[np.ix_(swap, swap)].T
        w = core.nwords(n)
        ix = np.zeros((2 * n, w), dtype=_U64)
        iz = np.zeros((2 * n, w), dtype=_U64)
        iph = np.zeros(2 * n, dtype=np.uint8)
        for i in range(2 * n):
            xint = sum(int(inv_bits[i, q]) << q for q in range(n))
            zint = sum(int(inv_bits[i, n + q]) << q for q in range(n))
            cand = PauliString(n, xint, zint, (xint & zint).bit_count())
            qx, qz, qph = cand.to_packed()
            fx, fz, fp = core.conjugate_fold(self._x, self._z, self._ph, n, qx, qz, qph)
            # folding the candidate forward must give back the generator
            target = 1 << (i % n)
            if i < n:
                assert words_to_int(fx) == target and words_to_int(fz) == 0
            else:
                assert words_to_int(fx) == 0 and words_to_int(fz) == target
            corrected = (cand.phase - fp) & 3
            for wi in range(w):
                ix[i, wi] = _U64((xint >> (64 * wi)) & 0xFFFFFFFFFFFFFFFF)
                iz[i, wi] = _U64((zint >> (64 * wi)) & 0xFFFFFFFFFFFFFFFF)
            iph[i] = corrected
        return CliffordTableau(n, ix, iz, iph)

    def z_tableau_phaseless(self) -> tuple[BitMatrix, BitMatrix]:
        """Phaseless X- and Z-parts of the images of Z_0..Z_{n-1}."""
        n = self.n
        c_rows = [words_to_int(self._x[n + i]) for i in range(n)]
        d_rows = [words_to_int(self._z[n + i]) for i in range(n)]
        return BitMatrix(n, n, tuple(c_rows)), BitMatrix(n, n, tuple(d_rows))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CliffordTableau)
            and self.n == other.n
            and np.array_equal(self._x, other._x)
            and np.array_equal(self._z, other._z)
            and np.array_equal(self._ph, other._ph)
        )


def identity_tableau(n: int) -> CliffordTableau:
    return CliffordTableau.identity(n)


class StabState(_PackedRows):
    """Stabilizer state as destabilizer/stabilizer generator rows."""

    @classmethod
    def zero(cls, n: int) -> "StabState":
        return cls(n, *_identity_rows(n))

    @classmethod
    def from_circuit(cls, gates: Sequence[GateOp], n: int) -> "StabState":
        return cls.zero(n).apply_circuit(gates)

    @classmethod
    def basis_state(cls, b: BitVec) -> "StabState":
        s = cls.zero(b.n)
        for q in range(b.n):
            if b[q]:
                s = s.apply_gate(GateOp("X", (q,)))
        return s

    def stabilizer(self, i: int) -> PauliString:
        return _row_pauli(self.n, self._x, self._z, self._ph, self.n + i)

    def destabilizer(self, i: int) -> PauliString:
        return _row_pauli(self.n, self._x, self._z, self._ph, i)

    def stabilizers(self) -> list[PauliString]:
        return [self.stabilizer(i) for i in range(self.n)]

    def measure_all(self, rng: np.random.Generator) -> BitVec:
        """One sample of a full computational-basis measurement.

        The state itself is unchanged; measurement runs on a scratch
        copy. Qubits are measured in ascending order; bit q of a fresh
        block of random words decides outcome q when it is random.
        """
        x, z, ph = self._copy_arrays()
        w = x.shape[1]
        rwords = np.frombuffer(rng.bytes(8 * w), dtype=_U64).copy()
        out = core.measure_all(x, z, ph, self.n, rwords)
        return BitVec(self.n, words_to_int(out))

    def pauli_expectation(self, p: PauliString) -> int:
        """+1 / -1 if the signed Pauli is in the stabilizer group, else 0."""
        if p.n != self.n:
            raise ValueError("size mismatch")
        n = self.n
        rows = tuple(
            words_to_int(self._x[n + i]) | (words_to_int(self._z[n + i]) << n) for i in range(n)
        )
        from .bitlin import solve_or_membership

        m = BitMatrix(n, 2 * n, rows)
        t = BitVec(2 * n, p.x | (p.z << n))
        combo = solve_or_membership(m, t)
        if combo is None:
            return 0
        acc = PauliString.identity(n)
        for i in range(n):
            if combo[i]:
                acc = multiply(acc, self.stabilizer(i))
        assert acc.phaseless_eq(p)
        diff = (acc.phase - p.phase) & 3
        assert diff in (0, 2)
        return 1 if diff == 0 else -1

    def overlap_sq(self, other: "StabState") -> Fraction:
        """Exact squared overlap of the two pure states: 0 or 2**(k-n)."""
        if self.n != other.n:
            raise ValueError("size mismatch")
        n = self.n
        rows = []
        for src in (self, other):
            for i in range(n):
                rows.append(
                    words_to_int(src._x[n + i]) | (words_to_int(src._z[n + i]) << n)
                )
        m = BitMatrix(2 * n, 2 * n, tuple(rows))
        from .bitlin import left_null_basis

        shared = left_null_basis(m)
        n_g = len(shared)
        for combo in shared:
            p1 = PauliString.identity(n)
            p2 = PauliString.identity(n)
            for i in range(n):
                if combo[i]:
                    p1 = multiply(p1, self.stabilizer(i))
                if combo[n + i]:
                    p2 = multiply(p2, other.stabilizer(i))
            assert p1.phaseless_eq(p2)
            if p1.phase != p2.phase:
                return Fraction(0)
        return Fraction(1, 1 << (n - n_g))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, StabState)
            and self.n == other.n
            and np.array_equal(self._x, other._x)
            and np.array_equal(self._z, other._z)
            and np.array_equal(self._ph, other._ph)
        )


def zero_state(n: int) -> StabState:
    return StabState.zero(n)
