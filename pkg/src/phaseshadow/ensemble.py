"""The random phase-circuit ensemble and noisy shot simulation.

A circuit is a symmetric binary matrix: off-diagonal entries place CZ
gates, diagonal entries place S gates, and a fixed Hadamard layer
closes the circuit. Gate-dependent noise attaches a Z-type Pauli error
to every CZ that is actually applied; S, H and readout stay noiseless.
All injected errors commute with the diagonal layer, so a shot applies
their accumulated mask once (placement irrelevance is tested).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import core
from .bitlin import BitMatrix, BitVec, int_to_words, words_to_int
from .circuits import GateOp, gate, named_prep
from .tableau import CliffordTableau, StabState

_U64 = np.uint64

NOISE_KINDS = ("noiseless", "zz", "extended", "zz_het")


@dataclass(frozen=True)
class NoiseModel:
    """Gate-dependent noise on applied CZ gates.

    zz flips Z(x)Z on the gate's pair with probability pe; extended
    applies each of ZI, IZ, ZZ with probability pe/4; zz_het carries a
    symmetric per-pair rate table and is handled through the low-order
    approximation only.
    """

    kind: str
    pe: float = 0.0
    pair_rates: Optional[tuple[tuple[float, ...], ...]] = None

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not 0.0 <= self.pe <= 0.5:
            raise ValueError("pe must lie in [0, 1/2]")
        if self.kind == "zz_het":
            if self.pair_rates is None:
                raise ValueError("zz_het needs a rate table")
            rates = self.pair_rates
            for i in range(len(rates)):
                for j in range(len(rates)):
                    if rates[i][j] != rates[j][i]:
                        raise ValueError("rate table must be symmetric")
                    if not 0.0 <= rates[i][j] <= 0.5:
                        raise ValueError("rates must lie in [0, 1/2]")

    @classmethod
    def noiseless(cls) -> "NoiseModel":
        return cls("noiseless")

    @classmethod
    def zz(cls, pe: float) -> "NoiseModel":
        return cls("zz", pe)

    @classmethod
    def extended(cls, pe: float) -> "NoiseModel":
        return cls("extended", pe)

    @classmethod
    def zz_het(cls, rates) -> "NoiseModel":
        table = tuple(tuple(float(v) for v in row) for row in np.asarray(rates))
        return cls("zz_het", 0.0, table)

    def rate(self, i: int, j: int) -> float:
        if self.kind == "zz_het":
            return self.pair_rates[i][j]
        return self.pe

    def to_json(self) -> dict:
        out = {"kind": self.kind, "pe": self.pe}
        if self.pair_rates is not None:
            out["pair_rates"] = [list(r) for r in self.pair_rates]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "NoiseModel":
        rates = data.get("pair_rates")
        return cls(
            data["kind"],
            float(data.get("pe", 0.0)),
            tuple(tuple(r) for r in rates) if rates is not None else None,
        )


@dataclass(frozen=True)
class PhaseCircuit:
    """Symmetric binary interaction matrix of one random circuit."""

    n: int
    a: BitMatrix
    _ops: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.a.rows != self.n or self.a.cols != self.n:
            raise ValueError("matrix shape mismatch")
        if not self.a.is_symmetric():
            raise ValueError("interaction matrix must be symmetric")

    def __reduce__(self):
        return (PhaseCircuit._wrap, (self.n, self.a.row_ints))

    @classmethod
    def trivial(cls, n: int) -> "PhaseCircuit":
        return cls(n, BitMatrix.zeros(n, n))

    @classmethod
    def _wrap(cls, n: int, row_ints: tuple[int, ...]) -> "PhaseCircuit":
        """Fast constructor for rows symmetric by construction; internal."""
        out = object.__new__(cls)
        object.__setattr__(out, "n", n)
        object.__setattr__(out, "a", BitMatrix._wrap(n, n, row_ints))
        object.__setattr__(out, "_ops", None)
        return out

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "PhaseCircuit":
        n = arr.shape[0]
        rows = tuple(int(sum(int(arr[i, j]) << j for j in range(n))) for i in range(n))
        return cls(n, BitMatrix(n, n, rows))

    @classmethod
    def from_upper_bits(cls, n: int, bits: int) -> "PhaseCircuit":
        rows = [0] * n
        k = 0
        for i in range(n):
            width = n - i
            rows[i] |= ((bits >> k) & ((1 << width) - 1)) << i
            k += width
        for i in range(n):
            hi = rows[i] >> (i + 1)
            base = i + 1
            while hi:
                j = base + (hi & -hi).bit_length() - 1
                hi &= hi - 1
                rows[j] |= 1 << i
        return cls(n, BitMatrix(n, n, tuple(rows)))

    def to_array(self) -> np.ndarray:
        out = np.zeros((self.n, self.n), dtype=np.int64)
        for i in range(self.n):
            row = self.a.row_ints[i]
            for j in range(self.n):
                out[i, j] = (row >> j) & 1
        return out

    def upper_bits(self) -> int:
        """Free entries (upper triangle incl. diagonal), row-major."""
        bits = 0
        k = 0
        for i in range(self.n):
            bits |= (self.a.row_ints[i] >> i) << k
            k += self.n - i
        return bits

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for i in range(self.n):
            hi = self.a.row_ints[i] >> (i + 1)
            base = i + 1
            while hi:
                j = base + (hi & -hi).bit_length() - 1
                hi &= hi - 1
                out.append((i, j))
        return out

    def diag_bits(self) -> int:
        return sum(self.a.get(i, i) << i for i in range(self.n))

    def gates(self) -> list[GateOp]:
        """Program-order gate list: diagonal layer, then Hadamards."""
        gates = [gate("S", i) for i in range(self.n) if self.a.get(i, i)]
        gates += [gate("CZ", i, j) for i, j in self.edges()]
        gates += [gate("H", q) for q in range(self.n)]
        return gates

    def bits_array(self) -> np.ndarray:
        """The interaction matrix as an (n, n) uint8 array."""
        n = self.n
        rowbytes = (n + 7) // 8
        raw = b"".join(r.to_bytes(rowbytes, "little") for r in self.a.row_ints)
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
        return bits.reshape(n, rowbytes * 8)[:, :n]

    def encoded_ops(self) -> np.ndarray:
        """Kernel-encoded gate array, equivalent to encode_ops(gates())."""
        if self._ops is None:
            arr = self.bits_array()
            dq = np.nonzero(np.diagonal(arr))[0].astype(np.int64)
            ii, jj = np.nonzero(np.triu(arr, 1))
            object.__setattr__(self, "_ops", _assemble_ops(self.n, dq, ii, jj))
        return self._ops

    def is_trivial(self) -> bool:
        return self.a.is_zero()


@dataclass(frozen=True)
class Snapshot:
    """One measurement record of the sampling stage."""

    circuit: PhaseCircuit
    outcome: BitVec
    kind: str

    def __post_init__(self):
        if self.kind not in ("offdiag", "diag"):
            raise ValueError(self.kind)
        if self.outcome.n != self.circuit.n:
            raise ValueError("outcome length mismatch")
        if self.kind == "diag" and not self.circuit.is_trivial():
            raise ValueError("diag snapshots carry a trivial circuit")

    @classmethod
    def offdiag(cls, circuit: PhaseCircuit, outcome) -> "Snapshot":
        if isinstance(outcome, int):
            outcome = BitVec(circuit.n, outcome)
        return cls(circuit, outcome, "offdiag")

    @classmethod
    def diag(cls, n: int, outcome) -> "Snapshot":
        if isinstance(outcome, int):
            outcome = BitVec(n, outcome)
        return cls(PhaseCircuit.trivial(n), outcome, "diag")


_H_BLOCK_CACHE: dict[int, np.ndarray] = {}


def _h_block(n: int) -> np.ndarray:
    cached = _H_BLOCK_CACHE.get(n)
    if cached is None:
        from . import core as _core

        cached = np.empty((n, 3), dtype=np.int64)
        cached[:, 0] = _core.OP_H
        cached[:, 1] = np.arange(n)
        cached[:, 2] = np.arange(n)
        _H_BLOCK_CACHE[n] = cached
    return cached


def _assemble_ops(n: int, dq: np.ndarray, ii: np.ndarray, jj: np.ndarray) -> np.ndarray:
    from . import core as _core

    total = dq.size + ii.size + n
    ops = np.empty((total, 3), dtype=np.int64)
    k = dq.size
    ops[:k, 0] = _core.OP_S
    ops[:k, 1] = dq
    ops[:k, 2] = dq
    ops[k : k + ii.size, 0] = _core.OP_CZ
    ops[k : k + ii.size, 1] = ii
    ops[k : k + ii.size, 2] = jj
    ops[k + ii.size :] = _h_block(n)
    return ops


def shot_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    """Counter-based substream for one shot: reproducible and
    independent of evaluation order across threads or processes."""
    key = (np.uint64(seed), (np.uint64(stream) << np.uint64(40)) + np.uint64(index))
    return np.random.Generator(np.random.Philox(key=key))


def sample_phase_circuit(n: int, rng: np.random.Generator) -> PhaseCircuit:
    """Each free entry of the interaction matrix is a fair coin."""
    if n < 1:
        raise ValueError("n must be positive")
    nfree = n * (n + 1) // 2
    raw = np.frombuffer(rng.bytes((nfree + 7) // 8), dtype=np.uint8)
    bits = int.from_bytes(raw.tobytes(), "little") & ((1 << nfree) - 1)
    return PhaseCircuit.from_upper_bits(n, bits)


def to_tableau(c: PhaseCircuit) -> CliffordTableau:
    return CliffordTableau.from_circuit(c.gates(), c.n)


def angle_to_pe(sigma_sq: float) -> float:
    """Pauli error rate of the averaged Gaussian rotation: the exact
    closed form (1 - exp(-sigma_sq/2)) / 2."""
    if sigma_sq < 0:
        raise ValueError("variance must be nonnegative")
    return 0.5 * (1.0 - math.exp(-sigma_sq / 2.0))


class ShotSampler:
    """Shot generator with a fixed preparation, reused across shots.

    The free entries of the interaction matrix are indexed row-major
    with i <= j; per-shot work is vectorized over those slots.
    """

    def __init__(self, prep: Sequence[GateOp], n: int, noise: NoiseModel):
        self.n = n
        self.noise = noise
        self.prep = list(prep)
        state = StabState.from_circuit(self.prep, n)
        self._sx = state._x
        self._sz = state._z
        self._sph = state._ph
        self._w = core.nwords(n)
        self.nfree = n * (n + 1) // 2
        diag_pos = []
        edge_pos = []
        slot_i = []
        slot_j = []
        k = 0
        for i in range(n):
            diag_pos.append(k)
            for j in range(i + 1, n):
                edge_pos.append(k + (j - i))
                slot_i.append(i)
                slot_j.append(j)
            k += n - i
        self._diag_pos = np.array(diag_pos, dtype=np.int64)
        self._edge_pos = np.array(edge_pos, dtype=np.int64)
        self._slot_i = np.array(slot_i, dtype=np.int64)
        self._slot_j = np.array(slot_j, dtype=np.int64)
        if noise.kind == "zz_het":
            table = np.array(noise.pair_rates)
            self._edge_rate = table[self._slot_i, self._slot_j]
        else:
            self._edge_rate = np.full(len(slot_i), noise.pe)

    def _sample_bits(self, rng: np.random.Generator) -> np.ndarray:
        raw = np.frombuffer(rng.bytes((self.nfree + 7) // 8), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.nfree].astype(bool)

    def _error_bits(self, present: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        counts = np.zeros(self.n, dtype=np.int64)
        if self.noise.kind == "noiseless":
            return counts
        ii = self._slot_i[present]
        jj = self._slot_j[present]
        if ii.size == 0:
            return counts
        u = rng.random(ii.size)
        if self.noise.kind in ("zz", "zz_het"):
            hit = u < self._edge_rate[present]
            np.add.at(counts, ii[hit], 1)
            np.add.at(counts, jj[hit], 1)
        else:  # extended: ZI, IZ, ZZ each with rate pe/4
            q = self.noise.pe / 4.0
            first = u < q
            second = (u >= q) & (u < 2 * q)
            both = (u >= 2 * q) & (u < 3 * q)
            np.add.at(counts, ii[first | both], 1)
            np.add.at(counts, jj[second | both], 1)
        return counts & 1

    @staticmethod
    def _scatter_mask(words: np.ndarray, positions: np.ndarray) -> None:
        np.bitwise_or.at(
            words,
            positions >> 6,
            np.uint64(1) << (positions.astype(np.uint64) & np.uint64(63)),
        )

    def offdiag_shot(self, rng: np.random.Generator) -> Snapshot:
        n = self.n
        bits = self._sample_bits(rng)
        present = bits[self._edge_pos]
        diag = bits[self._diag_pos]
        ebits = self._error_bits(present, rng)
        arows = np.zeros((n, self._w), dtype=_U64)
        ii = self._slot_i[present]
        jj = self._slot_j[present]
        if ii.size:
            np.bitwise_or.at(
                arows, (ii, jj >> 6), np.uint64(1) << (jj.astype(np.uint64) & np.uint64(63))
            )
            np.bitwise_or.at(
                arows, (jj, ii >> 6), np.uint64(1) << (ii.astype(np.uint64) & np.uint64(63))
            )
        smask = np.zeros(self._w, dtype=_U64)
        dq = np.nonzero(diag)[0]
        if dq.size:
            self._scatter_mask(smask, dq)
        emask = np.zeros(self._w, dtype=_U64)
        eq = np.nonzero(ebits)[0]
        if eq.size:
            self._scatter_mask(emask, eq)
        x, z, ph = self._sx.copy(), self._sz.copy(), self._sph.copy()
        core.apply_phase_circuit(x, z, ph, n, arows, smask, emask)
        rwords = np.frombuffer(rng.bytes(8 * self._w), dtype=_U64).copy()
        out = core.measure_all(x, z, ph, n, rwords)
        rows = tuple(
            words_to_int(arows[i]) | (int(diag[i]) << i) for i in range(n)
        )
        circuit = PhaseCircuit._wrap(n, rows)
        object.__setattr__(circuit, "_ops", _assemble_ops(n, dq, ii, jj))
        return Snapshot(circuit, BitVec(n, words_to_int(out)), "offdiag")

    def shot_for_circuit(self, circuit: PhaseCircuit, rng: np.random.Generator) -> Snapshot:
        """One noisy shot through a fixed circuit."""
        n = self.n
        upper = circuit.upper_bits()
        raw = np.frombuffer(
            upper.to_bytes((self.nfree + 7) // 8, "little"), dtype=np.uint8
        )
        bits = np.unpackbits(raw, bitorder="little")[: self.nfree].astype(bool)
        present = bits[self._edge_pos]
        ebits = self._error_bits(present, rng)
        arows = np.zeros((n, self._w), dtype=_U64)
        for i in range(n):
            arows[i] = int_to_words(circuit.a.row_ints[i] & ~(1 << i), n)
        emask = np.zeros(self._w, dtype=_U64)
        eq = np.nonzero(ebits)[0]
        if eq.size:
            self._scatter_mask(emask, eq)
        x, z, ph = self._sx.copy(), self._sz.copy(), self._sph.copy()
        core.apply_phase_circuit(
            x, z, ph, n, arows, int_to_words(circuit.diag_bits(), n), emask
        )
        rwords = np.frombuffer(rng.bytes(8 * self._w), dtype=_U64).copy()
        out = core.measure_all(x, z, ph, n, rwords)
        return Snapshot(circuit, BitVec(n, words_to_int(out)), "offdiag")

    def diag_shot(self, rng: np.random.Generator) -> Snapshot:
        x, z, ph = self._sx.copy(), self._sz.copy(), self._sph.copy()
        rwords = np.frombuffer(rng.bytes(8 * self._w), dtype=_U64).copy()
        out = core.measure_all(x, z, ph, self.n, rwords)
        return Snapshot.diag(self.n, words_to_int(out))


def simulate_shot(
    prep: Sequence[GateOp], c: PhaseCircuit, nm: NoiseModel, rng: np.random.Generator
) -> Snapshot:
    """One noisy shot through a given circuit (prep acts on |0...0>)."""
    return ShotSampler(prep, c.n, nm).shot_for_circuit(c, rng)


def sample_diag_shot(prep: Sequence[GateOp], n: int, rng: np.random.Generator) -> Snapshot:
    """Direct computational-basis measurement of the prepared state."""
    return ShotSampler(prep, n, NoiseModel.noiseless()).diag_shot(rng)


# ------------------------------------------------------- snapshot store

STORE_FORMAT = "phaseshadow-snapshots/1"


def _hex_width(nbits: int) -> int:
    return max(1, (nbits + 3) // 4)


def write_snapshots(path, snapshots: Iterable[Snapshot], n: int, noise: NoiseModel,
                    seed: int, prep_name: str) -> None:
    nfree = n * (n + 1) // 2
    wa, wb = _hex_width(nfree), _hex_width(n)
    with open(path, "w", encoding="ascii") as fh:
        header = {
            "format": STORE_FORMAT,
            "n": n,
            "noise": noise.to_json(),
            "seed": seed,
            "prep": prep_name,
        }
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for snap in snapshots:
            fh.write(
                f"{snap.kind},{snap.circuit.upper_bits():0{wa}x},{snap.outcome.bits:0{wb}x}\n"
            )


def read_snapshots(path):
    """Returns (header dict, list of snapshots); bit-exact round trip."""
    with open(path, "r", encoding="ascii") as fh:
        header = json.loads(fh.readline())
        if header.get("format") != STORE_FORMAT:
            raise ValueError("unrecognized snapshot store")
        n = header["n"]
        snaps = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            kind, ahex, bhex = line.split(",")
            circuit = PhaseCircuit.from_upper_bits(n, int(ahex, 16))
            snaps.append(Snapshot(circuit, BitVec(n, int(bhex, 16)), kind))
    return header, snaps
