"""Bit-packed linear algebra over GF(2).

BitVec and BitMatrix are immutable values; the bit payload is kept in
Python integers (word-packed by the runtime) and handed to the kernel
backend as packed uint64 rows for elimination. Pad bits above the
logical length are zero by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import core

_U64 = np.uint64
_WORD_MASK = (1 << 64) - 1


def int_to_words(value: int, nbits: int) -> np.ndarray:
    w = core.nwords(nbits) if nbits else 1
    out = np.zeros(w, dtype=_U64)
    for i in range(w):
        out[i] = (value >> (64 * i)) & _WORD_MASK
    return out


def words_to_int(words: Sequence[int]) -> int:
    value = 0
    for i, word in enumerate(words):
        value |= int(word) << (64 * i)
    return value


@dataclass(frozen=True)
class BitVec:
    """Fixed-length bit vector; index 0 is the least significant bit."""

    n: int
    bits: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("negative length")
        object.__setattr__(self, "bits", self.bits & ((1 << self.n) - 1))

    @classmethod
    def zeros(cls, n: int) -> "BitVec":
        return cls(n, 0)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitVec":
        value = 0
        n = 0
        for b in bits:
            if b:
                value |= 1 << n
            n += 1
        return cls(n, value)

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(i)
        return (self.bits >> i) & 1

    def __xor__(self, other: "BitVec") -> "BitVec":
        if self.n != other.n:
            raise ValueError("length mismatch")
        return BitVec(self.n, self.bits ^ other.bits)

    def __and__(self, other: "BitVec") -> "BitVec":
        if self.n != other.n:
            raise ValueError("length mismatch")
        return BitVec(self.n, self.bits & other.bits)

    def dot(self, other: "BitVec") -> int:
        """Inner product mod 2."""
        if self.n != other.n:
            raise ValueError("length mismatch")
        return (self.bits & other.bits).bit_count() & 1

    def weight(self) -> int:
        return self.bits.bit_count()

    def is_zero(self) -> bool:
        return self.bits == 0

    def tolist(self) -> list[int]:
        return [(self.bits >> i) & 1 for i in range(self.n)]

    def to_words(self) -> np.ndarray:
        return int_to_words(self.bits, max(self.n, 1))

    def __str__(self) -> str:
        return "".join("01"[b] for b in self.tolist())


@dataclass(frozen=True)
class BitMatrix:
    """Row-major GF(2) matrix; row_ints[i] packs row i as an integer."""

    rows: int
    cols: int
    row_ints: tuple[int, ...]

    def __post_init__(self):
        if len(self.row_ints) != self.rows:
            raise ValueError("row count mismatch")
        mask = (1 << self.cols) - 1
        object.__setattr__(self, "row_ints", tuple(r & mask for r in self.row_ints))

    @classmethod
    def _wrap(cls, rows: int, cols: int, row_ints: tuple[int, ...]) -> "BitMatrix":
        """Fast constructor for rows already masked to width; internal."""
        out = object.__new__(cls)
        object.__setattr__(out, "rows", rows)
        object.__setattr__(out, "cols", cols)
        object.__setattr__(out, "row_ints", row_ints)
        return out

    @classmethod
    def from_rows(cls, rows: Sequence[BitVec]) -> "BitMatrix":
        if not rows:
            raise ValueError("empty matrix")
        cols = rows[0].n
        if any(r.n != cols for r in rows):
            raise ValueError("ragged rows")
        return cls(len(rows), cols, tuple(r.bits for r in rows))

    @classmethod
    def from_lists(cls, data: Sequence[Sequence[int]]) -> "BitMatrix":
        return cls.from_rows([BitVec.from_bits(row) for row in data])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols, (0,) * rows)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(n, n, tuple(1 << i for i in range(n)))

    def row(self, i: int) -> BitVec:
        return BitVec(self.cols, self.row_ints[i])

    def get(self, i: int, j: int) -> int:
        return (self.row_ints[i] >> j) & 1

    def transpose(self) -> "BitMatrix":
        cols = []
        for j in range(self.cols):
            v = 0
            for i in range(self.rows):
                v |= ((self.row_ints[i] >> j) & 1) << i
            cols.append(v)
        return BitMatrix(self.cols, self.rows, tuple(cols))

    def vecmul(self, v: BitVec) -> BitVec:
        """Left product v . M (v indexes rows)."""
        if v.n != self.rows:
            raise ValueError("shape mismatch")
        acc = 0
        bits = v.bits
        while bits:
            i = (bits & -bits).bit_length() - 1
            bits &= bits - 1
            acc ^= self.row_ints[i]
        return BitVec(self.cols, acc)

    def matmul(self, other: "BitMatrix") -> "BitMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        return BitMatrix(
            self.rows, other.cols, tuple(other.vecmul(self.row(i)).bits for i in range(self.rows))
        )

    def is_symmetric(self) -> bool:
        if self.rows != self.cols:
            return False
        upper = lower = 0
        for i, r in enumerate(self.row_ints):
            hi = r >> (i + 1)
            upper += hi.bit_count()
            lower += (r & ((1 << i) - 1)).bit_count()
            base = i + 1
            while hi:
                j = base + (hi & -hi).bit_length() - 1
                hi &= hi - 1
                if not (self.row_ints[j] >> i) & 1:
                    return False
        return upper == lower

    def is_zero(self) -> bool:
        return all(r == 0 for r in self.row_ints)

    def to_packed(self) -> np.ndarray:
        w = core.nwords(max(self.cols, 1))
        out = np.zeros((self.rows, w), dtype=_U64)
        for i, r in enumerate(self.row_ints):
            out[i] = int_to_words(r, max(self.cols, 1))
        return out

    @classmethod
    def from_packed(cls, words: np.ndarray, cols: int) -> "BitMatrix":
        return cls(words.shape[0], cols, tuple(words_to_int(row) for row in words))

    def __str__(self) -> str:
        return "\n".join(str(self.row(i)) for i in range(self.rows))


def row_echelon_with_certificate(m: BitMatrix) -> tuple[BitMatrix, BitMatrix, int]:
    """Echelon form R with the invertible transform T such that T.M = R.

    Pivots go left to right, topmost nonzero candidate row first, so the
    result is reproducible. Returns (R, T, rank).
    """
    main = m.to_packed()
    aux = BitMatrix.identity(m.rows).to_packed()
    rank, _ = core.ge(main, aux, m.cols, False)
    return (
        BitMatrix.from_packed(main, m.cols),
        BitMatrix.from_packed(aux, m.rows),
        rank,
    )


def rank(m: BitMatrix) -> int:
    main = m.to_packed()
    aux = np.zeros((m.rows, 0), dtype=_U64)
    r, _ = core.ge(main, aux, m.cols, False)
    return r


def left_null_basis(m: BitMatrix) -> list[BitVec]:
    """Basis of {v : v . M = 0}; size is rows(M) - rank(M)."""
    _, t, r = row_echelon_with_certificate(m)
    return [t.row(i) for i in range(r, m.rows)]


def solve_or_membership(m: BitMatrix, t: BitVec) -> Optional[BitVec]:
    """Some x with x . M = t if t lies in the row space, else None."""
    if t.n != m.cols:
        raise ValueError("length mismatch")
    main = m.to_packed()
    aux = BitMatrix.identity(m.rows).to_packed()
    core.ge(main, aux, m.cols, False)
    red = t.bits
    comb = 0
    for i in range(m.rows):
        row_int = words_to_int(main[i])
        if row_int == 0:
            break
        pivot = (row_int & -row_int).bit_length() - 1
        if (red >> pivot) & 1:
            red ^= row_int
            comb ^= words_to_int(aux[i])
    if red != 0:
        return None
    return BitVec(m.rows, comb)
