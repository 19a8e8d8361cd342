"""Signed n-qubit Pauli operators in symplectic form.

A PauliString is ``i**phase * prod_j X_j**x_j Z_j**z_j`` with the fixed
per-site order X before Z and an exact i-power mod 4. In this normal
form Y = i X Z, so the Hermitian single-site Y is (x=1, z=1, phase=1).
The phase convention is validated against dense matrices in the tests;
every conjugation routine in the package shares it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .bitlin import BitVec, int_to_words

_LABEL_RE = re.compile(r"^(\+i|-i|\+|-|i)?([IXYZ]+)$")
_PREFIXES = ["+", "+i", "-", "-i"]


@dataclass(frozen=True)
class PauliClass:
    """Site-type counts of a Pauli: identity, Z, and X-or-Y sites."""

    n1: int
    n2: int
    n3: int

    @property
    def n(self) -> int:
        return self.n1 + self.n2 + self.n3


@dataclass(frozen=True)
class PauliString:
    n: int
    x: int
    z: int
    phase: int = 0

    def __post_init__(self):
        mask = (1 << self.n) - 1
        if self.x & ~mask or self.z & ~mask:
            raise ValueError("support outside qubit range")
        object.__setattr__(self, "phase", self.phase & 3)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0, 0)

    @classmethod
    def from_xz(cls, xvec: BitVec, zvec: BitVec, phase: int = 0) -> "PauliString":
        if xvec.n != zvec.n:
            raise ValueError("length mismatch")
        return cls(xvec.n, xvec.bits, zvec.bits, phase)

    @classmethod
    def single(cls, n: int, q: int, kind: str) -> "PauliString":
        """Single-site X, Y or Z on qubit q, identity elsewhere."""
        if kind == "X":
            return cls(n, 1 << q, 0, 0)
        if kind == "Z":
            return cls(n, 0, 1 << q, 0)
        if kind == "Y":
            return cls(n, 1 << q, 1 << q, 1)
        raise ValueError(kind)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        m = _LABEL_RE.match(label.strip())
        if not m:
            raise ValueError(f"bad Pauli label {label!r}")
        prefix = m.group(1) or "+"
        letters = m.group(2)
        phase = {"+": 0, "i": 1, "+i": 1, "-": 2, "-i": 3}[prefix]
        x = z = 0
        for q, ch in enumerate(letters):
            if ch in "XY":
                x |= 1 << q
            if ch in "ZY":
                z |= 1 << q
            if ch == "Y":
                phase += 1
        return cls(len(letters), x, z, phase)

    def label(self) -> str:
        letters = []
        for q in range(self.n):
            xb, zb = (self.x >> q) & 1, (self.z >> q) & 1
            letters.append("IXZY"[xb + 2 * zb])
        rel = (self.phase - (self.x & self.z).bit_count()) & 3
        return _PREFIXES[rel] + "".join(letters)

    def __str__(self) -> str:
        return self.label()

    @property
    def xvec(self) -> BitVec:
        return BitVec(self.n, self.x)

    @property
    def zvec(self) -> BitVec:
        return BitVec(self.n, self.z)

    def is_hermitian(self) -> bool:
        return (self.phase - (self.x & self.z).bit_count()) % 2 == 0

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def phaseless_eq(self, other: "PauliString") -> bool:
        """Equality of the underlying operators modulo the prefactor."""
        return self.n == other.n and self.x == other.x and self.z == other.z

    def with_phase(self, phase: int) -> "PauliString":
        return PauliString(self.n, self.x, self.z, phase)

    def to_packed(self):
        return int_to_words(self.x, self.n), int_to_words(self.z, self.n), self.phase


def multiply(p: PauliString, q: PauliString) -> PauliString:
    """Operator product p . q with exact phase."""
    if p.n != q.n:
        raise ValueError("qubit-count mismatch")
    phase = p.phase + q.phase + 2 * (p.z & q.x).bit_count()
    return PauliString(p.n, p.x ^ q.x, p.z ^ q.z, phase)


def commutes(p: PauliString, q: PauliString) -> bool:
    """True iff the symplectic form x_p.z_q + z_p.x_q vanishes mod 2."""
    if p.n != q.n:
        raise ValueError("qubit-count mismatch")
    return ((p.x & q.z).bit_count() + (p.z & q.x).bit_count()) % 2 == 0


def classify(p: PauliString) -> PauliClass:
    """Counts of identity / Z / X-or-Y sites, independent of site order."""
    n3 = p.x.bit_count()
    n2 = (p.z & ~p.x).bit_count()
    return PauliClass(p.n - n2 - n3, n2, n3)


def is_ztype(p: PauliString) -> bool:
    """True iff p is built only from I and Z (the identity included)."""
    return p.x == 0
