"""Clifford gate descriptions, the circuit text format, and named preps.

Circuit text is one gate per line, e.g. ``H 0`` / ``CZ 0 3`` / ``S 2``;
blank lines and '#' comments are ignored. S† is spelled SDG.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import core

GATE_OPCODES = {
    "H": core.OP_H,
    "S": core.OP_S,
    "SDG": core.OP_SDG,
    "X": core.OP_X,
    "Z": core.OP_Z,
    "CZ": core.OP_CZ,
    "CNOT": core.OP_CNOT,
}
_TWO_QUBIT = {"CZ", "CNOT"}


@dataclass(frozen=True)
class GateOp:
    kind: str
    qubits: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in GATE_OPCODES:
            raise ValueError(f"unsupported gate {self.kind!r}")
        want = 2 if self.kind in _TWO_QUBIT else 1
        if len(self.qubits) != want:
            raise ValueError(f"{self.kind} takes {want} qubit(s)")
        if any(q < 0 for q in self.qubits):
            raise ValueError("negative qubit index")
        if want == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError(f"{self.kind} targets must be distinct")

    def __str__(self) -> str:
        return " ".join([self.kind, *map(str, self.qubits)])


def gate(kind: str, *qubits: int) -> GateOp:
    return GateOp(kind, tuple(qubits))


def validate_targets(gates: Iterable[GateOp], n: int) -> None:
    for g in gates:
        if any(q >= n for q in g.qubits):
            raise ValueError(f"gate {g} exceeds {n} qubits")


def encode_ops(gates: Sequence[GateOp]) -> np.ndarray:
    """Encode a gate list for the kernel backend."""
    out = np.zeros((len(gates), 3), dtype=np.int64)
    for i, g in enumerate(gates):
        out[i, 0] = GATE_OPCODES[g.kind]
        out[i, 1] = g.qubits[0]
        out[i, 2] = g.qubits[-1]
    return out


def parse_circuit(text: str) -> list[GateOp]:
    gates = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            gates.append(GateOp(parts[0].upper(), tuple(int(p) for p in parts[1:])))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
    return gates


def format_circuit(gates: Iterable[GateOp]) -> str:
    return "\n".join(str(g) for g in gates) + "\n"


def ghz_star_prep(n: int) -> list[GateOp]:
    """Graph GHZ state: CZ from qubit 0 to every other qubit on |+...+>."""
    gates = [gate("H", q) for q in range(n)]
    gates += [gate("CZ", 0, j) for j in range(1, n)]
    return gates


def ghz_canonical_prep(n: int) -> list[GateOp]:
    """Canonical GHZ state (|0..0> + |1..1>)/sqrt(2)."""
    gates = [gate("H", 0)]
    gates += [gate("CNOT", 0, j) for j in range(1, n)]
    return gates


def cluster_1d_prep(n: int) -> list[GateOp]:
    """Open-chain one-dimensional cluster state."""
    gates = [gate("H", q) for q in range(n)]
    gates += [gate("CZ", j, j + 1) for j in range(n - 1)]
    return gates


def plus_product_prep(n: int) -> list[GateOp]:
    return [gate("H", q) for q in range(n)]


def random_stabilizer_prep(n: int, rng: np.random.Generator, rounds: int = 3) -> list[GateOp]:
    """Random stabilizer state from a few random phase-circuit rounds.

    Not a uniform Clifford sample (uniform sampling is out of scope);
    rounds of random CZ/S layers with Hadamards mix enough for fixtures.
    """
    gates: list[GateOp] = []
    for _ in range(rounds):
        for q in range(n):
            gates.append(gate("H", q))
        for i in range(n):
            if rng.integers(2):
                gates.append(gate("S", i))
            for j in range(i + 1, n):
                if rng.integers(2):
                    gates.append(gate("CZ", i, j))
    return gates


NAMED_PREPS = {
    "ghz-star": ghz_star_prep,
    "ghz-canonical": ghz_canonical_prep,
    "cluster-1d": cluster_1d_prep,
    "plus-product": plus_product_prep,
}


def named_prep(name: str, n: int, rng: np.random.Generator | None = None) -> list[GateOp]:
    if name == "random-stabilizer":
        if rng is None:
            raise ValueError("random-stabilizer prep needs an rng")
        return random_stabilizer_prep(n, rng)
    try:
        return NAMED_PREPS[name](n)
    except KeyError:
        raise ValueError(f"unknown prep {name!r}") from None
