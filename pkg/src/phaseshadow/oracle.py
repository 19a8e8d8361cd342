"""Dense brute-force ground truth at small qubit counts.

Everything here works on explicit complex matrices and exhaustive
enumeration, deliberately independent of the packed tableau engine:
circuit unitaries are built from phase functions, expectations from
dense traces, groups by enumerating all elements. Caps are enforced
with errors; nothing silently samples when enumeration was asked for.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .circuits import GateOp
from .pauli import PauliString, classify, is_ztype

MAX_COPY_QUBITS = 12  # dimension cap for m-copy operators
MAX_CIRCUITS = 1 << 15  # cap on exhaustive circuit enumeration

_GATES_1Q = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "SDG": np.array([[1, 0], [0, -1j]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class DenseOperator:
    """A dense matrix on m copies of an n-qubit space."""

    dim: int
    entries: np.ndarray

    def __post_init__(self):
        if self.entries.shape != (self.dim, self.dim):
            raise ValueError("shape mismatch")


def _check_copy_cap(n: int, m: int) -> None:
    if m * n > MAX_COPY_QUBITS:
        raise ValueError(f"m*n = {m * n} exceeds the dense cap {MAX_COPY_QUBITS}")


def gate_unitary(g: GateOp, n: int) -> np.ndarray:
    """Dense unitary of one gate; qubit q is bit q of the basis index."""
    dim = 1 << n
    idx = np.arange(dim)
    if g.kind in _GATES_1Q:
        (q,) = g.qubits
        mat = _GATES_1Q[g.kind]
        u = np.zeros((dim, dim), dtype=complex)
        bit = (idx >> q) & 1
        for a in (0, 1):
            for b in (0, 1):
                cols = idx[bit == b]
                rows = (cols & ~(1 << q)) | (a << q)
                u[rows, cols] += mat[a, b]
        return u
    a, b = g.qubits
    if g.kind == "CZ":
        signs = 1.0 - 2.0 * (((idx >> a) & 1) & ((idx >> b) & 1))
        return np.diag(signs.astype(complex))
    if g.kind == "CNOT":
        u = np.zeros((dim, dim), dtype=complex)
        rows = idx ^ (((idx >> a) & 1) << b)
        u[rows, idx] = 1.0
        return u
    raise ValueError(g.kind)


def circuit_unitary(gates: list[GateOp], n: int) -> np.ndarray:
    u = np.eye(1 << n, dtype=complex)
    for g in gates:
        u = gate_unitary(g, n) @ u
    return u


def statevector(gates: list[GateOp], n: int) -> np.ndarray:
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1.0
    for g in gates:
        psi = gate_unitary(g, n) @ psi
    return psi


def pauli_matrix(p: PauliString) -> np.ndarray:
    """Dense matrix of i**phase X**x Z**z."""
    dim = 1 << p.n
    idx = np.arange(dim)
    cols = idx
    rows = idx ^ p.x
    vals = (1j) ** p.phase * (-1.0) ** _parity(p.z & cols)
    m = np.zeros((dim, dim), dtype=complex)
    m[rows, cols] = vals
    return m


def _parity(v: np.ndarray) -> np.ndarray:
    return np.bitwise_count(v.astype(np.uint64)).astype(np.int64) & 1


def _bits_matrix(n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    return ((idx[:, None] >> np.arange(n)[None, :]) & 1).astype(np.int64)


# ---------------------------------------------------------------- phase
# circuits: A is the symmetric binary matrix, given as an (n, n) 0/1
# array; the diagonal places S gates, the upper triangle places CZs.


def phase_vector(a: np.ndarray) -> np.ndarray:
    """Diagonal of the CZ/S layer: entry x is i**(x.diag) (-1)**e(x)."""
    n = a.shape[0]
    bits = _bits_matrix(n)
    diag = np.diag(a)
    off = a - np.diag(diag)
    spow = bits @ diag
    quad = ((bits @ off) * bits).sum(axis=1) // 2
    return (1j) ** spow * (-1.0) ** quad


def phase_circuit_unitary(a: np.ndarray) -> np.ndarray:
    """Dense H^(x)n . U_A, from the phase function (not from gates)."""
    n = a.shape[0]
    dim = 1 << n
    had = (-1.0) ** _parity(np.arange(dim)[:, None] & np.arange(dim)[None, :])
    return (had / math.sqrt(dim)) @ np.diag(phase_vector(a))


def iter_symmetric_matrices(n: int):
    """All symmetric binary matrices, diag and upper triangle free."""
    nfree = n * (n + 1) // 2
    if (1 << nfree) > MAX_CIRCUITS:
        raise ValueError(f"2**{nfree} circuits exceed the enumeration cap")
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    for code in range(1 << nfree):
        a = np.zeros((n, n), dtype=np.int64)
        for k, (i, j) in enumerate(pairs):
            if (code >> k) & 1:
                a[i, j] = a[j, i] = 1
        yield a


# ------------------------------------------------------------- moments


def union_permutation_operator(n: int, m: int) -> DenseOperator:
    """Entrywise OR of all m! copy-permutation matrices (m = 2 or 3)."""
    _check_copy_cap(n, m)
    if m not in (2, 3):
        raise ValueError("only m = 2, 3 supported")
    d = 1 << n
    dim = d**m
    idx = np.arange(dim)
    digits = [(idx // d ** (m - 1 - i)) % d for i in range(m)]
    out = np.zeros((dim, dim), dtype=np.int64)
    for perm in itertools.permutations(range(m)):
        # perm maps copy i of the source to copy perm(i) of the target
        rows = sum(digits[i] * d ** (m - 1 - perm[i]) for i in range(m))
        out[rows, idx] = 1
    return DenseOperator(dim, out)


def _snapshot_columns(a: np.ndarray, emask: int = 0) -> np.ndarray:
    """Columns u_b of the conjugated-projector snapshots for circuit a.

    Column b is (Z**emask . U)^dagger |b>, i.e. the state whose outer
    product is the snapshot for outcome b (emask inserts a Z-type error
    in the diagonal layer).
    """
    n = a.shape[0]
    dim = 1 << n
    idx = np.arange(dim)
    had = (-1.0) ** _parity(idx[:, None] & idx[None, :]) / math.sqrt(dim)
    esigns = (-1.0) ** _parity(idx & emask)
    return (np.conj(phase_vector(a)) * esigns)[:, None] * had


def moment_exact(n: int, m: int) -> DenseOperator:
    """Exact m-copy snapshot average over all circuits and outcomes."""
    _check_copy_cap(n, m)
    if m not in (2, 3):
        raise ValueError("only m = 2, 3 supported")
    d = 1 << n
    total = np.zeros((d**m, d**m), dtype=complex)
    count = 0
    for a in iter_symmetric_matrices(n):
        cols = _snapshot_columns(a)
        flat = (cols[:, None, :] * np.conj(cols)[None, :, :]).reshape(d * d, d)
        c = flat.T  # row b is the flattened snapshot for outcome b
        if m == 2:
            m2 = c.T @ c
            m2 = m2.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)
            total += m2
        else:
            m3 = np.einsum("bu,bv,bw->uvw", c, c, c)
            m3 = (
                m3.reshape(d, d, d, d, d, d)
                .transpose(0, 2, 4, 1, 3, 5)
                .reshape(d**3, d**3)
            )
            total += m3
        count += 1
    return DenseOperator(d**m, total / (d * count))


def _branches(edges: list[tuple[int, int]], model) -> list[tuple[float, int]]:
    """Exact error branches of the CZ layer: (weight, Z-mask) pairs."""
    branches = [(1.0, 0)]
    pe = model.pe
    for i, j in edges:
        new = []
        if model.kind == "zz":
            options = [(1.0 - pe, 0), (pe, (1 << i) | (1 << j))]
        elif model.kind == "extended":
            options = [
                (1.0 - 0.75 * pe, 0),
                (0.25 * pe, 1 << i),
                (0.25 * pe, 1 << j),
                (0.25 * pe, (1 << i) | (1 << j)),
            ]
        elif model.kind == "noiseless":
            options = [(1.0, 0)]
        else:
            raise ValueError(f"unsupported model {model.kind!r}")
        for w, mask in branches:
            for ow, omask in options:
                if w * ow:
                    new.append((w * ow, mask ^ omask))
        branches = new
    return branches


def noisy_moment2_exact(n: int, model) -> DenseOperator:
    """Two-copy moment with the first copy behind the noisy channel."""
    if n > 3:
        raise ValueError("noisy moment enumeration capped at n = 3")
    d = 1 << n
    total = np.zeros((d * d, d * d), dtype=complex)
    count = 0
    for a in iter_symmetric_matrices(n):
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if a[i, j]]
        cols = _snapshot_columns(a)
        flat_ideal = (cols[:, None, :] * np.conj(cols)[None, :, :]).reshape(d * d, d).T
        acc = np.zeros((d, d * d), dtype=complex)
        for w, mask in _branches(edges, model):
            ncols = _snapshot_columns(a, mask)
            acc += w * (ncols[:, None, :] * np.conj(ncols)[None, :, :]).reshape(d * d, d).T
        m2 = acc.T @ flat_ideal
        total += m2.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)
        count += 1
    return DenseOperator(d * d, total / (d * count))


def noisy_moment2_closed_form(n: int, model) -> DenseOperator:
    """The qubit-level closed form of the noisy two-copy moment.

    Every nonzero entry factorizes into per-qubit patterns of the three
    block types (diagonal pair, anti-diagonal pair, swap pair); the
    entry weight depends only on the pattern counts.
    """
    _check_copy_cap(n, 2)
    d = 1 << n
    dim = d * d
    row = np.arange(dim)
    x, w = row // d, row % d
    y, s = np.arange(dim) // d, np.arange(dim) % d
    # per-entry site codes x | w<<1 | y<<2 | s<<3 -> block type:
    # 0 the equal-pair projector (1 + ZZ)/2, 1 its complement
    # (1 - ZZ)/2, 2 the swap remainder (XX + YY)/2
    type_of = -np.ones(16, dtype=np.int64)
    type_of[0b0000] = type_of[0b1111] = 0
    type_of[0b1010] = type_of[0b0101] = 1
    type_of[0b0110] = type_of[0b1001] = 2
    out = np.zeros((dim, dim))
    pe = model.pe
    for r in range(dim):
        for c in range(dim):
            counts = [0, 0, 0]
            ok = True
            for q in range(n):
                code = (
                    ((x[r] >> q) & 1)
                    | (((w[r] >> q) & 1) << 1)
                    | (((y[c] >> q) & 1) << 2)
                    | (((s[c] >> q) & 1) << 3)
                )
                t = type_of[code]
                if t < 0:
                    ok = False
                    break
                counts[t] += 1
            if not ok:
                continue
            i, j, k = counts
            if model.kind == "zz" or model.kind == "noiseless":
                out[r, c] = (1 - pe) ** (i * k) * pe ** (j * k)
            elif model.kind == "extended":
                half = pe / 2
                out[r, c] = (1 - half) ** (i * k + k * (k - 1) // 2) * half ** (j * k)
            else:
                raise ValueError(model.kind)
    return DenseOperator(dim, out / (d * d))


def pauli_coefficient(moment: DenseOperator, p: PauliString) -> float:
    """Extract 2**n tr(M (P x P)) for a phaseless Hermitian Pauli."""
    d = 1 << p.n
    hp = pauli_matrix(p.with_phase((p.x & p.z).bit_count()))
    pp = np.kron(hp, hp)
    return float(np.real(np.trace(moment.entries @ pp)) * d)


# ----------------------------------------------------- estimator checks


def _fwht(v: np.ndarray) -> np.ndarray:
    """Walsh-Hadamard transform along the last axis, unnormalized."""
    out = v.copy()
    dim = out.shape[-1]
    h = 1
    while h < dim:
        out = out.reshape(*out.shape[:-1], dim // (2 * h), 2, h)
        a = out[..., 0, :].copy()
        b = out[..., 1, :].copy()
        out[..., 0, :] = a + b
        out[..., 1, :] = a - b
        out = out.reshape(*out.shape[:-3], dim)
        h *= 2
    return out


def pauli_trace_table(u: np.ndarray) -> np.ndarray:
    """tr(|u><u| P) for all phaseless Hermitian P, indexed [x, z]."""
    dim = u.shape[0]
    idx = np.arange(dim)
    corr = np.conj(u)[None, :] * u[idx[:, None] ^ idx[None, :]]
    out = _fwht(corr)
    # i**popcount(x & z) from the Hermitian Y convention combines with
    # (-1)**popcount(z & x) from commuting X past Z into (-i)**popcount
    xg, zg = np.meshgrid(idx, idx, indexing="ij")
    both = np.bitwise_count((xg & zg).astype(np.uint64)).astype(np.int64)
    return out * (-1j) ** both


def sigma_weight_table(n: int, model, sigma_fn) -> np.ndarray:
    """sigma for every phaseless Pauli, 0 on the Z-type set, [x, z]."""
    dim = 1 << n
    xg, zg = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    n3 = np.bitwise_count(xg.astype(np.uint64)).astype(np.int64)
    n2 = np.bitwise_count((zg & ~xg).astype(np.uint64)).astype(np.int64)
    out = np.zeros((dim, dim))
    for i in range(dim):
        for j in range(dim):
            if n3[i, j] == 0:
                continue
            out[i, j] = sigma_fn(int(n - n2[i, j] - n3[i, j]), int(n2[i, j]), int(n3[i, j]))
    return out


_INV_WEIGHT_CACHE: dict = {}


def _inverse_weight_table(n: int, model, mode: str) -> np.ndarray:
    """1/sigma for every non-Z-type phaseless Pauli (0 on the Z set)."""
    from .sigma import sigma_class_value

    key = (n, model.kind, model.pe, mode)
    cached = _INV_WEIGHT_CACHE.get(key)
    if cached is not None:
        return cached
    dim = 1 << n
    out = np.zeros((dim, dim))
    for x in range(1, dim):
        for z in range(dim):
            if mode == "robust":
                n3 = x.bit_count()
                n2 = (z & ~x).bit_count()
                out[x, z] = 1.0 / sigma_class_value(n - n2 - n3, n2, n3, model)
            else:
                out[x, z] = 1.0
    _INV_WEIGHT_CACHE[key] = out
    return out


def brute_offdiag_estimator(snapshot, obs, model, mode: str = "robust") -> float:
    """Direct evaluation of the full non-Z-type Pauli sum.

    Sums sigma_P**-1 tr(Phi P) tr(Psi P) over all 4**n - 2**n terms with
    dense traces; the fast path must match it term for term.
    """
    n = snapshot.circuit.n
    if n > 6:
        raise ValueError("brute-force estimator capped at n = 6")
    a = snapshot.circuit.to_array()
    u_cols = _snapshot_columns(a)
    phi_u = u_cols[:, snapshot.outcome.bits]
    psi = statevector(obs.prep, n)
    t_phi = pauli_trace_table(phi_u)
    t_psi = pauli_trace_table(psi)
    weights = _inverse_weight_table(n, model, mode)
    return float(np.sum(weights * np.real(t_phi * t_psi)))


def _phaseless_stabilizer_set(state: np.ndarray) -> set[tuple[int, int]]:
    """All phaseless Paulis with |<psi|P|psi>| = 1, by dense traces."""
    dim = state.shape[0]
    table = np.abs(pauli_trace_table(state))
    xs, zs = np.nonzero(table > 1.0 - 1e-9)
    return set(zip(xs.tolist(), zs.tolist()))


def shared_group_elements(a: np.ndarray, v_prep: list[GateOp]) -> set[tuple[int, int]]:
    """Phaseless (x, z) pairs in both stabilizer groups, densely.

    The snapshot-side group belongs to the conjugated projector of the
    phase circuit a (independent of the outcome), the other side to the
    state prepared by v_prep.
    """
    n = a.shape[0]
    if n > 6:
        raise ValueError("group enumeration capped at n = 6")
    phi = _snapshot_columns(a)[:, 0]
    psi = statevector(v_prep, n)
    return _phaseless_stabilizer_set(phi) & _phaseless_stabilizer_set(psi)


def shared_group_size(a: np.ndarray, v_prep: list[GateOp]) -> int:
    """|[S_U] cap [S_V]| by enumerating both phaseless groups."""
    return len(shared_group_elements(a, v_prep))


def exact_estimator_expectation(prep, obs, model, mode: str) -> float:
    """Exhaustive expectation of the production estimator plus the exact
    diagonal part, for comparison against the dense fidelity."""
    from .ensemble import PhaseCircuit
    from .shadow import Snapshot, estimate_stab_offdiag

    n = obs.n
    if n > 3:
        raise ValueError("exhaustive expectation capped at n = 3")
    psi0 = statevector(prep, n)
    rho_diag_probs = np.abs(psi0) ** 2
    psi_obs = statevector(obs.prep, n)
    dim = 1 << n
    idx = np.arange(dim)
    had = (-1.0) ** _parity(idx[:, None] & idx[None, :]) / math.sqrt(dim)
    total_f = 0.0
    count = 0
    for a in iter_symmetric_matrices(n):
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if a[i, j]]
        ua_psi = phase_vector(a) * psi0
        prob_b = np.zeros(dim)
        for w, mask in _branches(edges, model):
            out = had @ ((-1.0) ** _parity(idx & mask) * ua_psi)
            prob_b += w * np.abs(out) ** 2
        circuit = PhaseCircuit.from_array(a)
        for b in range(dim):
            if prob_b[b] < 1e-300:
                continue
            snap = Snapshot.offdiag(circuit, b)
            total_f += prob_b[b] * estimate_stab_offdiag(snap, obs, model, mode)
        count += 1
    exp_f = total_f / count
    exp_d = float(rho_diag_probs @ (np.abs(psi_obs) ** 2))
    return exp_f + exp_d


# ------------------------------------------------- noise-model identity


def _rotation_superop_factors(deltas: np.ndarray, sigma_sq: float, samples=None, rng=None):
    """E[exp(-i theta delta / 2)] per entry, by quadrature or sampling."""
    if samples is None:
        from scipy.integrate import quad

        sig = math.sqrt(sigma_sq)
        vals = {}
        for delta in np.unique(deltas):
            if sigma_sq == 0:
                vals[delta] = 1.0
                continue
            re, _ = quad(
                lambda t, d=delta: math.cos(t * d / 2)
                * math.exp(-(t**2) / (2 * sigma_sq))
                / (sig * math.sqrt(2 * math.pi)),
                -8 * sig,
                8 * sig,
            )
            vals[delta] = re
        return np.vectorize(vals.get)(deltas).astype(complex)
    thetas = rng.normal(0.0, math.sqrt(sigma_sq), size=samples)
    out = np.zeros(deltas.shape, dtype=complex)
    for delta in np.unique(deltas):
        out[deltas == delta] = np.mean(np.exp(-1j * thetas * delta / 2))
    return out


def gaussian_channel_equivalence(sigma_sq: float, samples=None, seed: int = 0) -> float:
    """Frobenius distance between the averaged two-qubit rotation
    channel and the Pauli channel with matching error rate."""
    zz = np.array([1, -1, -1, 1], dtype=np.int64)
    # superoperator of rho -> R rho R^dagger is diag(d_i conj(d_j))
    pair = np.array([(i, j) for i in range(4) for j in range(4)])
    deltas = zz[pair[:, 0]] - zz[pair[:, 1]]
    factors = _rotation_superop_factors(
        deltas, sigma_sq, samples, np.random.default_rng(seed) if samples else None
    )
    pe = 0.5 * (1.0 - math.exp(-sigma_sq / 2.0))
    signs = zz[pair[:, 0]] * zz[pair[:, 1]]
    chan = (1.0 - pe) + pe * signs
    return float(np.linalg.norm(factors - chan))


def angle_to_pe_reference(sigma_sq: float) -> float:
    return 0.5 * (1.0 - math.exp(-sigma_sq / 2.0))


def dense_noisy_born(prep: list[GateOp], a: np.ndarray, model) -> np.ndarray:
    """Outcome distribution of one noisy phase-circuit shot."""
    n = a.shape[0]
    dim = 1 << n
    idx = np.arange(dim)
    had = (-1.0) ** _parity(idx[:, None] & idx[None, :]) / math.sqrt(dim)
    psi0 = statevector(prep, n)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if a[i, j]]
    ua_psi = phase_vector(a) * psi0
    prob = np.zeros(dim)
    for w, mask in _branches(edges, model):
        out = had @ ((-1.0) ** _parity(idx & mask) * ua_psi)
        prob += w * np.abs(out) ** 2
    return prob
