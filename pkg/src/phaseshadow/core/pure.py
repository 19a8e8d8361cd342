"""Pure numpy kernels for packed Pauli-row tables.

Layout shared with the compiled backend:

* a table of R Pauli rows over n qubits is three arrays
  ``x: uint64 (R, W)``, ``z: uint64 (R, W)``, ``phase: uint8 (R,)``
  with ``W = (n + 63) // 64``; qubit q lives in bit ``q & 63`` of word
  ``q >> 6`` (little-endian within and across words),
* row r represents the operator ``i**phase[r] * X**x[r] * Z**z[r]``
  with the per-site normal form X-before-Z, phase mod 4,
* pad bits above qubit n-1 are always zero.

Unitary tableaus use rows 0..n-1 for the images of X_j and rows n..2n-1
for the images of Z_j; state tableaus use rows 0..n-1 for destabilizers
and n..2n-1 for stabilizers.
"""

import numpy as np

BACKEND_NAME = "pure"

# gate opcodes shared with the compiled backend
OP_H, OP_S, OP_SDG, OP_X, OP_Y, OP_Z, OP_CZ, OP_CNOT = range(8)

_U64 = np.uint64


def nwords(n: int) -> int:
    return (n + 63) >> 6


def _pc_rows(a) -> np.ndarray:
    # popcount summed along the word axis, as plain int64
    return np.bitwise_count(a).sum(axis=-1, dtype=np.int64)


def mul_rows(x1, z1, ph1, dst, x2, z2, ph2, src) -> None:
    """Row product dst <- dst * src (dst on the left), exact phase."""
    extra = 2 * int(np.bitwise_count(z1[dst] & x2[src]).sum())
    ph1[dst] = (int(ph1[dst]) + int(ph2[src]) + extra) & 3
    x1[dst] ^= x2[src]
    z1[dst] ^= z2[src]


def apply_gates(x, z, ph, ops) -> None:
    """Conjugate every row by each gate in ops, in order.

    ops is an int64 array of shape (G, 3): (opcode, a, b); b is ignored
    for single-qubit gates.
    """
    for code, a, b in ops:
        wa, sa = int(a) >> 6, _U64(int(a) & 63)
        one = _U64(1)
        xa = (x[:, wa] >> sa) & one
        za = (z[:, wa] >> sa) & one
        if code == OP_H:
            ph += (2 * (xa & za)).astype(np.uint8)
            flip = (xa ^ za) << sa
            x[:, wa] ^= flip
            z[:, wa] ^= flip
        elif code == OP_S:
            ph += xa.astype(np.uint8)
            z[:, wa] ^= xa << sa
        elif code == OP_SDG:
            ph += (3 * xa).astype(np.uint8)
            z[:, wa] ^= xa << sa
        elif code == OP_X:
            ph += (2 * za).astype(np.uint8)
        elif code == OP_Y:
            ph += (2 * (xa ^ za)).astype(np.uint8)
        elif code == OP_Z:
            ph += (2 * xa).astype(np.uint8)
        elif code == OP_CZ:
            wb, sb = int(b) >> 6, _U64(int(b) & 63)
            xb = (x[:, wb] >> sb) & one
            ph += (2 * (xa & xb)).astype(np.uint8)
            z[:, wa] ^= xb << sa
            z[:, wb] ^= xa << sb
        elif code == OP_CNOT:
            wb, sb = int(b) >> 6, _U64(int(b) & 63)
            zb = (z[:, wb] >> sb) & one
            x[:, wb] ^= xa << sb
            z[:, wa] ^= zb << sa
        else:
            raise ValueError(f"unknown opcode {code}")
        ph &= 3


def conjugate_fold(tx, tz, tph, n, qx, qz, qph):
    """Image of i**qph X**qx Z**qz under the tableau (tx, tz, tph).

    Returns (ox, oz, ophase) with ox/oz fresh uint64 arrays of width W.
    """
    w = tx.shape[1]
    ox = np.zeros(w, dtype=_U64)
    oz = np.zeros(w, dtype=_U64)
    op = int(qph)
    for part, offset in ((qx, 0), (qz, n)):
        for wi in range(w):
            word = int(part[wi])
            base = wi << 6
            while word:
                j = (word & -word).bit_length() - 1
                word &= word - 1
                r = offset + base + j
                op = (op + int(tph[r]) + 2 * int(np.bitwise_count(oz & tx[r]).sum())) & 3
                ox ^= tx[r]
                oz ^= tz[r]
    return ox, oz, op


def conjugate_fold_rows(tx, tz, tph, n, qx, qz, qph, ox, oz, oph) -> None:
    """Batched conjugate_fold: row r of (qx, qz, qph) maps to row r of
    (ox, oz, oph)."""
    for r in range(qx.shape[0]):
        rx, rz, rp = conjugate_fold(tx, tz, tph, n, qx[r], qz[r], int(qph[r]))
        ox[r] = rx
        oz[r] = rz
        oph[r] = rp


def fold_product(x, z, ph, combo):
    """Ordered product of the rows selected by the packed combo words.

    Returns (x_words, z_words, phase) of prod_{i in combo} row_i with
    ascending index order.
    """
    w = x.shape[1]
    ox = np.zeros(w, dtype=_U64)
    oz = np.zeros(w, dtype=_U64)
    op = 0
    for wi in range(combo.shape[0]):
        word = int(combo[wi])
        base = wi << 6
        while word:
            j = (word & -word).bit_length() - 1
            word &= word - 1
            r = base + j
            op = (op + int(ph[r]) + 2 * int(np.bitwise_count(oz & x[r]).sum())) & 3
            ox ^= x[r]
            oz ^= z[r]
    return ox, oz, op


def ge(main, aux, nbits: int, reduce_above: bool):
    """In-place Gaussian elimination on packed rows over GF(2).

    Pivots are chosen left to right on the first nbits columns of main,
    topmost candidate row first; the same row operations are applied to
    aux (which may have zero width). With reduce_above the pivot columns
    are cleared above the pivots as well. Returns (rank, pivot_columns).
    """
    rows = main.shape[0]
    rank = 0
    pivots = []
    one = _U64(1)
    for col in range(nbits):
        if rank == rows:
            break
        w, s = col >> 6, _U64(col & 63)
        cand = np.nonzero((main[rank:, w] >> s) & one)[0]
        if cand.size == 0:
            continue
        p = rank + int(cand[0])
        if p != rank:
            main[[rank, p]] = main[[p, rank]]
            if aux.shape[1]:
                aux[[rank, p]] = aux[[p, rank]]
        if reduce_above:
            sel = np.nonzero((main[:, w] >> s) & one)[0]
            sel = sel[sel != rank]
        else:
            sel = rank + 1 + np.nonzero((main[rank + 1 :, w] >> s) & one)[0]
        if sel.size:
            main[sel] ^= main[rank]
            if aux.shape[1]:
                aux[sel] ^= aux[rank]
        pivots.append(col)
        rank += 1
    return rank, pivots


def measure_all(x, z, ph, n, rwords) -> np.ndarray:
    """Computational-basis measurement of every qubit, ascending order.

    Mutates the 2n-row state tableau in place (callers measure a scratch
    copy). Random outcomes take bit q of rwords; deterministic outcomes
    consume nothing. Returns the outcome as packed words.
    """
    w = x.shape[1]
    out = np.zeros(w, dtype=_U64)
    one = _U64(1)
    for q in range(n):
        wq, s = q >> 6, _U64(q & 63)
        stab = np.nonzero((x[n:, wq] >> s) & one)[0]
        if stab.size:
            p = n + int(stab[0])
            sel = np.nonzero((x[:, wq] >> s) & one)[0]
            sel = sel[sel != p]
            if sel.size:
                extra = 2 * np.bitwise_count(z[sel] & x[p]).sum(axis=1, dtype=np.int64)
                ph[sel] = (ph[sel] + ph[p] + extra) & 3
                x[sel] ^= x[p]
                z[sel] ^= z[p]
            x[p - n] = x[p]
            z[p - n] = z[p]
            ph[p - n] = ph[p]
            o = int((rwords[wq] >> s) & one)
            x[p] = 0
            z[p] = 0
            z[p, wq] = one << s
            ph[p] = 2 * o
            out[wq] |= _U64(o) << s
        else:
            dest = np.nonzero((x[:n, wq] >> s) & one)[0]
            accx = np.zeros(w, dtype=_U64)
            accz = np.zeros(w, dtype=_U64)
            accp = 0
            for i in dest:
                r = n + int(i)
                accp = (accp + int(ph[r]) + 2 * int(np.bitwise_count(accz & x[r]).sum())) & 3
                accx ^= x[r]
                accz ^= z[r]
            out[wq] |= _U64(accp >> 1) << s
    return out


def apply_phase_circuit(x, z, ph, n, arows, smask, emask) -> None:
    """Apply CZ layer (adjacency arows), S layer (smask), Z**emask, then
    a Hadamard on every qubit, to all rows in place.

    arows is the packed symmetric adjacency matrix with empty diagonal.
    All diagonal-layer phase contributions depend only on the X parts,
    which the layer itself never changes.
    """
    rows = x.shape[0]
    w = x.shape[1]
    one = _U64(1)
    t = np.zeros_like(x)
    tot = np.zeros(rows, dtype=np.int64)
    for q in range(n):
        wq, s = q >> 6, _U64(q & 63)
        hit = ((x[:, wq] >> s) & one).astype(bool)
        if hit.any():
            t[hit] ^= arows[q]
            tot[hit] += np.bitwise_count(arows[q] & x[hit]).sum(axis=1, dtype=np.int64)
    # each CZ edge inside the row support was counted twice
    ph += (2 * ((tot >> 1) & 1)).astype(np.uint8)
    z ^= t
    ph += (_pc_rows(x & smask) & 3).astype(np.uint8)
    z ^= x & smask
    ph += (2 * (_pc_rows(x & emask) & 1)).astype(np.uint8)
    ph += (2 * (_pc_rows(x & z) & 1)).astype(np.uint8)
    ph &= 3
    x2 = x.copy()
    x[...] = z
    z[...] = x2
