# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for packed Pauli-row tables.

Semantically identical to phaseshadow.core.pure (same layout, same
random-word consumption, same elimination pivoting); the equivalence is
enforced by the backend test suite.
"""

import numpy as np

cdef extern from *:
    """
    #include <stdint.h>
    static inline int ps_popcount(uint64_t x) { return __builtin_popcountll(x); }
    static inline int ps_ctz(uint64_t x) { return __builtin_ctzll(x); }
    """
    int ps_popcount(unsigned long long x) nogil
    int ps_ctz(unsigned long long x) nogil

ctypedef unsigned long long u64
ctypedef unsigned char u8

BACKEND_NAME = "compiled"

cdef enum:
    _H = 0
    _S = 1
    _SDG = 2
    _X = 3
    _Y = 4
    _Z = 5
    _CZ = 6
    _CNOT = 7

OP_H = _H
OP_S = _S
OP_SDG = _SDG
OP_X = _X
OP_Y = _Y
OP_Z = _Z
OP_CZ = _CZ
OP_CNOT = _CNOT


def nwords(n):
    return (n + 63) >> 6


def mul_rows(u64[:, ::1] x1, u64[:, ::1] z1, u8[::1] ph1, Py_ssize_t dst,
             u64[:, ::1] x2, u64[:, ::1] z2, u8[::1] ph2, Py_ssize_t src):
    cdef Py_ssize_t w = x1.shape[1], i
    cdef int extra = 0
    for i in range(w):
        extra += ps_popcount(z1[dst, i] & x2[src, i])
    ph1[dst] = <u8>((ph1[dst] + ph2[src] + 2 * extra) & 3)
    for i in range(w):
        x1[dst, i] ^= x2[src, i]
        z1[dst, i] ^= z2[src, i]


def apply_gates(u64[:, ::1] x, u64[:, ::1] z, u8[::1] ph, long long[:, ::1] ops):
    cdef Py_ssize_t rows = x.shape[0], gates = ops.shape[0]
    cdef Py_ssize_t g, r, wa, wb
    cdef int code, sa, sb
    cdef u64 one = 1, xa, za, xb, zb, flip
    with nogil:
        for g in range(gates):
            code = <int>ops[g, 0]
            wa = <Py_ssize_t>(ops[g, 1] >> 6)
            sa = <int>(ops[g, 1] & 63)
            wb = <Py_ssize_t>(ops[g, 2] >> 6)
            sb = <int>(ops[g, 2] & 63)
            for r in range(rows):
                xa = (x[r, wa] >> sa) & one
                za = (z[r, wa] >> sa) & one
                if code == _H:
                    ph[r] = <u8>((ph[r] + 2 * (xa & za)) & 3)
                    flip = xa ^ za
                    x[r, wa] ^= flip << sa
                    z[r, wa] ^= flip << sa
                elif code == _S:
                    ph[r] = <u8>((ph[r] + xa) & 3)
                    z[r, wa] ^= xa << sa
                elif code == _SDG:
                    ph[r] = <u8>((ph[r] + 3 * xa) & 3)
                    z[r, wa] ^= xa << sa
                elif code == _X:
                    ph[r] = <u8>((ph[r] + 2 * za) & 3)
                elif code == _Y:
                    ph[r] = <u8>((ph[r] + 2 * (xa ^ za)) & 3)
                elif code == _Z:
                    ph[r] = <u8>((ph[r] + 2 * xa) & 3)
                elif code == _CZ:
                    xb = (x[r, wb] >> sb) & one
                    ph[r] = <u8>((ph[r] + 2 * (xa & xb)) & 3)
                    z[r, wa] ^= xb << sa
                    z[r, wb] ^= xa << sb
                elif code == _CNOT:
                    zb = (z[r, wb] >> sb) & one
                    x[r, wb] ^= xa << sb
                    z[r, wa] ^= zb << sa


def conjugate_fold(u64[:, ::1] tx, u64[:, ::1] tz, u8[::1] tph, Py_ssize_t n,
                   u64[::1] qx, u64[::1] qz, int qph):
    cdef Py_ssize_t w = tx.shape[1]
    ox_arr = np.zeros(w, dtype=np.uint64)
    oz_arr = np.zeros(w, dtype=np.uint64)
    cdef u64[::1] ox = ox_arr
    cdef u64[::1] oz = oz_arr
    cdef int op = qph & 3
    cdef Py_ssize_t part, wi, r, i
    cdef u64 word
    cdef int extra, j
    cdef Py_ssize_t offset
    with nogil:
        for part in range(2):
            offset = 0 if part == 0 else n
            for wi in range(w):
                word = qx[wi] if part == 0 else qz[wi]
                while word:
                    j = ps_ctz(word)
                    word &= word - 1
                    r = offset + (wi << 6) + j
                    extra = 0
                    for i in range(w):
                        extra += ps_popcount(oz[i] & tx[r, i])
                    op = (op + tph[r] + 2 * extra) & 3
                    for i in range(w):
                        ox[i] ^= tx[r, i]
                        oz[i] ^= tz[r, i]
    return ox_arr, oz_arr, op


def conjugate_fold_rows(u64[:, ::1] tx, u64[:, ::1] tz, u8[::1] tph, Py_ssize_t n,
                        u64[:, ::1] qx, u64[:, ::1] qz, u8[::1] qph,
                        u64[:, ::1] ox, u64[:, ::1] oz, u8[::1] oph):
    cdef Py_ssize_t w = tx.shape[1], rows = qx.shape[0]
    cdef Py_ssize_t rr, part, wi, r, i, offset
    cdef u64 word
    cdef int op, extra, j
    with nogil:
        for rr in range(rows):
            for i in range(w):
                ox[rr, i] = 0
                oz[rr, i] = 0
            op = qph[rr] & 3
            for part in range(2):
                offset = 0 if part == 0 else n
                for wi in range(w):
                    word = qx[rr, wi] if part == 0 else qz[rr, wi]
                    while word:
                        j = ps_ctz(word)
                        word &= word - 1
                        r = offset + (wi << 6) + j
                        extra = 0
                        for i in range(w):
                            extra += ps_popcount(oz[rr, i] & tx[r, i])
                        op = (op + tph[r] + 2 * extra) & 3
                        for i in range(w):
                            ox[rr, i] ^= tx[r, i]
                            oz[rr, i] ^= tz[r, i]
            oph[rr] = <u8>op


def fold_product(u64[:, ::1] x, u64[:, ::1] z, u8[::1] ph, u64[::1] combo):
    cdef Py_ssize_t w = x.shape[1]
    ox_arr = np.zeros(w, dtype=np.uint64)
    oz_arr = np.zeros(w, dtype=np.uint64)
    cdef u64[::1] ox = ox_arr
    cdef u64[::1] oz = oz_arr
    cdef int op = 0, extra, j
    cdef Py_ssize_t wi, r, i
    cdef u64 word
    with nogil:
        for wi in range(combo.shape[0]):
            word = combo[wi]
            while word:
                j = ps_ctz(word)
                word &= word - 1
                r = (wi << 6) + j
                extra = 0
                for i in range(w):
                    extra += ps_popcount(oz[i] & x[r, i])
                op = (op + ph[r] + 2 * extra) & 3
                for i in range(w):
                    ox[i] ^= x[r, i]
                    oz[i] ^= z[r, i]
    return ox_arr, oz_arr, op


def ge(u64[:, ::1] main, u64[:, ::1] aux, Py_ssize_t nbits, bint reduce_above):
    cdef Py_ssize_t rows = main.shape[0]
    cdef Py_ssize_t wm = main.shape[1], wa = aux.shape[1]
    cdef Py_ssize_t rank = 0, col, r, p, i
    cdef Py_ssize_t w
    cdef int s
    cdef u64 one = 1, tmp
    pivots = []
    for col in range(nbits):
        if rank == rows:
            break
        w = col >> 6
        s = <int>(col & 63)
        p = -1
        for r in range(rank, rows):
            if (main[r, w] >> s) & one:
                p = r
                break
        if p < 0:
            continue
        if p != rank:
            for i in range(wm):
                tmp = main[rank, i]
                main[rank, i] = main[p, i]
                main[p, i] = tmp
            for i in range(wa):
                tmp = aux[rank, i]
                aux[rank, i] = aux[p, i]
                aux[p, i] = tmp
        for r in range(rows):
            if r == rank:
                continue
            if not reduce_above and r <= rank:
                continue
            if (main[r, w] >> s) & one:
                for i in range(wm):
                    main[r, i] ^= main[rank, i]
                for i in range(wa):
                    aux[r, i] ^= aux[rank, i]
        pivots.append(col)
        rank += 1
    return rank, pivots


cdef void _mul_into(u64[:, ::1] x, u64[:, ::1] z, u8[::1] ph,
                    Py_ssize_t dst, Py_ssize_t src, Py_ssize_t w) noexcept nogil:
    cdef Py_ssize_t i
    cdef int extra = 0
    for i in range(w):
        extra += ps_popcount(z[dst, i] & x[src, i])
    ph[dst] = <u8>((ph[dst] + ph[src] + 2 * extra) & 3)
    for i in range(w):
        x[dst, i] ^= x[src, i]
        z[dst, i] ^= z[src, i]


def measure_all(u64[:, ::1] x, u64[:, ::1] z, u8[::1] ph, Py_ssize_t n,
                u64[::1] rwords):
    cdef Py_ssize_t w = x.shape[1]
    if w > 8:
        raise ValueError("compiled kernels support up to 512 qubits")
    out_arr = np.zeros(w, dtype=np.uint64)
    cdef u64[::1] out = out_arr
    cdef Py_ssize_t q, wq, r, p, i
    cdef int s, accp, extra
    cdef u64 one = 1, o
    cdef Py_ssize_t dn
    with nogil:
        for q in range(n):
            wq = q >> 6
            s = <int>(q & 63)
            p = -1
            for r in range(n, 2 * n):
                if (x[r, wq] >> s) & one:
                    p = r
                    break
            if p >= 0:
                for r in range(2 * n):
                    if r != p and ((x[r, wq] >> s) & one):
                        _mul_into(x, z, ph, r, p, w)
                dn = p - n
                for i in range(w):
                    x[dn, i] = x[p, i]
                    z[dn, i] = z[p, i]
                ph[dn] = ph[p]
                o = (rwords[wq] >> s) & one
                for i in range(w):
                    x[p, i] = 0
                    z[p, i] = 0
                z[p, wq] = one << s
                ph[p] = <u8>(2 * o)
                out[wq] |= o << s
            else:
                accp = _det_outcome(x, z, ph, n, wq, s, w)
                out[wq] |= (<u64>(accp >> 1)) << s
    return out_arr


cdef int _det_outcome(u64[:, ::1] x, u64[:, ::1] z, u8[::1] ph, Py_ssize_t n,
                      Py_ssize_t wq, int s, Py_ssize_t w) noexcept nogil:
    cdef Py_ssize_t i, r, k
    cdef int accp = 0, extra
    cdef u64 one = 1
    # accumulate into stack-free scratch: keep the running product's x
    # and z words in local buffers of bounded width
    cdef u64 accx[8]
    cdef u64 accz[8]
    for k in range(w):
        accx[k] = 0
        accz[k] = 0
    for i in range(n):
        if (x[i, wq] >> s) & one:
            r = n + i
            extra = 0
            for k in range(w):
                extra += ps_popcount(accz[k] & x[r, k])
            accp = (accp + ph[r] + 2 * extra) & 3
            for k in range(w):
                accx[k] ^= x[r, k]
                accz[k] ^= z[r, k]
    return accp


def apply_phase_circuit(u64[:, ::1] x, u64[:, ::1] z, u8[::1] ph, Py_ssize_t n,
                        u64[:, ::1] arows, u64[::1] smask, u64[::1] emask):
    cdef Py_ssize_t rows = x.shape[0], w = x.shape[1]
    if w > 8:
        raise ValueError("compiled kernels support up to 512 qubits")
    cdef Py_ssize_t r, i, k, wi
    cdef u64 one = 1, word, tmp
    cdef long long tot
    cdef int add, j
    cdef u64 t[8]
    with nogil:
        for r in range(rows):
            for k in range(w):
                t[k] = 0
            tot = 0
            for wi in range(w):
                word = x[r, wi]
                while word:
                    j = ps_ctz(word)
                    word &= word - 1
                    i = (wi << 6) + j
                    for k in range(w):
                        t[k] ^= arows[i, k]
                        tot += ps_popcount(arows[i, k] & x[r, k])
            add = <int>((tot >> 1) & 1) * 2
            for k in range(w):
                z[r, k] ^= t[k]
            # S layer: phase per X-support site, then the Z update
            tot = 0
            for k in range(w):
                tot += ps_popcount(x[r, k] & smask[k])
            add += <int>(tot & 3)
            for k in range(w):
                z[r, k] ^= x[r, k] & smask[k]
            tot = 0
            for k in range(w):
                tot += ps_popcount(x[r, k] & emask[k])
            add += <int>(tot & 1) * 2
            tot = 0
            for k in range(w):
                tot += ps_popcount(x[r, k] & z[r, k])
            add += <int>(tot & 1) * 2
            ph[r] = <u8>((ph[r] + add) & 3)
            for k in range(w):
                tmp = x[r, k]
                x[r, k] = z[r, k]
                z[r, k] = tmp
