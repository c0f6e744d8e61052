# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled successive-cancellation list kernel.

Compact per-path state: one live LLR segment per stage (stage s at offset
2^s - 1) plus one saved left-sibling partial-sum segment per stage, all
cloned on path forks. Matches the numpy fallback bit for bit: min-sum check
nodes, LLR-domain penalties, stable tie-breaking by candidate index.
"""

import numpy as np

from libc.math cimport fabs
from libc.string cimport memcpy


cdef inline void _ps_update(signed char[:, ::1] S, Py_ssize_t p, Py_ssize_t i,
                            signed char bit, int n,
                            signed char *V, signed char *V2):
    cdef Py_ssize_t s = 0, vl = 1, ii = i, t, off
    V[0] = bit
    while ii & 1:
        off = (1 << s) - 1
        for t in range(vl):
            V2[t] = S[p, off + t] ^ V[t]
        for t in range(vl):
            V[vl + t] = V[t]
        for t in range(vl):
            V[t] = V2[t]
        vl <<= 1
        ii >>= 1
        s += 1
        if s == n:
            return
    off = (1 << s) - 1
    for t in range(vl):
        S[p, off + t] = V[t]


def scl_paths(channel_llr, frozen, int list_size):
    """Run list decoding; returns (u_paths, metrics) for the active paths."""
    cdef double[::1] ch = np.ascontiguousarray(channel_llr, dtype=np.float64)
    cdef unsigned char[::1] fr = np.ascontiguousarray(frozen, dtype=np.uint8)
    cdef Py_ssize_t N = ch.shape[0]
    cdef int n = 0
    while (1 << n) < N:
        n += 1
    if (1 << n) != N:
        raise ValueError("block length must be a power of two")
    if list_size < 1:
        raise ValueError("list size must be >= 1")
    cdef Py_ssize_t P = list_size

    llr_a = np.zeros((P, N), dtype=np.float64)
    llr_b = np.zeros((P, N), dtype=np.float64)
    ps_a = np.zeros((P, N), dtype=np.int8)
    ps_b = np.zeros((P, N), dtype=np.int8)
    u_a = np.zeros((P, N), dtype=np.int8)
    u_b = np.zeros((P, N), dtype=np.int8)
    pm_a = np.zeros(P, dtype=np.float64)
    pm_b = np.zeros(P, dtype=np.float64)
    scratch = np.zeros(2 * N, dtype=np.int8)
    cand_pm = np.empty(2 * P, dtype=np.float64)
    cand_ord = np.empty(2 * P, dtype=np.intp)

    cdef double[:, ::1] L0 = llr_a, L1 = llr_b, Lt
    cdef signed char[:, ::1] S0 = ps_a, S1 = ps_b, St
    cdef signed char[:, ::1] U0 = u_a, U1 = u_b, Ut
    cdef double[::1] M0 = pm_a, M1 = pm_b, Mt
    cdef signed char[::1] vbuf = scratch
    cdef double[::1] cpm = cand_pm
    cdef Py_ssize_t[::1] cord = cand_ord
    cdef signed char *V = &vbuf[0]
    cdef signed char *V2 = &vbuf[N]

    cdef Py_ssize_t i, s, h, t, off, offp, p, k, j, kk, keep, total, parent
    cdef Py_ssize_t na = 1
    cdef int top, gnode
    cdef double aa, bb, m, dec, keyv
    cdef signed char bit

    for i in range(N):
        if i == 0:
            top = n - 1
        else:
            top = 0
            while ((i >> top) & 1) == 0:
                top += 1
        for s in range(top, -1, -1):
            h = 1 << s
            off = h - 1
            offp = 2 * h - 1
            gnode = (i >> s) & 1
            for p in range(na):
                for t in range(h):
                    if s == n - 1:
                        aa = ch[t]
                        bb = ch[t + h]
                    else:
                        aa = L0[p, offp + t]
                        bb = L0[p, offp + h + t]
                    if gnode:
                        if S0[p, off + t]:
                            L0[p, off + t] = bb - aa
                        else:
                            L0[p, off + t] = bb + aa
                    else:
                        m = fabs(aa)
                        if fabs(bb) < m:
                            m = fabs(bb)
                        if (aa < 0) != (bb < 0):
                            L0[p, off + t] = -m
                        else:
                            L0[p, off + t] = m

        if fr[i]:
            for p in range(na):
                dec = L0[p, 0]
                if dec < 0:
                    M0[p] -= dec
                U0[p, i] = 0
                _ps_update(S0, p, i, 0, n, V, V2)
        else:
            total = 2 * na
            for p in range(na):
                dec = L0[p, 0]
                cpm[p] = M0[p] + (-dec if dec < 0 else 0.0)
                cpm[na + p] = M0[p] + (dec if dec > 0 else 0.0)
            for k in range(total):
                cord[k] = k
            for k in range(1, total):
                kk = cord[k]
                keyv = cpm[kk]
                j = k - 1
                while j >= 0 and cpm[cord[j]] > keyv:
                    cord[j + 1] = cord[j]
                    j -= 1
                cord[j + 1] = kk
            keep = total if total < P else P
            for k in range(keep):
                if cord[k] < na:
                    parent = cord[k]
                    bit = 0
                else:
                    parent = cord[k] - na
                    bit = 1
                memcpy(&L1[k, 0], &L0[parent, 0], N * sizeof(double))
                memcpy(&S1[k, 0], &S0[parent, 0], N)
                memcpy(&U1[k, 0], &U0[parent, 0], N)
                M1[k] = cpm[cord[k]]
                U1[k, i] = bit
            Lt = L0; L0 = L1; L1 = Lt
            St = S0; S0 = S1; S1 = St
            Ut = U0; U0 = U1; U1 = Ut
            Mt = M0; M0 = M1; M1 = Mt
            na = keep
            for p in range(na):
                _ps_update(S0, p, i, U0[p, i], n, V, V2)

    u_out = np.asarray(U0)[:na].copy()
    pm_out = np.asarray(M0)[:na].copy()
    return u_out, pm_out
