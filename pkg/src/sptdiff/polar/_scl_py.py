"""Pure-numpy successive-cancellation list kernel (fallback backend).

Full-tree layout vectorized across paths. Produces bit-exact the same paths
and metrics as the compiled core: min-sum check nodes, LLR-domain path
metric penalties, stable tie-breaking by candidate index.
"""

import numpy as np


def _ctz(i: int) -> int:
    return (i & -i).bit_length() - 1


def scl_paths(channel_llr, frozen, list_size: int):
    """Run list decoding; returns (u_paths, metrics) for the active paths.

    `channel_llr` has mother-code length (a power of two), positive favors
    bit 0. `frozen` is a 0/1 mask over input indices.
    """
    channel_llr = np.ascontiguousarray(channel_llr, dtype=np.float64)
    frozen = np.asarray(frozen)
    n_mother = channel_llr.shape[0]
    n = n_mother.bit_length() - 1
    if (1 << n) != n_mother:
        raise ValueError("block length must be a power of two")
    if list_size < 1:
        raise ValueError("list size must be >= 1")
    lsz = int(list_size)

    llr = np.zeros((lsz, n + 1, n_mother))
    ps = np.zeros((lsz, n + 1, n_mother), dtype=np.int8)
    u = np.zeros((lsz, n_mother), dtype=np.int8)
    pm = np.zeros(lsz)
    llr[:, n, :] = channel_llr
    na = 1

    for i in range(n_mother):
        top = n - 1 if i == 0 else _ctz(i)
        for s in range(top, -1, -1):
            h = 1 << s
            pstart = (i >> (s + 1)) << (s + 1)
            a = llr[:na, s + 1, pstart:pstart + h]
            b = llr[:na, s + 1, pstart + h:pstart + 2 * h]
            start = (i >> s) << s
            if ((i >> s) & 1) == 0:
                np.minimum(np.abs(a), np.abs(b), out=llr[:na, s, start:start + h])
                neg = (a < 0) != (b < 0)
                llr[:na, s, start:start + h][neg] *= -1.0
            else:
                sgn = 1.0 - 2.0 * ps[:na, s, pstart:pstart + h]
                llr[:na, s, start:start + h] = b + sgn * a

        dec = llr[:na, 0, i]
        if frozen[i]:
            pm[:na] += np.maximum(-dec, 0.0)
            u[:na, i] = 0
            bits = np.zeros(na, dtype=np.int8)
        else:
            cand = np.concatenate([pm[:na] + np.maximum(-dec, 0.0),
                                   pm[:na] + np.maximum(dec, 0.0)])
            keep = min(2 * na, lsz)
            order = np.argsort(cand, kind="stable")[:keep]
            parents = np.where(order < na, order, order - na)
            bits = (order >= na).astype(np.int8)
            llr[:keep] = llr[parents]
            ps[:keep] = ps[parents]
            u[:keep] = u[parents]
            pm[:keep] = cand[order]
            u[:keep, i] = bits
            na = keep

        ps[:na, 0, i] = bits
        ii, s = i, 0
        while ii & 1:
            h = 1 << s
            lstart = (ii - 1) << s
            rstart = ii << s
            pstart = (ii >> 1) << (s + 1)
            left = ps[:na, s, lstart:lstart + h]
            right = ps[:na, s, rstart:rstart + h]
            ps[:na, s + 1, pstart:pstart + h] = left ^ right
            ps[:na, s + 1, pstart + h:pstart + 2 * h] = right
            ii >>= 1
            s += 1

    return u[:na].copy(), pm[:na].copy()
