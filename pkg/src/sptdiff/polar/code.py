"""CRC-aided polar code: construction, encoding, list decoding.

Construction is Gaussian-approximation density evolution at a configurable
design SNR. Codes whose transmitted length is below the mother power of two
are shortened from the tail: the trailing inputs are forced frozen (which
forces the trailing coded bits to zero) and the decoder feeds those positions
a huge known-zero LLR. A 6-bit CRC (x^6 + x^5 + 1) is appended to the info
bits and used to pick the output path from the decoder list.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from ._backend import COMPILED, kernel

__all__ = [
    "CRC6_POLY",
    "crc6_remainder",
    "crc6_append",
    "crc6_check",
    "ga_reliability",
    "PolarCode",
    "COMPILED",
]

CRC6_POLY = np.array([1, 1, 0, 0, 0, 0, 1], dtype=np.int8)  # x^6 + x^5 + 1
_CRC_LEN = 6
_SHORT_LLR = 1e30  # known-zero LLR at shortened positions


def crc6_remainder(bits) -> np.ndarray:
    """Reference long division: remainder of bits * x^6 modulo the CRC poly."""
    bits = np.asarray(bits, dtype=np.int8)
    if bits.ndim != 1:
        raise ValueError("reference CRC works on a single message")
    reg = np.concatenate([bits, np.zeros(_CRC_LEN, dtype=np.int8)])
    for idx in range(bits.size):
        if reg[idx]:
            reg[idx:idx + _CRC_LEN + 1] ^= CRC6_POLY
    return reg[-_CRC_LEN:]


@lru_cache(maxsize=None)
def _crc_matrix(length: int) -> np.ndarray:
    """(length, 6) GF(2) matrix with rows crc6_remainder(e_i)."""
    eye = np.eye(length, dtype=np.int8)
    return np.stack([crc6_remainder(eye[i]) for i in range(length)])


def crc6_append(bits) -> np.ndarray:
    """Append the 6 CRC bits along the last axis (vectorized)."""
    bits = np.asarray(bits, dtype=np.int8)
    mat = _crc_matrix(bits.shape[-1])
    crc = (bits.astype(np.int64) @ mat.astype(np.int64)) & 1
    return np.concatenate([bits, crc.astype(np.int8)], axis=-1)


def crc6_check(bits):
    """True where the trailing 6 bits match the CRC of the leading bits."""
    bits = np.asarray(bits, dtype=np.int8)
    msg, crc = bits[..., :-_CRC_LEN], bits[..., -_CRC_LEN:]
    mat = _crc_matrix(msg.shape[-1])
    expect = (msg.astype(np.int64) @ mat.astype(np.int64)) & 1
    ok = np.all(expect == crc, axis=-1)
    return bool(ok) if ok.ndim == 0 else ok


# Gaussian-approximation density evolution -------------------------------

_GA_CAP = 1e5


def _phi(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    small = np.exp(-0.4527 * np.power(np.maximum(x, 0.0), 0.86) + 0.0218)
    with np.errstate(divide="ignore", invalid="ignore"):
        big = np.sqrt(np.pi / np.maximum(x, 1e-12)) * np.exp(-x / 4.0) * (1.0 - 10.0 / (7.0 * np.maximum(x, 1e-12)))
    out = np.where(x < 10.0, small, big)
    return np.clip(out, 0.0, 1.0)


def _phi_inv(y: np.ndarray) -> np.ndarray:
    """Vectorized bisection inverse of _phi on (0, 1]."""
    y = np.asarray(y, dtype=float)
    lo = np.zeros_like(y)
    hi = np.full_like(y, _GA_CAP)
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        too_big = _phi(mid) > y  # phi decreasing: phi(mid) > y means mid too small
        lo = np.where(too_big, mid, lo)
        hi = np.where(too_big, hi, mid)
    return 0.5 * (lo + hi)


def ga_reliability(channel_means) -> np.ndarray:
    """Per-input-bit LLR means from per-coded-position channel LLR means."""
    v = np.asarray(channel_means, dtype=float)
    if v.size == 1:
        return v.copy()
    h = v.size // 2
    a, b = v[:h], v[h:]
    pa, pb = _phi(a), _phi(b)
    p = np.clip(1.0 - (1.0 - pa) * (1.0 - pb), 0.0, 1.0)
    f = np.where(p <= 1e-280, np.minimum(a + b, _GA_CAP), _phi_inv(np.maximum(p, 1e-280)))
    g = np.minimum(a + b, _GA_CAP)
    return np.concatenate([ga_reliability(f), ga_reliability(g)])


class PolarCode:
    """Shortened CRC-aided polar code with (coded, info) = (J, L) bits."""

    def __init__(self, coded_bits: int, info_bits: int, design_snr_db: float = 1.0,
                 crc_len: int = _CRC_LEN):
        if crc_len != _CRC_LEN:
            raise ValueError("only the 6-bit CRC is wired up")
        payload = info_bits + crc_len
        if not (0 < payload <= coded_bits):
            raise ValueError(f"need 0 < info+crc <= coded, got {payload} vs {coded_bits}")
        self.coded_bits = int(coded_bits)
        self.info_bits = int(info_bits)
        self.crc_len = crc_len
        self.payload_bits = payload
        self.design_snr_db = float(design_snr_db)
        self.mother_bits = 1 << math.ceil(math.log2(coded_bits))
        self.shortened = self.mother_bits - self.coded_bits

        mu = 4.0 * 10.0 ** (self.design_snr_db / 10.0)
        ch = np.full(self.mother_bits, mu)
        ch[self.coded_bits:] = _GA_CAP  # shortened positions are known
        means = ga_reliability(ch)
        allowed = np.arange(self.coded_bits)  # tail inputs forced frozen
        order = allowed[np.argsort(-means[allowed], kind="stable")]
        info_set = np.sort(order[:payload])
        frozen = np.ones(self.mother_bits, dtype=np.uint8)
        frozen[info_set] = 0
        self.info_positions = info_set
        self.frozen = frozen

    # encoding ------------------------------------------------------------

    @staticmethod
    def _butterfly(u: np.ndarray) -> np.ndarray:
        x = u.copy()
        m = x.shape[-1]
        h = 1
        while h < m:
            v = x.reshape(x.shape[:-1] + (m // (2 * h), 2, h))
            v[..., 0, :] ^= v[..., 1, :]
            h <<= 1
        return x

    def encode(self, payload) -> np.ndarray:
        """CRC-carrying payload bits (..., L+6) -> coded bits (..., J)."""
        payload = np.asarray(payload, dtype=np.int8)
        if payload.shape[-1] != self.payload_bits:
            raise ValueError(f"expected {self.payload_bits} payload bits")
        u = np.zeros(payload.shape[:-1] + (self.mother_bits,), dtype=np.int8)
        u[..., self.info_positions] = payload
        return self._butterfly(u)[..., :self.coded_bits]

    def encode_info(self, info) -> np.ndarray:
        """Info bits (..., L) -> coded bits, CRC appended internally."""
        return self.encode(crc6_append(info))

    # decoding ------------------------------------------------------------

    def decode(self, channel_llrs, list_size: int = 32):
        """List-decode one block; returns (info_bits, crc_ok).

        Picks the best-metric path that passes the CRC, falling back to the
        best-metric path outright when none does.
        """
        llrs = np.asarray(channel_llrs, dtype=np.float64)
        if llrs.shape != (self.coded_bits,):
            raise ValueError(f"expected {self.coded_bits} LLRs")
        full = np.full(self.mother_bits, _SHORT_LLR)
        full[:self.coded_bits] = llrs
        u_paths, metrics = kernel.scl_paths(full, self.frozen, list_size)
        cand = u_paths[:, self.info_positions]
        ok = np.atleast_1d(crc6_check(cand))
        order = np.argsort(metrics, kind="stable")
        passing = order[ok[order]]
        pick = int(passing[0]) if passing.size else int(order[0])
        return cand[pick, :self.info_bits].copy(), bool(ok[pick])
