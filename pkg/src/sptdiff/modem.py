"""Modulation, differential detection, combining and soft demapping.

Constellations are Gray-labeled unit-average-power PSK/QAM. Differential
encoding runs on any unit-modulus constellation; the detector forms the
lag-one product decision variable. Soft metrics come from a Gaussian model
with a known real gain and a per-symbol noise variance, which is exact for
coherent reception and is the standard working model for the differential
equivalent channel (delayed reception as gain, innovation noise inflated by
(1 - alpha^2) * rho + (1 + alpha^2)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# saturation for degenerate (zero-probability) bit partitions; large enough
# to dominate any realistic soft value, small enough that sums stay finite
_LLR_CAP = 1e30

__all__ = [
    "Constellation",
    "diff_encode",
    "diff_detect",
    "apply_channel",
    "sc_select",
    "combine",
    "mmse_estimate",
    "demap_llr",
]


def _gray(v: np.ndarray) -> np.ndarray:
    return v ^ (v >> 1)


def _int_to_bits(v: np.ndarray, width: int) -> np.ndarray:
    shifts = np.arange(width - 1, -1, -1)
    return ((v[..., None] >> shifts) & 1).astype(np.int8)


@dataclass(frozen=True)
class Constellation:
    kind: str
    order: int
    points: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)  # (M, m) bit label per point index

    def __post_init__(self):
        p = np.mean(np.abs(self.points) ** 2)
        if abs(p - 1.0) > 1e-12:
            raise ValueError(f"constellation power {p} != 1")
        # point index for each integer bit label, for bit -> symbol mapping
        label_ints = (self.labels.astype(int) * (1 << np.arange(self.bits_per_symbol - 1, -1, -1))).sum(axis=1)
        inv = np.empty(self.order, dtype=np.int64)
        inv[label_ints] = np.arange(self.order)
        object.__setattr__(self, "_point_of_label", inv)
        object.__setattr__(self, "_mask0", (self.labels == 0).astype(float))
        object.__setattr__(self, "_mask1", (self.labels == 1).astype(float))

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.order))

    @classmethod
    def psk(cls, order: int) -> "Constellation":
        """Gray-labeled PSK ring: point m sits at angle 2 pi m / order."""
        _check_order(order, square=False)
        m = np.arange(order)
        points = np.exp(2j * np.pi * m / order)
        labels = _int_to_bits(_gray(m), int(np.log2(order)))
        return cls(kind="psk", order=order, points=points, labels=labels)

    @classmethod
    def qam(cls, order: int) -> "Constellation":
        """Square Gray QAM with odd-integer lattice scaled to unit power."""
        _check_order(order, square=True)
        q = int(np.sqrt(order))
        half = int(np.log2(q))
        beta = 2.0 * (order - 1) / 3.0
        a, b = np.meshgrid(np.arange(q), np.arange(q), indexing="ij")
        a, b = a.ravel(), b.ravel()
        points = ((2 * a - (q - 1)) + 1j * (2 * b - (q - 1))) / np.sqrt(beta)
        labels = np.concatenate(
            [_int_to_bits(_gray(a), half), _int_to_bits(_gray(b), half)], axis=1
        )
        return cls(kind="qam", order=order, points=points, labels=labels)

    def indices_from_bits(self, bits) -> np.ndarray:
        """(..., m) bit array -> point indices."""
        bits = np.asarray(bits)
        m = self.bits_per_symbol
        vals = (bits.astype(np.int64) << np.arange(m - 1, -1, -1)).sum(axis=-1)
        return self._point_of_label[vals]

    def map_bits(self, bits) -> np.ndarray:
        """(..., m) bit array -> complex symbols."""
        return self.points[self.indices_from_bits(bits)]

    def bits_from_indices(self, idx) -> np.ndarray:
        return self.labels[np.asarray(idx)]


def _check_order(order: int, square: bool) -> None:
    if order < 2 or (order & (order - 1)) != 0:
        raise ValueError(f"constellation order must be a power of two, got {order}")
    if square:
        q = int(np.sqrt(order))
        if q * q != order or (int(np.log2(order)) % 2) != 0:
            raise ValueError(f"QAM order must be an even power of two, got {order}")


def diff_encode(data_symbols) -> np.ndarray:
    """Differentially encode along the last axis from an implicit s[0] = 1.

    Returns the data-bearing transmissions s[n] = d[n] * s[n-1]; the unit
    reference symbol is prepended by the caller (it carries no payload and is
    treated as overhead-free).
    """
    d = np.asarray(data_symbols)
    return np.cumprod(d, axis=-1)


def diff_detect(r) -> np.ndarray:
    """Lag-one product decision variable z[n] = r[n] * conj(r[n-1]).

    `r` includes the reference reception, so the output is one shorter along
    the last axis.
    """
    r = np.asarray(r)
    return r[..., 1:] * np.conj(r[..., :-1])


def apply_channel(tx, trace, rho: float, rng, noise_scale: float = 1.0) -> np.ndarray:
    """Faded noisy reception r_k[n] = sqrt(rho) h_k[n] s[n] + w_k[n].

    `tx` has shape (..., N) and `trace` (..., K, N); the symbol stream is
    broadcast across links. noise_scale=0 disables noise (test hook).
    """
    if rho <= 0.0:
        raise ValueError(f"rho must be > 0, got {rho}")
    tx = np.asarray(tx)
    trace = np.asarray(trace)
    clean = np.sqrt(rho) * trace * tx[..., None, :]
    if noise_scale == 0.0:
        return clean
    w = (rng.standard_normal(clean.shape) + 1j * rng.standard_normal(clean.shape)) / np.sqrt(2.0)
    return clean + noise_scale * w


def sc_select(z_links, axis: int = -2) -> np.ndarray:
    """Per-symbol index of the strongest link (ties -> lowest link index)."""
    return np.argmax(np.abs(np.asarray(z_links)), axis=axis)


def combine(z_links, scheme: str, axis: int = -2) -> np.ndarray:
    """Combine per-link decision variables: 'sc' picks the per-symbol strongest
    link, 'mrc' sums across links."""
    z = np.asarray(z_links)
    if scheme == "mrc":
        return z.sum(axis=axis)
    if scheme == "sc":
        idx = sc_select(z, axis=axis)
        return np.take_along_axis(z, np.expand_dims(idx, axis), axis=axis).squeeze(axis)
    raise ValueError(f"combining scheme must be 'sc' or 'mrc', got {scheme!r}")


def mmse_estimate(r_pilot, pilot_symbol, rho: float) -> np.ndarray:
    """Per-link MMSE channel estimate from a single pilot reception."""
    if rho <= 0.0:
        raise ValueError(f"rho must be > 0, got {rho}")
    s = np.asarray(pilot_symbol)
    r = np.asarray(r_pilot)
    return np.conj(s) * r / (np.sqrt(rho) * (1.0 / rho + np.abs(s) ** 2))


def demap_llr(z, gain, noise_var, constellation: Constellation) -> np.ndarray:
    """Per-bit LLRs, positive when bit 0 is more likely.

    Gaussian model z ~ CN(gain * x, noise_var) with a known real gain; both
    `gain` and `noise_var` broadcast against z per symbol. Full log-domain
    sum over the constellation (no max-log shortcut).
    """
    z = np.asarray(z)
    gain = np.asarray(gain, dtype=float)
    noise_var = np.asarray(noise_var, dtype=float)
    pts = constellation.points
    d = z[..., None] - gain[..., None] * pts
    metric = -(d.real**2 + d.imag**2) / noise_var[..., None]
    mx = metric.max(axis=-1, keepdims=True)
    e = np.exp(metric - mx)
    # subset log-sum-exp over the bit partitions via two mask matmuls; a
    # fully underflowed partition would give an infinite LLR, capped so the
    # decoder path metrics stay finite
    with np.errstate(divide="ignore"):
        llr = np.log(e @ constellation._mask0) - np.log(e @ constellation._mask1)
    return np.clip(llr, -_LLR_CAP, _LLR_CAP)
