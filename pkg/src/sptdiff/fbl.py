"""Finite-blocklength rate and error analysis over ergodic fading laws.

The analytic route: draw the combined gain per channel use, map it through the
scheme's effective-SNR law (perfect CSI, differential detection, or stale
MMSE pilot estimate), sample the per-use information density under that SNR,
and feed the estimated mutual information / dispersion into the normal
approximation. Gaussian inputs use the closed per-gain expressions instead
of density sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import (
    effective_snr_dpsk,
    effective_snr_mmse,
    jakes_alpha,
    mmse_estimate_variance,
    pilot_drift,
    sample_combined_gain,
)
from .modem import Constellation
from .numerics import MomentAccumulator, q_func, q_inv

__all__ = [
    "ChannelLaw",
    "CapacityDispersion",
    "scheme_law",
    "info_density",
    "sample_info_density",
    "estimate_capacity_dispersion",
    "gaussian_capacity_dispersion",
    "normal_approx_rate",
    "normal_approx_bler",
    "corollary_rate_bler",
    "max_payload",
]

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class ChannelLaw:
    """Per-channel-use law: input constellation, CSI model, combined gain.

    `constellation=None` selects Gaussian inputs. For csi='dpsk', `alpha` is
    the lag-one fading correlation; for csi='mmse', `alpha_hat` is the
    pilot-to-data correlation over the worst-case lag and the combined gain
    is scaled by the estimate variance rho/(1+rho) (the estimate, not the
    true channel, is what the receiver sees).
    """

    rho: float
    constellation: Constellation | None = None
    combining: str = "mrc"
    links: int = 1
    csi: str = "perfect"
    alpha: float = 1.0
    alpha_hat: float = 1.0

    def __post_init__(self):
        if self.rho <= 0.0:
            raise ValueError(f"rho must be > 0, got {self.rho}")
        if self.csi not in ("perfect", "dpsk", "mmse"):
            raise ValueError(f"unknown csi model {self.csi!r}")

    def effective_snr(self, theta):
        if self.csi == "perfect":
            return self.rho * np.asarray(theta, dtype=float)
        if self.csi == "dpsk":
            return effective_snr_dpsk(self.rho, self.alpha, theta)
        theta_hat = mmse_estimate_variance(self.rho) * np.asarray(theta, dtype=float)
        return effective_snr_mmse(self.rho, self.alpha_hat, theta_hat)

    def sample_effective_snr(self, size, rng):
        theta = sample_combined_gain(self.combining, self.links, size, rng)
        return self.effective_snr(theta)

    @property
    def max_rate(self) -> float | None:
        if self.constellation is None:
            return None
        return float(self.constellation.bits_per_symbol)


def scheme_law(scheme: str, m: int, rho: float, links: int = 1, combining: str = "mrc",
               fd_ts: float = 0.0, upsilon: int = 1) -> ChannelLaw:
    """Build the per-use law for a named transmission scheme.

    'dpsk' and 'psk'/'qam' (perfect CSI) take the constellation order `m`;
    'pilot_psk'/'pilot_qam' add the stale-MMSE CSI model at lag `upsilon`;
    'gaussian' ignores `m`.
    """
    if scheme == "gaussian":
        return ChannelLaw(rho=rho, combining=combining, links=links)
    if scheme == "psk":
        return ChannelLaw(rho=rho, constellation=Constellation.psk(m),
                          combining=combining, links=links)
    if scheme == "qam":
        return ChannelLaw(rho=rho, constellation=Constellation.qam(m),
                          combining=combining, links=links)
    if scheme == "dpsk":
        return ChannelLaw(rho=rho, constellation=Constellation.psk(m),
                          combining=combining, links=links, csi="dpsk",
                          alpha=jakes_alpha(fd_ts))
    if scheme in ("pilot_psk", "pilot_qam"):
        const = Constellation.psk(m) if scheme == "pilot_psk" else Constellation.qam(m)
        return ChannelLaw(rho=rho, constellation=const, combining=combining,
                          links=links, csi="mmse",
                          alpha_hat=pilot_drift(fd_ts, upsilon))
    raise ValueError(f"unknown scheme {scheme!r}")


def info_density(x, y, h, rho: float, constellation: Constellation):
    """Per-use information density (bits) of uniform inputs on the
    coherent channel y = sqrt(rho) h x + w, w ~ CN(0,1)."""
    x = np.asarray(x)
    y = np.asarray(y)
    h = np.asarray(h)
    pts = constellation.points
    d = y[..., None] - np.sqrt(rho) * h[..., None] * pts
    metric = -(d.real**2 + d.imag**2)
    dx = y - np.sqrt(rho) * h * x
    metric_x = -(dx.real**2 + dx.imag**2)
    mx = np.maximum(metric.max(axis=-1), metric_x)
    lse = np.log(np.exp(metric - mx[..., None]).sum(axis=-1)) + mx
    out = constellation.bits_per_symbol - (lse - metric_x) / _LN2
    return float(out) if out.ndim == 0 else out


def sample_info_density(law: ChannelLaw, size, rng) -> np.ndarray:
    """Draw per-use information densities under `law` (uniform inputs,
    fresh combined gain per use)."""
    const = law.constellation
    if const is None:
        raise ValueError("density sampling needs a discrete constellation")
    snr = law.sample_effective_snr(size, rng)
    amp = np.sqrt(snr)
    j = rng.integers(0, const.order, size=size)
    w = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)
    y = amp * const.points[j] + w
    d = y[..., None] - amp[..., None] * const.points
    metric = -(d.real**2 + d.imag**2)
    metric_x = -(w.real**2 + w.imag**2)  # y - amp*x[j] is exactly w
    mx = np.maximum(metric.max(axis=-1), metric_x)
    lse = np.log(np.exp(metric - mx[..., None]).sum(axis=-1)) + mx
    return const.bits_per_symbol - (lse - metric_x) / _LN2


@dataclass(frozen=True)
class CapacityDispersion:
    capacity: float
    dispersion: float
    third_abs_moment: float
    n_samples: int
    std_err_capacity: float
    std_err_dispersion: float


_BATCH = 1 << 16


def estimate_capacity_dispersion(law: ChannelLaw, n_samples: int, rng,
                                 batch: int = _BATCH) -> CapacityDispersion:
    """Monte-Carlo mutual information and dispersion of the per-use density."""
    acc = MomentAccumulator()
    left = int(n_samples)
    while left > 0:
        b = min(batch, left)
        acc.add_samples(sample_info_density(law, b, rng))
        left -= b
    return CapacityDispersion(
        capacity=acc.mean,
        dispersion=acc.variance,
        third_abs_moment=acc.third_abs_moment,
        n_samples=acc.count,
        std_err_capacity=acc.std_err_mean(),
        std_err_dispersion=acc.std_err_variance(),
    )


def gaussian_capacity_dispersion(law: ChannelLaw, n_samples: int, rng,
                                 batch: int = _BATCH) -> CapacityDispersion:
    """Gaussian-input capacity E[log2(1+s)] and dispersion
    Var[log2(1+s)] + 1 - E[1/(1+s)]^2 over the law's effective SNR s."""
    acc_c = MomentAccumulator()
    acc_g = MomentAccumulator()
    v_batches = []
    left = int(n_samples)
    while left > 0:
        b = min(batch, left)
        s = law.sample_effective_snr(b, rng)
        c = np.log2(1.0 + s)
        g = 1.0 / (1.0 + s)
        acc_c.add_samples(c)
        acc_g.add_samples(g)
        v_batches.append(float(np.var(c) + 1.0 - np.mean(g) ** 2))
        left -= b
    v = acc_c.variance + 1.0 - acc_g.mean**2
    if len(v_batches) > 1:
        se_v = float(np.std(v_batches, ddof=1) / np.sqrt(len(v_batches)))
    else:
        se_v = acc_c.std_err_variance()
    return CapacityDispersion(
        capacity=acc_c.mean,
        dispersion=v,
        third_abs_moment=acc_c.third_abs_moment,
        n_samples=acc_c.count,
        std_err_capacity=acc_c.std_err_mean(),
        std_err_dispersion=se_v,
    )


def normal_approx_rate(capacity: float, dispersion: float, n: int, eps: float,
                       max_rate: float | None = None) -> float:
    """Achievable rate C - sqrt(V/n) Qinv(eps) + log2(n)/(2n), clamped to
    [0, max_rate]."""
    if n < 1:
        raise ValueError(f"blocklength must be >= 1, got {n}")
    r = capacity - math.sqrt(max(dispersion, 0.0) / n) * q_inv(eps) + math.log2(n) / (2 * n)
    r = max(r, 0.0)
    if max_rate is not None:
        r = min(r, max_rate)
    return r


def normal_approx_bler(capacity: float, dispersion: float, n: int, rate: float) -> float:
    """Predicted block error rate at rate `rate` (bits per use)."""
    if n < 1:
        raise ValueError(f"blocklength must be >= 1, got {n}")
    margin = capacity - rate + math.log2(n) / (2 * n)
    if dispersion <= 0.0:
        return 1.0 if margin < 0.0 else 0.0
    return float(q_func(math.sqrt(n / dispersion) * margin))


def corollary_rate_bler(law: ChannelLaw, n_data: int, payload_bits: int, eps: float,
                        n_samples: int, rng):
    """Rate at target eps and BLER at rate payload/n_data for the law.

    Dispatches to density sampling for discrete inputs and to the closed
    per-gain form for Gaussian inputs; `n_data` is the data-bearing
    blocklength (pilots already deducted by the caller).
    """
    if law.constellation is None:
        cd = gaussian_capacity_dispersion(law, n_samples, rng)
    else:
        cd = estimate_capacity_dispersion(law, n_samples, rng)
    rate = normal_approx_rate(cd.capacity, cd.dispersion, n_data, eps, law.max_rate)
    bler = normal_approx_bler(cd.capacity, cd.dispersion, n_data, payload_bits / n_data)
    return rate, bler, cd


def max_payload(law: ChannelLaw, n_data: int, eps: float, n_samples: int, rng) -> int:
    """Largest payload (bits) the normal approximation supports at eps."""
    if law.constellation is None:
        cd = gaussian_capacity_dispersion(law, n_samples, rng)
    else:
        cd = estimate_capacity_dispersion(law, n_samples, rng)
    rate = normal_approx_rate(cd.capacity, cd.dispersion, n_data, eps, law.max_rate)
    return max(int(math.floor(n_data * rate)), 0)
