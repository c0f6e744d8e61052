"""Time-varying Rayleigh fading model and multi-connectivity gain laws.

The per-link channel is a first-order autoregressive (AR(1)) complex Gaussian
process with Jakes autocorrelation; multi-connectivity combines K independent
links by selection (SC) or maximal-ratio (MRC) combining. Closed-form
effective-SNR maps for differential detection and for MMSE pilot estimation
live here too, since they are properties of the channel model rather than of
any particular receiver implementation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal, special

from .numerics import bessel_j0

__all__ = [
    "jakes_alpha",
    "pilot_drift",
    "FadingParams",
    "derive_rng",
    "ar1_trace",
    "sample_combined_gain",
    "combined_gain_pdf",
    "combined_gain_cdf",
    "effective_snr_dpsk",
    "effective_snr_mmse",
    "mmse_estimate_variance",
    "mmse_error_variance",
    "measure_dpsk_effective_snr",
]


def jakes_alpha(fd_ts: float) -> float:
    """Per-symbol AR(1) coefficient J0(2 pi fd Ts), clamped at 0.

    The clamp only applies to the symbol-rate coefficient (negative values
    would make the AR recursion oscillatory for no physical reason at the
    extreme normalized Dopplers where J0 goes negative).
    """
    if fd_ts < 0.0:
        raise ValueError(f"normalized Doppler must be >= 0, got {fd_ts}")
    return max(bessel_j0(2.0 * np.pi * fd_ts), 0.0)


def pilot_drift(fd_ts: float, upsilon: int) -> float:
    """Channel autocorrelation over a lag of `upsilon` symbols, J0(2 pi fd Ts u).

    Not clamped: only its square enters the pilot effective-SNR law.
    """
    if fd_ts < 0.0:
        raise ValueError(f"normalized Doppler must be >= 0, got {fd_ts}")
    if upsilon < 0:
        raise ValueError(f"pilot lag must be >= 0, got {upsilon}")
    return bessel_j0(2.0 * np.pi * fd_ts * upsilon)


@dataclass(frozen=True)
class FadingParams:
    """AR(1) fading description for K independent links."""

    alpha: float
    fd_ts: float
    links: int = 1

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.links < 1:
            raise ValueError(f"links must be >= 1, got {self.links}")

    @classmethod
    def from_doppler(cls, fd_ts: float, links: int = 1) -> "FadingParams":
        return cls(alpha=jakes_alpha(fd_ts), fd_ts=fd_ts, links=links)


def derive_rng(seed: int, *key: int) -> np.random.Generator:
    """Deterministic independent stream for a (worker, link, ...) key tuple.

    Streams derived from the same master seed with different keys are
    statistically independent; the same (seed, key) always yields the same
    stream regardless of how many other streams exist.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def ar1_trace(params: FadingParams, length: int, rng, trials: int | None = None):
    """Stationary AR(1) complex-Gaussian fading traces.

    h[n] = alpha * h[n-1] + sqrt(1-alpha^2) * e[n] with h ~ CN(0,1) for every
    n (stationary initialization). Returns shape (links, length), or
    (trials, links, length) when `trials` is given.
    """
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    a = params.alpha
    squeeze = trials is None
    t = 1 if trials is None else int(trials)
    shape = (t, params.links, length)
    e = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    h0 = (rng.standard_normal(shape[:2]) + 1j * rng.standard_normal(shape[:2])) / np.sqrt(2.0)
    if a >= 1.0:
        h = np.broadcast_to(h0[..., None], shape).copy()
    else:
        s = np.sqrt(1.0 - a * a)
        zi = (a * h0)[..., None]
        h, _ = signal.lfilter([s], [1.0, -a], e, axis=-1, zi=zi)
    return h[0] if squeeze else h


def sample_combined_gain(scheme: str, k: int, size, rng):
    """Draw combined gains: max (SC) or sum (MRC) of K unit-mean exponentials."""
    _check_combining(scheme, k)
    if scheme == "sc":
        shape = (size,) if np.isscalar(size) else tuple(size)
        return rng.standard_exponential(size=shape + (k,)).max(axis=-1)
    return rng.standard_gamma(shape=float(k), size=size)


def combined_gain_pdf(scheme: str, k: int, theta):
    """Density of the combined gain; zero for theta < 0."""
    _check_combining(scheme, k)
    theta = np.asarray(theta, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if scheme == "sc":
            pdf = k * (1.0 - np.exp(-theta)) ** (k - 1) * np.exp(-theta)
        else:
            pdf = theta ** (k - 1) * np.exp(-theta) / special.factorial(k - 1)
    return np.where(theta >= 0.0, pdf, 0.0)


def combined_gain_cdf(scheme: str, k: int, theta):
    _check_combining(scheme, k)
    theta = np.asarray(theta, dtype=float)
    t = np.maximum(theta, 0.0)
    if scheme == "sc":
        cdf = (1.0 - np.exp(-t)) ** k
    else:
        cdf = special.gammainc(k, t)
    return np.where(theta >= 0.0, cdf, 0.0)


def _check_combining(scheme: str, k: int) -> None:
    if scheme not in ("sc", "mrc"):
        raise ValueError(f"combining scheme must be 'sc' or 'mrc', got {scheme!r}")
    if k < 1:
        raise ValueError(f"number of links must be >= 1, got {k}")


def effective_snr_dpsk(rho: float, alpha: float, theta):
    """Post-detection SNR of differential detection over AR(1) fading.

    rho * alpha^2 * theta / ((1 - alpha^2) * rho + (1 + alpha^2)); at
    alpha = 1 this is rho * theta / 2, the classical 3 dB differential loss.
    """
    if rho <= 0.0:
        raise ValueError(f"rho must be > 0, got {rho}")
    theta = np.asarray(theta, dtype=float)
    denom = (1.0 - alpha * alpha) * rho + (1.0 + alpha * alpha)
    out = rho * alpha * alpha * theta / denom
    return float(out) if out.ndim == 0 else out


def effective_snr_mmse(rho: float, alpha_hat: float, theta_hat):
    """Effective SNR of coherent detection from a stale MMSE pilot estimate.

    (1 + rho) * rho * alpha_hat^2 * theta_hat / ((1 + rho)^2 - (rho * alpha_hat)^2)
    where theta_hat is the combined squared magnitude of the estimates.
    """
    if rho <= 0.0:
        raise ValueError(f"rho must be > 0, got {rho}")
    denom = (1.0 + rho) ** 2 - (rho * alpha_hat) ** 2
    # |alpha_hat| <= 1 makes the denominator >= 1 + 2 rho > 0.
    assert denom > 0.0, (rho, alpha_hat)
    theta_hat = np.asarray(theta_hat, dtype=float)
    out = (1.0 + rho) * rho * alpha_hat * alpha_hat * theta_hat / denom
    return float(out) if out.ndim == 0 else out


def mmse_estimate_variance(rho: float) -> float:
    """Variance of the MMSE channel estimate itself: rho / (1 + rho)."""
    if rho <= 0.0:
        raise ValueError(f"rho must be > 0, got {rho}")
    return rho / (1.0 + rho)


def mmse_error_variance(rho: float) -> float:
    """Variance of the MMSE estimation error: 1 / (1 + rho)."""
    if rho <= 0.0:
        raise ValueError(f"rho must be > 0, got {rho}")
    return 1.0 / (1.0 + rho)


def measure_dpsk_effective_snr(alpha: float, rho: float, rng,
                               trials: int = 2048, length: int = 512) -> float:
    """Monte-Carlo post-detection SNR of known-symbol differential transmission.

    Sends a known unit sequence through fresh AR(1) traces, forms the
    innovation r[n] - alpha * r[n-1], and returns the ratio of measured
    signal strength (alpha^2 * signal power of the delayed reference) to the
    measured innovation variance. Converges to effective_snr_dpsk(rho, alpha, 1).
    """
    params = FadingParams(alpha=alpha, fd_ts=0.0, links=1)
    h = ar1_trace(params, length, rng, trials=trials)[:, 0, :]
    w = (rng.standard_normal(h.shape) + 1j * rng.standard_normal(h.shape)) / np.sqrt(2.0)
    r = np.sqrt(rho) * h + w
    sig = alpha * alpha * (np.mean(np.abs(r[:, :-1]) ** 2) - 1.0)
    resid = r[:, 1:] - alpha * r[:, :-1]
    noise = np.mean(np.abs(resid) ** 2)
    return float(sig / noise)
