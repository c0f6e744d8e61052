"""Scalar numerics shared by the analysis stack.

Gaussian tail utilities, the zeroth-order Bessel function used by the Jakes
autocorrelation model, dB conversions, and a mergeable streaming moment
accumulator for Monte-Carlo estimates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special

__all__ = [
    "q_func",
    "q_inv",
    "bessel_j0",
    "db_to_linear",
    "linear_to_db",
    "MomentAccumulator",
]


def q_func(x):
    """Gaussian tail probability Q(x) = P[N(0,1) > x].

    Evaluated through erfc for stability deep in the tail; saturates at 0/1
    only at floating-point underflow (Q(10) is still ~7.6e-24, not 0).
    """
    x = np.asarray(x, dtype=float)
    out = 0.5 * special.erfc(x / np.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


def q_inv(eps):
    """Inverse of q_func on (0, 1).

    Raises ValueError outside the open unit interval; q_inv(q_func(x)) == x
    to ~1e-10 over |x| <= 6.
    """
    e = np.asarray(eps, dtype=float)
    if np.any(~np.isfinite(e)) or np.any(e <= 0.0) or np.any(e >= 1.0):
        raise ValueError(f"q_inv requires eps in (0, 1), got {eps!r}")
    out = special.ndtri(1.0 - e)
    # ndtri(1-e) loses precision for tiny e; isf-style evaluation via the
    # symmetric branch keeps the round trip tight in both tails.
    out = np.where(e < 0.5, -special.ndtri(e), out)
    return float(out) if out.ndim == 0 else out


def bessel_j0(x):
    """Bessel function of the first kind, order zero."""
    x = np.asarray(x, dtype=float)
    out = special.j0(x)
    return float(out) if out.ndim == 0 else out


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(lin):
    return 10.0 * np.log10(np.asarray(lin, dtype=float))


@dataclass
class MomentAccumulator:
    """Streaming central moments with exact parallel merge.

    Tracks count/mean and the 2nd..4th central moment sums (Pebay update
    formulas, exact under merge), plus a running absolute third moment used
    only as a Berry-Esseen style diagnostic. The absolute third moment is a
    streaming proxy: batches are summed without re-centering on merge, which
    is accurate to a few percent for the sample sizes used here.
    """

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    m3: float = field(default=0.0, repr=False)
    m4: float = field(default=0.0, repr=False)
    m3abs: float = 0.0

    def update(self, x: float) -> None:
        """Add a single sample."""
        self.merge(MomentAccumulator(count=1, mean=float(x)))

    def add_samples(self, xs) -> None:
        """Add a batch of samples (vectorized; exact for mean/m2/m3/m4)."""
        xs = np.asarray(xs, dtype=float).ravel()
        if xs.size == 0:
            return
        mean = float(xs.mean())
        d = xs - mean
        batch = MomentAccumulator(
            count=xs.size,
            mean=mean,
            m2=float(np.dot(d, d)),
            m3=float(np.sum(d**3)),
            m4=float(np.sum(d**4)),
            m3abs=float(np.sum(np.abs(d) ** 3)),
        )
        self.merge(batch)

    def merge(self, other: "MomentAccumulator") -> None:
        """Fold another accumulator into this one (associative, commutative)."""
        if other.count == 0:
            return
        if self.count == 0:
            self.count = other.count
            self.mean = other.mean
            self.m2, self.m3, self.m4 = other.m2, other.m3, other.m4
            self.m3abs = other.m3abs
            return
        na, nb = float(self.count), float(other.count)
        n = na + nb
        d = other.mean - self.mean
        m2a, m2b = self.m2, other.m2
        m3a, m3b = self.m3, other.m3
        self.m4 = (
            self.m4
            + other.m4
            + d**4 * na * nb * (na * na - na * nb + nb * nb) / n**3
            + 6.0 * d * d * (na * na * m2b + nb * nb * m2a) / (n * n)
            + 4.0 * d * (na * m3b - nb * m3a) / n
        )
        self.m3 = (
            m3a
            + m3b
            + d**3 * na * nb * (na - nb) / (n * n)
            + 3.0 * d * (na * m2b - nb * m2a) / n
        )
        self.m2 = m2a + m2b + d * d * na * nb / n
        self.mean += d * nb / n
        self.m3abs += other.m3abs
        self.count += other.count

    @property
    def variance(self) -> float:
        """Population variance (m2 / count)."""
        if self.count < 1:
            raise ValueError("variance of an empty accumulator")
        return max(self.m2 / self.count, 0.0)

    @property
    def third_abs_moment(self) -> float:
        if self.count < 1:
            raise ValueError("moment of an empty accumulator")
        return self.m3abs / self.count

    @property
    def fourth_central_moment(self) -> float:
        if self.count < 1:
            raise ValueError("moment of an empty accumulator")
        return self.m4 / self.count

    def std_err_mean(self) -> float:
        return float(np.sqrt(self.variance / self.count))

    def std_err_variance(self) -> float:
        """Asymptotic standard error of the variance estimate."""
        v = self.variance
        return float(np.sqrt(max(self.fourth_central_moment - v * v, 0.0) / self.count))
