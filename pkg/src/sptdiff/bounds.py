"""Non-asymptotic converse and achievability bounds on block error rate.

Both bounds are evaluated by Monte-Carlo over block information densities,
i.e. sums of N independent per-use densities under the scheme's effective-SNR
law (the same product-channel substitution the analysis uses). The converse
is the information-spectrum lower bound maximized over a threshold grid; the
achievability side is the dependence-testing upper bound, evaluated entirely
in base 2. Both consume the same sample set so their gap is not inflated by
independent sampling noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fbl import ChannelLaw, sample_info_density

__all__ = [
    "BoundEstimate",
    "default_threshold_grid",
    "sample_block_densities",
    "is_lower_bound_from_samples",
    "dt_upper_bound_from_samples",
    "is_lower_bound",
    "dt_upper_bound",
    "evaluate_bounds",
]

_BLOCK_BATCH_USES = 1 << 21  # per-use draws per chunk


@dataclass(frozen=True)
class BoundEstimate:
    value: float
    std_err: float
    n_samples: int
    tail_count: int | None = None

    @property
    def low_tail(self) -> bool:
        """True when fewer than 100 samples fell below the optimizing
        threshold, i.e. the converse estimate rests on a thin tail."""
        return self.tail_count is not None and self.tail_count < 100


def default_threshold_grid(payload_bits: int, n_uses: int) -> np.ndarray:
    """log2(beta) grid: 64 points spanning [L-20, L+5] plus the canonical
    beta = 2^L / sqrt(N)."""
    grid = np.linspace(payload_bits - 20.0, payload_bits + 5.0, 64)
    canonical = payload_bits - 0.5 * math.log2(n_uses)
    return np.unique(np.append(grid, canonical))


def sample_block_densities(law: ChannelLaw, n_uses: int, n_blocks: int, rng) -> np.ndarray:
    """Draw block densities: per-block sums of n_uses fresh per-use densities."""
    if n_uses < 1:
        raise ValueError(f"blocklength must be >= 1, got {n_uses}")
    out = np.empty(int(n_blocks))
    step = max(_BLOCK_BATCH_USES // n_uses, 1)
    done = 0
    while done < n_blocks:
        b = min(step, int(n_blocks) - done)
        out[done:done + b] = sample_info_density(law, (b, n_uses), rng).sum(axis=1)
        done += b
    return out


def is_lower_bound_from_samples(block_density, payload_bits: int,
                                grid_log2=None, n_uses: int | None = None) -> BoundEstimate:
    """Converse: sup over beta of P[i_block <= log2 beta] - beta / 2^L."""
    d = np.sort(np.asarray(block_density, dtype=float))
    n = d.size
    if grid_log2 is None:
        if n_uses is None:
            raise ValueError("need n_uses to build the default threshold grid")
        grid_log2 = default_threshold_grid(payload_bits, n_uses)
    grid_log2 = np.asarray(grid_log2, dtype=float)
    below = np.searchsorted(d, grid_log2, side="right")
    p = below / n
    values = p - np.exp2(grid_log2 - payload_bits)
    k = int(np.argmax(values))
    p_star = p[k]
    se = math.sqrt(max(p_star * (1.0 - p_star), 0.0) / n)
    return BoundEstimate(
        value=float(max(values[k], 0.0)),
        std_err=se,
        n_samples=n,
        tail_count=int(below[k]),
    )


def dt_upper_bound_from_samples(block_density, payload_bits: int) -> BoundEstimate:
    """Achievability: E[2^-(i_block - log2((2^L - 1)/2))^+]."""
    d = np.asarray(block_density, dtype=float)
    # log2((2^L - 1)/2) without forming 2^L for large L
    tau = payload_bits - 1.0 + math.log1p(-2.0 ** (-min(payload_bits, 1000))) / math.log(2.0)
    summand = np.exp2(-np.maximum(d - tau, 0.0))
    n = d.size
    return BoundEstimate(
        value=float(summand.mean()),
        std_err=float(summand.std(ddof=1) / math.sqrt(n)) if n > 1 else float("nan"),
        n_samples=n,
    )


def is_lower_bound(law: ChannelLaw, n_uses: int, payload_bits: int, n_blocks: int,
                   rng, grid_log2=None) -> BoundEstimate:
    d = sample_block_densities(law, n_uses, n_blocks, rng)
    return is_lower_bound_from_samples(d, payload_bits, grid_log2, n_uses)


def dt_upper_bound(law: ChannelLaw, n_uses: int, payload_bits: int, n_blocks: int,
                   rng) -> BoundEstimate:
    d = sample_block_densities(law, n_uses, n_blocks, rng)
    return dt_upper_bound_from_samples(d, payload_bits)


def evaluate_bounds(law: ChannelLaw, n_uses: int, payload_bits: int, n_blocks: int,
                    rng, grid_log2=None):
    """Both bounds from one shared set of block samples."""
    d = sample_block_densities(law, n_uses, n_blocks, rng)
    lo = is_lower_bound_from_samples(d, payload_bits, grid_log2, n_uses)
    hi = dt_upper_bound_from_samples(d, payload_bits)
    return lo, hi
