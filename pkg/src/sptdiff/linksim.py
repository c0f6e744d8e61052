"""End-to-end coded waveform simulation over AR(1) fading.

Each trial draws fresh fading traces per link, runs CRC-aided polar encoding,
modulation (differential or pilot-assisted), detection, combining, soft
demapping and list decoding, and scores a block error against the source
bits. Trials are organized in fixed-size batches with one deterministically
derived RNG stream per batch, so results are byte-identical for a given
(seed, worker count) and the early-stopping rule is a pure function of the
batch-indexed error sequence.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bounds as bounds_mod
from . import fbl
from .channel import FadingParams, ar1_trace, derive_rng, jakes_alpha
from .modem import (
    Constellation,
    apply_channel,
    demap_llr,
    diff_detect,
    diff_encode,
    mmse_estimate,
    sc_select,
)
from .polar import PolarCode

__all__ = [
    "SimScenario",
    "build_scenario",
    "BlerEstimate",
    "wilson_interval",
    "rho_from_snr_db",
    "net_rate",
    "packet_energy",
    "assert_fair_comparison",
    "simulate_batch",
    "run_trial",
    "estimate_bler",
    "sweep",
]

_Z95 = 1.959963984540054

# spawn-key tags keeping analytic / bounds / simulation streams apart
_KEY_ANALYTIC = 1
_KEY_BOUNDS = 2
_KEY_SIM = 3


@dataclass(frozen=True)
class SimScenario:
    """A fully derived transmission scenario (one modulation+code config)."""

    scheme: str
    m: int
    links: int
    combining: str
    fd_ts: float
    upsilon: int
    coded_bits: int      # J, bits over the air
    info_bits: int       # L
    n_symbols: int       # air symbols incl. pilots (DPSK reference excluded)
    n_data: int          # data-bearing symbols
    list_size: int = 32
    design_snr_db: float = 1.0
    code: PolarCode = field(repr=False, compare=False, default=None)
    constellation: Constellation = field(repr=False, compare=False, default=None)

    @property
    def alpha(self) -> float:
        return jakes_alpha(self.fd_ts)

    @property
    def n_pilots(self) -> int:
        return self.n_symbols - self.n_data

    def law(self, rho: float) -> fbl.ChannelLaw:
        """Per-use analysis law matching this scenario."""
        return fbl.scheme_law(self.scheme, self.m, rho, links=self.links,
                              combining=self.combining, fd_ts=self.fd_ts,
                              upsilon=self.upsilon)


def build_scenario(scheme: str, m: int, packet_bytes: int, rc: float, links: int = 1,
                   combining: str = "mrc", fd_ts: float = 0.0, upsilon: int = 1,
                   list_size: int = 32, design_snr_db: float = 1.0) -> SimScenario:
    """Derive and cross-check blocklengths from the packet description.

    The over-the-air packet is packet_bytes*8 coded bits; info bits are
    J * rc; the symbol count follows from the constellation order, plus one
    pilot per `upsilon` data symbols for the pilot schemes.
    """
    if scheme not in ("dpsk", "pilot_psk", "pilot_qam"):
        raise ValueError(f"unknown simulation scheme {scheme!r}")
    coded = packet_bytes * 8
    info = coded * rc
    if abs(info - round(info)) > 1e-9:
        raise ValueError(f"J*rc = {info} is not an integer")
    info = int(round(info))
    bps = int(math.log2(m))
    if m != 1 << bps:
        raise ValueError(f"constellation order must be a power of two, got {m}")
    if coded % bps:
        raise ValueError(f"{coded} coded bits do not fill {bps}-bit symbols")
    n_data = coded // bps
    if scheme == "dpsk":
        n_symbols = n_data
        const = Constellation.psk(m)
    else:
        if upsilon < 1:
            raise ValueError(f"pilot spacing must be >= 1, got {upsilon}")
        if n_data % upsilon:
            raise ValueError(f"{n_data} data symbols not divisible by upsilon={upsilon}")
        n_symbols = n_data + n_data // upsilon
        const = Constellation.psk(m) if scheme == "pilot_psk" else Constellation.qam(m)
    code = PolarCode(coded, info, design_snr_db=design_snr_db)
    return SimScenario(scheme=scheme, m=m, links=links, combining=combining,
                       fd_ts=fd_ts, upsilon=upsilon, coded_bits=coded,
                       info_bits=info, n_symbols=n_symbols, n_data=n_data,
                       list_size=list_size, design_snr_db=design_snr_db,
                       code=code, constellation=const)


def rho_from_snr_db(scn: SimScenario, snr_db: float, unit: str = "ebn0_db") -> float:
    """Symbol SNR from the grid value; Eb/N0 conversion conserves packet
    energy (all n_symbols transmissions at rho, L info bits)."""
    lin = 10.0 ** (snr_db / 10.0)
    if unit == "rho_db":
        return lin
    if unit == "ebn0_db":
        return lin * scn.info_bits / scn.n_symbols
    raise ValueError(f"unknown SNR unit {unit!r}")


def net_rate(scn: SimScenario) -> float:
    return scn.info_bits / scn.n_symbols


def packet_energy(scn: SimScenario, rho: float) -> float:
    return scn.n_symbols * rho


def assert_fair_comparison(a: SimScenario, b: SimScenario) -> None:
    """Refuse comparisons whose net rate or packet energy differ (computed
    here, not trusted from the configs)."""
    if a.n_symbols != b.n_symbols or a.info_bits != b.info_bits:
        raise ValueError(
            "unfair comparison: "
            f"{a.scheme} carries {a.info_bits} bits over {a.n_symbols} symbols, "
            f"{b.scheme} carries {b.info_bits} bits over {b.n_symbols} symbols"
        )


# waveform pipeline --------------------------------------------------------


def _dpsk_llrs(scn: SimScenario, rho: float, d: np.ndarray, rng,
               noise_scale: float = 1.0) -> np.ndarray:
    batch = d.shape[0]
    params = FadingParams(alpha=scn.alpha, fd_ts=scn.fd_ts, links=scn.links)
    tx = np.concatenate([np.ones((batch, 1), dtype=complex), diff_encode(d)], axis=-1)
    h = ar1_trace(params, scn.n_symbols + 1, rng, trials=batch)
    r = apply_channel(tx, h, rho, rng, noise_scale=noise_scale)
    z_links = diff_detect(r)
    g_links = np.abs(r[..., :-1]) ** 2
    if scn.combining == "mrc":
        z = z_links.sum(axis=1)
        g = g_links.sum(axis=1)
    else:
        kidx = sc_select(z_links, axis=1)[:, None, :]
        z = np.take_along_axis(z_links, kidx, axis=1)[:, 0, :]
        g = np.take_along_axis(g_links, kidx, axis=1)[:, 0, :]
    alpha = scn.alpha
    sigma2 = (1.0 - alpha * alpha) * rho + (1.0 + alpha * alpha)
    gain = alpha * g
    noise_var = np.maximum(sigma2 * g, 1e-300)
    return demap_llr(z, gain, noise_var, scn.constellation)


def _pilot_llrs(scn: SimScenario, rho: float, d: np.ndarray, rng,
                noise_scale: float = 1.0) -> np.ndarray:
    batch = d.shape[0]
    params = FadingParams(alpha=scn.alpha, fd_ts=scn.fd_ts, links=scn.links)
    period = scn.upsilon + 1
    pilot_pos = np.arange(scn.n_pilots) * period
    mask = np.ones(scn.n_symbols, dtype=bool)
    mask[pilot_pos] = False
    data_pos = np.nonzero(mask)[0]
    tx = np.ones((batch, scn.n_symbols), dtype=complex)
    tx[:, data_pos] = d
    h = ar1_trace(params, scn.n_symbols, rng, trials=batch)
    r = apply_channel(tx, h, rho, rng, noise_scale=noise_scale)
    h_hat = mmse_estimate(r[:, :, pilot_pos], 1.0, rho)
    blk = data_pos // period
    hh = h_hat[:, :, blk]
    rd = r[:, :, data_pos]
    if scn.combining == "mrc":
        z = (np.conj(hh) * rd).sum(axis=1)
        strength = (np.abs(hh) ** 2).sum(axis=1)
    else:
        kidx = np.argmax(np.abs(hh), axis=1)[:, None, :]
        z = np.take_along_axis(np.conj(hh) * rd, kidx, axis=1)[:, 0, :]
        strength = np.take_along_axis(np.abs(hh) ** 2, kidx, axis=1)[:, 0, :]
    # receiver treats the estimate as the true channel and noise as unit
    gain = np.sqrt(rho) * strength
    noise_var = np.maximum(strength, 1e-300)
    return demap_llr(z, gain, noise_var, scn.constellation)


def simulate_batch(scn: SimScenario, rho: float, batch: int, rng,
                   noise_scale: float = 1.0) -> np.ndarray:
    """Run `batch` independent coded trials; returns per-trial error flags.

    `noise_scale=0` disables receiver noise (fading self-noise remains),
    which pins the whole chain for sanity checks."""
    bps = scn.constellation.bits_per_symbol
    info = rng.integers(0, 2, size=(batch, scn.info_bits), dtype=np.int8)
    coded = scn.code.encode_info(info)
    idx = scn.constellation.indices_from_bits(coded.reshape(batch, scn.n_data, bps))
    d = scn.constellation.points[idx]
    if scn.scheme == "dpsk":
        llrs = _dpsk_llrs(scn, rho, d, rng, noise_scale)
    else:
        llrs = _pilot_llrs(scn, rho, d, rng, noise_scale)
    llrs = llrs.reshape(batch, scn.coded_bits)
    errors = np.empty(batch, dtype=bool)
    for b in range(batch):
        dec, _ = scn.code.decode(llrs[b], scn.list_size)
        errors[b] = not np.array_equal(dec, info[b])
    return errors


def run_trial(scn: SimScenario, rho: float, rng, noise_scale: float = 1.0) -> bool:
    """Single end-to-end trial (batch of one)."""
    return bool(simulate_batch(scn, rho, 1, rng, noise_scale)[0])


# BLER estimation ----------------------------------------------------------


@dataclass(frozen=True)
class BlerEstimate:
    errors: int
    trials: int
    stop_errors: int

    @property
    def bler(self) -> float:
        return self.errors / self.trials if self.trials else float("nan")

    @property
    def censored(self) -> bool:
        return self.errors < self.stop_errors

    @property
    def ci95(self) -> tuple[float, float]:
        return wilson_interval(self.errors, self.trials)


def wilson_interval(errors: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    if trials == 0:
        return (0.0, 1.0)
    p = errors / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4 * trials * trials)) / denom
    return (max(center - half, 0.0), min(center + half, 1.0))


_BATCH_TRIALS = 256

_WORKER_SCN: SimScenario | None = None


def _pool_init(scn: SimScenario) -> None:
    global _WORKER_SCN
    _WORKER_SCN = scn


def _pool_batch(args) -> int:
    rho, size, seed, key = args
    rng = derive_rng(seed, *key)
    return int(simulate_batch(_WORKER_SCN, rho, size, rng).sum())


def estimate_bler(scn: SimScenario, rho: float, seed: int, stop_errors: int = 100,
                  max_trials: int = 10_000_000, workers: int = 1,
                  key: tuple[int, ...] = (), batch: int = _BATCH_TRIALS) -> BlerEstimate:
    """Monte-Carlo BLER with early stopping at `stop_errors` block errors.

    Trials run in `batch`-sized chunks; chunk b uses the stream derived from
    (seed, *key, b). Errors accumulate in batch order and the stop decision
    is taken at wave boundaries (`workers` batches per wave), so the result
    is reproducible for a given seed and worker count; overshoot trials in
    the final wave are counted.
    """
    n_batches = math.ceil(max_trials / batch)
    sizes = [min(batch, max_trials - b * batch) for b in range(n_batches)]
    errors = 0
    trials = 0
    if workers <= 1:
        for b in range(n_batches):
            rng = derive_rng(seed, *key, _KEY_SIM, b)
            errors += int(simulate_batch(scn, rho, sizes[b], rng).sum())
            trials += sizes[b]
            if errors >= stop_errors:
                break
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_pool_init,
                                 initargs=(scn,)) as pool:
            for wave in range(0, n_batches, workers):
                idx = range(wave, min(wave + workers, n_batches))
                args = [(rho, sizes[b], seed, key + (_KEY_SIM, b)) for b in idx]
                for b, cnt in zip(idx, pool.map(_pool_batch, args)):
                    errors += cnt
                    trials += sizes[b]
                if errors >= stop_errors:
                    break
    return BlerEstimate(errors=errors, trials=trials, stop_errors=stop_errors)


# full sweep ----------------------------------------------------------------


def sweep(scn: SimScenario, snr_db_grid, seed: int, snr_unit: str = "ebn0_db",
          with_analytic: bool = True, with_bounds: bool = False,
          with_sim: bool = False, density_samples: int = 1_000_000,
          block_samples: int = 1_000_000, stop_errors: int = 100,
          max_trials: int = 10_000_000, workers: int = 1) -> list[dict]:
    """Evaluate the scenario across an SNR grid; one record per point."""
    records = []
    for pt, snr_db in enumerate(snr_db_grid):
        rho = rho_from_snr_db(scn, snr_db, snr_unit)
        rec = {
            "scheme": scn.scheme,
            "M": scn.m,
            "K": scn.links,
            "combining": scn.combining,
            "fdTs": scn.fd_ts,
            "N": scn.n_symbols,
            "L": scn.info_bits,
            "snr_db": float(snr_db),
            "analytic_bler": None,
            "is_bound": None,
            "dt_bound": None,
            "sim_bler": None,
            "sim_errors": None,
            "sim_trials": None,
            "ci_lo": None,
            "ci_hi": None,
            "seed": seed,
            "censored": None,
            "capacity": None,
            "dispersion": None,
        }
        law = scn.law(rho)
        if with_analytic:
            rng = derive_rng(seed, _KEY_ANALYTIC, pt)
            _, bler, cd = fbl.corollary_rate_bler(
                law, scn.n_data, scn.info_bits, 1e-5, density_samples, rng)
            rec["analytic_bler"] = bler
            rec["capacity"] = cd.capacity
            rec["dispersion"] = cd.dispersion
        if with_bounds:
            rng = derive_rng(seed, _KEY_BOUNDS, pt)
            lo, hi = bounds_mod.evaluate_bounds(
                law, scn.n_data, scn.info_bits, block_samples, rng)
            rec["is_bound"] = lo.value
            rec["dt_bound"] = hi.value
        if with_sim:
            est = estimate_bler(scn, rho, seed, stop_errors=stop_errors,
                                max_trials=max_trials, workers=workers, key=(pt,))
            rec["sim_errors"] = est.errors
            rec["sim_trials"] = est.trials
            rec["censored"] = est.censored
            if est.errors > 0:
                rec["sim_bler"] = est.bler
            lo95, hi95 = est.ci95
            rec["ci_lo"] = lo95
            rec["ci_hi"] = hi95
        records.append(rec)
    return records
