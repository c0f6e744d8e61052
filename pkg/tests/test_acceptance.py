"""Release acceptance checks, one test per criterion.

Each test prints a single CRITERION line with the measured numbers so the
log shows at a glance what was achieved; the assertions enforce the stated
tolerances. These run the full stack (density sampling, bounds, coded
simulation, CLI) at production sample sizes, so the module takes several
minutes.

Known failure: criterion 6's first clause (simulated coded BLER within
2 dB horizontally of the normal approximation) is not met by the faithful
per-packet waveform simulator; the gap decomposition lives in the project
notes and in test_code_gap_matched_memoryless_channel below, which pins
the decoder's share of the gap (~1 dB) on the memoryless equivalent
channel where the normal approximation's assumptions hold.
"""

import dataclasses
import time

import numpy as np
import pytest
from scipy import stats

from quadrature_oracles import GAUSSIAN_RHO10_CV, QPSK_RAYLEIGH_IV

from sptdiff import bounds, cli, fbl, linksim
from sptdiff.channel import (
    combined_gain_cdf,
    derive_rng,
    effective_snr_dpsk,
    measure_dpsk_effective_snr,
    mmse_error_variance,
    sample_combined_gain,
)
from sptdiff.config import parse_config
from sptdiff.modem import demap_llr, mmse_estimate

SEED = 20230815


def _criterion(num, name, ok, detail):
    line = f"[criterion {num}] {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    return line


def _na_bler(scheme, rho_db, n, payload, key, links=1, fd_ts=0.0, m=4,
             upsilon=1, samples=1_000_000):
    rho = 10.0 ** (rho_db / 10.0)
    law = fbl.scheme_law(scheme, m, rho, links=links, fd_ts=fd_ts,
                         upsilon=upsilon)
    _, bler, _ = fbl.corollary_rate_bler(law, n, payload, 1e-5, samples,
                                         derive_rng(SEED, *key))
    return bler


def _bisect_snr(bler_fn, target, lo, hi, iters=22):
    """SNR (dB) where the monotone-decreasing BLER curve crosses target."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if bler_fn(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _snr_at_level(snr_db, bler, level):
    """Horizontal read-off by log-linear interpolation along the curve."""
    snr_db = np.asarray(snr_db, dtype=float)
    logb = np.log10(np.asarray(bler, dtype=float))
    order = np.argsort(logb)
    lo, hi = logb[order][0], logb[order][-1]
    assert lo <= np.log10(level) <= hi, (level, bler)
    return float(np.interp(np.log10(level), logb[order], snr_db[order]))


def test_criterion_1_differential_penalty():
    # quasi-static single link, (256,128) packet, QPSK: the differential
    # curve should sit 10*log10(2) to the right of perfect-CSI PSK
    start = time.monotonic()
    dif = _bisect_snr(
        lambda s: _na_bler("dpsk", s, 128, 128, key=(1, 0)), 1e-3, 3.0, 10.0)
    coh = _bisect_snr(
        lambda s: _na_bler("psk", s, 128, 128, key=(1, 0)), 1e-3, 0.0, 7.0)
    elapsed = time.monotonic() - start
    shift = dif - coh
    detail = f"shift={shift:.3f} dB at BLER 1e-3, {elapsed:.0f}s"
    line = _criterion(1, "3 dB differential penalty", abs(shift - 3.01) <= 0.3,
                      detail)
    assert abs(shift - 3.01) <= 0.3, line
    assert elapsed < 120.0, line


def test_criterion_2_bound_sandwich():
    # five points across the waterfall of the quasi-static (256,128)
    # differential QPSK scenario
    start = time.monotonic()
    rows = []
    for pt, rho_db in enumerate((5.8, 6.1, 6.4, 6.7, 7.0)):
        rho = 10.0 ** (rho_db / 10.0)
        law = fbl.scheme_law("dpsk", 4, rho, links=1, fd_ts=0.0)
        _, na, _ = fbl.corollary_rate_bler(law, 128, 128, 1e-5, 1_000_000,
                                           derive_rng(SEED, 2, 1, pt))
        lo, hi = bounds.evaluate_bounds(law, 128, 128, 1_000_000,
                                        derive_rng(SEED, 2, 2, pt))
        rows.append((rho_db, lo, na, hi))
    elapsed = time.monotonic() - start
    ok = True
    for rho_db, lo, na, hi in rows:
        ok &= 1e-3 <= na <= 1e-1
        ok &= lo.value <= na <= hi.value
        ok &= lo.std_err < 0.1 * lo.value
        ok &= hi.std_err < 0.1 * hi.value
    detail = "; ".join(f"{r:.1f}dB {lo.value:.2e}<={na:.2e}<={hi.value:.2e}"
                       for r, lo, na, hi in rows) + f"; {elapsed:.0f}s"
    line = _criterion(2, "converse <= approximation <= achievability", ok,
                      detail)
    for rho_db, lo, na, hi in rows:
        assert 1e-3 <= na <= 1e-1, (line, rho_db)
        assert lo.value <= na <= hi.value, (line, rho_db)
        assert lo.std_err < 0.1 * lo.value, (line, rho_db)
        assert hi.std_err < 0.1 * hi.value, (line, rho_db)
    assert elapsed < 600.0, line


def test_criterion_3_dispersion_shape():
    checks = []
    worst_sigma = 0.0
    v30 = None
    for pt, (rho_db, (_, v_oracle)) in enumerate(sorted(QPSK_RAYLEIGH_IV.items())):
        law = fbl.scheme_law("psk", 4, 10.0 ** (rho_db / 10.0), links=1)
        cd = fbl.estimate_capacity_dispersion(law, 1_000_000,
                                              derive_rng(SEED, 3, pt))
        sigma = abs(cd.dispersion - v_oracle) / cd.std_err_dispersion
        worst_sigma = max(worst_sigma, sigma)
        checks.append(sigma <= 3.0)
        if rho_db == 30.0:
            v30 = cd.dispersion
    g_law = fbl.scheme_law("gaussian", 0, 10.0, links=1)
    g_cd = fbl.gaussian_capacity_dispersion(g_law, 1_000_000,
                                            derive_rng(SEED, 3, 10))
    g_sigma = abs(g_cd.dispersion - GAUSSIAN_RHO10_CV[1]) / g_cd.std_err_dispersion
    ok = all(checks) and v30 < 0.05 and g_sigma <= 3.0
    detail = (f"worst |V_mc - V_quad| = {worst_sigma:.2f} se, V(30dB)={v30:.4f}, "
              f"gaussian {g_sigma:.2f} se")
    line = _criterion(3, "dispersion matches quadrature", ok, detail)
    assert all(checks), line
    assert v30 < 0.05, line
    assert g_sigma <= 3.0, line


def test_criterion_4_lemma_and_mmse():
    worst_db = 0.0
    for ai, alpha in enumerate((0.5, 0.9, 0.99, 1.0)):
        for ri, rho_db in enumerate((0.0, 10.0, 20.0)):
            rho = 10.0 ** (rho_db / 10.0)
            meas = measure_dpsk_effective_snr(
                alpha, rho, derive_rng(SEED, 4, ai, ri),
                trials=8192, length=256)
            closed = effective_snr_dpsk(rho, alpha, 1.0)
            worst_db = max(worst_db, abs(10.0 * np.log10(meas / closed)))
    worst_rel = 0.0
    rng = derive_rng(SEED, 4, 100)
    for rho_db in (0.0, 10.0, 20.0):
        rho = 10.0 ** (rho_db / 10.0)
        n = 1_000_000
        h = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
        w = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
        h_hat = mmse_estimate(np.sqrt(rho) * h + w, 1.0, rho)
        err_var = float(np.mean(np.abs(h - h_hat) ** 2))
        worst_rel = max(worst_rel, abs(err_var / mmse_error_variance(rho) - 1.0))
    ok = worst_db <= 0.2 and worst_rel <= 0.02
    detail = (f"post-detection SNR off by <= {worst_db:.3f} dB, "
              f"estimation-error variance off by <= {worst_rel * 100:.2f}%")
    line = _criterion(4, "effective-SNR law validation", ok, detail)
    assert worst_db <= 0.2, line
    assert worst_rel <= 0.02, line


def test_criterion_5_combining():
    # distribution of the combined gain
    worst_ks = 0.0
    for scheme in ("sc", "mrc"):
        for j, k in enumerate((1, 2, 3, 6)):
            s = sample_combined_gain(scheme, k, 1_000_000,
                                     derive_rng(SEED, 5, 1, j, scheme == "sc"))
            d = stats.kstest(s, lambda x: combined_gain_cdf(scheme, k, x)).statistic
            worst_ks = max(worst_ks, d)
    # simulated coded BLER at matched (K, SNR): combining the three links
    # must beat selecting one
    ests = {}
    for comb in ("mrc", "sc"):
        scn = linksim.build_scenario("dpsk", 4, 32, 0.5, links=3,
                                     combining=comb, fd_ts=0.05, list_size=8)
        rho = linksim.rho_from_snr_db(scn, 5.0)
        ests[comb] = linksim.estimate_bler(scn, rho, SEED, stop_errors=100,
                                           max_trials=200_000, key=(5, 2))
    mrc, sc = ests["mrc"], ests["sc"]
    separated = mrc.ci95[1] < sc.ci95[0]
    # diminishing diversity returns on the analytic curves
    def curve(k):
        # Eb/N0 equals the symbol SNR here: 128 info bits over 128 symbols
        return _bisect_snr(
            lambda s: _na_bler("dpsk", s, 128, 128, key=(5, 3, k),
                               links=k, fd_ts=0.05, samples=200_000),
            1e-3, -8.0, 14.0, iters=18)
    s1, s3, s6 = curve(1), curve(3), curve(6)
    gain13, gain36 = s1 - s3, s3 - s6
    ok = worst_ks < 0.005 and separated and gain13 > gain36 > 0.0
    detail = (f"max KS={worst_ks:.4f}; mrc {mrc.bler:.2e} < sc {sc.bler:.2e} "
              f"(disjoint CIs={separated}); K gains {gain13:.2f} dB (1->3) "
              f"> {gain36:.2f} dB (3->6)")
    line = _criterion(5, "multi-link combining laws", ok, detail)
    assert worst_ks < 0.005, line
    assert separated, line
    assert gain13 > gain36 > 0.0, line


def test_criterion_6_coded_link():
    start = time.monotonic()
    dpsk = linksim.build_scenario("dpsk", 4, 32, 0.5, links=3, combining="mrc",
                                  fd_ts=0.05, list_size=8)
    pilot = linksim.build_scenario("pilot_psk", 16, 32, 0.5, links=3,
                                   combining="mrc", fd_ts=0.05, upsilon=1,
                                   list_size=8)
    linksim.assert_fair_comparison(dpsk, pilot)

    na_grid = np.array([0.0, 0.5, 1.0, 1.5])
    na_bler = [_na_bler("dpsk", s, dpsk.n_data, dpsk.info_bits, key=(6, 1),
                        links=3, fd_ts=0.05) for s in na_grid]
    sim_grid = np.array([4.5, 5.0, 5.5, 6.0, 6.5, 7.0])
    dpsk_est, pilot_est = [], []
    for pt, snr_db in enumerate(sim_grid):
        dpsk_est.append(linksim.estimate_bler(
            dpsk, linksim.rho_from_snr_db(dpsk, snr_db), SEED,
            stop_errors=100, max_trials=1_000_000, key=(6, 2, pt)))
        pilot_est.append(linksim.estimate_bler(
            pilot, linksim.rho_from_snr_db(pilot, snr_db), SEED,
            stop_errors=100, max_trials=1_000_000, key=(6, 3, pt)))
    elapsed = time.monotonic() - start

    # clause 2: differential beats the fair pilot scheme everywhere, with
    # disjoint 95% intervals
    beats = all(p.ci95[0] > d.ci95[1] and p.bler > d.bler
                for p, d in zip(pilot_est, dpsk_est))
    print(_criterion("6b", "differential beats fair pilot-PSK", beats,
                     "; ".join(f"{s:.1f}dB {d.bler:.1e} vs {p.bler:.1e}"
                               for s, d, p in zip(sim_grid, dpsk_est, pilot_est))))

    # clause 1: horizontal distance from the normal approximation
    gaps = {}
    for level in (1e-2, 1e-3):
        sim_snr = _snr_at_level(sim_grid, [e.bler for e in dpsk_est], level)
        na_snr = _snr_at_level(na_grid, na_bler, level)
        gaps[level] = sim_snr - na_snr
    within = all(0.0 <= g <= 2.0 for g in gaps.values())
    detail = (f"gap {gaps[1e-2]:.2f} dB at 1e-2, {gaps[1e-3]:.2f} dB at 1e-3, "
              f"{elapsed:.0f}s")
    line = _criterion(6, "coded link within 2 dB of approximation",
                      within and beats, detail)
    assert elapsed < 1800.0, line
    assert beats, line
    assert within, line


def test_code_gap_matched_memoryless_channel():
    """Decoder share of the criterion-6 gap, measured where the
    approximation's own channel assumptions hold.

    Runs the same CRC-aided list decoder over the memoryless equivalent
    channel (fresh effective-SNR draw per symbol, coherent known gain) and
    pins the horizontal code gap at ~1 dB; the remaining criterion-6 gap
    comes from per-packet fading memory, not the code.
    """
    scn = linksim.build_scenario("dpsk", 4, 32, 0.5, links=3, combining="mrc",
                                 fd_ts=0.05, list_size=8)
    const = scn.constellation

    def sim_bler(snr_db, pt, stop=100, max_trials=150_000, batch=512):
        rho = linksim.rho_from_snr_db(scn, snr_db)
        law = scn.law(rho)
        rng = derive_rng(SEED, 66, pt)
        errors = trials = 0
        while errors < stop and trials < max_trials:
            info = rng.integers(0, 2, size=(batch, scn.info_bits), dtype=np.int8)
            coded = scn.code.encode_info(info)
            idx = const.indices_from_bits(coded.reshape(batch, scn.n_data, 2))
            x = const.points[idx]
            s = law.sample_effective_snr((batch, scn.n_data), rng)
            amp = np.sqrt(s)
            w = (rng.standard_normal(x.shape) + 1j * rng.standard_normal(x.shape)) / np.sqrt(2.0)
            llrs = demap_llr(amp * x + w, amp, 1.0, const).reshape(batch, -1)
            for b in range(batch):
                dec, _ = scn.code.decode(llrs[b], scn.list_size)
                errors += not np.array_equal(dec, info[b])
            trials += batch
        return errors / trials

    na_grid = np.array([0.0, 0.5, 1.0, 1.5])
    na_bler = [_na_bler("dpsk", s, scn.n_data, scn.info_bits, key=(6, 1),
                        links=3, fd_ts=0.05) for s in na_grid]
    sim_grid = np.array([1.0, 1.5, 2.0, 2.5])
    sim = [sim_bler(s, pt) for pt, s in enumerate(sim_grid)]
    gap2 = _snr_at_level(sim_grid, sim, 1e-2) - _snr_at_level(na_grid, na_bler, 1e-2)
    gap3 = _snr_at_level(sim_grid, sim, 1e-3) - _snr_at_level(na_grid, na_bler, 1e-3)
    print(f"[criterion 6 support] memoryless-channel code gap: "
          f"{gap2:.2f} dB at 1e-2, {gap3:.2f} dB at 1e-3")
    assert 0.3 <= gap2 <= 2.0, (gap2, sim)
    assert 0.3 <= gap3 <= 2.0, (gap3, sim)


def test_criterion_7_payload_dominance():
    durations = (0.4, 0.8, 1.2, 1.6, 2.0)
    ts_ms = 0.01
    rho = 10.0
    eps = 1e-5

    def payloads(scheme, fd_ts, tag):
        out = []
        for pt, dur in enumerate(durations):
            n = round(dur / ts_ms)
            if scheme == "pilot_qam":
                n_data = n - n // 4  # one pilot per 3 data symbols
                law = fbl.scheme_law("pilot_qam", 16, rho, links=3,
                                     fd_ts=fd_ts, upsilon=3)
            elif scheme == "dpsk":
                n_data = n
                law = fbl.scheme_law("dpsk", 16, rho, links=3, fd_ts=fd_ts)
            else:
                n_data = n
                law = fbl.scheme_law("gaussian", 0, rho, links=3)
            out.append(fbl.max_payload(law, n_data, eps, 1_000_000,
                                       derive_rng(SEED, 7, tag, pt)))
        return np.array(out)

    gauss = payloads("gaussian", 0.0, 0)
    dpsk = {fd: payloads("dpsk", fd, 1) for fd in (0.02, 0.04)}
    qam = {fd: payloads("pilot_qam", fd, 2) for fd in (0.02, 0.04)}
    ordered = all(np.all(gauss >= dpsk[fd]) and np.all(dpsk[fd] >= qam[fd])
                  for fd in (0.02, 0.04))
    dpsk_drop = int(np.sum(dpsk[0.02] - dpsk[0.04]))
    qam_drop = int(np.sum(qam[0.02] - qam[0.04]))
    print(f"payload bits at fd 0.02: gaussian {gauss.tolist()}, "
          f"dpsk {dpsk[0.02].tolist()}, pilot-qam {qam[0.02].tolist()}")
    ok = ordered and qam_drop > dpsk_drop
    detail = (f"gaussian >= dpsk >= pilot-qam pointwise; doubling Doppler "
              f"costs pilot {qam_drop} bits vs dpsk {dpsk_drop}")
    line = _criterion(7, "payload ordering and Doppler sensitivity", ok, detail)
    assert ordered, line
    assert qam_drop > dpsk_drop, line


DET_CONFIG = """\
scheme: dpsk
m: 4
links: 2
fd_ts: 0.02
packet_bytes: 8
rc: 0.5
snr_db_grid: [4.0, 8.0]
seed: 17
density_samples: 20000
block_samples: 20000
list_size: 8
stop_errors: 16
max_trials: 2048
with_analytic: true
with_bounds: true
"""


def test_criterion_8_determinism(tmp_path):
    cfg = parse_config(DET_CONFIG)
    blobs = {}
    for workers in (1, 2):
        wcfg = cfg if workers == 1 else dataclasses.replace(cfg, workers=2)
        pair = []
        for run in ("a", "b"):
            out = tmp_path / f"w{workers}{run}"
            cli.run_verb("simulate", wcfg, str(out))
            pair.append(((out / "simulate.csv").read_bytes(),
                         (out / "simulate.json").read_bytes()))
        blobs[workers] = pair
    same = all(pair[0] == pair[1] for pair in blobs.values())
    line = _criterion(8, "byte-identical reruns", same,
                      "simulate verb, workers 1 and 2, CSV and sidecar")
    assert blobs[1][0] == blobs[1][1], line
    assert blobs[2][0] == blobs[2][1], line
