"""Tests for scenario derivation and the coded waveform simulator.

Scenario arithmetic is checked against hand-derived packet layouts; the
simulator is pinned by noiseless trials (exact recovery), saturated-noise
trials (certain failure), and byte-identical reproducibility across runs
and across worker counts.
"""

import math

import numpy as np
import pytest
from scipy.stats import binomtest

from sptdiff.channel import derive_rng, jakes_alpha
from sptdiff.linksim import (
    BlerEstimate,
    assert_fair_comparison,
    build_scenario,
    estimate_bler,
    net_rate,
    packet_energy,
    rho_from_snr_db,
    run_trial,
    simulate_batch,
    sweep,
    wilson_interval,
)


def _small_dpsk(**kw):
    # (64,32) code on QPSK: cheap enough for exhaustive-ish trial tests
    args = dict(scheme="dpsk", m=4, packet_bytes=8, rc=0.5, links=2,
                fd_ts=0.02, list_size=8)
    args.update(kw)
    return build_scenario(**args)


# ------------------------------------------------------------- derivations

def test_dpsk_qpsk_32_byte_layout():
    scn = build_scenario("dpsk", 4, 32, 0.5, links=3, fd_ts=0.05, list_size=8)
    assert scn.coded_bits == 256 and scn.info_bits == 128
    assert scn.n_data == 128 and scn.n_symbols == 128 and scn.n_pilots == 0
    assert scn.alpha == jakes_alpha(0.05)
    assert net_rate(scn) == 1.0
    law = scn.law(2.0)
    assert law.csi == "dpsk" and law.alpha == scn.alpha and law.links == 3


def test_pilot_psk16_matches_dpsk_qpsk_packet():
    # one pilot per data symbol doubles the symbol count: 64 + 64 = 128
    pil = build_scenario("pilot_psk", 16, 32, 0.5, upsilon=1, fd_ts=0.05)
    assert pil.coded_bits == 256 and pil.info_bits == 128
    assert pil.n_data == 64 and pil.n_symbols == 128 and pil.n_pilots == 64
    dif = build_scenario("dpsk", 4, 32, 0.5, fd_ts=0.05)
    assert_fair_comparison(dif, pil)  # equal bits over equal symbols
    assert packet_energy(pil, 2.0) == packet_energy(dif, 2.0)


def test_pilot_qam16_30_byte_layout():
    scn = build_scenario("pilot_qam", 16, 30, 0.5, upsilon=3, fd_ts=0.02)
    assert scn.coded_bits == 240 and scn.info_bits == 120
    assert scn.n_data == 60 and scn.n_pilots == 20 and scn.n_symbols == 80
    dif = build_scenario("dpsk", 8, 30, 0.5, fd_ts=0.02)
    assert dif.n_symbols == 80
    assert_fair_comparison(dif, scn)


def test_unfair_comparison_is_refused():
    dif = build_scenario("dpsk", 4, 32, 0.5)
    pil = build_scenario("pilot_psk", 4, 32, 0.5, upsilon=1)  # 256 symbols
    with pytest.raises(ValueError, match="unfair"):
        assert_fair_comparison(dif, pil)


def test_build_scenario_rejections():
    with pytest.raises(ValueError, match="power of two"):
        build_scenario("dpsk", 3, 32, 0.5)
    with pytest.raises(ValueError, match="not an integer"):
        build_scenario("dpsk", 4, 32, 0.33)
    with pytest.raises(ValueError, match="symbols"):
        build_scenario("dpsk", 8, 32, 0.5)  # 256 bits over 3-bit symbols
    with pytest.raises(ValueError, match="upsilon"):
        build_scenario("pilot_psk", 16, 32, 0.5, upsilon=3)  # 64 % 3 != 0
    with pytest.raises(ValueError, match="pilot spacing"):
        build_scenario("pilot_psk", 16, 32, 0.5, upsilon=0)
    with pytest.raises(ValueError, match="scheme"):
        build_scenario("psk", 4, 32, 0.5)


def test_snr_unit_conversion():
    scn = build_scenario("pilot_qam", 16, 30, 0.5, upsilon=3)
    assert rho_from_snr_db(scn, 3.0, "rho_db") == 10.0 ** 0.3
    # Eb/N0 accounting: rho = lin * L / n_symbols = lin * 120/80
    assert rho_from_snr_db(scn, 0.0, "ebn0_db") == pytest.approx(1.5, rel=1e-12)
    with pytest.raises(ValueError, match="unit"):
        rho_from_snr_db(scn, 0.0, "esn0")


# --------------------------------------------------------------- simulator

def test_noiseless_trials_decode_exactly():
    # static fading (fd_ts=0) plus disabled receiver noise pins the chain.
    # Constant-modulus constellations only: the receiver always assumes unit
    # noise, and under that believed-low-SNR model the QAM magnitude-bit
    # LLRs are biased toward the inner points whenever the fading draw is
    # weak, so noiseless pilot-QAM trials can still (correctly) fail.
    dif = _small_dpsk(fd_ts=0.0)
    errs = simulate_batch(dif, 10.0, 32, derive_rng(60, 0), noise_scale=0.0)
    assert not errs.any()
    pil = build_scenario("pilot_psk", 16, 8, 0.5, upsilon=4, fd_ts=0.0, list_size=8)
    errs = simulate_batch(pil, 10.0, 32, derive_rng(60, 1), noise_scale=0.0)
    assert not errs.any()


def test_saturated_noise_always_fails():
    scn = _small_dpsk()
    errs = simulate_batch(scn, 1e-3, 64, derive_rng(60, 2))
    assert errs.all()


def test_simulate_batch_reproducible():
    scn = _small_dpsk()
    a = simulate_batch(scn, 1.5, 64, derive_rng(61, 0))
    b = simulate_batch(scn, 1.5, 64, derive_rng(61, 0))
    assert np.array_equal(a, b)
    c = simulate_batch(scn, 1.5, 64, derive_rng(61, 1))
    assert not np.array_equal(a, c)  # distinct stream, same scenario
    assert a.dtype == np.bool_ and a.shape == (64,)
    assert run_trial(scn, 1.5, derive_rng(61, 0)) == bool(
        simulate_batch(scn, 1.5, 1, derive_rng(61, 0))[0])


def test_estimate_bler_worker_count_invariance():
    # with early stopping disabled the wave split cannot change the tally
    scn = _small_dpsk()
    one = estimate_bler(scn, 1.2, seed=7, stop_errors=1 << 30, max_trials=1024,
                        workers=1)
    two = estimate_bler(scn, 1.2, seed=7, stop_errors=1 << 30, max_trials=1024,
                        workers=2)
    assert one == two
    assert one.trials == 1024


def test_estimate_bler_early_stop_and_censoring():
    scn = _small_dpsk()
    est = estimate_bler(scn, 1e-3, seed=8, stop_errors=16, max_trials=4096)
    assert est.errors >= 16 and not est.censored
    assert est.trials == 256  # first batch already clears the bar
    assert est.bler == est.errors / est.trials
    lo, hi = est.ci95
    assert lo <= est.bler <= hi + 1e-12  # hi loses an ulp when errors == trials
    rerun = estimate_bler(scn, 1e-3, seed=8, stop_errors=16, max_trials=4096)
    assert rerun == est

    starved = estimate_bler(scn, 50.0, seed=8, stop_errors=100, max_trials=256)
    assert starved.trials == 256 and starved.censored


def test_bler_estimate_empty():
    est = BlerEstimate(errors=0, trials=0, stop_errors=100)
    assert math.isnan(est.bler)
    assert est.ci95 == (0.0, 1.0)


@pytest.mark.parametrize("errors,trials", [(0, 100), (5, 50), (93, 100), (100, 100)])
def test_wilson_interval_against_scipy(errors, trials):
    lo, hi = wilson_interval(errors, trials)
    ref = binomtest(errors, trials).proportion_ci(confidence_level=0.95,
                                                  method="wilson")
    assert lo == pytest.approx(ref.low, abs=1e-12)
    assert hi == pytest.approx(ref.high, abs=1e-12)


# ------------------------------------------------------------------- sweep

def test_sweep_records_and_determinism():
    scn = _small_dpsk()
    kw = dict(snr_db_grid=[2.0, 6.0], seed=11, with_analytic=True,
              with_bounds=True, with_sim=True, density_samples=20_000,
              block_samples=4_000, stop_errors=8, max_trials=512)
    recs = sweep(scn, **kw)
    assert len(recs) == 2
    expected_keys = {
        "scheme", "M", "K", "combining", "fdTs", "N", "L", "snr_db",
        "analytic_bler", "is_bound", "dt_bound", "sim_bler", "sim_errors",
        "sim_trials", "ci_lo", "ci_hi", "seed", "censored", "capacity",
        "dispersion",
    }
    for rec in recs:
        assert set(rec) == expected_keys
        assert rec["scheme"] == "dpsk" and rec["M"] == 4 and rec["K"] == 2
        assert rec["N"] == scn.n_symbols and rec["L"] == scn.info_bits
        assert 0.0 <= rec["analytic_bler"] <= 1.0
        assert rec["is_bound"] <= rec["dt_bound"]
        assert rec["sim_trials"] >= 256
        if rec["sim_errors"]:
            assert rec["ci_lo"] <= rec["sim_bler"] <= rec["ci_hi"]
        else:
            assert rec["sim_bler"] is None
        assert rec["seed"] == 11
    assert recs[0]["snr_db"] == 2.0 and recs[1]["snr_db"] == 6.0
    # lower SNR cannot look better than higher SNR at these sample sizes
    assert recs[0]["analytic_bler"] >= recs[1]["analytic_bler"]
    assert sweep(scn, **kw) == recs
