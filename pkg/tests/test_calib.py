import math

import mpmath as mp
import pytest

from mmwtrack.calib import (
    RateProfile,
    default_profile,
    from_db,
    mmwave_rate,
    sync_level,
    target_snr,
    to_db,
)

P50 = default_profile("p50")
P5 = default_profile("p5")

# Printed rate goals the computed ones must land near (1.5% rounding slack).
PRINTED_RATE = {"p50": 1480e6, "p5": 70e6}


def test_rates_from_spectral_efficiency():
    assert mmwave_rate(P50) == pytest.approx(1.476e9, rel=1e-12)
    assert mmwave_rate(P5) == pytest.approx(69.3e6, rel=1e-12)


def test_rates_within_rounding_slack_of_printed():
    for prof, key in ((P50, "p50"), (P5, "p5")):
        rel = abs(mmwave_rate(prof) - PRINTED_RATE[key]) / PRINTED_RATE[key]
        assert rel <= 0.015


def test_zero_rate_zero_target():
    assert target_snr(P50, 0.0) == 0.0
    assert mmwave_rate(default_profile("p50", lte_spectral_eff=1e-300)) < 1


def test_target_snr_p50_printed_rate():
    # 2^(1480/400) - 1, cross-checked with high-precision arithmetic
    got = target_snr(P50, PRINTED_RATE["p50"])
    mp.mp.dps = 40
    ref = float(mp.mpf(2) ** (mp.mpf("1480e6") / mp.mpf("400e6")) - 1)
    assert got == pytest.approx(ref, rel=1e-12)
    assert got == pytest.approx(11.9960383417, rel=1e-9)
    assert to_db(got) == pytest.approx(10.7903784518, abs=1e-6)


def test_target_snr_p5_printed_rate():
    got = target_snr(P5, PRINTED_RATE["p5"])
    mp.mp.dps = 40
    ref = float(mp.mpf(2) ** (mp.mpf("70e6") / mp.mpf("400e6")) - 1)
    assert got == pytest.approx(ref, rel=1e-12)
    assert got == pytest.approx(0.128964404806, rel=1e-9)
    assert to_db(got) == pytest.approx(-8.89530141867, abs=1e-6)


def test_sync_level_identity_and_array_division():
    assert sync_level(0.5, 1) == 0.5
    g = 11.996
    shift_db = to_db(g) - to_db(sync_level(g, 64))
    assert shift_db == pytest.approx(10 * math.log10(64), abs=1e-12)


def test_sync_level_p5_compose():
    g5 = target_snr(P5, PRINTED_RATE["p5"])
    assert to_db(sync_level(g5, 64)) == pytest.approx(-26.9571011585, abs=1e-6)


def test_round_trip_rate():
    for prof in (P50, P5):
        rate = mmwave_rate(prof)
        gt = target_snr(prof, rate)
        back = prof.overhead_delta * prof.mmw_bw_hz * math.log2(1 + gt)
        assert abs(back - rate) / rate <= 1e-9


def test_target_monotone_in_rate():
    rates = [x * 1e8 for x in range(0, 30)]
    vals = [target_snr(P50, r) for r in rates]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_target_monotone_decreasing_in_delta_w():
    rate = 5e8
    vals = [
        target_snr(default_profile("p50", overhead_delta=d), rate)
        for d in (0.2, 0.4, 0.6, 0.8, 1.0)
    ]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_profile_validation():
    with pytest.raises(ValueError):
        RateProfile(percentile="p95")
    with pytest.raises(ValueError):
        RateProfile(overhead_delta=0.0)
    with pytest.raises(ValueError):
        RateProfile(n_tx=0)
    with pytest.raises(ValueError):
        target_snr(P50, -1.0)
    with pytest.raises(ValueError):
        sync_level(1.0, 0)


def test_db_helpers():
    assert to_db(100.0) == pytest.approx(20.0)
    assert from_db(to_db(0.0123)) == pytest.approx(0.0123, rel=1e-12)
