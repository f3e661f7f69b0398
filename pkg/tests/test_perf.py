import math
from dataclasses import replace

import pytest

from wilson_cg.lattice import LatticeDims
from wilson_cg.perf import (
    KernelTiming,
    MemoryLayout,
    UnknownProfileError,
    asymptotic_gflops,
    calibrate_bandwidth,
    cascade_stages,
    get_profile,
    implied_flops_per_site,
    kernel_latency,
    load_model_data,
    load_profiles,
    memory_footprint,
    reference_dims,
    resource_scaling_check,
    compare_published,
    throughput,
    transfer_bytes,
    with_transfer,
)

V_REF = 6**3 * 8


def test_kernel_latency():
    assert kernel_latency((1, 14, 70, 57)) == 142
    assert kernel_latency() == 142
    assert kernel_latency((0, 0, 0, 0)) == 0
    assert cascade_stages(14) == (1, 14, 70, 57)
    assert kernel_latency(cascade_stages()) == 142
    assert KernelTiming().total_latency == 142


@pytest.mark.parametrize("bad", [(1, 2, 3), (1, -1, 0, 0)])
def test_kernel_latency_rejects(bad):
    with pytest.raises(ValueError):
        kernel_latency(bad)


def test_timing_rejects_zero_interval():
    with pytest.raises(ValueError):
        KernelTiming(initiation_interval=0)


def test_throughput_zu9eg():
    est = throughput(V_REF, 1464, 150e6, 120, 250)
    assert est.cycles_total == V_REF * 120 + 250
    assert abs(est.gflops - 1.82) / 1.82 <= 0.01
    assert est.gflops == pytest.approx(1.8278, abs=1e-4)
    assert est.gflops == pytest.approx(est.flops_total / est.time_s / 1e9)


def test_throughput_degenerate():
    assert throughput(1, 1464, 500e6, 1, 0).gflops == pytest.approx(732.0, rel=1e-15)


def test_throughput_asymptote():
    big = throughput(10**6, 1464, 500e6, 1, 142).gflops
    assert asymptotic_gflops(1464, 500e6, 1) == pytest.approx(732.0)
    assert abs(big - 732.0) / 732.0 <= 1e-3


@pytest.mark.parametrize("arg", ["V", "f", "nu", "delta"])
def test_throughput_rejects_nonpositive(arg):
    kw = dict(V=10, f=1464, nu=1e8, delta=1, tau=0)
    kw[arg] = 0
    with pytest.raises(ValueError):
        throughput(**kw)


def test_throughput_monotone():
    base = dict(V=1000, f=1464, nu=300e6, delta=2, tau=142)
    g = lambda **kw: throughput(**{**base, **kw}).gflops
    assert g(delta=3) <= g(delta=2) <= g(delta=1)
    assert g(nu=200e6) <= g(nu=300e6) <= g(nu=400e6)
    assert g(V=100) <= g(V=1000) <= g(V=10000)


def test_implied_flops():
    assert implied_flops_per_site(676, 500e6, 1) == pytest.approx(1352)
    assert implied_flops_per_site(405, 300e6, 1) == pytest.approx(1350)
    g = throughput(V_REF, 1464, 150e6, 120, 250).gflops
    assert implied_flops_per_site(g, 150e6, 120, V_REF, 250) == pytest.approx(1464)


def test_profiles_builtin():
    profiles = load_profiles()
    assert set(profiles) == {"ZU9EG", "ALVEO", "VU13P"}
    zu = profiles["ZU9EG"]
    assert (zu.clock_hz, zu.latency, zu.interval) == (150e6, 250, 120)
    assert zu.calibrated and zu.bandwidth > 0
    assert get_profile("u250").name == "ALVEO"
    assert get_profile("xcvu13p").name == "VU13P"
    for p in profiles.values():
        assert min(p.bram, p.dsp, p.ff, p.lut, p.uram) >= 0


def test_unknown_profile():
    with pytest.raises(UnknownProfileError) as err:
        get_profile("nonexistent")
    assert "ZU9EG" in str(err.value)


def test_reference_dims():
    assert reference_dims() == LatticeDims(6, 8)


def test_calibration_ratio():
    raw = load_profiles(calibrate=False)["ZU9EG"]
    cal = calibrate_bandwidth(raw, V_REF)
    assert cal.overhead_ratio == pytest.approx(1.82 / 1.3 - 1)
    assert cal.overhead_ratio == pytest.approx(0.4, abs=1e-12)
    p = replace(raw, channel_bandwidth=cal.channel_bandwidth)
    est = with_transfer(throughput(V_REF, 1464, p.clock_hz, p.interval, p.latency), V_REF, p)
    assert est.transfer_s == pytest.approx(0.4 * est.time_s)
    # the calibrated profile turns the modelled compute figure into 1/1.4 of itself
    assert est.effective_gflops == pytest.approx(est.gflops / 1.4)
    assert abs(est.effective_gflops - 1.3) / 1.3 <= 0.01


def test_calibration_requires_pair():
    with pytest.raises(ValueError):
        calibrate_bandwidth(load_profiles()["VU13P"], V_REF)


def test_infinite_bandwidth():
    p = replace(get_profile("ZU9EG"), channel_bandwidth=math.inf)
    est = throughput(V_REF, 1464, p.clock_hz, p.interval, p.latency)
    assert with_transfer(est, V_REF, p).effective_gflops == est.gflops


def test_transfer_never_exceeds_compute():
    p = get_profile("ZU9EG")
    est = throughput(V_REF, 1464, p.clock_hz, p.interval, p.latency)
    for resident in (True, False):
        for calls in (1, 5):
            assert with_transfer(est, V_REF, p, resident, calls).effective_gflops <= est.gflops


def test_resident_difference():
    p = get_profile("ZU9EG")
    est = throughput(V_REF, 1464, p.clock_hz, p.interval, p.latency)
    calls = 7
    a = with_transfer(est, V_REF, p, True, calls)
    b = with_transfer(est, V_REF, p, False, calls)
    per_call = a.transfer_s
    assert b.transfer_s - a.transfer_s == pytest.approx((calls - 1) * per_call)
    assert transfer_bytes(V_REF) == V_REF * 2880


def test_transfer_needs_bandwidth():
    p = get_profile("VU13P")
    est = throughput(V_REF, 1464, p.clock_hz, p.interval, p.latency)
    with pytest.raises(ValueError):
        with_transfer(est, V_REF, p)


def test_compare_publisheds():
    profiles = load_profiles()
    zu = compare_published(profiles["ZU9EG"], V_REF)
    assert zu.passed
    for name, asym, implied in (("VU13P", 732.0, 1352), ("ALVEO", 439.2, 1350)):
        row = compare_published(profiles[name], V_REF)
        assert row.asymptotic_gflops == pytest.approx(asym)
        assert row.asymptotic_rel_error > 0.01
        assert row.implied_f_asymptotic == pytest.approx(implied)
        assert "implied f" in row.diagnostic()


def test_memory_footprint():
    d = LatticeDims(6, 8)
    fp = memory_footprint(d)
    assert fp["gauge_bytes"] == 1_990_656
    assert fp["spinor_bytes"] == 4 * 1728 * 24 * 8
    assert fp["halo_sites"] == 2 * 2 * 6**3
    assert fp["total_bytes"] == fp["gauge_bytes"] + fp["spinor_bytes"] + fp["halo_bytes"]
    single = memory_footprint(d, MemoryLayout(duplication=1))
    assert 2 * single["gauge_bytes"] == fp["gauge_bytes"]
    split = memory_footprint(d, MemoryLayout(channel_split=True))
    assert split["bytes_per_channel"] * 2 == split["total_bytes"]


def test_memory_footprint_increasing():
    sizes = [(2, 2), (2, 4), (4, 4), (4, 8), (6, 8), (8, 8), (8, 12)]
    totals = [memory_footprint(LatticeDims(L, T))["total_bytes"] for L, T in sizes]
    assert all(b > a for a, b in zip(totals, totals[1:]))


def test_resource_scaling_embedded():
    results = {r.claim: r for r in resource_scaling_check()}
    assert results["compute constant"].passed
    assert results["URAM nondecreasing"].passed
    table = load_model_data()["size_scaling"]
    assert [r["uram"] for r in table] == [696, 888, 888, 1080]
    assert {r["dsp"] for r in table} == {6960}


def test_resource_scaling_negative_controls():
    rows = [dict(r) for r in load_model_data()["size_scaling"]]
    rows[2]["dsp"] = 7000
    assert not {r.claim: r for r in resource_scaling_check(rows)}["compute constant"].passed
    rows = [dict(r) for r in load_model_data()["size_scaling"]]
    rows[3]["uram"] = 500
    assert not {r.claim: r for r in resource_scaling_check(rows)}["URAM nondecreasing"].passed
