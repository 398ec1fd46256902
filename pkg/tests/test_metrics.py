import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from stacksim.dram import Category, Device, TrafficLedger, offchip_default, stacked_default
from stacksim.errors import DomainError
from stacksim.metrics import (
    CSV_COLUMNS,
    CoreParams,
    RunReport,
    csv_row,
    estimated_time,
    mpki,
    perf_model,
    tag_storage_estimate,
    write_csv,
)

GB = 1e9


@pytest.mark.parametrize("misses,instr,want", [(0, 10**6, 0.0), (129900, 10**6, 129.9), (5000, 10**6, 5.0)])
def test_mpki(misses, instr, want):
    assert mpki(misses, instr) == pytest.approx(want)


def test_mpki_needs_instructions():
    with pytest.raises(DomainError):
        mpki(1, 0)


def test_tag_storage():
    assert tag_storage_estimate(4 << 30, 64, 8) == 64 << 20
    assert tag_storage_estimate(4 << 30, 4096, 112) == 14 << 20
    assert tag_storage_estimate(1 << 20, 1 << 20, 12) == 1.5


def _report(stacked_bytes=0, offchip_bytes=0, instructions=10**6, **kw):
    led = TrafficLedger()
    if stacked_bytes:
        led.transfer(Device.STACKED, Category.DATA, stacked_bytes)
    if offchip_bytes:
        led.transfer(Device.OFFCHIP, Category.DATA, offchip_bytes)
    return RunReport(organization="x", measured_records=1, measured_instructions=instructions, ledger=led, **kw)


def test_time_model_example():
    # 84 GB on 4x21 GB/s, 10.5 GB on 21 GB/s, 0.2 s of compute, latency hidden
    s = stacked_default(per_channel_bandwidth=21 * GB)
    o = offchip_default(per_channel_bandwidth=21 * GB)
    core = CoreParams(cores=1, clock_hz=5.0, peak_ipc=1.0, overlap_factor=math.inf)
    rep = _report(84 * 10**9, 105 * 10**8, instructions=1, total_latency_ns=1e9)
    assert estimated_time(rep, s, o, core) == pytest.approx(1.0)


def test_speedup_identity_and_monotone():
    s, o, core = stacked_default(), offchip_default(), CoreParams()
    base = _report(0, 64 * 10**7, total_latency_ns=1e6)
    assert perf_model(base, s, o, core, base)[1] == 1.0
    a = _report(64 * 10**5, 64 * 10**5, total_latency_ns=1e5)
    b = _report(64 * 10**6, 64 * 10**6, total_latency_ns=1e5)
    assert perf_model(a, s, o, core, base)[1] >= perf_model(b, s, o, core, base)[1]


def test_stall_terms_add():
    s, o, core = stacked_default(), offchip_default(), CoreParams(overlap_factor=math.inf)
    r = _report(64, 64)
    t0 = estimated_time(r, s, o, core)
    r.flush_stall = 50e-6
    assert estimated_time(r, s, o, core) == pytest.approx(t0 + 50e-6)


def test_report_json_round_trip():
    r = _report(640, 128, outcomes={"StackedMemory": 0, "StackedCacheHit": 10, "OffChip": 2}, mpki=2.0)
    r.config_echo = {"core": CoreParams(overlap_factor=math.inf).to_dict()}
    back = RunReport.from_json(r.to_json())
    assert back.results() == r.results()
    assert back.config_echo == r.config_echo


def test_csv_fixed_columns():
    r = _report(640, 128, outcomes={"StackedMemory": 3, "StackedCacheHit": 0, "OffChip": 1})
    r.config_echo = {"plan": {"mem_frames": 3, "total_frames": 4, "mem_fraction": 0.75}}
    text = write_csv([csv_row(r, "lbl")])
    header, row = text.strip().split("\n")
    assert tuple(header.split(",")) == CSV_COLUMNS
    fields = dict(zip(CSV_COLUMNS, row.split(",")))
    assert fields["partition"] == "12288/4096" and fields["mem_fraction"] == "0.75" and fields["label"] == "lbl"


@given(st.integers(0, 10**6), st.integers(1, 10**9))
def test_mpki_property(m, n):
    assert mpki(m, n) == pytest.approx(1000 * m / n)
