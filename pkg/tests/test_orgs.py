import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from stacksim.dram import Category, Device, TrafficLedger, stacked_default
from stacksim.errors import ConfigError, TraceValidationError
from stacksim.orgs import (
    AlloyConfig,
    BansheeConfig,
    EmptyMeasurementError,
    HmaConfig,
    IdealMemoryConfig,
    InfiniteConfig,
    MemCachePlan,
    NoStackedConfig,
    TagBuffer,
    UnisonConfig,
    build,
    org_config_from_dict,
    resolve,
    simulate,
)
from stacksim.trace import Kind, SyntheticTraceSpec, generate

from conftest import make_trace

S, O = Device.STACKED, Device.OFFCHIP
D, M, SP, R = Category.DATA, Category.METADATA, Category.SPECDATA, Category.REPLACEMENT
W = Kind.WRITEBACK


def _run(cfg, trace, stacked, offchip, warmup=0):
    return simulate(cfg, trace, stacked, offchip, warmup_records=warmup)


def test_infinite_and_nostacked(small_stacked, offchip):
    t = make_trace([0x40, 0x5000, 0x40])
    inf = _run(InfiniteConfig(), t, small_stacked, offchip)
    assert inf.outcomes["StackedMemory"] == 3 and inf.mpki == 0.0
    assert inf.ledger.get(S, D) == 192 and inf.ledger.total(O) == 0
    base = _run(NoStackedConfig(), t, small_stacked, offchip)
    assert base.outcomes["OffChip"] == 3 and base.ledger.total(S) == 0
    assert base.speedup_vs_baseline == 1.0


def test_alloy_same_block_twice(small_stacked, offchip):
    led = TrafficLedger()
    org = build(AlloyConfig(), small_stacked, offchip)
    first = org.access(0, False, led)
    before = led.total(S)
    second = org.access(0, False, led)
    assert (first.served_by, second.served_by) == (2, 1)
    assert led.total(S) - before == 96


def test_alloy_ten_record_oracle(small_stacked, offchip):
    # blocks on one page: R0 R0 R1 W0 R2 R1 W3 R3 R0 R3
    blocks = [0, 0, 1, 0, 2, 1, 3, 3, 0, 3]
    kinds = [0, 0, 0, W, 0, 0, W, 0, 0, 0]
    t = make_trace([b * 64 for b in blocks], kinds)
    r = _run(AlloyConfig(), t, small_stacked, offchip)
    # misses at records 1, 3, 5, 7 (write, no allocate), 8
    assert r.outcomes == {"StackedMemory": 0, "StackedCacheHit": 5, "OffChip": 5}
    assert r.measured_instructions == 1000 and r.mpki == 5.0
    led = r.ledger
    assert (led.get(S, D), led.get(S, M), led.get(S, SP), led.get(S, R)) == (320, 320, 320, 4 * 96)
    assert (led.get(O, D), led.get(O, M), led.get(O, SP), led.get(O, R)) == (320, 0, 0, 0)


def test_alloy_dirty_victim_written_back(offchip):
    one_frame = stacked_default(capacity=4096 * 4)
    slots = one_frame.capacity // 72
    t = make_trace([0, 0, slots * 64], [0, W, 0])
    r = _run(AlloyConfig(), t, one_frame, offchip)
    assert r.ledger.get(O, R) == 64


def test_unison_lru_and_footprint(offchip):
    # 4 frames: one 4-way set
    st4 = stacked_default(capacity=4 * 4096)
    pages = [0, 1, 2, 3, 0, 4, 1]
    t = make_trace([p * 4096 for p in pages])
    r = _run(UnisonConfig(avg_footprint_blocks=2), t, st4, offchip)
    # page 4 evicts LRU page 1, so the final access to 1 misses
    assert r.outcomes["StackedCacheHit"] == 1 and r.outcomes["OffChip"] == 6
    # 16 B tag read + 16 B write, each rounded to 32 B
    assert r.ledger.get(S, M) == 7 * 64
    assert r.ledger.get(S, R) == 6 * 128 and r.ledger.get(O, R) == 6 * 64


def test_tag_buffer_threshold_and_overflow():
    tb = TagBuffer(16, 4, 0.5)
    assert sum(tb.insert(p) for p in range(8)) == 0
    assert tb.insert(8) == 1 and tb.occupancy == 0
    tb = TagBuffer(16, 4, 1.0)
    # five pages into one set of four ways forces a flush
    assert sum(tb.insert(p * 4) for p in range(5)) == 1


def test_banshee_sampling_off_never_replaces(small_stacked, offchip):
    t = generate(SyntheticTraceSpec(n_hot_pages=50, hot_access_fraction=1.0, total_records=5000))
    r = _run(BansheeConfig(sampling_coefficient=0.0), t, small_stacked, offchip)
    assert r.outcomes["StackedCacheHit"] == 0 and r.ledger.get(S, M) == 0


def test_banshee_frequency_replacement(offchip):
    st4 = stacked_default(capacity=4 * 4096)
    cfg = BansheeConfig(sampling_coefficient=1.0, avg_footprint_blocks=1)
    # fill the set with pages 0..3, each touched once more, then page 9 needs a lead of > 2 hits
    seq = [0, 1, 2, 3, 0, 1, 2, 3] + [9] * 4
    r = _run(cfg, make_trace([p * 4096 for p in seq]), st4, offchip)
    assert r.outcomes["StackedCacheHit"] == 4
    assert r.outcomes["OffChip"] == 8
    org = build(cfg, st4, offchip)
    for p in seq:
        org.access(p * 4096, False, TrafficLedger())
    assert 9 in org.resident[0]


def test_hma_swaps(offchip):
    two = stacked_default(capacity=2 * 4096)
    t = make_trace([0, 0, 4096, 4096, 0, 4096, 0, 4096])
    idl = _run(HmaConfig(interval_misses=4), t, two, offchip)
    assert idl.outcomes == {"StackedMemory": 4, "StackedCacheHit": 0, "OffChip": 4}
    assert idl.swap_interval_count == 2 and idl.ledger.get(S, R) == 0
    acc = _run(HmaConfig(interval_misses=4, mode="accounted", swap_latency=1e-6), t, two, offchip)
    assert acc.ledger.get(S, R) == 2 * 4096 and acc.ledger.get(O, R) == 2 * 4096
    assert acc.swap_stall == pytest.approx(2e-6)
    assert acc.estimated_time > idl.estimated_time


def test_ideal_memory_serves_hot_share(offchip):
    spec = SyntheticTraceSpec(n_hot_pages=200, hot_access_fraction=0.9, total_records=100_000, rng_seed=8)
    t = generate(spec)
    r = simulate(IdealMemoryConfig(hot_pages=tuple(range(200))), t, stacked_default(capacity=200 * 4096), offchip)
    assert r.stacked_serve_fraction == pytest.approx(0.9, abs=0.01)


def test_memcache_identities(small_stacked, offchip):
    t = generate(SyntheticTraceSpec(n_hot_pages=300, total_records=20_000, writeback_fraction=0.2, rng_seed=2))
    for cache in (AlloyConfig(), UnisonConfig(), BansheeConfig()):
        assert _run(MemCachePlan(0, (), cache), t, small_stacked, offchip).results() == _run(cache, t, small_stacked, offchip).results()
    full = _run(IdealMemoryConfig(), t, small_stacked, offchip)
    hot = resolve(IdealMemoryConfig(), t, small_stacked).hot_pages
    mc = _run(MemCachePlan(small_stacked.frames, hot, BansheeConfig()), t, small_stacked, offchip)
    assert mc.results() == full.results()


def test_warmup_resets_statistics_not_state(small_stacked, offchip):
    t = make_trace([0x40] * 4)
    r = _run(UnisonConfig(), t, small_stacked, offchip, warmup=1)
    assert r.outcomes["StackedCacheHit"] == 3 and r.measured_records == 3
    assert r.measured_instructions == 300


def test_empty_measurement_is_flagged(small_stacked, offchip):
    t = make_trace([0x40] * 4)
    with pytest.raises(EmptyMeasurementError) as e:
        _run(AlloyConfig(), t, small_stacked, offchip, warmup=4)
    rep = e.value.report
    assert rep.error and rep.measured_records == 0 and rep.ledger.total(S) == 0


def test_address_outside_space_rejected(small_stacked):
    tiny = stacked_default(capacity=1 << 20, channels=1)
    with pytest.raises(TraceValidationError):
        simulate(NoStackedConfig(), make_trace([1 << 21]), small_stacked, tiny)


def test_unknown_org_params():
    with pytest.raises(ConfigError):
        org_config_from_dict({"name": "banshee", "params": {"sampling": 0.2}})
    with pytest.raises(ConfigError):
        org_config_from_dict({"name": "tdc"})


ORGS = [
    NoStackedConfig(),
    InfiniteConfig(),
    AlloyConfig(),
    UnisonConfig(),
    BansheeConfig(sampling_coefficient=0.5),
    IdealMemoryConfig(),
    HmaConfig(interval_misses=97, mode="accounted"),
    MemCachePlan(64, tuple(range(64)), UnisonConfig()),
    MemCachePlan(32, tuple(range(32)), AlloyConfig()),
]


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(
    st.lists(st.tuples(st.integers(0, 600), st.integers(0, 63), st.booleans()), min_size=1, max_size=400),
    st.sampled_from(ORGS),
)
def test_conservation_property(small_stacked, offchip, recs, cfg):
    t = make_trace([p * 4096 + b * 64 for p, b, _ in recs], [int(w) for _, _, w in recs])
    # run_records enforces conservation itself; check the headline equalities again here
    r = _run(cfg, t, small_stacked, offchip)
    assert r.ledger.category_total(D) == 64 * len(recs)
    assert r.ledger.get(O, D) == 64 * r.outcomes["OffChip"]
    assert r.ledger.total(S) == sum(r.ledger.get(S, c) for c in Category)
