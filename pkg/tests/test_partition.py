import pytest
from hypothesis import given
from hypothesis import strategies as st

from stacksim.errors import ConfigError, DomainError
from stacksim.orgs import BansheeConfig, IdealMemoryConfig, UnisonConfig, simulate
from stacksim.partition import PartitionPlan, compute_memory_fraction, even_partitions, partition_sweep
from stacksim.profiler import PageAccessCounts, profile
from stacksim.trace import SyntheticTraceSpec, generate

from oracles import memory_fraction_literal

FIXTURE = [100, 10, 5, 3, 2, 2, 2, 2]


def counts_of(values):
    return PageAccessCounts({i: v for i, v in enumerate(values)})


def test_fixture():
    plan = compute_memory_fraction(counts_of(FIXTURE), 160, 4)
    assert plan.mem_frames == 3 and plan.mem_fraction == 0.75 and plan.cache_ahf == 40.0
    assert plan.hot_pages.pages == [0, 1, 2]


def test_zero_ahf_takes_every_frame():
    assert compute_memory_fraction(counts_of(FIXTURE), 0, 4).mem_fraction == 1.0


def test_single_page_literal_order():
    plan = compute_memory_fraction(counts_of([10]), 400, 4)
    assert plan.mem_frames == 1 and plan.mem_fraction == 0.25


def test_edge_cases():
    assert compute_memory_fraction(PageAccessCounts({}), 10, 4).mem_frames == 0
    with pytest.raises(DomainError):
        compute_memory_fraction(counts_of(FIXTURE), 10, 0)


counts_st = st.dictionaries(st.integers(0, 500), st.integers(1, 1000), max_size=80)


@given(counts_st, st.integers(0, 10**5), st.integers(1, 64))
def test_matches_literal_oracle(counts, hits, frames):
    want, _ = memory_fraction_literal(counts, hits, frames)
    assert compute_memory_fraction(PageAccessCounts(counts), hits, frames).mem_frames == want


@given(counts_st.filter(bool), st.integers(0, 10**4), st.integers(1, 64), st.integers(2, 9))
def test_scale_invariance(counts, hits, frames, k):
    a = compute_memory_fraction(PageAccessCounts(counts), hits, frames).mem_frames
    b = compute_memory_fraction(PageAccessCounts({p: c * k for p, c in counts.items()}), hits * k, frames).mem_frames
    assert a == b and a >= 1


@given(counts_st, st.integers(0, 10**4), st.integers(0, 10**4), st.integers(1, 64))
def test_monotone_in_cache_hits(counts, h1, h2, frames):
    lo, hi = sorted((h1, h2))
    c = PageAccessCounts(counts)
    assert compute_memory_fraction(c, hi, frames).mem_frames <= compute_memory_fraction(c, lo, frames).mem_frames


def test_plan_round_trip(tmp_path):
    plan = compute_memory_fraction(counts_of(FIXTURE), 160, 4)
    plan.save(tmp_path / "p.json")
    import json

    assert PartitionPlan.from_dict(json.loads((tmp_path / "p.json").read_text())) == plan


def test_even_partitions():
    assert even_partitions(4 * 4096, 5) == [(0, 16384), (4096, 12288), (8192, 8192), (12288, 4096), (16384, 0)]


def test_sweep_endpoints_are_identities(small_stacked, offchip):
    t = generate(SyntheticTraceSpec(n_hot_pages=400, total_records=30_000, rng_seed=11))
    cap = small_stacked.capacity
    for cache in (UnisonConfig(), BansheeConfig()):
        lo, hi = partition_sweep(t, cache, [(0, cap), (cap, 0)], small_stacked, offchip)
        bare = simulate(cache, t, small_stacked, offchip)
        ideal = simulate(IdealMemoryConfig(), t, small_stacked, offchip)
        assert lo.results() == bare.results()
        assert hi.results() == ideal.results()


def test_sweep_rejects_bad_sums(small_stacked, offchip):
    t = generate(SyntheticTraceSpec(total_records=100))
    with pytest.raises(ConfigError):
        partition_sweep(t, BansheeConfig(), [(4096, 4096)], small_stacked, offchip)
