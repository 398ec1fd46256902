import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stacksim.errors import DomainError
from stacksim.profiler import (
    HotPageManifest,
    PageAccessCounts,
    accuracy_vs_sample_size,
    average_footprint,
    classification_accuracy,
    memory_serve_fraction_over_time,
    profile,
    ranked_pages,
    top_k,
)
from stacksim.trace import SyntheticTraceSpec, concatenate, generate

from conftest import make_trace
from oracles import top_k_sorted


def test_profile_examples():
    assert profile(make_trace([0x40] * 5)).counts == {0: 5}
    assert profile(make_trace([0x0, 0x1000, 0x1FFF])).counts == {0: 1, 1: 2}


def test_profile_sums_to_records():
    t = generate(SyntheticTraceSpec(total_records=20000, rng_seed=4))
    c = profile(t)
    assert sum(c.counts.values()) == c.total_accesses == 20000


def test_top_k_examples():
    assert ranked_pages({"A": 10, "B": 5}, 1) == ["A"]
    assert ranked_pages({7: 5, 3: 5}, 1) == [3]


@given(st.dictionaries(st.integers(0, 10**6), st.integers(1, 50), max_size=300), st.integers(0, 120))
def test_top_k_matches_sort_oracle(counts, k):
    assert ranked_pages(counts, k) == top_k_sorted(counts, k)


def test_classification_accuracy():
    m = HotPageManifest(list(range(100)))
    assert classification_accuracy(m, m, 100) == 1.0
    assert classification_accuracy(HotPageManifest(list(range(100, 200))), m, 100) == 0.0
    shared = HotPageManifest(list(range(75)) + list(range(500, 525)))
    assert classification_accuracy(shared, m, 100) == 0.75
    with pytest.raises(DomainError):
        classification_accuracy(m, m, 0)


def test_sample_size_accuracy():
    t = generate(SyntheticTraceSpec(n_hot_pages=1000, hot_access_fraction=1.0, total_records=200_000, rng_seed=1))
    curve = accuracy_vs_sample_size(t, [0.1, 0.5, 1.0], 100)
    assert curve[-1] == (1.0, 1.0)
    assert dict(curve)[0.5] >= 0.95


def test_sample_size_switching_hot_set():
    a = generate(SyntheticTraceSpec(n_hot_pages=200, hot_access_fraction=1.0, total_records=50_000, rng_seed=2))
    # the second half is slightly longer, so the whole-trace top set lies there
    b = generate(SyntheticTraceSpec(n_hot_pages=200, hot_access_fraction=1.0, total_records=51_000, rng_seed=3, page_base=10_000))
    t = concatenate([a, b])
    assert dict(accuracy_vs_sample_size(t, [0.49, 1.0], 200))[0.49] <= 0.5


def test_serve_fraction_series():
    t = make_trace([0x1000 * (i % 4) for i in range(100)])
    m = top_k(profile(t), 4)
    assert memory_serve_fraction_over_time(t, m, 4, 10) == [1.0] * 10
    hot_then_cold = make_trace([0] * 50 + [0x100000 + 0x1000 * i for i in range(50)])
    series = memory_serve_fraction_over_time(hot_then_cold, HotPageManifest([0]), 1, 10)
    assert series[:5] == [1.0] * 5 and series[5:] == [0.0] * 5


def test_stationary_serve_fraction():
    spec = SyntheticTraceSpec(n_hot_pages=500, hot_access_fraction=0.9, total_records=200_000, rng_seed=5)
    t = generate(spec)
    m = HotPageManifest(list(range(500)))
    series = memory_serve_fraction_over_time(t, m, 500, 10_000)
    assert all(abs(v - 0.9) <= 0.03 for v in series)


def test_counts_and_manifest_files(tmp_path):
    c = profile(make_trace([0, 0, 0x1000]))
    c.save(tmp_path / "c.json")
    assert PageAccessCounts.load(tmp_path / "c.json").counts == c.counts
    m = top_k(c, 1)
    m.save(tmp_path / "m.json")
    assert HotPageManifest.load(tmp_path / "m.json").pages == [0]


def test_average_footprint():
    # page 0 touches 4 blocks, page 1 touches 2: ceil(6/2) = 3
    t = make_trace([0, 64, 128, 192, 0x1000, 0x1040])
    assert average_footprint(t) == 3
    assert average_footprint(make_trace(list(np.arange(64) * 64))) == 64
