import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stacksim.errors import CapacityError, ConfigError, DomainError, TraceFormatError, TraceValidationError
from stacksim.trace import (
    Kind,
    SyntheticTraceSpec,
    Trace,
    TraceRecord,
    cdf,
    concatenate,
    footprint_pages,
    generate,
    iter_trace,
    read_trace,
    share_of_top,
    write_trace,
)
from stacksim.profiler import profile

from conftest import make_trace

records = st.lists(
    st.tuples(st.integers(0, 2**40), st.integers(0, 2**36 - 1), st.sampled_from([0, 1])), max_size=50
).map(lambda xs: [TraceRecord(ic, a, k) for ic, a, k in sorted(xs, key=lambda r: r[0])])


def test_empty_file_round_trip(tmp_path):
    p = tmp_path / "e.bin"
    write_trace(p, Trace.empty())
    t = read_trace(p)
    assert len(t) == 0
    assert os.path.getsize(p) == 16


def test_three_records_round_trip(tmp_path):
    recs = [TraceRecord(10, 0x1000, Kind.READ), TraceRecord(10, 0x2040, Kind.WRITEBACK), TraceRecord(99, 0xFFC0, 0)]
    p = tmp_path / "t.bin"
    write_trace(p, recs)
    assert os.path.getsize(p) == 16 + 3 * 17
    assert list(read_trace(p)) == recs
    assert list(iter_trace(p, chunk_records=2)) == recs


@given(records)
@settings(max_examples=50)
def test_round_trip_property(tmp_path_factory, recs):
    p = tmp_path_factory.mktemp("rt") / "t.bin"
    write_trace(p, recs, page_size=4096)
    assert list(read_trace(p)) == recs


def test_bad_magic_and_truncation(tmp_path):
    p = tmp_path / "bad.bin"
    p.write_bytes(b"NOTATRACE_______")
    with pytest.raises(TraceFormatError):
        read_trace(p)
    write_trace(p, make_trace([0, 64]))
    p.write_bytes(p.read_bytes()[:-3])
    with pytest.raises(TraceFormatError):
        read_trace(p)


def test_validation_names_record_index(tmp_path):
    t = Trace.from_records([TraceRecord(5, 0, 0), TraceRecord(9, 0, 0), TraceRecord(7, 0, 0)])
    with pytest.raises(TraceValidationError) as e:
        t.validate()
    assert e.value.index == 2
    with pytest.raises(TraceValidationError) as e:
        make_trace([0, 1 << 20]).validate(address_space=1 << 20)
    assert e.value.index == 1
    p = tmp_path / "k.bin"
    write_trace(p, [TraceRecord(1, 0, 0)])
    raw = bytearray(p.read_bytes())
    raw[-1] = 7
    p.write_bytes(bytes(raw))
    with pytest.raises(TraceValidationError):
        read_trace(p)


def test_concatenate_keeps_icount_monotone():
    a, b = make_trace([0, 64]), make_trace([128, 192])
    c = concatenate([a, b])
    c.validate()
    assert len(c) == 4 and np.all(np.diff(c.icount.astype(np.int64)) >= 0)


def test_generator_degenerate_hot_page():
    t = generate(SyntheticTraceSpec(n_hot_pages=1, hot_access_fraction=1.0, total_records=500))
    assert footprint_pages(t) == 1


def test_generator_transient_retirement():
    spec = SyntheticTraceSpec(hot_access_fraction=0.0, transient_lifetime=10, total_records=100)
    counts = profile(generate(spec)).counts
    assert len(counts) == 10 and set(counts.values()) == {10}


def test_generator_hot_share():
    spec = SyntheticTraceSpec(n_hot_pages=1000, zipf_exponent=0.8, hot_access_fraction=0.9, total_records=10**6, rng_seed=42)
    t = generate(spec)
    hot = (t.pages() < spec.n_hot_pages).mean()
    assert abs(hot - 0.9) <= 0.01
    assert share_of_top(cdf(profile(t)), 0.10) >= 0.85


def test_generator_is_deterministic():
    spec = SyntheticTraceSpec(total_records=5000, writeback_fraction=0.2, rng_seed=9)
    assert generate(spec).digest() == generate(spec).digest()
    assert generate(spec).digest() != generate(SyntheticTraceSpec(total_records=5000, writeback_fraction=0.2, rng_seed=10)).digest()


def test_generator_rejects_bad_specs():
    with pytest.raises(DomainError):
        SyntheticTraceSpec(hot_access_fraction=1.5)
    with pytest.raises(ConfigError, match="hot_access_fraction"):
        SyntheticTraceSpec.from_dict({"hot_access_fraction": -0.1})
    with pytest.raises(ConfigError):
        SyntheticTraceSpec.from_dict({"n_hot_page": 3})
    with pytest.raises(CapacityError):
        generate(SyntheticTraceSpec(n_hot_pages=100, total_records=10, address_space=64 * 4096))


def test_cdf_examples():
    pts = cdf({"A": 90, "B": 5, "C": 5})
    assert [(p.page_rank_fraction, p.access_fraction) for p in pts] == pytest.approx([(1 / 3, 0.90), (2 / 3, 0.95), (1.0, 1.0)])
    flat = cdf({i: 7 for i in range(8)})
    assert all(p.page_rank_fraction == pytest.approx(p.access_fraction) for p in flat)


@given(st.dictionaries(st.integers(0, 1000), st.integers(1, 1000), min_size=1))
def test_cdf_is_monotone_and_ends_at_one(counts):
    pts = cdf(counts)
    ys = [p.access_fraction for p in pts]
    assert ys == sorted(ys) and ys[-1] == pytest.approx(1.0)


def test_scaled_round_trip_digest(tmp_path):
    # A 1 GiB file is ~63M records; STACKSIM_FULL_SCALE=1 runs that size.
    n = 63_161_283 if os.environ.get("STACKSIM_FULL_SCALE") else 1 << 20
    t = generate(SyntheticTraceSpec(total_records=n, writeback_fraction=0.1, rng_seed=7))
    p = tmp_path / "big.bin"
    write_trace(p, t)
    assert read_trace(p).digest() == t.digest()
