import pytest

from stacksim.dram import offchip_default, stacked_default
from stacksim.trace import Kind, Trace, TraceRecord


def make_trace(addrs, kinds=None, step=100, page_size=4096) -> Trace:
    """Records at icount step, 2*step, ...; all reads unless ``kinds`` says otherwise."""
    kinds = kinds or [Kind.READ] * len(addrs)
    return Trace.from_records(
        [TraceRecord((i + 1) * step, a, k) for i, (a, k) in enumerate(zip(addrs, kinds))], page_size
    )


@pytest.fixture
def small_stacked():
    """1 MiB stacked device: 256 frames, 64 four-way page-cache sets."""
    return stacked_default(capacity=1 << 20)


@pytest.fixture
def offchip():
    return offchip_default()
