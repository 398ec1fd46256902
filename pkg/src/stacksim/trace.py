"""Post-LLSC trace records: binary file I/O, synthetic generation, and CDF/footprint analyses.

File layout (little-endian)::

    header  : magic b"STKTRC1\\0" (8 B) | page_size u32 | reserved u32
    records : icount u64 | addr u64 | kind u8        (17 B each, packed)
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import asdict, dataclass, fields
from enum import IntEnum
from pathlib import Path
from typing import Iterator, Mapping, NamedTuple, Sequence

import numpy as np

from stacksim.errors import CapacityError, ConfigError, DomainError, TraceFormatError, TraceValidationError

MAGIC = b"STKTRC1\0"
HEADER = struct.Struct("<8sII")
RECORD_DTYPE = np.dtype([("icount", "<u8"), ("addr", "<u8"), ("kind", "u1")])
assert RECORD_DTYPE.itemsize == 17

BLOCK_SIZE = 64
DEFAULT_ADDRESS_SPACE = 64 << 30


class Kind(IntEnum):
    READ = 0
    WRITEBACK = 1


class TraceRecord(NamedTuple):
    icount: int
    addr: int
    kind: Kind = Kind.READ


class CdfPoint(NamedTuple):
    page_rank_fraction: float
    access_fraction: float


@dataclass
class Trace:
    """A trace held as three parallel numpy columns.

    Iterating yields :class:`TraceRecord` objects; simulators that care about
    speed should read the columns directly.
    """

    icount: np.ndarray
    addr: np.ndarray
    kind: np.ndarray
    page_size: int = 4096

    def __post_init__(self):
        self.icount = np.ascontiguousarray(self.icount, dtype=np.uint64)
        self.addr = np.ascontiguousarray(self.addr, dtype=np.uint64)
        self.kind = np.ascontiguousarray(self.kind, dtype=np.uint8)
        if not (len(self.icount) == len(self.addr) == len(self.kind)):
            raise ValueError("trace columns differ in length")

    @classmethod
    def empty(cls, page_size: int = 4096) -> "Trace":
        z = np.zeros(0, dtype=np.uint64)
        return cls(z, z.copy(), np.zeros(0, dtype=np.uint8), page_size)

    @classmethod
    def from_records(cls, records: Sequence[TraceRecord], page_size: int = 4096) -> "Trace":
        records = list(records)
        return cls(
            np.array([r.icount for r in records], dtype=np.uint64),
            np.array([r.addr for r in records], dtype=np.uint64),
            np.array([int(r.kind) for r in records], dtype=np.uint8),
            page_size,
        )

    def __len__(self) -> int:
        return len(self.addr)

    def __iter__(self) -> Iterator[TraceRecord]:
        for ic, a, k in zip(self.icount.tolist(), self.addr.tolist(), self.kind.tolist()):
            yield TraceRecord(ic, a, Kind(k))

    def __getitem__(self, item):
        if isinstance(item, slice):
            return Trace(self.icount[item], self.addr[item], self.kind[item], self.page_size)
        return TraceRecord(int(self.icount[item]), int(self.addr[item]), Kind(int(self.kind[item])))

    def __eq__(self, other):
        if not isinstance(other, Trace):
            return NotImplemented
        return (
            self.page_size == other.page_size
            and np.array_equal(self.icount, other.icount)
            and np.array_equal(self.addr, other.addr)
            and np.array_equal(self.kind, other.kind)
        )

    def pages(self, page_size: int | None = None) -> np.ndarray:
        return self.addr // np.uint64(page_size or self.page_size)

    def to_bytes(self) -> bytes:
        recs = np.empty(len(self), dtype=RECORD_DTYPE)
        recs["icount"] = self.icount
        recs["addr"] = self.addr
        recs["kind"] = self.kind
        return HEADER.pack(MAGIC, self.page_size, 0) + recs.tobytes()

    def digest(self) -> str:
        return hashlib.sha256(self.to_bytes()).hexdigest()

    def validate(self, address_space: int | None = None) -> None:
        check_monotone(self.icount)
        bad = np.flatnonzero(self.kind > 1)
        if bad.size:
            raise TraceValidationError(f"record {bad[0]}: invalid kind {self.kind[bad[0]]}", int(bad[0]))
        if address_space is not None:
            bad = np.flatnonzero(self.addr >= np.uint64(address_space))
            if bad.size:
                i = int(bad[0])
                raise TraceValidationError(
                    f"record {i}: address {int(self.addr[i]):#x} outside {address_space:#x}-byte space", i
                )


def check_monotone(icount: np.ndarray, offset: int = 0, previous: int | None = None) -> None:
    if previous is not None and len(icount) and int(icount[0]) < previous:
        raise TraceValidationError(f"record {offset}: icount decreases", offset)
    if len(icount) > 1:
        bad = np.flatnonzero(icount[1:] < icount[:-1])
        if bad.size:
            i = offset + int(bad[0]) + 1
            raise TraceValidationError(f"record {i}: icount decreases", i)


def concatenate(traces: Sequence[Trace]) -> Trace:
    """Join traces end to end, shifting each icount column to keep it monotone."""
    if not traces:
        return Trace.empty()
    page_size = traces[0].page_size
    parts, base = [], 0
    for t in traces:
        if t.page_size != page_size:
            raise ValueError("cannot concatenate traces with different page sizes")
        parts.append(t.icount + np.uint64(base))
        if len(t):
            base += int(t.icount[-1])
    return Trace(
        np.concatenate(parts),
        np.concatenate([t.addr for t in traces]),
        np.concatenate([t.kind for t in traces]),
        page_size,
    )


# ---------------------------------------------------------------- file I/O


def write_trace(path, records: Trace | Sequence[TraceRecord], page_size: int | None = None) -> None:
    trace = records if isinstance(records, Trace) else Trace.from_records(records, page_size or 4096)
    if page_size is not None and page_size != trace.page_size:
        trace = Trace(trace.icount, trace.addr, trace.kind, page_size)
    Path(path).write_bytes(trace.to_bytes())


def _read_header(fh) -> int:
    raw = fh.read(HEADER.size)
    if len(raw) != HEADER.size:
        raise TraceFormatError("truncated header")
    magic, page_size, _reserved = HEADER.unpack(raw)
    if magic != MAGIC:
        raise TraceFormatError(f"bad magic {magic!r}")
    return page_size


def read_trace(path, address_space: int | None = None) -> Trace:
    """Load a whole trace file, validating header, icount order and addresses."""
    with open(path, "rb") as fh:
        page_size = _read_header(fh)
        body = fh.read()
    if len(body) % RECORD_DTYPE.itemsize:
        raise TraceFormatError(
            f"body length {len(body)} is not a multiple of {RECORD_DTYPE.itemsize}-byte records"
        )
    recs = np.frombuffer(body, dtype=RECORD_DTYPE)
    trace = Trace(recs["icount"], recs["addr"], recs["kind"], page_size)
    trace.validate(address_space)
    return trace


def iter_trace(path, chunk_records: int = 1 << 20) -> Iterator[TraceRecord]:
    """Stream records from a trace file without loading it whole."""
    with open(path, "rb") as fh:
        _read_header(fh)
        offset, last = 0, None
        while True:
            body = fh.read(chunk_records * RECORD_DTYPE.itemsize)
            if not body:
                return
            if len(body) % RECORD_DTYPE.itemsize:
                raise TraceFormatError("truncated record at end of file")
            recs = np.frombuffer(body, dtype=RECORD_DTYPE)
            check_monotone(recs["icount"], offset, last)
            for ic, a, k in zip(recs["icount"].tolist(), recs["addr"].tolist(), recs["kind"].tolist()):
                yield TraceRecord(ic, a, Kind(k))
            offset += len(recs)
            last = int(recs["icount"][-1])


# ---------------------------------------------------------------- generator


@dataclass(frozen=True)
class SyntheticTraceSpec:
    """Two-population workload: a steady Zipf hot set plus short-lived transient pages.

    ``n_transient_pages`` live transient pages are visited round-robin; each
    retires after ``transient_lifetime`` accesses and is replaced by a page
    number never used before. ``page_base`` shifts every page number, which
    lets two phases with disjoint pages be concatenated.
    """

    n_hot_pages: int = 1000
    n_transient_pages: int = 1
    hot_access_fraction: float = 0.9
    zipf_exponent: float = 0.8
    transient_lifetime: int = 10
    total_records: int = 100_000
    writeback_fraction: float = 0.0
    instructions_per_record: float = 100.0
    rng_seed: int = 0
    page_size: int = 4096
    page_base: int = 0
    address_space: int = DEFAULT_ADDRESS_SPACE

    def __post_init__(self):
        for name in ("hot_access_fraction", "writeback_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name}={v} is not a probability")
        if self.hot_access_fraction > 0 and self.n_hot_pages < 1:
            raise DomainError("n_hot_pages must be >= 1 when hot_access_fraction > 0")
        if self.hot_access_fraction < 1 and (self.n_transient_pages < 1 or self.transient_lifetime < 1):
            raise DomainError("transient pages need n_transient_pages >= 1 and transient_lifetime >= 1")
        if self.zipf_exponent < 0:
            raise DomainError("zipf_exponent must be >= 0")
        if self.total_records < 0:
            raise DomainError("total_records must be >= 0")
        if not self.instructions_per_record > 0:
            raise DomainError("instructions_per_record must be positive")
        if self.page_size < BLOCK_SIZE or self.page_size & (self.page_size - 1):
            raise DomainError("page_size must be a power of two >= 64")
        if not 0 <= self.rng_seed < 2**64:
            raise DomainError("rng_seed must fit in 64 bits")

    @classmethod
    def from_dict(cls, d: Mapping) -> "SyntheticTraceSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown synthetic trace key(s): {sorted(unknown)}")
        try:
            return cls(**d)
        except (DomainError, TypeError) as e:
            raise ConfigError(f"synthetic trace: {e}") from None

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def transient_base(self) -> int:
        return self.page_base + self.n_hot_pages


def zipf_cdf(n: int, exponent: float) -> np.ndarray:
    w = np.arange(1, n + 1, dtype=np.float64) ** -exponent
    c = np.cumsum(w)
    return c / c[-1]


def generate(spec: SyntheticTraceSpec) -> Trace:
    """Generate a trace; identical specs give byte-identical traces."""
    n = spec.total_records
    rng = np.random.Generator(np.random.PCG64(spec.rng_seed))
    is_hot = rng.random(n) < spec.hot_access_fraction
    n_hot_rec = int(is_hot.sum())
    pages = np.empty(n, dtype=np.uint64)

    if n_hot_rec:
        ranks = np.searchsorted(zipf_cdf(spec.n_hot_pages, spec.zipf_exponent), rng.random(n_hot_rec), side="right")
        np.minimum(ranks, spec.n_hot_pages - 1, out=ranks)
        # decouple hotness rank from page number so hot pages are not address-sorted
        page_of_rank = rng.permutation(spec.n_hot_pages).astype(np.uint64) + np.uint64(spec.page_base)
        pages[is_hot] = page_of_rank[ranks]

    n_tr = n - n_hot_rec
    if n_tr:
        j = np.arange(n_tr, dtype=np.uint64)
        live = np.uint64(spec.n_transient_pages)
        generation = (j // live) // np.uint64(spec.transient_lifetime)
        pages[~is_hot] = np.uint64(spec.transient_base) + generation * live + j % live

    if n:
        top = int(pages.max())
        if (top + 1) * spec.page_size > spec.address_space:
            raise CapacityError(
                f"page {top} exceeds the {spec.address_space}-byte address space; "
                "reduce total_records or raise transient_lifetime"
            )

    blocks = rng.integers(0, spec.page_size // BLOCK_SIZE, n, dtype=np.uint64)
    kind = (rng.random(n) < spec.writeback_fraction).astype(np.uint8)
    icount = np.floor(np.arange(1, n + 1, dtype=np.float64) * spec.instructions_per_record + 0.5)
    return Trace(
        icount.astype(np.uint64),
        pages * np.uint64(spec.page_size) + blocks * np.uint64(BLOCK_SIZE),
        kind,
        spec.page_size,
    )


# ---------------------------------------------------------------- analyses


def _count_mapping(counts) -> Mapping[int, int]:
    return counts.counts if hasattr(counts, "counts") else counts


def cdf(counts) -> list[CdfPoint]:
    """Cumulative access share with pages ranked hottest first (ties: lower page id first)."""
    m = _count_mapping(counts)
    items = [(p, c) for p, c in m.items() if c > 0]
    if not items:
        raise DomainError("cdf needs at least one page with a nonzero count")
    items.sort(key=lambda pc: (-pc[1], pc[0]))
    total = sum(c for _, c in items)
    n = len(items)
    out, running = [], 0
    for i, (_, c) in enumerate(items, start=1):
        running += c
        out.append(CdfPoint(i / n, running / total))
    return out


def share_of_top(points: Sequence[CdfPoint], page_fraction: float) -> float:
    """Access share served by the hottest ``page_fraction`` of pages (step interpolation)."""
    best = 0.0
    for p in points:
        if p.page_rank_fraction <= page_fraction + 1e-12:
            best = p.access_fraction
        else:
            break
    return best


def footprint_pages(trace: Trace, page_size: int | None = None) -> int:
    return int(np.unique(trace.pages(page_size)).size) if len(trace) else 0


def footprint_bytes(trace: Trace, page_size: int | None = None) -> int:
    return footprint_pages(trace, page_size) * (page_size or trace.page_size)
