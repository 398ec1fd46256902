"""Offline page profiling, hot-page ranking, and classification-accuracy / stability analyses."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from stacksim.errors import ConfigError, DomainError
from stacksim.trace import BLOCK_SIZE, Trace, TraceRecord


@dataclass
class PageAccessCounts:
    counts: dict = field(default_factory=dict)
    total_accesses: int = 0
    page_size: int = 4096

    def __post_init__(self):
        if self.total_accesses == 0 and self.counts:
            self.total_accesses = sum(self.counts.values())

    def __len__(self):
        return len(self.counts)

    def merge(self, other: "PageAccessCounts") -> "PageAccessCounts":
        if other.page_size != self.page_size:
            raise ValueError("page sizes differ")
        merged = Counter(self.counts)
        merged.update(other.counts)
        return PageAccessCounts(dict(merged), self.total_accesses + other.total_accesses, self.page_size)

    def to_dict(self) -> dict:
        return {
            "page_size": self.page_size,
            "total_accesses": self.total_accesses,
            "counts": {str(p): c for p, c in sorted(self.counts.items())},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "PageAccessCounts":
        counts = {int(p): int(c) for p, c in d["counts"].items()}
        out = cls(counts, int(d.get("total_accesses", sum(counts.values()))), int(d.get("page_size", 4096)))
        if out.total_accesses != sum(counts.values()):
            raise ConfigError("total_accesses does not match the sum of counts")
        return out

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path) -> "PageAccessCounts":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class HotPageManifest:
    pages: list = field(default_factory=list)
    source_records: int = 0

    def __len__(self):
        return len(self.pages)

    def __iter__(self):
        return iter(self.pages)

    def truncated(self, k: int) -> "HotPageManifest":
        return HotPageManifest(self.pages[:k], self.source_records)

    def to_dict(self) -> dict:
        return {"k": len(self.pages), "source_records": self.source_records, "pages": list(self.pages)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "HotPageManifest":
        pages = [int(p) for p in d["pages"]]
        if "k" in d and int(d["k"]) != len(pages):
            raise ConfigError(f"manifest header k={d['k']} but {len(pages)} pages listed")
        return cls(pages, int(d.get("source_records", 0)))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "HotPageManifest":
        return cls.from_dict(json.loads(Path(path).read_text()))


def profile(trace: Trace | Iterable[TraceRecord], page_size: int = 4096) -> PageAccessCounts:
    """Count accesses per page; reads and writebacks count alike."""
    if page_size <= 0 or page_size & (page_size - 1):
        raise DomainError("page_size must be a power of two")
    if isinstance(trace, Trace):
        if not len(trace):
            return PageAccessCounts({}, 0, page_size)
        pages, cnt = np.unique(trace.addr // np.uint64(page_size), return_counts=True)
        return PageAccessCounts(dict(zip(pages.tolist(), cnt.tolist())), len(trace), page_size)
    counts = Counter(r.addr // page_size for r in trace)
    return PageAccessCounts(dict(counts), sum(counts.values()), page_size)


def ranked_pages(counts: Mapping[int, int], k: int | None = None) -> list:
    """Page ids by descending count, ties by ascending id, truncated to ``k``."""
    items = sorted(counts.items(), key=lambda pc: (-pc[1], pc[0]))
    if k is not None:
        items = items[:k]
    return [p for p, _ in items]


def top_k(counts: PageAccessCounts, k: int) -> HotPageManifest:
    if k < 0:
        raise DomainError("k must be >= 0")
    return HotPageManifest(ranked_pages(counts.counts, k), counts.total_accesses)


def classification_accuracy(sample: HotPageManifest, full: HotPageManifest, k: int) -> float:
    """Share of the full profile's top-k pages that the sample's top-k also picks.

    When either manifest is shorter than ``k`` the comparison runs over the
    shorter length.
    """
    if k <= 0:
        raise DomainError("k must be positive")
    n = min(k, len(sample.pages), len(full.pages))
    if n == 0:
        return 0.0
    return len(set(sample.pages[:n]) & set(full.pages[:n])) / n


def accuracy_vs_sample_size(trace: Trace, fractions: Sequence[float], k: int) -> list[tuple[float, float]]:
    if not len(trace):
        raise DomainError("empty trace")
    fractions = list(fractions)
    if not fractions or fractions != sorted(fractions) or fractions[-1] != 1.0:
        raise DomainError("fractions must be ascending and end at 1.0")
    if any(not 0.0 <= f <= 1.0 for f in fractions):
        raise DomainError("fractions must lie in [0, 1]")
    full = top_k(profile(trace, trace.page_size), k)
    out = []
    for f in fractions:
        n = len(trace) if f == 1.0 else int(round(f * len(trace)))
        sample = top_k(profile(trace[:n], trace.page_size), k)
        out.append((f, classification_accuracy(sample, full, k)))
    return out


def memory_serve_fraction_over_time(
    trace: Trace, manifest: HotPageManifest, k: int, window_records: int
) -> list[float]:
    """Per window, the share of records whose page is among the manifest's top k."""
    if window_records <= 0:
        raise DomainError("window_records must be positive")
    hot = np.array(manifest.pages[:k], dtype=np.uint64)
    in_hot = np.isin(trace.pages(), hot)
    out = []
    for start in range(0, len(trace), window_records):
        w = in_hot[start : start + window_records]
        out.append(float(w.sum()) / len(w))
    return out


def average_footprint(trace: Trace, page_size: int | None = None) -> int:
    """Mean distinct 64 B blocks touched per page, rounded up, in [1, page_size/64].

    Stands in for a perfect footprint predictor's transfer size.
    """
    page_size = page_size or trace.page_size
    per_page = page_size // BLOCK_SIZE
    if not len(trace):
        return per_page
    blocks = np.unique(trace.addr // np.uint64(BLOCK_SIZE))
    pages = np.unique(blocks // np.uint64(per_page))
    return int(min(per_page, max(1, -(-len(blocks) // len(pages)))))
