"""Memory/cache capacity partitioning by average hits per frame, and partition sweeps."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from stacksim.dram import DramDeviceConfig, offchip_default, stacked_default
from stacksim.errors import ConfigError, DomainError
from stacksim.metrics import CoreParams, RunReport
from stacksim.orgs.base import FRAME, NoStacked
from stacksim.orgs.config import MemCachePlan
from stacksim.orgs.simulate import build, default_warmup, resolve, run_records, simulate
from stacksim.profiler import HotPageManifest, PageAccessCounts, profile, ranked_pages
from stacksim.trace import Trace


@dataclass
class PartitionPlan:
    mem_frames: int
    mem_fraction: float
    cache_ahf: float
    hot_pages: HotPageManifest = field(default_factory=HotPageManifest)
    total_frames: int = 0
    total_cache_hits: int = 0

    def to_dict(self) -> dict:
        return {
            "mem_frames": self.mem_frames,
            "mem_fraction": self.mem_fraction,
            "cache_ahf": self.cache_ahf,
            "total_frames": self.total_frames,
            "total_cache_hits": self.total_cache_hits,
            "hot_pages": self.hot_pages.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "PartitionPlan":
        d = dict(d)
        d["hot_pages"] = HotPageManifest.from_dict(d["hot_pages"])
        return cls(**d)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    def memcache(self, cache_config) -> MemCachePlan:
        return MemCachePlan(self.mem_frames, tuple(self.hot_pages.pages), cache_config)


def compute_memory_fraction(counts: PageAccessCounts, total_cache_hits: int, total_frames: int) -> PartitionPlan:
    """Turn frames into memory, hottest page first, while memory keeps up with the cache's AHF.

    The loop condition ``accesses >= frames_used * cacheAHF`` is evaluated
    after each allocation, so the last page taken may fall below the cache
    AHF on its own. Allocation also stops once pages or frames run out.
    """
    if total_frames < 1:
        raise DomainError("total_frames must be >= 1")
    if total_cache_hits < 0:
        raise DomainError("total_cache_hits must be >= 0")
    ranked = ranked_pages(counts.counts)
    table = counts.counts
    mem_frames = 0
    accesses = 0
    # accesses >= mem_frames * (hits / frames), compared without rounding
    while accesses * total_frames >= mem_frames * total_cache_hits:
        if mem_frames == len(ranked) or mem_frames == total_frames:
            break
        accesses += table[ranked[mem_frames]]
        mem_frames += 1
    return PartitionPlan(
        mem_frames=mem_frames,
        mem_fraction=mem_frames / total_frames,
        cache_ahf=total_cache_hits / total_frames,
        hot_pages=HotPageManifest(ranked[:mem_frames], counts.total_accesses),
        total_frames=total_frames,
        total_cache_hits=total_cache_hits,
    )


def full_cache_hits(
    trace: Trace,
    cache_config,
    stacked: DramDeviceConfig,
    offchip: DramDeviceConfig,
    seed: int = 0,
    include_writebacks: bool = True,
) -> int:
    """Stacked hits of the whole-capacity cache over the whole trace (no warm-up)."""
    cfg = resolve(cache_config, trace, stacked)
    report = run_records(build(cfg, stacked, offchip, seed), trace, 0)
    return report.cache_hits if include_writebacks else report.read_cache_hits


def auto_plan(
    trace: Trace,
    cache_config,
    stacked: DramDeviceConfig,
    offchip: DramDeviceConfig,
    seed: int = 0,
    include_writebacks: bool = True,
    counts: PageAccessCounts | None = None,
    cache_hits: int | None = None,
) -> PartitionPlan:
    """Simulate the full-cache design, then split capacity by average hits per frame."""
    counts = counts or profile(trace, trace.page_size)
    if cache_hits is None:
        cache_hits = full_cache_hits(trace, cache_config, stacked, offchip, seed, include_writebacks)
    return compute_memory_fraction(counts, cache_hits, stacked.capacity // FRAME)


def partition_sweep(
    trace: Trace,
    cache_config,
    partitions: Sequence[tuple[int, int]],
    stacked: DramDeviceConfig | None = None,
    offchip: DramDeviceConfig | None = None,
    core: CoreParams | None = None,
    warmup_records: int | None = None,
    seed: int = 0,
) -> list[RunReport]:
    """One MemCache run per ``(mem_bytes, cache_bytes)``; memory holds the profile's hottest pages."""
    stacked = stacked or stacked_default()
    offchip = offchip or offchip_default()
    core = core or CoreParams()
    for mem_bytes, cache_bytes in partitions:
        if mem_bytes + cache_bytes != stacked.capacity:
            raise ConfigError(f"partition {mem_bytes}+{cache_bytes} != stacked capacity {stacked.capacity}")
        if mem_bytes % FRAME or mem_bytes < 0 or cache_bytes < 0:
            raise ConfigError(f"partition ({mem_bytes}, {cache_bytes}) is not whole 4 KiB frames")
    if warmup_records is None:
        warmup_records = default_warmup(len(trace))
    ranked = ranked_pages(profile(trace, trace.page_size).counts)
    cache_config = resolve(cache_config, trace, stacked)
    baseline = run_records(NoStacked(stacked, offchip), trace, warmup_records)
    reports = []
    for mem_bytes, _ in partitions:
        mem_frames = mem_bytes // FRAME
        plan = MemCachePlan(mem_frames, tuple(ranked[:mem_frames]), cache_config)
        reports.append(simulate(plan, trace, stacked, offchip, core, warmup_records, seed, baseline))
    return reports


def even_partitions(capacity: int, points: int) -> list[tuple[int, int]]:
    """``points`` splits from all-cache to all-memory in equal frame steps."""
    if points < 2:
        raise DomainError("need at least the two endpoints")
    frames = capacity // FRAME
    out = []
    for i in range(points):
        mem = (frames * i // (points - 1)) * FRAME
        out.append((mem, capacity - mem))
    return out
