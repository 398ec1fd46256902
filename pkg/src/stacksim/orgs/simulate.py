"""Build organizations from configs and replay traces through them."""

from __future__ import annotations

from dataclasses import replace

from stacksim.dram import Category, Device, DramDeviceConfig, RowBufferModel, TrafficLedger, offchip_default, stacked_default
from stacksim.errors import AccountingError, ConfigError, DomainError
from stacksim.metrics import SERVED_BY, CoreParams, RunReport, mpki, perf_model
from stacksim.orgs.base import Infinite, NoStacked
from stacksim.orgs.caches import AlloyCache, BansheeCache, UnisonCache
from stacksim.orgs.config import (
    AlloyConfig,
    BansheeConfig,
    HmaConfig,
    IdealMemoryConfig,
    InfiniteConfig,
    MemCachePlan,
    NoStackedConfig,
    UnisonConfig,
)
from stacksim.orgs.memory import HMA, IdealMemory, MemCache
from stacksim.profiler import average_footprint, profile, top_k
from stacksim.trace import BLOCK_SIZE, Trace


class EmptyMeasurementError(DomainError):
    """No records fall after the warm-up boundary; ``report`` holds the zeroed, flagged report."""

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


def build_cache(cfg, stacked, offchip, seed=0, frame_base=0, frames=None, rows=None):
    if isinstance(cfg, AlloyConfig):
        return AlloyCache(cfg, stacked, offchip, frame_base, frames, rows)
    if isinstance(cfg, UnisonConfig):
        return UnisonCache(cfg, stacked, offchip, frame_base, frames, rows)
    if isinstance(cfg, BansheeConfig):
        return BansheeCache(cfg, stacked, offchip, frame_base, frames, rows, seed=seed)
    raise ConfigError(f"not a cache configuration: {cfg!r}")


def build(cfg, stacked: DramDeviceConfig, offchip: DramDeviceConfig, seed: int = 0):
    """Instantiate a fresh organization; trace-dependent fields must already be resolved."""
    if isinstance(cfg, NoStackedConfig):
        return NoStacked(stacked, offchip)
    if isinstance(cfg, InfiniteConfig):
        return Infinite(stacked, offchip)
    if isinstance(cfg, (AlloyConfig, UnisonConfig, BansheeConfig)):
        return build_cache(cfg, stacked, offchip, seed)
    if isinstance(cfg, IdealMemoryConfig):
        if cfg.hot_pages is None:
            raise ConfigError("idealmem needs hot_pages (resolve against a trace first)")
        return IdealMemory(cfg.hot_pages, stacked, offchip)
    if isinstance(cfg, HmaConfig):
        return HMA(cfg, stacked, offchip)
    if isinstance(cfg, MemCachePlan):
        total = stacked.frames
        if cfg.mem_frames > total:
            raise ConfigError(f"mem_frames={cfg.mem_frames} exceeds {total} stacked frames")
        rows = (RowBufferModel(stacked), RowBufferModel(offchip))
        inner = build_cache(cfg.cache_config, stacked, offchip, seed, cfg.mem_frames, total - cfg.mem_frames, rows)
        return MemCache(cfg, stacked, offchip, inner, rows)
    raise ConfigError(f"unknown organization config {cfg!r}")


def resolve(cfg, trace: Trace, stacked: DramDeviceConfig):
    """Fill trace-derived parameters: oracle hot pages and profiled footprints."""
    if isinstance(cfg, (UnisonConfig, BansheeConfig)) and cfg.avg_footprint_blocks is None:
        return replace(cfg, avg_footprint_blocks=average_footprint(trace, cfg.page_size))
    if isinstance(cfg, IdealMemoryConfig) and cfg.hot_pages is None:
        manifest = top_k(profile(trace, trace.page_size), stacked.frames)
        return replace(cfg, hot_pages=tuple(manifest.pages))
    if isinstance(cfg, MemCachePlan):
        return replace(cfg, cache_config=resolve(cfg.cache_config, trace, stacked))
    return cfg


def default_warmup(n: int) -> int:
    return n // 10


def run_records(org, trace: Trace, warmup_records: int) -> RunReport:
    """Replay ``trace``; state evolves throughout but statistics start at ``warmup_records``."""
    n = len(trace)
    if not 0 <= warmup_records <= n:
        raise DomainError(f"warmup_records={warmup_records} outside [0, {n}]")
    addrs = trace.addr.tolist()
    kinds = trace.kind.tolist()
    access = org.access

    granule = org.stacked.min_transfer
    scratch = TrafficLedger(granule)
    for i in range(warmup_records):
        access(addrs[i], kinds[i], scratch)
    before = org.counters()

    ledger = TrafficLedger(granule)
    served = [0, 0, 0]
    read_hits = 0
    latency = 0.0
    for i in range(warmup_records, n):
        out = access(addrs[i], kinds[i], ledger)
        served[out.served_by] += 1
        latency += out.latency
        if out.served_by == 1 and not kinds[i]:
            read_hits += 1
    after = org.counters()

    measured = n - warmup_records
    if measured:
        start = int(trace.icount[warmup_records - 1]) if warmup_records else 0
        instructions = int(trace.icount[-1]) - start
    else:
        instructions = 0
    report = RunReport(
        organization=org.name,
        measured_records=measured,
        measured_instructions=instructions,
        outcomes=dict(zip(SERVED_BY, served)),
        read_cache_hits=read_hits,
        mpki=mpki(served[2], instructions) if instructions > 0 else 0.0,
        ledger=ledger,
        flush_count=after["flush_count"] - before["flush_count"],
        flush_stall=after["flush_stall"] - before["flush_stall"],
        swap_interval_count=after["swap_interval_count"] - before["swap_interval_count"],
        swapped_pages=after["swapped_pages"] - before["swapped_pages"],
        swap_stall=after["swap_stall"] - before["swap_stall"],
        total_latency_ns=latency,
    )
    check_conservation(report)
    return report


def check_conservation(report: RunReport) -> None:
    led = report.ledger
    if sum(report.outcomes.values()) != report.measured_records:
        raise AccountingError("outcome counts do not sum to measured records")
    data = led.category_total(Category.DATA)
    if data != BLOCK_SIZE * report.measured_records:
        raise AccountingError(f"Data bytes {data} != 64 x {report.measured_records} demand records")
    if led.get(Device.OFFCHIP, Category.DATA) != BLOCK_SIZE * report.outcomes["OffChip"]:
        raise AccountingError("off-chip Data does not match off-chip outcomes")
    for dev in Device:
        if led.total(dev) != sum(led.get(dev, c) for c in Category):
            raise AccountingError("ledger total differs from its categories")


def simulate(
    org_config,
    trace: Trace,
    stacked: DramDeviceConfig | None = None,
    offchip: DramDeviceConfig | None = None,
    core: CoreParams | None = None,
    warmup_records: int | None = None,
    seed: int = 0,
    baseline: "RunReport | float | None" = None,
    config_echo: dict | None = None,
) -> RunReport:
    """Run one organization over ``trace`` and fill in timing and speedup.

    ``baseline`` is the NoStacked report or time on the same trace; it is
    simulated here when not supplied.
    """
    stacked = stacked or stacked_default()
    offchip = offchip or offchip_default()
    core = core or CoreParams()
    trace.validate(offchip.capacity)
    if warmup_records is None:
        warmup_records = default_warmup(len(trace))
    cfg = resolve(org_config, trace, stacked)
    report = run_records(build(cfg, stacked, offchip, seed), trace, warmup_records)
    echo = {
        "organization": cfg.to_dict(),
        "stacked": stacked.to_dict(),
        "offchip": offchip.to_dict(),
        "core": core.to_dict(),
        "warmup_records": warmup_records,
        "seed": seed,
    }
    if isinstance(cfg, MemCachePlan):
        echo["plan"] = {
            "mem_frames": cfg.mem_frames,
            "total_frames": stacked.frames,
            "mem_fraction": cfg.mem_frames / stacked.frames if stacked.frames else 0.0,
            "frame_size": stacked.capacity // stacked.frames if stacked.frames else 4096,
        }
    echo.update(config_echo or {})
    report.config_echo = echo
    if report.measured_records == 0:
        report.error = "empty measurement window"
        raise EmptyMeasurementError("no records after warm-up", report)
    if baseline is None:
        if isinstance(cfg, NoStackedConfig):
            baseline = report
        else:
            baseline = run_records(NoStacked(stacked, offchip), trace, warmup_records)
    report.estimated_time, report.speedup_vs_baseline = perf_model(report, stacked, offchip, core, baseline)
    return report
