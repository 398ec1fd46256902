"""Run statistics, the bandwidth-bound time model, and report serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Mapping, Sequence

from stacksim.dram import CATEGORY_NAMES, DEVICE_NAMES, Device, DramDeviceConfig, TrafficLedger
from stacksim.errors import ConfigError, DomainError

SERVED_BY = ("StackedMemory", "StackedCacheHit", "OffChip")


def mpki(misses: int, instructions: int) -> float:
    if instructions <= 0:
        raise DomainError("mpki needs a positive instruction count")
    return 1000.0 * misses / instructions


def bytes_per_instruction(nbytes: int, instructions: int) -> float:
    if instructions <= 0:
        raise DomainError("bytes_per_instruction needs a positive instruction count")
    return nbytes / instructions


# Entry widths back-solved so a 4 GiB cache gives 64 MiB (64 B blocks) and
# 14 MiB (4 KiB pages) of tags.
BLOCK_TAG_BITS = 8
PAGE_TAG_BITS = 112


def tag_storage_estimate(capacity: int, granularity: int, bits_per_entry: int) -> float:
    """Bytes of tag storage for a cache of ``capacity`` bytes managed at ``granularity``."""
    if granularity <= 0 or capacity % granularity:
        raise DomainError("granularity must divide capacity")
    if bits_per_entry <= 0:
        raise DomainError("bits_per_entry must be positive")
    bits = (capacity // granularity) * bits_per_entry
    return bits // 8 if bits % 8 == 0 else bits / 8


@dataclass(frozen=True)
class CoreParams:
    cores: int = 16
    clock_hz: float = 2.8e9
    peak_ipc: float = 4.0
    overlap_factor: float = 4.0

    def __post_init__(self):
        if self.cores <= 0 or self.clock_hz <= 0 or self.peak_ipc <= 0:
            raise ConfigError("core parameters must be positive")
        if not self.overlap_factor > 0:
            raise ConfigError("overlap_factor must be positive (inf disables the latency term)")

    @classmethod
    def from_dict(cls, d: Mapping | None) -> "CoreParams":
        d = dict(d or {})
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown core key(s): {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        if math.isinf(self.overlap_factor):
            d["overlap_factor"] = "inf"
        return d


@dataclass
class RunReport:
    organization: str = ""
    measured_records: int = 0
    measured_instructions: int = 0
    outcomes: dict = field(default_factory=lambda: dict.fromkeys(SERVED_BY, 0))
    read_cache_hits: int = 0
    mpki: float = 0.0
    ledger: TrafficLedger = field(default_factory=TrafficLedger)
    flush_count: int = 0
    flush_stall: float = 0.0
    swap_interval_count: int = 0
    swapped_pages: int = 0
    swap_stall: float = 0.0
    total_latency_ns: float = 0.0
    estimated_time: float = 0.0
    speedup_vs_baseline: float = 0.0
    error: str | None = None
    config_echo: dict = field(default_factory=dict)

    @property
    def offchip_misses(self) -> int:
        return self.outcomes["OffChip"]

    @property
    def cache_hits(self) -> int:
        return self.outcomes["StackedCacheHit"]

    @property
    def stacked_serve_fraction(self) -> float:
        if not self.measured_records:
            return 0.0
        return (self.outcomes["StackedMemory"] + self.outcomes["StackedCacheHit"]) / self.measured_records

    def traffic(self, device: int, category: int | None = None) -> int:
        if category is None:
            return self.ledger.total(device)
        return self.ledger.get(device, category)

    def results(self) -> dict:
        """Every measured quantity; excludes the organization label and config echo."""
        d = self.to_dict()
        d.pop("organization")
        d.pop("config_echo")
        return d

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["outcomes"] = dict(self.outcomes)
        d["ledger"] = self.ledger.to_dict()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_json_default)

    @classmethod
    def from_dict(cls, d: Mapping) -> "RunReport":
        d = dict(d)
        d["ledger"] = TrafficLedger.from_dict(d["ledger"])
        d["outcomes"] = {k: int(d["outcomes"][k]) for k in SERVED_BY}
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls.from_dict(json.loads(text))


def _json_default(o):
    if hasattr(o, "to_dict"):
        return o.to_dict()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def time_breakdown(report: RunReport, stacked: DramDeviceConfig, offchip: DramDeviceConfig, core: CoreParams) -> dict:
    """Components of the time model, in seconds."""
    if stacked.bandwidth <= 0 or offchip.bandwidth <= 0:
        raise ConfigError("device bandwidth must be positive")
    latency = 0.0 if math.isinf(core.overlap_factor) else report.total_latency_ns * 1e-9 / core.overlap_factor
    return {
        "compute": report.measured_instructions / (core.cores * core.peak_ipc * core.clock_hz),
        "stacked": report.ledger.total(Device.STACKED) / stacked.bandwidth,
        "offchip": report.ledger.total(Device.OFFCHIP) / offchip.bandwidth,
        "flush_stall": report.flush_stall,
        "swap_stall": report.swap_stall,
        "latency": latency,
    }


def estimated_time(report: RunReport, stacked: DramDeviceConfig, offchip: DramDeviceConfig, core: CoreParams) -> float:
    t = time_breakdown(report, stacked, offchip, core)
    return max(t["compute"], t["stacked"], t["offchip"]) + t["flush_stall"] + t["swap_stall"] + t["latency"]


def perf_model(
    report: RunReport,
    stacked: DramDeviceConfig,
    offchip: DramDeviceConfig,
    core: CoreParams,
    baseline: "RunReport | float | None" = None,
) -> tuple[float, float]:
    """Return ``(estimated_time, speedup)``; speedup is baseline time over this run's time.

    ``baseline`` is the NoStacked report (or its time); when omitted the run is
    its own baseline.
    """
    t = estimated_time(report, stacked, offchip, core)
    if baseline is None:
        base = t
    elif isinstance(baseline, RunReport):
        base = estimated_time(baseline, stacked, offchip, core)
    else:
        base = float(baseline)
    speedup = base / t if t > 0 else (1.0 if base == t else math.inf)
    return t, speedup


def with_timing(report: RunReport, stacked, offchip, core, baseline=None) -> RunReport:
    t, s = perf_model(report, stacked, offchip, core, baseline)
    return replace(report, estimated_time=t, speedup_vs_baseline=s)


# ---------------------------------------------------------------- CSV

CSV_COLUMNS = (
    "label",
    "organization",
    "partition",
    "mem_fraction",
    "measured_records",
    "measured_instructions",
    "mpki",
    "served_stacked_memory",
    "served_stacked_cache",
    "served_offchip",
    "stacked_serve_fraction",
    *(f"{dev}_{cat}" for dev in DEVICE_NAMES for cat in CATEGORY_NAMES),
    "stacked_total",
    "offchip_total",
    "flush_count",
    "swap_interval_count",
    "estimated_time",
    "speedup",
)


def csv_row(report: RunReport, label: str = "") -> dict:
    echo = report.config_echo or {}
    plan = echo.get("plan") or {}
    partition = ""
    if plan:
        mem_bytes = plan["mem_frames"] * plan.get("frame_size", 4096)
        cache_bytes = (plan["total_frames"] - plan["mem_frames"]) * plan.get("frame_size", 4096)
        partition = f"{mem_bytes}/{cache_bytes}"
    row = {
        "label": label or echo.get("label", ""),
        "organization": report.organization,
        "partition": partition,
        "mem_fraction": plan.get("mem_fraction", ""),
        "measured_records": report.measured_records,
        "measured_instructions": report.measured_instructions,
        "mpki": report.mpki,
        "served_stacked_memory": report.outcomes["StackedMemory"],
        "served_stacked_cache": report.outcomes["StackedCacheHit"],
        "served_offchip": report.outcomes["OffChip"],
        "stacked_serve_fraction": report.stacked_serve_fraction,
        "stacked_total": report.ledger.total(Device.STACKED),
        "offchip_total": report.ledger.total(Device.OFFCHIP),
        "flush_count": report.flush_count,
        "swap_interval_count": report.swap_interval_count,
        "estimated_time": report.estimated_time,
        "speedup": report.speedup_vs_baseline,
    }
    for dev, values in report.ledger.to_dict().items():
        for cat, v in values.items():
            row[f"{dev}_{cat}"] = v
    return row


def write_csv(rows: Sequence[Mapping], fh=None, columns: Sequence[str] = CSV_COLUMNS) -> str:
    buf = fh or io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="raise")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(r.get(k, "")) for k in columns})
    return buf.getvalue() if fh is None else ""


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v
