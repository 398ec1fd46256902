"""DRAM device configuration, 32 B-granular traffic accounting, and an open-page latency model."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from enum import IntEnum
from functools import lru_cache
from typing import Mapping

from stacksim.errors import ConfigError, DomainError

INTERLEAVE = 4096
GB = 10**9


class Device(IntEnum):
    STACKED = 0
    OFFCHIP = 1


class Category(IntEnum):
    DATA = 0
    METADATA = 1
    SPECDATA = 2
    REPLACEMENT = 3


CATEGORY_NAMES = ("Data", "Metadata", "SpecData", "Replacement")
DEVICE_NAMES = ("stacked", "offchip")


@dataclass(frozen=True)
class DramDeviceConfig:
    capacity: int = 4 << 30
    channels: int = 4
    per_channel_bandwidth: float = 21 * GB
    bus_width: int = 16
    min_transfer: int = 32
    row_buffer: int = 8192
    ranks_per_channel: int = 4
    banks_per_rank: int = 8
    tCAS: int = 10
    tRCD: int = 10
    tRP: int = 10
    tRAS: int = 24
    clock_hz: float = 666.5e6

    def __post_init__(self):
        if self.bus_width <= 0 or self.min_transfer <= 0 or self.min_transfer % self.bus_width:
            raise ConfigError("min_transfer must be a positive multiple of bus_width")
        if self.channels <= 0 or self.capacity <= 0 or self.capacity % self.channels:
            raise ConfigError("capacity must be positive and divisible by channels")
        for name in ("tCAS", "tRCD", "tRP", "tRAS", "clock_hz", "row_buffer", "ranks_per_channel", "banks_per_rank"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.per_channel_bandwidth <= 0:
            raise ConfigError("per_channel_bandwidth must be positive")

    @property
    def bandwidth(self) -> float:
        return self.channels * self.per_channel_bandwidth

    @property
    def frames(self) -> int:
        return self.capacity // INTERLEAVE

    @property
    def banks(self) -> int:
        return self.ranks_per_channel * self.banks_per_rank

    def with_capacity(self, capacity: int) -> "DramDeviceConfig":
        return replace(self, capacity=capacity)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping | None, base: "DramDeviceConfig | None" = None) -> "DramDeviceConfig":
        d = dict(d or {})
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown DRAM config key(s): {sorted(unknown)}")
        return replace(base or cls(), **d)


def stacked_default(**overrides) -> DramDeviceConfig:
    return replace(DramDeviceConfig(capacity=4 << 30, channels=4), **overrides)


def offchip_default(**overrides) -> DramDeviceConfig:
    return replace(DramDeviceConfig(capacity=64 << 30, channels=1), **overrides)


def channel_of(addr: int, cfg: DramDeviceConfig) -> int:
    return (addr // INTERLEAVE) % cfg.channels


def round_transfer(nbytes: int, granule: int = 32) -> int:
    return -(-nbytes // granule) * granule


class TrafficLedger:
    """Bytes moved per (device, category); every transfer is rounded up to 32 B."""

    __slots__ = ("bytes", "granule")

    def __init__(self, granule: int = 32):
        self.bytes = [0] * 8
        self.granule = granule

    def transfer(self, device: int, category: int, nbytes: int) -> int:
        if nbytes <= 0:
            raise DomainError("transfer of zero bytes")
        recorded = -(-nbytes // self.granule) * self.granule
        self.bytes[device * 4 + category] += recorded
        return recorded

    def get(self, device: int, category: int) -> int:
        return self.bytes[device * 4 + category]

    def total(self, device: int) -> int:
        i = device * 4
        return sum(self.bytes[i : i + 4])

    def category_total(self, category: int) -> int:
        return self.bytes[category] + self.bytes[4 + category]

    def to_dict(self) -> dict:
        return {
            dev: {cat: self.bytes[d * 4 + c] for c, cat in enumerate(CATEGORY_NAMES)}
            for d, dev in enumerate(DEVICE_NAMES)
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "TrafficLedger":
        led = cls()
        for di, dev in enumerate(DEVICE_NAMES):
            for ci, cat in enumerate(CATEGORY_NAMES):
                led.bytes[di * 4 + ci] = int(d[dev][cat])
        return led

    def __eq__(self, other):
        return isinstance(other, TrafficLedger) and self.bytes == other.bytes

    def __repr__(self):
        return f"TrafficLedger({self.to_dict()})"


def transfer(ledger: TrafficLedger, device: int, category: int, nbytes: int) -> int:
    return ledger.transfer(device, category, nbytes)


@lru_cache(maxsize=None)
def _latency_ns(row_hit: bool, nbytes: int, cfg: DramDeviceConfig) -> float:
    cycles = cfg.tCAS if row_hit else cfg.tRP + cfg.tRCD + cfg.tCAS
    cycles += math.ceil(nbytes / (2 * cfg.bus_width))
    return cycles / cfg.clock_hz * 1e9


def access_latency(row_hit: bool, nbytes: int, cfg: DramDeviceConfig) -> float:
    """Latency in ns: activation (row miss only) + CAS + double-pumped data burst."""
    if nbytes <= 0:
        raise DomainError("access of zero bytes")
    return _latency_ns(bool(row_hit), nbytes, cfg)


class RowBufferModel:
    """Open-row state per (channel, bank); bank = floor(addr / row_buffer) mod banks."""

    __slots__ = ("cfg", "open_rows", "_banks", "_hit", "_miss")

    def __init__(self, cfg: DramDeviceConfig):
        self.cfg = cfg
        self.open_rows: dict[int, int] = {}
        self._banks = cfg.banks
        self._hit: dict[int, float] = {}
        self._miss: dict[int, float] = {}

    def access(self, addr: int, nbytes: int) -> float:
        cfg = self.cfg
        row = addr // cfg.row_buffer
        key = ((addr // INTERLEAVE) % cfg.channels) * self._banks + row % self._banks
        if self.open_rows.get(key) == row:
            table = self._hit
            hit = True
        else:
            self.open_rows[key] = row
            table = self._miss
            hit = False
        lat = table.get(nbytes)
        if lat is None:
            lat = table[nbytes] = access_latency(hit, nbytes, cfg)
        return lat
