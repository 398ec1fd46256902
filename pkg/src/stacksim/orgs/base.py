"""Shared organization machinery: service outcomes and the per-record interface."""

from __future__ import annotations

from enum import Enum, IntEnum
from typing import NamedTuple

from stacksim.dram import Category, Device, DramDeviceConfig, RowBufferModel, TrafficLedger
from stacksim.errors import TraceValidationError
from stacksim.trace import BLOCK_SIZE, Kind, TraceRecord

FRAME = 4096

# flat ledger indices (device * 4 + category)
S_DATA, S_META, S_SPEC, S_REPL = (Device.STACKED * 4 + c for c in Category)
O_DATA, O_META, O_SPEC, O_REPL = (Device.OFFCHIP * 4 + c for c in Category)


class ServedBy(IntEnum):
    STACKED_MEMORY = 0
    STACKED_CACHE_HIT = 1
    OFFCHIP = 2


class Flag(Enum):
    TRIGGERED_FLUSH = "TriggeredFlush"
    TRIGGERED_REPLACEMENT = "TriggeredReplacement"
    TRIGGERED_SWAP_INTERVAL = "TriggeredSwapInterval"


NO_FLAGS = frozenset()
REPLACED = frozenset({Flag.TRIGGERED_REPLACEMENT})
REPLACED_FLUSHED = frozenset({Flag.TRIGGERED_REPLACEMENT, Flag.TRIGGERED_FLUSH})
SWAPPED = frozenset({Flag.TRIGGERED_SWAP_INTERVAL})


class ServiceOutcome(NamedTuple):
    served_by: ServedBy
    latency: float
    flags: frozenset = NO_FLAGS


def put(ledger: TrafficLedger, index: int, nbytes: int) -> None:
    """Record ``nbytes`` at a flat ledger index, rounded to the ledger granule."""
    g = ledger.granule
    ledger.bytes[index] += -(-nbytes // g) * g


class Organization:
    """One stacked-DRAM organization: a record in, a :class:`ServiceOutcome` out.

    Subclasses implement :meth:`access`; every byte they move goes into the
    ledger passed to that call.
    """

    name = ""

    def __init__(self, stacked: DramDeviceConfig, offchip: DramDeviceConfig, rows=None):
        self.stacked = stacked
        self.offchip = offchip
        if rows is None:
            rows = (RowBufferModel(stacked), RowBufferModel(offchip))
        self.srows, self.orows = rows
        self.flush_count = 0
        self.flush_stall = 0.0
        self.swap_interval_count = 0
        self.swapped_pages = 0
        self.swap_stall = 0.0

    def access(self, addr: int, is_write: int, ledger: TrafficLedger) -> ServiceOutcome:
        raise NotImplementedError

    def step(self, record: TraceRecord, ledger: TrafficLedger) -> ServiceOutcome:
        if record.addr >= self.offchip.capacity:
            raise TraceValidationError(f"address {record.addr:#x} outside physical space")
        return self.access(record.addr, int(record.kind == Kind.WRITEBACK), ledger)

    def counters(self) -> dict:
        return {
            "flush_count": self.flush_count,
            "flush_stall": self.flush_stall,
            "swap_interval_count": self.swap_interval_count,
            "swapped_pages": self.swapped_pages,
            "swap_stall": self.swap_stall,
        }

    def _offchip(self, addr: int, ledger: TrafficLedger) -> ServiceOutcome:
        put(ledger, O_DATA, BLOCK_SIZE)
        return ServiceOutcome(ServedBy.OFFCHIP, self.orows.access(addr, BLOCK_SIZE))


class NoStacked(Organization):
    name = "nostacked"

    def access(self, addr, is_write, ledger):
        return self._offchip(addr, ledger)


class Infinite(Organization):
    name = "infinite"

    def access(self, addr, is_write, ledger):
        put(ledger, S_DATA, BLOCK_SIZE)
        return ServiceOutcome(ServedBy.STACKED_MEMORY, self.srows.access(addr, BLOCK_SIZE))
