"""Organizations that use stacked DRAM as (part of) main memory."""

from __future__ import annotations

from collections import Counter

from stacksim.orgs.base import (
    FRAME,
    O_REPL,
    S_DATA,
    S_REPL,
    SWAPPED,
    Organization,
    ServedBy,
    ServiceOutcome,
    put,
)
from stacksim.orgs.config import HmaConfig, HmaMode
from stacksim.profiler import ranked_pages
from stacksim.trace import BLOCK_SIZE

MEM = ServedBy.STACKED_MEMORY


class _StaticMemory(Organization):
    """Pages in ``frame_of`` live in stacked frames; everything else is off-chip."""

    page_size = FRAME

    def __init__(self, stacked, offchip, hot_pages=(), rows=None):
        super().__init__(stacked, offchip, rows)
        self.frame_of = {p: i for i, p in enumerate(hot_pages)}

    def _memory(self, frame, addr, ledger):
        put(ledger, S_DATA, BLOCK_SIZE)
        return ServiceOutcome(MEM, self.srows.access(frame * self.page_size + addr % self.page_size, BLOCK_SIZE))


class IdealMemory(_StaticMemory):
    """Stacked memory statically holding the hottest pages (top-K by whole-trace profile)."""

    name = "idealmem"

    def __init__(self, hot_pages, stacked, offchip, rows=None):
        super().__init__(stacked, offchip, list(hot_pages)[: stacked.frames], rows)

    def access(self, addr, is_write, ledger):
        f = self.frame_of.get(addr // self.page_size)
        if f is None:
            return self._offchip(addr, ledger)
        return self._memory(f, addr, ledger)


class HMA(Organization):
    """Stacked memory re-populated every ``interval_misses`` records from that interval's counts.

    Pages that enter evict the coldest residents that fell out of the
    interval's top-K. Accounted mode charges each swapped pair four page
    transfers (two per device) and ``swap_latency`` per interval.
    """

    name = "hma"

    def __init__(self, cfg: HmaConfig, stacked, offchip, rows=None):
        super().__init__(stacked, offchip, rows)
        self.cfg = cfg
        self.page_size = cfg.page_size
        self.nframes = stacked.capacity // cfg.page_size
        self.frame_of: dict[int, int] = {}
        self.free = list(range(self.nframes - 1, -1, -1))
        self.interval = Counter()
        self.seen = 0

    def access(self, addr, is_write, ledger):
        page = addr // self.page_size
        self.interval[page] += 1
        f = self.frame_of.get(page)
        if f is None:
            out = self._offchip(addr, ledger)
        else:
            put(ledger, S_DATA, BLOCK_SIZE)
            out = ServiceOutcome(MEM, self.srows.access(f * self.page_size + addr % self.page_size, BLOCK_SIZE))
        self.seen += 1
        if self.seen % self.cfg.interval_misses == 0:
            self._swap(ledger)
            return out._replace(flags=SWAPPED)
        return out

    def _swap(self, ledger):
        counts = self.interval
        top = ranked_pages(counts, self.nframes)
        keep = set(top)
        entering = [p for p in top if p not in self.frame_of]
        need = len(entering) - len(self.free)
        if need > 0:
            stale = [p for p in self.frame_of if p not in keep]
            stale.sort(key=lambda p: (counts.get(p, 0), -p))
            for p in stale[:need]:
                self.free.append(self.frame_of.pop(p))
        self.free.sort(reverse=True)
        pairs = max(0, need)
        for p in entering:
            self.frame_of[p] = self.free.pop()

        self.swap_interval_count += 1
        self.swapped_pages += len(entering)
        if self.cfg.mode is HmaMode.ACCOUNTED:
            ps = self.page_size
            # a pair: read+write the incoming page and read+write the outgoing one
            for _ in range(pairs):
                put(ledger, S_REPL, 2 * ps)
                put(ledger, O_REPL, 2 * ps)
            for _ in range(len(entering) - pairs):
                put(ledger, S_REPL, ps)
                put(ledger, O_REPL, ps)
            self.swap_stall += self.cfg.swap_latency
        self.interval = Counter()


class MemCache(_StaticMemory):
    """Hybrid: hot pages pinned in the first ``mem_frames`` frames, the rest run a cache."""

    name = "memcache"

    def __init__(self, plan, stacked, offchip, inner, rows=None):
        super().__init__(stacked, offchip, plan.hot_pages, rows)
        self.plan = plan
        self.inner = inner

    def access(self, addr, is_write, ledger):
        f = self.frame_of.get(addr // self.page_size)
        if f is None:
            return self.inner.access(addr, is_write, ledger)
        return self._memory(f, addr, ledger)

    def counters(self):
        return self.inner.counters()
