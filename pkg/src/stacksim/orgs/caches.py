"""DRAM-cache organizations: block-based Alloy, page-based Unison and Banshee."""

from __future__ import annotations

import random
from collections import OrderedDict

from stacksim.orgs.base import (
    FRAME,
    O_DATA,
    O_REPL,
    REPLACED,
    REPLACED_FLUSHED,
    S_DATA,
    S_META,
    S_REPL,
    S_SPEC,
    Organization,
    ServedBy,
    ServiceOutcome,
    put,
)
from stacksim.orgs.config import AlloyConfig, BansheeConfig, UnisonConfig
from stacksim.trace import BLOCK_SIZE

HIT = ServedBy.STACKED_CACHE_HIT
MISS = ServedBy.OFFCHIP


class _CachePortion(Organization):
    """A cache living in ``frames`` stacked frames starting at ``frame_base``."""

    def __init__(self, stacked, offchip, frame_base=0, frames=None, rows=None):
        super().__init__(stacked, offchip, rows)
        self.frame_base = frame_base
        self.frames = stacked.frames if frames is None else frames


class AlloyCache(_CachePortion):
    """Direct-mapped block cache storing tag and data side by side (one TAD per slot).

    Reads allocate; writebacks update a resident block and otherwise bypass.
    """

    name = "alloy"

    def __init__(self, cfg: AlloyConfig, stacked, offchip, frame_base=0, frames=None, rows=None):
        super().__init__(stacked, offchip, frame_base, frames, rows)
        self.cfg = cfg
        self.slots = self.frames * FRAME // cfg.tad_size
        self.tags = [-1] * self.slots
        self.dirty = bytearray(self.slots)
        self.base_addr = frame_base * FRAME
        g = stacked.min_transfer
        tad = -(-cfg.tad_size // g) * g
        self.tad_meta = tad - cfg.block_size

    def access(self, addr, is_write, ledger):
        if not self.slots:
            return self._offchip(addr, ledger)
        bs = self.cfg.block_size
        block = addr // bs
        s = block % self.slots
        lat = self.srows.access(self.base_addr + s * self.cfg.tad_size, self.cfg.tad_size)
        if self.tags[s] == block:
            put(ledger, S_DATA, bs)
            put(ledger, S_META, self.tad_meta)
            if is_write:
                self.dirty[s] = 1
            return ServiceOutcome(HIT, lat)

        # the probe streamed out a TAD that turned out to be the wrong block
        put(ledger, S_SPEC, bs)
        put(ledger, S_META, self.tad_meta)
        put(ledger, O_DATA, BLOCK_SIZE)
        lat += self.orows.access(addr, BLOCK_SIZE)
        if is_write:
            return ServiceOutcome(MISS, lat)
        if self.tags[s] >= 0 and self.dirty[s]:
            put(ledger, O_REPL, bs)
        put(ledger, S_REPL, self.cfg.tad_size)
        self.tags[s] = block
        self.dirty[s] = 0
        return ServiceOutcome(MISS, lat, REPLACED)


class _PageCache(_CachePortion):
    def __init__(self, cfg, stacked, offchip, frame_base=0, frames=None, rows=None):
        super().__init__(stacked, offchip, frame_base, frames, rows)
        self.cfg = cfg
        self.page_size = cfg.page_size
        self.assoc = cfg.associativity
        self.sets = self.frames * FRAME // (cfg.page_size * cfg.associativity)
        fp = cfg.avg_footprint_blocks
        self.footprint = cfg.page_size // BLOCK_SIZE if fp is None else fp

    def _frame_addr(self, s, way, addr):
        return ((self.frame_base * FRAME // self.page_size) + s * self.assoc + way) * self.page_size + addr % self.page_size

    def _fill(self, ledger):
        """Fetch the footprint; the demand block itself was already counted as Data."""
        fp_bytes = self.footprint * BLOCK_SIZE
        if self.footprint > 1:
            put(ledger, O_REPL, fp_bytes - BLOCK_SIZE)
        put(ledger, S_REPL, fp_bytes)

    @staticmethod
    def _evict_dirty(ledger, dirty):
        if dirty:
            n = len(dirty) * BLOCK_SIZE
            put(ledger, S_REPL, n)
            put(ledger, O_REPL, n)


class UnisonCache(_PageCache):
    """4-way page cache, LRU, with perfect way and footprint prediction.

    Every access reads and rewrites the set's tag/LRU metadata (16 B each way).
    Misses allocate for reads and writebacks alike; the demand block goes to
    off-chip memory and the footprint is filled behind it.
    """

    name = "unison"

    def __init__(self, cfg: UnisonConfig, stacked, offchip, frame_base=0, frames=None, rows=None):
        super().__init__(cfg, stacked, offchip, frame_base, frames, rows)
        # per set: page -> [way, dirty block set], in LRU order (oldest first)
        self.table = [OrderedDict() for _ in range(self.sets)]

    def access(self, addr, is_write, ledger):
        if not self.sets:
            return self._offchip(addr, ledger)
        page = addr // self.page_size
        s = page % self.sets
        st = self.table[s]
        e = st.get(page)
        put(ledger, S_META, 16)
        put(ledger, S_META, 16)
        if e is not None:
            st.move_to_end(page)
            put(ledger, S_DATA, BLOCK_SIZE)
            if is_write:
                e[1].add(addr // BLOCK_SIZE)
            return ServiceOutcome(HIT, self.srows.access(self._frame_addr(s, e[0], addr), BLOCK_SIZE))

        if len(st) < self.assoc:
            used = {v[0] for v in st.values()}
            way = min(w for w in range(self.assoc) if w not in used)
        else:
            _, (way, dirty) = st.popitem(last=False)
            self._evict_dirty(ledger, dirty)
        # way-predicted data read that misses
        put(ledger, S_SPEC, BLOCK_SIZE)
        lat = self.srows.access(self._frame_addr(s, way, addr), BLOCK_SIZE)
        put(ledger, O_DATA, BLOCK_SIZE)
        lat += self.orows.access(addr, BLOCK_SIZE)
        self._fill(ledger)
        st[page] = [way, set()]
        return ServiceOutcome(MISS, lat, REPLACED)


class TagBuffer:
    """Set-associative buffer of recent remaps, flushed wholesale past an occupancy threshold."""

    def __init__(self, entries: int, assoc: int, threshold: float):
        self.entries = entries
        self.assoc = assoc
        self.nsets = entries // assoc
        self.limit = threshold * entries
        self.sets = [set() for _ in range(self.nsets)]
        self.occupancy = 0

    def insert(self, page: int) -> int:
        """Add a remap; returns how many flushes it caused."""
        flushes = 0
        ts = self.sets[page % self.nsets]
        if page in ts:
            return 0
        if len(ts) >= self.assoc:
            self.clear()
            flushes += 1
        ts.add(page)
        self.occupancy += 1
        if self.occupancy > self.limit:
            self.clear()
            flushes += 1
        return flushes

    def clear(self):
        for ts in self.sets:
            ts.clear()
        self.occupancy = 0


class BansheeCache(_PageCache):
    """Page cache whose tags live in the page table, with frequency-based lazy replacement.

    A sampled miss reads and writes the set's counters in stacked DRAM. The
    missing page becomes (or stays) a candidate and replaces the coldest
    resident page only when its counter leads by more than ``replace_margin``.
    """

    name = "banshee"

    def __init__(self, cfg: BansheeConfig, stacked, offchip, frame_base=0, frames=None, rows=None, seed=0):
        super().__init__(cfg, stacked, offchip, frame_base, frames, rows)
        self.rng = random.Random(seed)
        self.cmax = (1 << cfg.counter_bits) - 1
        # per set: page -> [way, counter, dirty block set]
        self.resident = [dict() for _ in range(self.sets)]
        self.candidates = [dict() for _ in range(self.sets)]
        self.tag_buffer = TagBuffer(cfg.tag_buffer_entries, cfg.tag_buffer_assoc, cfg.flush_threshold)

    def access(self, addr, is_write, ledger):
        if not self.sets:
            return self._offchip(addr, ledger)
        cfg = self.cfg
        page = addr // self.page_size
        s = page % self.sets
        res = self.resident[s]
        e = res.get(page)
        if e is not None:
            put(ledger, S_DATA, BLOCK_SIZE)
            if is_write:
                e[2].add(addr // BLOCK_SIZE)
            if cfg.count_hits and self.rng.random() < cfg.sampling_coefficient:
                put(ledger, S_META, 32)
                put(ledger, S_META, 32)
                e[1] += 1
                if e[1] >= self.cmax:
                    self._age(s)
            return ServiceOutcome(HIT, self.srows.access(self._frame_addr(s, e[0], addr), BLOCK_SIZE))

        put(ledger, O_DATA, BLOCK_SIZE)
        lat = self.orows.access(addr, BLOCK_SIZE)
        if self.rng.random() >= cfg.sampling_coefficient:
            return ServiceOutcome(MISS, lat)

        put(ledger, S_META, 32)
        put(ledger, S_META, 32)
        cands = self.candidates[s]
        if page not in cands and len(cands) >= cfg.candidates_per_set:
            del cands[min(cands, key=lambda p: (cands[p], p))]
        cands[page] = cands.get(page, 0) + 1
        if cands[page] >= self.cmax:
            self._age(s)

        if len(res) < self.assoc:
            used = {v[0] for v in res.values()}
            way = min(w for w in range(self.assoc) if w not in used)
        else:
            victim = min(res, key=lambda p: (res[p][1], res[p][0]))
            way, vcount, dirty = res[victim]
            if cands[page] <= vcount + cfg.replace_margin:
                return ServiceOutcome(MISS, lat)
            del res[victim]
            self._evict_dirty(ledger, dirty)
            cands[victim] = vcount
        res[page] = [way, cands.pop(page), set()]
        self._trim_candidates(cands)
        self._fill(ledger)
        flushes = self.tag_buffer.insert(page)
        if flushes:
            self.flush_count += flushes
            self.flush_stall += flushes * cfg.flush_latency
            return ServiceOutcome(MISS, lat, REPLACED_FLUSHED)
        return ServiceOutcome(MISS, lat, REPLACED)

    def _trim_candidates(self, cands):
        while len(cands) > self.cfg.candidates_per_set:
            del cands[min(cands, key=lambda p: (cands[p], p))]

    def _age(self, s):
        for e in self.resident[s].values():
            e[1] //= 2
        cands = self.candidates[s]
        for p in cands:
            cands[p] //= 2
