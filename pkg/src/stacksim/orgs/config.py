"""Per-organization parameter sets; defaults follow the evaluated system."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from enum import Enum
from typing import ClassVar, Mapping, Union

from stacksim.errors import ConfigError


class _OrgConfig:
    name: ClassVar[str] = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, Enum):
                d[k] = v.value
            elif isinstance(v, tuple):
                d[k] = list(v)
        return {"name": self.name, "params": d}

    @classmethod
    def from_params(cls, params: Mapping | None):
        params = dict(params or {})
        unknown = set(params) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown {cls.name} parameter(s): {sorted(unknown)}")
        try:
            return cls(**params)
        except TypeError as e:
            raise ConfigError(str(e)) from None


@dataclass(frozen=True)
class NoStackedConfig(_OrgConfig):
    name: ClassVar[str] = "nostacked"


@dataclass(frozen=True)
class InfiniteConfig(_OrgConfig):
    name: ClassVar[str] = "infinite"


@dataclass(frozen=True)
class AlloyConfig(_OrgConfig):
    name: ClassVar[str] = "alloy"
    block_size: int = 64
    tad_size: int = 72

    def __post_init__(self):
        if self.tad_size < self.block_size or self.block_size <= 0:
            raise ConfigError("tad_size must hold a whole block")


@dataclass(frozen=True)
class UnisonConfig(_OrgConfig):
    name: ClassVar[str] = "unison"
    page_size: int = 4096
    associativity: int = 4
    # None: profile the trace being simulated
    avg_footprint_blocks: int | None = None

    def __post_init__(self):
        _check_page_cache(self)


@dataclass(frozen=True)
class BansheeConfig(_OrgConfig):
    name: ClassVar[str] = "banshee"
    page_size: int = 4096
    associativity: int = 4
    tag_buffer_entries: int = 1024
    tag_buffer_assoc: int = 8
    flush_threshold: float = 0.7
    flush_latency: float = 25e-6
    sampling_coefficient: float = 0.1
    counter_bits: int = 5
    replace_margin: int = 2
    candidates_per_set: int = 4
    count_hits: bool = False
    avg_footprint_blocks: int | None = None

    def __post_init__(self):
        _check_page_cache(self)
        if not 0 < self.flush_threshold <= 1:
            raise ConfigError("flush_threshold must be in (0, 1]")
        if not 0 <= self.sampling_coefficient <= 1:
            raise ConfigError("sampling_coefficient must be in [0, 1]")
        if self.tag_buffer_entries <= 0 or self.tag_buffer_entries % self.tag_buffer_assoc:
            raise ConfigError("tag_buffer_entries must be a positive multiple of tag_buffer_assoc")
        if self.counter_bits < 1 or self.candidates_per_set < 1 or self.replace_margin < 0:
            raise ConfigError("counter_bits and candidates_per_set must be >= 1, replace_margin >= 0")


def _check_page_cache(cfg):
    if cfg.associativity < 1:
        raise ConfigError("associativity must be >= 1")
    fp = cfg.avg_footprint_blocks
    if fp is not None and not 1 <= fp <= cfg.page_size // 64:
        raise ConfigError("avg_footprint_blocks must lie in [1, page_size/64]")


@dataclass(frozen=True)
class IdealMemoryConfig(_OrgConfig):
    name: ClassVar[str] = "idealmem"
    # None: oracle top-K of the whole trace
    hot_pages: tuple | None = None

    def __post_init__(self):
        if self.hot_pages is not None:
            object.__setattr__(self, "hot_pages", tuple(int(p) for p in self.hot_pages))


class HmaMode(str, Enum):
    IDEALIZED = "idealized"
    ACCOUNTED = "accounted"


@dataclass(frozen=True)
class HmaConfig(_OrgConfig):
    name: ClassVar[str] = "hma"
    interval_misses: int = 10**8
    mode: HmaMode = HmaMode.IDEALIZED
    page_size: int = 4096
    # charged per interval in accounted mode only
    swap_latency: float = 25e-6

    def __post_init__(self):
        if self.interval_misses <= 0:
            raise ConfigError("interval_misses must be positive")
        try:
            object.__setattr__(self, "mode", HmaMode(self.mode))
        except ValueError:
            raise ConfigError(f"unknown HMA mode {self.mode!r}") from None


CacheConfig = Union[AlloyConfig, UnisonConfig, BansheeConfig]
CACHE_CONFIGS = {c.name: c for c in (AlloyConfig, UnisonConfig, BansheeConfig)}


@dataclass(frozen=True)
class MemCachePlan(_OrgConfig):
    """Hybrid split: ``mem_frames`` frames host ``hot_pages``; the rest run ``cache_config``."""

    name: ClassVar[str] = "memcache"
    mem_frames: int = 0
    hot_pages: tuple = ()
    cache_config: CacheConfig = BansheeConfig()

    def __post_init__(self):
        pages = tuple(int(p) for p in self.hot_pages)
        object.__setattr__(self, "hot_pages", pages)
        if self.mem_frames < 0:
            raise ConfigError("mem_frames must be >= 0")
        if len(pages) > self.mem_frames:
            raise ConfigError(f"{len(pages)} hot pages do not fit in {self.mem_frames} memory frames")
        if len(set(pages)) != len(pages):
            raise ConfigError("hot_pages must be distinct")
        if isinstance(self.cache_config, Mapping):
            object.__setattr__(self, "cache_config", cache_config_from_dict(self.cache_config))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "params": {
                "mem_frames": self.mem_frames,
                "hot_pages": list(self.hot_pages),
                "cache_config": self.cache_config.to_dict(),
            },
        }


def cache_config_from_dict(d: Mapping) -> CacheConfig:
    name = d.get("name")
    if name not in CACHE_CONFIGS:
        raise ConfigError(f"cache portion must be one of {sorted(CACHE_CONFIGS)}, got {name!r}")
    unknown = set(d) - {"name", "params"}
    if unknown:
        raise ConfigError(f"unknown cache key(s): {sorted(unknown)}")
    return CACHE_CONFIGS[name].from_params(d.get("params"))


ORG_CONFIGS = {
    c.name: c
    for c in (NoStackedConfig, InfiniteConfig, AlloyConfig, UnisonConfig, BansheeConfig, IdealMemoryConfig, HmaConfig, MemCachePlan)
}


def org_config_from_dict(d: Mapping):
    name = d.get("name")
    if name not in ORG_CONFIGS:
        raise ConfigError(f"organization name must be one of {sorted(ORG_CONFIGS)}, got {name!r}")
    unknown = set(d) - {"name", "params"}
    if unknown:
        raise ConfigError(f"unknown organization key(s): {sorted(unknown)}")
    return ORG_CONFIGS[name].from_params(d.get("params"))
