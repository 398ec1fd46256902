from stacksim.orgs.base import Flag, Infinite, NoStacked, Organization, ServedBy, ServiceOutcome
from stacksim.orgs.caches import AlloyCache, BansheeCache, TagBuffer, UnisonCache
from stacksim.orgs.config import (
    AlloyConfig,
    BansheeConfig,
    HmaConfig,
    HmaMode,
    IdealMemoryConfig,
    InfiniteConfig,
    MemCachePlan,
    NoStackedConfig,
    UnisonConfig,
    org_config_from_dict,
)
from stacksim.orgs.memory import HMA, IdealMemory, MemCache
from stacksim.orgs.simulate import EmptyMeasurementError, build, resolve, run_records, simulate

__all__ = [
    "AlloyCache",
    "AlloyConfig",
    "BansheeCache",
    "BansheeConfig",
    "EmptyMeasurementError",
    "Flag",
    "HMA",
    "HmaConfig",
    "HmaMode",
    "IdealMemory",
    "IdealMemoryConfig",
    "Infinite",
    "InfiniteConfig",
    "MemCache",
    "MemCachePlan",
    "NoStacked",
    "NoStackedConfig",
    "Organization",
    "ServedBy",
    "ServiceOutcome",
    "TagBuffer",
    "UnisonCache",
    "UnisonConfig",
    "build",
    "org_config_from_dict",
    "resolve",
    "run_records",
    "simulate",
]
