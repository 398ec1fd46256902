"""JSON experiment configs (schema 1). Unknown keys are errors."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from stacksim.dram import DramDeviceConfig, offchip_default, stacked_default
from stacksim.errors import ConfigError
from stacksim.metrics import CoreParams
from stacksim.orgs.config import ORG_CONFIGS, cache_config_from_dict, org_config_from_dict
from stacksim.trace import SyntheticTraceSpec, Trace, generate, read_trace

SCHEMA_VERSION = 1
FORMATS = ("json", "csv", "both")

_TOP_KEYS = {"schema", "label", "seed", "trace", "warmup_records", "organization", "stacked", "offchip", "core", "output"}
_MEMCACHE_KEYS = {"partition", "cache", "cache_hits", "hits_include_writebacks"}


@dataclass
class TraceSource:
    path: str | None = None
    synthetic: dict | None = None

    def load(self, seed: int, address_space: int) -> Trace:
        if self.path is not None:
            return read_trace(self.path, address_space)
        spec = dict(self.synthetic)
        spec.setdefault("rng_seed", seed)
        spec.setdefault("address_space", address_space)
        return generate(SyntheticTraceSpec.from_dict(spec))

    def to_dict(self) -> dict:
        return {"path": self.path} if self.path is not None else {"synthetic": dict(self.synthetic)}


@dataclass
class OutputConfig:
    out_dir: str = "."
    format: str = "both"
    name: str = "run"


@dataclass
class ExperimentConfig:
    trace: TraceSource
    organization: dict
    label: str = ""
    seed: int = 0
    warmup_records: int | None = None
    stacked: DramDeviceConfig = field(default_factory=stacked_default)
    offchip: DramDeviceConfig = field(default_factory=offchip_default)
    core: CoreParams = field(default_factory=CoreParams)
    output: OutputConfig = field(default_factory=OutputConfig)
    schema: int = SCHEMA_VERSION

    @property
    def org_name(self) -> str:
        return self.organization["name"]

    def load_trace(self) -> Trace:
        return self.trace.load(self.seed, self.offchip.capacity)

    def to_dict(self) -> dict:
        return {
            "schema": self.schema,
            "label": self.label,
            "seed": self.seed,
            "trace": self.trace.to_dict(),
            "warmup_records": self.warmup_records,
            "organization": self.organization,
            "stacked": self.stacked.to_dict(),
            "offchip": self.offchip.to_dict(),
            "core": self.core.to_dict(),
            "output": vars(self.output).copy(),
        }

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, seed=seed)


def _check_keys(d: Mapping, allowed: set, where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")


def parse_trace_source(d: Any) -> TraceSource:
    if not isinstance(d, Mapping):
        raise ConfigError("trace: expected an object with 'path' or 'synthetic'")
    _check_keys(d, {"path", "synthetic"}, "trace")
    if ("path" in d) == ("synthetic" in d):
        raise ConfigError("trace: give exactly one of 'path' or 'synthetic'")
    if "path" in d:
        return TraceSource(path=str(d["path"]))
    SyntheticTraceSpec.from_dict({"rng_seed": 0, **d["synthetic"]})
    return TraceSource(synthetic=dict(d["synthetic"]))


def parse_organization(d: Any) -> dict:
    if not isinstance(d, Mapping) or "name" not in d:
        raise ConfigError("organization: expected an object with a 'name'")
    _check_keys(d, {"name", "params"}, "organization")
    name = d["name"]
    params = dict(d.get("params") or {})
    if name == "memcache":
        _check_keys(params, _MEMCACHE_KEYS, "organization.params")
        part = params.get("partition", "auto")
        if part != "auto":
            if not isinstance(part, Mapping) or set(part) != {"mem_bytes"} or not isinstance(part["mem_bytes"], int):
                raise ConfigError("organization.params.partition: expected \"auto\" or {\"mem_bytes\": <int>}")
            if part["mem_bytes"] < 0 or part["mem_bytes"] % 4096:
                raise ConfigError("organization.params.partition.mem_bytes must be a non-negative multiple of 4096")
        cache_config_from_dict(params.get("cache", {"name": "banshee"}))
        hits = params.get("cache_hits")
        if hits is not None and (not isinstance(hits, int) or hits < 0):
            raise ConfigError("organization.params.cache_hits must be a non-negative integer")
    elif name in ORG_CONFIGS:
        org_config_from_dict({"name": name, "params": params})
    else:
        raise ConfigError(f"organization.name: {name!r} is not one of {sorted(ORG_CONFIGS)}")
    return {"name": name, "params": params}


def parse_config(d: Mapping) -> ExperimentConfig:
    if not isinstance(d, Mapping):
        raise ConfigError("config must be a JSON object")
    _check_keys(d, _TOP_KEYS, "config")
    if d.get("schema") != SCHEMA_VERSION:
        raise ConfigError(f"schema: expected {SCHEMA_VERSION}, got {d.get('schema')!r}")
    for key in ("trace", "organization"):
        if key not in d:
            raise ConfigError(f"{key}: required")
    seed = d.get("seed", 0)
    if not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError("seed: expected an unsigned 64-bit integer")
    warm = d.get("warmup_records")
    if warm is not None and (not isinstance(warm, int) or warm < 0):
        raise ConfigError("warmup_records: expected a non-negative integer or null")
    out = dict(d.get("output") or {})
    _check_keys(out, {"out_dir", "format", "name"}, "output")
    output = OutputConfig(**out)
    if output.format not in FORMATS:
        raise ConfigError(f"output.format: expected one of {FORMATS}")
    try:
        stacked = DramDeviceConfig.from_dict(d.get("stacked"), stacked_default())
        offchip = DramDeviceConfig.from_dict(d.get("offchip"), offchip_default())
        core = CoreParams.from_dict(_parse_core(d.get("core")))
    except TypeError as e:
        raise ConfigError(str(e)) from None
    return ExperimentConfig(
        trace=parse_trace_source(d["trace"]),
        organization=parse_organization(d["organization"]),
        label=str(d.get("label", "")),
        seed=seed,
        warmup_records=warm,
        stacked=stacked,
        offchip=offchip,
        core=core,
        output=output,
    )


def _parse_core(d):
    d = dict(d or {})
    if d.get("overlap_factor") == "inf":
        d["overlap_factor"] = float("inf")
    return d


def load_config(path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from None
    return parse_config(raw)
