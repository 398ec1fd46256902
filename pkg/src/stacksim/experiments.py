"""Experiment runner: single runs, side-by-side comparisons, and parameter sweeps."""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Mapping, Sequence

from stacksim.config import ExperimentConfig, parse_config
from stacksim.errors import ConfigError
from stacksim.metrics import RunReport, csv_row, write_csv
from stacksim.orgs.base import FRAME, NoStacked
from stacksim.orgs.config import BansheeConfig, MemCachePlan, cache_config_from_dict, org_config_from_dict
from stacksim.orgs.simulate import default_warmup, resolve, run_records, simulate
from stacksim.partition import auto_plan, even_partitions
from stacksim.profiler import accuracy_vs_sample_size, memory_serve_fraction_over_time, profile, ranked_pages, top_k
from stacksim.trace import Trace

SWEEP_KINDS = ("partition", "dram_size", "sample_size", "stability")


def threads() -> int:
    try:
        return max(1, int(os.environ.get("STACKSIM_THREADS", "1")))
    except ValueError:
        raise ConfigError("STACKSIM_THREADS must be an integer") from None


def organization_config(cfg: ExperimentConfig, trace: Trace):
    """Turn the config's organization entry into a concrete org config (plus partition plan, if any)."""
    name, params = cfg.org_name, cfg.organization["params"]
    if name != "memcache":
        return org_config_from_dict(cfg.organization), None
    cache = resolve(cache_config_from_dict(params.get("cache", {"name": BansheeConfig.name})), trace, cfg.stacked)
    part = params.get("partition", "auto")
    if part == "auto":
        plan = auto_plan(
            trace,
            cache,
            cfg.stacked,
            cfg.offchip,
            cfg.seed,
            include_writebacks=params.get("hits_include_writebacks", True),
            cache_hits=params.get("cache_hits"),
        )
        return plan.memcache(cache), plan
    mem_frames = part["mem_bytes"] // FRAME
    if mem_frames > cfg.stacked.frames:
        raise ConfigError("organization.params.partition.mem_bytes exceeds stacked capacity")
    hot = ranked_pages(profile(trace, trace.page_size).counts, mem_frames)
    return MemCachePlan(mem_frames, tuple(hot), cache), None


def run_experiment(cfg: ExperimentConfig, trace: Trace | None = None, baseline=None) -> RunReport:
    trace = trace if trace is not None else cfg.load_trace()
    warm = cfg.warmup_records if cfg.warmup_records is not None else default_warmup(len(trace))
    if warm > len(trace):
        raise ConfigError(f"warmup_records={warm} exceeds trace length {len(trace)}")
    org_cfg, plan = organization_config(cfg, trace)
    echo = {"experiment": cfg.to_dict(), "label": cfg.label}
    if plan is not None:
        echo["plan"] = {
            "mem_frames": plan.mem_frames,
            "total_frames": plan.total_frames,
            "mem_fraction": plan.mem_fraction,
            "cache_ahf": plan.cache_ahf,
            "total_cache_hits": plan.total_cache_hits,
            "frame_size": FRAME,
        }
    return simulate(org_cfg, trace, cfg.stacked, cfg.offchip, cfg.core, warm, cfg.seed, baseline, echo)


def write_outputs(reports: Sequence[RunReport], out_dir, name: str, fmt: str, labels=None) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("json", "both"):
        p = out / f"{name}.json"
        body = [r.to_dict() for r in reports]
        p.write_text(json.dumps(body[0] if len(body) == 1 else body, indent=2, sort_keys=True, default=_default) + "\n")
        written.append(p)
    if fmt in ("csv", "both"):
        p = out / f"{name}.csv"
        labels = labels or [r.config_echo.get("label", "") for r in reports]
        p.write_text(write_csv([csv_row(r, lab) for r, lab in zip(reports, labels)]))
        written.append(p)
    return written


def _default(o):
    if hasattr(o, "to_dict"):
        return o.to_dict()
    raise TypeError(type(o).__name__)


# ---------------------------------------------------------------- compare


def _same_setup(a: ExperimentConfig, b: ExperimentConfig) -> bool:
    return (
        a.trace.to_dict() == b.trace.to_dict()
        and a.stacked == b.stacked
        and a.offchip == b.offchip
        and a.seed == b.seed
        and a.warmup_records == b.warmup_records
    )


def _compare_worker(args):
    cfg_dict, baseline_time = args
    cfg = parse_config(cfg_dict)
    return run_experiment(cfg, baseline=baseline_time).to_dict()


def compare(configs: Sequence[ExperimentConfig]) -> tuple[list[RunReport], str]:
    """Replay one trace through several organizations; returns reports and a ranked summary."""
    if len(configs) < 2:
        raise ConfigError("compare needs at least two configs")
    first = configs[0]
    for c in configs[1:]:
        if not _same_setup(first, c):
            raise ConfigError("compare: configs must share trace source, seed, warm-up and device configs")
    trace = first.load_trace()
    warm = first.warmup_records if first.warmup_records is not None else default_warmup(len(trace))
    base = run_records(NoStacked(first.stacked, first.offchip), trace, warm)
    from stacksim.metrics import estimated_time

    base_time = estimated_time(base, first.stacked, first.offchip, first.core)
    n = threads()
    if n > 1:
        with ProcessPoolExecutor(max_workers=n) as pool:
            dicts = list(pool.map(_compare_worker, [(c.to_dict(), base_time) for c in configs]))
        reports = [RunReport.from_dict(d) for d in dicts]
    else:
        reports = [run_experiment(c, trace, base_time) for c in configs]
    ranked = sorted(range(len(reports)), key=lambda i: (-reports[i].speedup_vs_baseline, i))
    lines = ["rank  label                 org        speedup   mpki      offchip_bytes"]
    for r, i in enumerate(ranked, 1):
        rep = reports[i]
        lines.append(
            f"{r:<5} {configs[i].label or rep.organization:<21} {rep.organization:<10} "
            f"{rep.speedup_vs_baseline:<9.4f} {rep.mpki:<9.3f} {rep.ledger.total(1)}"
        )
    return reports, "\n".join(lines) + "\n"


# ---------------------------------------------------------------- sweeps

SAMPLE_COLUMNS = ("fraction", "accuracy")
STABILITY_COLUMNS = ("window", "start_record", "memory_serve_fraction")


def load_sweep(d: Mapping) -> tuple[str, ExperimentConfig, dict]:
    allowed = {"schema", "kind", "base", "params"}
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in sweep config: {sorted(unknown)}")
    if d.get("schema") != 1:
        raise ConfigError("schema: expected 1")
    kind = d.get("kind")
    if kind not in SWEEP_KINDS:
        raise ConfigError(f"kind: expected one of {SWEEP_KINDS}")
    if "base" not in d:
        raise ConfigError("base: required")
    return kind, parse_config(d["base"]), dict(d.get("params") or {})


def sweep(kind: str, base: ExperimentConfig, params: Mapping) -> tuple[list[dict], tuple, list[RunReport]]:
    """Run a sweep; returns CSV rows, their column order, and any simulation reports."""
    trace = base.load_trace()
    if kind == "partition":
        return _sweep_partition(base, trace, params)
    if kind == "dram_size":
        return _sweep_dram_size(base, trace, params)
    if kind == "sample_size":
        _check(params, {"fractions", "k"})
        fractions = params.get("fractions", [0.01, 0.05, 0.1, 0.25, 0.5, 1.0])
        k = params.get("k") or base.stacked.frames
        rows = [{"fraction": f, "accuracy": a} for f, a in accuracy_vs_sample_size(trace, fractions, k)]
        return rows, SAMPLE_COLUMNS, []
    if kind == "stability":
        _check(params, {"k", "window_records", "profile_fraction"})
        k = params.get("k") or base.stacked.frames
        window = params.get("window_records", max(1, len(trace) // 20))
        pf = params.get("profile_fraction", 1.0)
        if not 0 < pf <= 1:
            raise ConfigError("params.profile_fraction must be in (0, 1]")
        n = len(trace) if pf == 1.0 else int(round(pf * len(trace)))
        manifest = top_k(profile(trace[:n], trace.page_size), k)
        series = memory_serve_fraction_over_time(trace, manifest, k, window)
        rows = [{"window": i, "start_record": i * window, "memory_serve_fraction": v} for i, v in enumerate(series)]
        return rows, STABILITY_COLUMNS, []
    raise ConfigError(f"unknown sweep kind {kind!r}")


def _check(params, allowed):
    unknown = set(params) - allowed
    if unknown:
        raise ConfigError(f"unknown sweep param(s): {sorted(unknown)}")


def _cache_of(base: ExperimentConfig):
    if base.org_name == "memcache":
        return cache_config_from_dict(base.organization["params"].get("cache", {"name": "banshee"}))
    if base.org_name in ("alloy", "unison", "banshee"):
        return org_config_from_dict(base.organization)
    raise ConfigError("partition sweep needs a memcache or cache organization in base")


def _sweep_partition(base, trace, params):
    _check(params, {"partitions", "points"})
    cap = base.stacked.capacity
    if "partitions" in params:
        parts = [tuple(p) for p in params["partitions"]]
    else:
        parts = even_partitions(cap, params.get("points", 5))
    if not parts:
        raise ConfigError("params.partitions must be nonempty")
    for mem, cache in parts:
        if mem + cache != cap:
            raise ConfigError(f"partition {mem}/{cache} does not sum to stacked capacity {cap}")
    cache = _cache_of(base)
    configs = []
    for mem, _ in parts:
        org = {"name": "memcache", "params": {"partition": {"mem_bytes": mem}, "cache": cache.to_dict()}}
        configs.append(replace(base, organization=org, label=f"{mem}/{cap - mem}"))
    reports = _run_many(configs, trace)
    rows = [csv_row(r, c.label) for r, c in zip(reports, configs)]
    from stacksim.metrics import CSV_COLUMNS

    return rows, CSV_COLUMNS, reports


def _sweep_dram_size(base, trace, params):
    _check(params, {"capacities"})
    caps = params.get("capacities")
    if not caps:
        raise ConfigError("params.capacities must be a nonempty list of byte counts")
    configs = [
        replace(base, stacked=base.stacked.with_capacity(int(c)), label=str(int(c))) for c in sorted(caps)
    ]
    reports = _run_many(configs, trace)
    rows = [csv_row(r, c.label) for r, c in zip(reports, configs)]
    from stacksim.metrics import CSV_COLUMNS

    return rows, CSV_COLUMNS, reports


def _run_many(configs, trace):
    warm = configs[0].warmup_records if configs[0].warmup_records is not None else default_warmup(len(trace))
    base = run_records(NoStacked(configs[0].stacked, configs[0].offchip), trace, warm)
    from stacksim.metrics import estimated_time

    base_time = estimated_time(base, configs[0].stacked, configs[0].offchip, configs[0].core)
    n = threads()
    if n > 1:
        with ProcessPoolExecutor(max_workers=n) as pool:
            dicts = list(pool.map(_compare_worker, [(c.to_dict(), base_time) for c in configs]))
        return [RunReport.from_dict(d) for d in dicts]
    return [run_experiment(c, trace, base_time) for c in configs]
