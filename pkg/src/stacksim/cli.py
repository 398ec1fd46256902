"""``stacksim`` command line. Exit codes: 0 ok, 1 other failure, 2 config error, 3 trace error."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from stacksim.config import FORMATS, load_config
from stacksim.errors import CapacityError, ConfigError, DomainError, StackSimError, TraceFormatError, TraceValidationError
from stacksim.experiments import compare, load_sweep, run_experiment, sweep, write_outputs
from stacksim.metrics import write_csv
from stacksim.orgs.simulate import EmptyMeasurementError
from stacksim.partition import compute_memory_fraction
from stacksim.profiler import PageAccessCounts, profile
from stacksim.trace import SyntheticTraceSpec, generate, read_trace, write_trace

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_TRACE = 0, 1, 2, 3


def _u64(s: str) -> int:
    v = int(s, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _apply_overrides(cfg, args):
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    out = cfg.output
    if args.out_dir is not None:
        out = replace(out, out_dir=args.out_dir)
    if args.format is not None:
        out = replace(out, format=args.format)
    return replace(cfg, output=out)


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from None


def cmd_gen_trace(args) -> int:
    d = _read_json(args.spec)
    if args.seed is not None:
        d["rng_seed"] = args.seed
    trace = generate(SyntheticTraceSpec.from_dict(d))
    write_trace(args.out, trace)
    print(f"wrote {len(trace)} records to {args.out}")
    return EXIT_OK


def cmd_profile(args) -> int:
    trace = read_trace(args.trace)
    counts = profile(trace, args.page_size)
    counts.save(args.out)
    print(f"{len(counts)} pages, {counts.total_accesses} accesses -> {args.out}")
    return EXIT_OK


def cmd_partition(args) -> int:
    counts = PageAccessCounts.load(args.counts)
    plan = compute_memory_fraction(counts, args.cache_hits, args.frames)
    plan.save(args.out)
    print(f"mem_frames={plan.mem_frames} mem_fraction={plan.mem_fraction!r} -> {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    try:
        report = run_experiment(cfg)
    except EmptyMeasurementError as e:
        write_outputs([e.report], cfg.output.out_dir, cfg.output.name, cfg.output.format)
        raise
    for p in write_outputs([report], cfg.output.out_dir, cfg.output.name, cfg.output.format):
        print(p)
    print(f"{report.organization}: speedup={report.speedup_vs_baseline:.4f} mpki={report.mpki:.3f}")
    return EXIT_OK


def cmd_compare(args) -> int:
    if len(args.config) < 2:
        raise ConfigError("compare needs at least two --config files")
    configs = [_apply_overrides(load_config(p), args) for p in args.config]
    reports, summary = compare(configs)
    out = configs[0].output
    labels = [c.label or r.organization for c, r in zip(configs, reports)]
    for p in write_outputs(reports, out.out_dir, args.name, out.format, labels):
        print(p)
    (Path(out.out_dir) / f"{args.name}_summary.txt").write_text(summary)
    sys.stdout.write(summary)
    return EXIT_OK


def cmd_sweep(args) -> int:
    kind, base, params = load_sweep(_read_json(args.config))
    base = _apply_overrides(base, args)
    rows, columns, reports = sweep(kind, base, params)
    out = Path(base.output.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = f"{base.output.name}_{kind}"
    path = out / f"{name}.csv"
    path.write_text(write_csv(rows, columns=columns))
    print(path)
    if reports and base.output.format in ("json", "both"):
        p = out / f"{name}.json"
        p.write_text(json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True) + "\n")
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stacksim", description="Trace-driven die-stacked DRAM organization simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True, multi=False):
        if config:
            if multi:
                p.add_argument("--config", action="append", required=True, help="experiment config (repeat)")
            else:
                p.add_argument("--config", required=True, help="experiment config JSON")
        p.add_argument("--out-dir", help="output directory (overrides config)")
        p.add_argument("--seed", type=_u64, help="seed override")
        p.add_argument("--format", choices=FORMATS, help="report format (overrides config)")

    p = sub.add_parser("gen-trace", help="generate a synthetic trace")
    p.add_argument("--spec", required=True, help="SyntheticTraceSpec JSON")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=_u64, help="overrides rng_seed")
    p.set_defaults(func=cmd_gen_trace)

    p = sub.add_parser("profile", help="count accesses per page")
    p.add_argument("--trace", required=True)
    p.add_argument("--page-size", type=int, default=4096)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("partition", help="split stacked capacity by average hits per frame")
    p.add_argument("--counts", required=True)
    p.add_argument("--cache-hits", type=int, required=True)
    p.add_argument("--frames", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("simulate", help="run one experiment config")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="replay one trace through several organizations")
    common(p, multi=True)
    p.add_argument("--name", default="compare", help="output file stem")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="partition, dram_size, sample_size or stability sweep")
    common(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TraceFormatError, TraceValidationError) as e:
        print(f"trace error: {e}", file=sys.stderr)
        return EXIT_TRACE
    except (ConfigError, CapacityError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, StackSimError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
