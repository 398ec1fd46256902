"""Shared helpers for the experiment scripts."""

import argparse
from pathlib import Path

MiB = 1 << 20

HOT_HEAVY = {"n_hot_pages": 1000, "hot_access_fraction": 0.9, "zipf_exponent": 0.8}
TRANSIENT_HEAVY = {"n_hot_pages": 1000, "hot_access_fraction": 0.1, "transient_lifetime": 10}
UNIFORM = {"n_hot_pages": 4096, "zipf_exponent": 0.0, "hot_access_fraction": 0.1, "transient_lifetime": 256, "n_transient_pages": 64}
WORKLOADS = {"hot": HOT_HEAVY, "transient": TRANSIENT_HEAVY, "uniform": UNIFORM}


def parser(description: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--records", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--stacked-mib", type=int, default=4, help="stacked DRAM capacity")
    p.add_argument("--out-dir", type=Path, default=Path("results"))
    return p


def experiment(org: dict, workload: dict, args, **extra) -> dict:
    return {
        "schema": 1,
        "seed": args.seed,
        "trace": {"synthetic": {**workload, "total_records": args.records}},
        "organization": org,
        "stacked": {"capacity": args.stacked_mib * MiB},
        **extra,
    }
