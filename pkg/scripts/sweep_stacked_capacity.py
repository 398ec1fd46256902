"""MPKI and speedup of full-cache and MemCache designs as stacked capacity grows."""

from stacksim.config import parse_config
from stacksim.experiments import sweep
from stacksim.metrics import write_csv

from _common import MiB, WORKLOADS, experiment, parser


def main():
    p = parser(__doc__)
    p.add_argument("--capacities-mib", type=int, nargs="+", default=[1, 2, 4, 8])
    args = p.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    caps = [c * MiB for c in args.capacities_mib]
    for org in ({"name": "banshee", "params": {}}, {"name": "memcache", "params": {"partition": "auto"}}):
        base = parse_config(experiment(org, WORKLOADS["hot"], args))
        rows, cols, _ = sweep("dram_size", base, {"capacities": caps})
        (args.out_dir / f"dram_size_{org['name']}.csv").write_text(write_csv(rows, columns=cols))
        print(org["name"], " ".join(f"{int(r['label']) // MiB}MiB:mpki={r['mpki']:.2f},x{r['speedup']:.3f}" for r in rows))


if __name__ == "__main__":
    main()
