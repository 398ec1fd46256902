"""Off-chip traffic and speedup as stacked capacity shifts from cache to memory."""

from stacksim.config import parse_config
from stacksim.experiments import sweep
from stacksim.metrics import write_csv

from _common import WORKLOADS, experiment, parser


def main():
    p = parser(__doc__)
    p.add_argument("--points", type=int, default=5)
    p.add_argument("--cache", default="banshee", choices=["alloy", "unison", "banshee"])
    args = p.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for w in ("hot", "uniform"):
        base = parse_config(experiment({"name": args.cache, "params": {}}, WORKLOADS[w], args))
        rows, cols, _ = sweep("partition", base, {"points": args.points})
        (args.out_dir / f"partition_{w}_{args.cache}.csv").write_text(write_csv(rows, columns=cols))
        print(f"== {w} ({args.cache}) ==")
        for r in rows:
            print(f"  {r['partition']:>18}  offchip_Data={r['offchip_Data']:>10}  speedup={r['speedup']:.3f}")


if __name__ == "__main__":
    main()
