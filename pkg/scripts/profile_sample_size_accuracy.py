"""How well a prefix of the trace predicts the whole-trace hot set."""

from stacksim.config import parse_config
from stacksim.experiments import sweep
from stacksim.metrics import write_csv

from _common import WORKLOADS, experiment, parser


def main():
    p = parser(__doc__)
    p.add_argument("--k", type=int, default=1000, help="hot-set size compared")
    args = p.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    fractions = [0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0]
    for w in ("hot", "transient"):
        base = parse_config(experiment({"name": "idealmem", "params": {}}, WORKLOADS[w], args))
        rows, cols, _ = sweep("sample_size", base, {"fractions": fractions, "k": args.k})
        (args.out_dir / f"sample_size_{w}.csv").write_text(write_csv(rows, columns=cols))
        print(w, " ".join(f"{r['fraction']}:{r['accuracy']:.3f}" for r in rows))


if __name__ == "__main__":
    main()
