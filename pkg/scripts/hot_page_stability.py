"""Share of each window's accesses that land in a profiled hot set, for a steady and a shifting trace."""

import numpy as np

from stacksim.metrics import write_csv
from stacksim.profiler import memory_serve_fraction_over_time, profile, top_k
from stacksim.trace import SyntheticTraceSpec, concatenate, generate

from _common import HOT_HEAVY, parser


def main():
    p = parser(__doc__)
    p.add_argument("--windows", type=int, default=20)
    args = p.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    n, k = args.records, HOT_HEAVY["n_hot_pages"]
    steady = generate(SyntheticTraceSpec(**HOT_HEAVY, total_records=n, rng_seed=args.seed))
    half = n // 2
    first = generate(SyntheticTraceSpec(**HOT_HEAVY, total_records=half, rng_seed=args.seed))
    second = generate(SyntheticTraceSpec(**HOT_HEAVY, total_records=n - half, rng_seed=args.seed + 1, page_base=1 << 22))
    shifting = concatenate([first, second])
    window = max(1, n // args.windows)
    rows = []
    for name, t in (("steady", steady), ("shifting", shifting)):
        # the hot set is learned from the first half only
        manifest = top_k(profile(t[:half]), k)
        series = memory_serve_fraction_over_time(t, manifest, k, window)
        rows += [{"trace": name, "window": i, "memory_serve_fraction": v} for i, v in enumerate(series)]
        print(f"{name:>8}: mean {np.mean(series):.3f}  min {min(series):.3f}  max {max(series):.3f}")
    (args.out_dir / "hot_page_stability.csv").write_text(write_csv(rows, columns=("trace", "window", "memory_serve_fraction")))


if __name__ == "__main__":
    main()
