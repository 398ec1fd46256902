"""Replay hot-heavy and transient-heavy traces through every organization and rank them."""

from stacksim.config import parse_config
from stacksim.experiments import compare, write_outputs

from _common import WORKLOADS, experiment, parser

ORGS = [
    ("nostacked", {}),
    ("alloy", {}),
    ("unison", {}),
    ("banshee", {}),
    ("hma", {"interval_misses": 100_000, "mode": "accounted"}),
    ("idealmem", {}),
    ("memcache", {"partition": "auto", "cache": {"name": "banshee"}}),
    ("memcache", {"partition": "auto", "cache": {"name": "unison"}}),
]


def main():
    p = parser(__doc__)
    p.add_argument("--workloads", nargs="+", default=["hot", "transient"], choices=sorted(WORKLOADS))
    args = p.parse_args()
    for w in args.workloads:
        configs = []
        for name, params in ORGS:
            label = name if name != "memcache" else f"memcache-{params['cache']['name']}"
            configs.append(parse_config(experiment({"name": name, "params": params}, WORKLOADS[w], args, label=label)))
        reports, summary = compare(configs)
        write_outputs(reports, args.out_dir, f"compare_{w}", "csv", [c.label for c in configs])
        print(f"== {w} ==\n{summary}")


if __name__ == "__main__":
    main()
