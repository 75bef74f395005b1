#!/usr/bin/env python3
"""Sweep the benchmark suites over a grid of sizes and print a table.

Writes one row per configuration; pass --json to get the raw reports
instead.  Meant for eyeballing scaling behavior, not for publication.
"""

import argparse
import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from alda import bench  # noqa: E402


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tc-sizes", type=int, nargs="*",
                    default=[50, 100, 200, 400])
    ap.add_argument("--rbac-users", type=int, nargs="*",
                    default=[20, 50, 100])
    ap.add_argument("--roles", type=int, default=10)
    ap.add_argument("--updates", type=int, default=30)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()

    reports = []
    for n in args.tc_sizes:
        for rev in (False, True):
            reports.append(bench.bench_tc(n, reverse=rev,
                                          repeat=args.repeat))
    for users in args.rbac_users:
        reports.append(bench.bench_rbac(users, args.roles, args.updates,
                                        seed=args.seed, repeat=args.repeat))

    if args.json:
        print(json.dumps(reports, indent=2))
        return 0

    print(f"{'suite':8} {'size':>6} {'best seconds'}")
    for r in reports:
        if r["suite"] in ("tc", "tc-rev"):
            print(f"{r['suite']:8} {r['n']:>6} {r['seconds']:.3f}")
        else:
            per = "  ".join(f"{k}={v:.3f}" for k, v in r["seconds"].items())
            print(f"{r['suite']:8} {r['users']:>6} {per}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
