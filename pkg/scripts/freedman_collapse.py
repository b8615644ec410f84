"""Posterior collapse onto the positive atom and the matching inconsistency certificates.

    python3 scripts/freedman_collapse.py --replicas 10000 --horizon 100 --out out/freedman
"""

import argparse

from effbayes.experiments import ExperimentConfig, run_freedman, write_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizon", type=int, default=100)
    ap.add_argument("--replicas", type=int, default=10000)
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="out/freedman")
    args = ap.parse_args()
    cfg = ExperimentConfig("freedman", model="freedman-default", horizon=args.horizon, replicas=args.replicas,
                           seed=args.seed, params={"workers": args.workers})
    report = run_freedman(cfg)
    write_report(report, args.out)
    for row in sorted(report.rows, key=lambda r: (r.check, r.params)):
        print(f"{row.check:36s} {row.params:28s} {float(row.lhs):.6g} {row.relation} {float(row.rhs):.6g}"
              f"  {'ok' if row.holds else 'FAIL'}")


if __name__ == "__main__":
    main()
