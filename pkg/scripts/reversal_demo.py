"""Likelihood gating by test levels: escaping points keep their base posteriors, captured ones degenerate.

    python3 scripts/reversal_demo.py --out out/reversal
"""

import argparse

from effbayes.experiments import ExperimentConfig, run_reversal, write_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", type=int, default=8)
    ap.add_argument("--copies", type=int, default=4)
    ap.add_argument("--depth", type=int, default=6)
    ap.add_argument("--out", default="out/reversal")
    args = ap.parse_args()
    cfg = ExperimentConfig("reversal", horizon=args.depth, params={"levels": args.levels, "copies": args.copies})
    report = run_reversal(cfg)
    write_report(report, args.out)
    for row in sorted(report.rows, key=lambda r: (r.check, r.params)):
        print(f"{row.check:32s} {row.params:34s} {row.lhs} {row.relation} {row.rhs}  {'ok' if row.holds else 'FAIL'}")


if __name__ == "__main__":
    main()
