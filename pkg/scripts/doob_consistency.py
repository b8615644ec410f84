"""Posterior consistency under sampling for the Bernoulli family.

    python3 scripts/doob_consistency.py --replicas 200 --horizon 2000 --out out/doob
"""

import argparse

from effbayes.experiments import ExperimentConfig, run_doob, write_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", default="bernoulli-lebesgue")
    ap.add_argument("--thetas", nargs="+", default=["1/3", "2/3", "9/10"])
    ap.add_argument("--horizon", type=int, default=2000)
    ap.add_argument("--replicas", type=int, default=200)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="out/doob")
    args = ap.parse_args()
    cfg = ExperimentConfig("doob", model=args.model, horizon=args.horizon, replicas=args.replicas, seed=args.seed,
                           params={"thetas": args.thetas, "workers": args.workers})
    report = run_doob(cfg)
    write_report(report, args.out)
    for row in sorted(report.rows, key=lambda r: r.params):
        print(f"{row.params:50s} converged fraction {float(row.lhs):.3f}  {'ok' if row.holds else 'FAIL'}")


if __name__ == "__main__":
    main()
