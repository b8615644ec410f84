"""Command line entry point.

Exit codes: 0 ok, 2 config error, 3 invariant violation.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .experiments import ConfigError, ExperimentConfig, InvariantViolation, list_models, run, write_report

EXIT_OK, EXIT_CONFIG, EXIT_VIOLATION = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="effbayes", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one experiment from a JSON config")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (overrides the config)")
    r.add_argument("--seed", type=int)
    r.add_argument("--precision", type=int)

    s = sub.add_parser("suite", help="run the full bound/identity suite")
    s.add_argument("--out", default="suite-out")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--precision", type=int, default=32)
    s.add_argument("--fault", action="store_true", help="tighten every bound by 10%% (harness self-test)")
    s.add_argument("--matrix", nargs="*", help="restrict to these sections")

    sub.add_parser("list-models", help="print the shipped model names")
    return p


def _execute(cfg: ExperimentConfig, out: str | None) -> int:
    report = run(cfg)
    out = out or cfg.output or f"{cfg.experiment}-out"
    for path in write_report(report, out):
        print(f"wrote {path}")
    bad = report.violations()
    print(f"{len(report.rows)} checks, {len(bad)} violations")
    for row in bad[:20]:
        print(f"  VIOLATION {row.check} [{row.params}] {row.lhs} {row.relation} {row.rhs}")
    return EXIT_OK if not bad else EXIT_VIOLATION


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "list-models":
            for name, desc in list_models():
                print(f"{name:24s} {desc}")
            return EXIT_OK
        if args.command == "run":
            cfg = ExperimentConfig.load(args.config)
            overrides = {k: v for k, v in (("seed", args.seed), ("precision", args.precision)) if v is not None}
            if overrides:
                cfg = dataclasses.replace(cfg, **overrides)
            return _execute(cfg, args.out)
        params = {"fault": args.fault}
        if args.matrix is not None:
            params["matrix"] = args.matrix
        cfg = ExperimentConfig("suite", seed=args.seed, precision=args.precision, params=params)
        return _execute(cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
