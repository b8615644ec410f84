"""Experiment drivers, strict JSON configs, and deterministic CSV reports."""

from __future__ import annotations

import contextlib
import csv
import json
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np
import scipy

from . import __version__
from .estimators import ExplosionGuard, chebyshev_check, doob_maximal_check
from .freedman import (
    DEFAULT_TRUTH,
    collapse_trajectory,
    inconsistency_certificate,
    miss_probability,
    separating_event,
)
from .measures import (
    AtomicPrior,
    AtomSet,
    CantorCylinders,
    Complement,
    Intervals,
    JointMeasure,
    Omega,
    event_from_dict,
    sample_path,
)
from .models import MODELS, Model, get_model, model_from_dict
from .numeric import RealOracle, as_fraction, decimal_str, fraction_str
from .posterior import posterior_eval, posterior_trajectory, verify_conditional_expectation
from .randomness import (
    SigmaTwoClass,
    UndecidedMembership,
    lrf_schnorr_test,
    reversal_build,
    sigma2_cover,
    zeros_cylinder_test,
)
from .rng import BitSource
from .spaces import CantorPoint, SimplexPoint, d0_distance, point_from_dict, simplex_closed_set_distance


class ConfigError(ValueError):
    pass


class InvariantViolation(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# configs

EXPERIMENTS = ("doob", "freedman", "reversal", "chebyshev", "doob-maximal", "schnorr-bounds", "cond-exp", "suite")

PARAM_KEYS = {
    "doob": {"thetas", "events", "tol", "checkpoints", "min_fraction", "workers", "emit_trajectories"},
    "freedman": {"true_theta", "certificate_horizons", "cdf_points", "workers", "trajectory_replicas",
                 "ball_radius"},
    "reversal": {"levels", "copies"},
    "chebyshev": {"eps", "ns", "mode"},
    "doob-maximal": {"cases"},
    "schnorr-bounds": {"n_max"},
    "cond-exp": {"depth", "events"},
    "suite": {"matrix", "fault"},
}

TOP_KEYS = {"experiment", "model", "horizon", "replicas", "seed", "output", "precision", "params"}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    model: object = None
    horizon: int = 100
    replicas: int = 1
    seed: int = 0
    output: str | None = None
    precision: int = 32
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; expected one of {', '.join(EXPERIMENTS)}")
        for name in ("horizon", "replicas", "seed", "precision"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise ConfigError(f"{name} must be an integer")
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        if self.replicas < 1:
            raise ConfigError("replicas must be >= 1")
        if self.precision < 4:
            raise ConfigError("precision must be >= 4")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        if not isinstance(self.params, dict):
            raise ConfigError("params must be an object")
        unknown = set(self.params) - PARAM_KEYS[self.experiment]
        if unknown:
            raise ConfigError(f"unknown {self.experiment} params: {', '.join(sorted(unknown))}")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(d) - TOP_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        if "experiment" not in d:
            raise ConfigError("missing 'experiment'")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                d = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(d)

    def model_obj(self, default: str) -> Model:
        try:
            return model_from_dict(self.model if self.model is not None else default)
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad model description: {exc}") from exc


def _param(cfg: ExperimentConfig, key: str, default):
    return cfg.params.get(key, default)


def _fraction_param(cfg, key, default) -> Fraction:
    try:
        return as_fraction(_param(cfg, key, default))
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ConfigError(f"param {key} is not a rational: {exc}") from exc


# ---------------------------------------------------------------------------
# report rows

RELATIONS: dict[str, Callable[[Fraction, Fraction], bool]] = {
    "<=": lambda a, b: a <= b,
    "<": lambda a, b: a < b,
    "==": lambda a, b: a == b,
    ">=": lambda a, b: a >= b,
}


@dataclass(frozen=True)
class CheckRow:
    check: str
    params: str
    relation: str
    lhs: Fraction | None
    rhs: Fraction | None
    holds: bool
    width: Fraction = Fraction(0)       # width of the enclosure the rhs came from (0 when exact)
    estimate: float | None = None
    ci: tuple | None = None

    @property
    def exact(self) -> bool:
        return self.lhs is not None and self.width == 0

    def perturbed(self, factor: Fraction) -> "CheckRow":
        """The same check against rhs * factor (harness self-test)."""
        if self.rhs is None or self.relation == ">=":
            return self
        rhs = self.rhs * factor
        if self.lhs is not None:
            holds = RELATIONS[self.relation](self.lhs, rhs)
        else:
            holds = self.ci[0] <= float(rhs)
        return replace(self, rhs=rhs, holds=holds)

    def key(self):
        return (self.check, self.params)


def exact_row(check: str, params: dict, lhs, rhs, relation: str = "<=") -> CheckRow:
    lhs, rhs = as_fraction(lhs), as_fraction(rhs)
    return CheckRow(check, _params_str(params), relation, lhs, rhs, RELATIONS[relation](lhs, rhs))


def enclosure_row(check: str, params: dict, lhs: Fraction, rhs: RealOracle, holds: bool, k: int) -> CheckRow:
    """rhs is irrational: record the certified upper end and the enclosure width; ``holds`` decided exactly."""
    e = rhs(k)
    return CheckRow(check, _params_str(params), "<=", as_fraction(lhs), e.hi, holds, e.width)


def _params_str(params: dict) -> str:
    def fmt(v):
        if isinstance(v, Fraction):
            return fraction_str(v)
        if isinstance(v, (list, tuple)):
            return "[" + ",".join(fmt(x) for x in v) + "]"
        return str(v)

    return ";".join(f"{k}={fmt(params[k])}" for k in sorted(params))


@dataclass
class RunReport:
    experiment: str
    rows: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)        # name -> (header, rows)
    documents: dict = field(default_factory=dict)     # name -> JSON-serializable object
    metadata: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return all(r.holds for r in self.rows)

    def violations(self) -> list[CheckRow]:
        return [r for r in self.rows if not r.holds]

    def merge(self, other: "RunReport"):
        self.rows.extend(other.rows)
        for name, (header, rows) in other.tables.items():
            if name in self.tables:
                self.tables[name][1].extend(rows)
            else:
                self.tables[name] = (header, list(rows))
        self.documents.update(other.documents)


CHECK_HEADER = ("check_name", "params", "relation", "lhs_num", "lhs_den", "lhs_decimal", "rhs_num", "rhs_den",
                "rhs_decimal", "enclosure_width", "estimate", "ci_lo", "ci_hi", "exact", "holds")


def _num_den(q):
    return ("", "", "") if q is None else (q.numerator, q.denominator, decimal_str(q))


def _float(x):
    return "" if x is None else f"{x:.12g}"


def check_rows_csv(rows) -> list[tuple]:
    out = []
    for r in sorted(rows, key=CheckRow.key):
        ci = r.ci or (None, None)
        out.append((r.check, r.params, r.relation, *_num_den(r.lhs), *_num_den(r.rhs), decimal_str(r.width),
                    _float(r.estimate), _float(ci[0]), _float(ci[1]), int(r.exact), int(r.holds)))
    return out


@contextlib.contextmanager
def _unbounded_int_str():
    # exact rationals here can run to tens of thousands of digits
    getter = getattr(sys, "get_int_max_str_digits", None)
    if getter is None:
        yield
        return
    old = getter()
    sys.set_int_max_str_digits(0)
    try:
        yield
    finally:
        sys.set_int_max_str_digits(old)


def write_report(report: RunReport, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    with _unbounded_int_str():
        path = out / "checks.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CHECK_HEADER)
            w.writerows(check_rows_csv(report.rows))
        written.append(path)
        for name, (header, rows) in sorted(report.tables.items()):
            path = out / f"{name}.csv"
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                w.writerows(sorted(rows, key=lambda r: tuple(str(x) for x in r)))
            written.append(path)
        for name, doc in sorted(report.documents.items()):
            path = out / f"{name}.json"
            path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
            written.append(path)
    path = out / "metadata.json"
    path.write_text(json.dumps(report.metadata, indent=2, sort_keys=True) + "\n")
    written.append(path)
    return written


def _metadata(cfg: ExperimentConfig, started: float) -> dict:
    return {"experiment": cfg.experiment, "seed": cfg.seed, "horizon": cfg.horizon, "replicas": cfg.replicas,
            "precision": cfg.precision, "effbayes": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__, "wall_seconds": round(time.time() - started, 3)}


def _pool_map(fn, jobs, workers: int):
    if workers <= 1 or len(jobs) < 2:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


# ---------------------------------------------------------------------------
# doob: posterior consistency under sampling

DEFAULT_DOOB_EVENTS = [{"id": "upper-half", "event": {"kind": "intervals", "parts": [
    {"lo": "1/2", "hi": "1", "lo_closed": False, "hi_closed": True}]}}]


def _doob_replica(job):
    model_spec, events, theta, theta_idx, replica, horizon, seed, checkpoints = job
    model = model_from_dict(model_spec)
    jm = model.joint
    bits = BitSource(seed, "doob", theta_idx * 2 ** 20 + replica)
    if theta is None:
        theta = jm.prior.sample(bits)
    x = sample_path(jm, theta, horizon, bits)
    out = []
    for ev_id, ev_dict in events:
        ev = event_from_dict(ev_dict)
        traj = posterior_trajectory(jm, ev, x, checkpoints)
        out.append((ev_id, int(ev.contains(theta)), [(n, v.value, v.degenerate) for n, v in zip(traj.indices,
                                                                                            traj.values)]))
    return theta_idx, replica, theta, out


def run_doob(cfg: ExperimentConfig) -> RunReport:
    started = time.time()
    cfg.model_obj("bernoulli-lebesgue")  # validate early
    try:
        thetas = [as_fraction(t) for t in _param(cfg, "thetas", [])] or [None]
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad thetas: {exc}") from exc
    events = [(e["id"], e["event"]) for e in _param(cfg, "events", DEFAULT_DOOB_EVENTS)]
    for _, ev in events:
        try:
            event_from_dict(ev)
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad event: {exc}") from exc
    tol = _fraction_param(cfg, "tol", "1/20")
    need = _fraction_param(cfg, "min_fraction", "19/20")
    N = cfg.horizon
    checkpoints = sorted({n for n in _param(cfg, "checkpoints", [0, 1, 10, 100, 1000]) if 0 <= n <= N} | {N})
    spec = cfg.model if cfg.model is not None else "bernoulli-lebesgue"
    jobs = [(spec, events, th, i, r, N, cfg.seed, checkpoints)
            for i, th in enumerate(thetas) for r in range(cfg.replicas)]
    results = _pool_map(_doob_replica, jobs, int(_param(cfg, "workers", 1)))

    report = RunReport("doob")
    header = ("theta_index", "replica", "theta", "n", "event_id", "value_num", "value_den", "value_decimal",
              "degenerate_flag")
    traj_rows = []
    converged: dict = {}
    for i, r, theta, per_event in results:
        for ev_id, indicator, values in per_event:
            final = values[-1][1]
            ok = abs(final - indicator) < tol
            converged.setdefault((i, ev_id), []).append(ok)
            if _param(cfg, "emit_trajectories", True):
                for n, v, deg in values:
                    traj_rows.append((i, r, fraction_str(as_fraction(theta)) if theta is not None else "", n,
                                      ev_id, v.numerator, v.denominator, decimal_str(v), int(deg)))
    for (i, ev_id), oks in converged.items():
        label = fraction_str(thetas[i]) if thetas[i] is not None else "prior"
        report.rows.append(exact_row("doob-consistency", {"theta": label, "event": ev_id, "N": N, "tol": tol},
                                     Fraction(sum(oks), len(oks)), need, ">="))
    report.tables["trajectories"] = (header, traj_rows)
    report.metadata = _metadata(cfg, started)
    return report


# ---------------------------------------------------------------------------
# freedman: collapse, hitting times, certificates

def _freedman_replica(job):
    model_spec, theta_dict, horizon, seed, replica = job
    fp = model_from_dict(model_spec).freedman
    truth = point_from_dict(theta_dict)
    run = collapse_trajectory(fp, truth, horizon, seed, replica)
    values = [(n, v.value) for n, v in zip(run.trajectory.indices, run.trajectory.values)]
    return replica, run.hitting_time, run.exact_after_hit, values


def run_freedman(cfg: ExperimentConfig) -> RunReport:
    started = time.time()
    model = cfg.model_obj("freedman-default")
    fp = model.freedman
    if fp is None:
        raise ConfigError("the freedman experiment needs a Freedman prior model")
    try:
        truth = point_from_dict(_param(cfg, "true_theta", DEFAULT_TRUTH.to_dict()))
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad true_theta: {exc}") from exc
    if not isinstance(truth, SimplexPoint):
        raise ConfigError("true_theta must be a simplex point")
    N = cfg.horizon
    spec = cfg.model if cfg.model is not None else "freedman-default"
    jobs = [(spec, truth.to_dict(), N, cfg.seed, r) for r in range(cfg.replicas)]
    results = _pool_map(_freedman_replica, jobs, int(_param(cfg, "workers", 1)))
    coords = fp.zero_coordinates
    report = RunReport("freedman")

    exact_runs = sum(1 for _, _, ok, _ in results if ok)
    report.rows.append(exact_row("collapse-exact-after-hit", {"replicas": cfg.replicas, "N": N},
                                 exact_runs, cfg.replicas, "=="))
    hits = [h for _, h, _, _ in results]
    for n in sorted({n for n in _param(cfg, "cdf_points", [5, 10, 27, 50, 100]) if 1 <= n <= N}):
        p = 1 - miss_probability(truth, coords, n)
        emp = Fraction(sum(1 for h in hits if h is not None and h <= n), cfg.replicas)
        dev = abs(emp - p)
        band_sq = 9 * p * (1 - p) / cfg.replicas
        report.rows.append(enclosure_row("hitting-time-cdf", {"n": n, "replicas": cfg.replicas}, dev,
                                         RealOracle.sqrt(band_sq), dev * dev <= band_sq, cfg.precision))

    consistent = truth == fp.positive
    certificates = []
    if consistent:
        report.rows.append(exact_row("consistent-at-truth", {"note": "collapse target equals truth"}, 1, 1, "=="))
    else:
        radius = _param(cfg, "ball_radius", None)
        event = separating_event(fp, truth, as_fraction(radius)) if radius is not None else None
        for n in sorted(set(_param(cfg, "certificate_horizons", [0, 1, 27, N]))):
            cert = inconsistency_certificate(fp, truth, n, event)
            certificates.append(cert.to_dict())
            if n >= 1:
                report.rows.append(exact_row("inconsistency-certificate", {"n": n}, cert.bound, 1, "<"))
            else:
                report.rows.append(exact_row("inconsistency-certificate-vacuous", {"n": n}, cert.bound, 1, "=="))
    report.documents["certificates"] = certificates

    report.tables["hitting_times"] = (("replica", "hitting_time"),
                                      [(r, "" if h is None else h) for r, h, _, _ in results])
    shown = int(_param(cfg, "trajectory_replicas", 10))
    rows = []
    for r, _, _, values in results:
        if r < shown:
            rows.extend((r, n, "positive-atom", v.numerator, v.denominator, decimal_str(v), 0) for n, v in values)
    report.tables["trajectories"] = (("replica", "n", "event_id", "value_num", "value_den", "value_decimal",
                                      "degenerate_flag"), rows)
    report.metadata = _metadata(cfg, started)
    return report


# ---------------------------------------------------------------------------
# reversal construction

ZEROS = CantorPoint((), (0,))


def _restricted(prior: AtomicPrior, keep) -> AtomicPrior | None:
    atoms = [(w, p) for w, p in prior.atoms if keep(p)]
    if not atoms:
        return None
    total = sum((w for w, _ in atoms), Fraction(0))
    return AtomicPrior(tuple((w / total, p) for w, p in atoms))


def reversal_checks(base: JointMeasure, levels: int, copies: int, depth: int) -> tuple[list, list]:
    test = zeros_cylinder_test()
    em = reversal_build(base.likelihood, test, levels)
    lh = em.likelihood
    rows, table = [], []
    points = list(base.prior.points) + [ZEROS]
    for theta in points:
        try:
            m = lh.copy_index(theta)
        except UndecidedMembership as exc:
            raise InvariantViolation(str(exc)) from exc
        label = "".join(map(str, theta.bits(8))) + "..."
        root = lh.prob(theta, ())
        masses = em.copy_masses(theta, copies)
        escaped = m is not None
        rows.append(exact_row("reversal-root-mass", {"theta": label}, root, 1 if escaped else 0, "=="))
        rows.append(exact_row("reversal-mass-conservation", {"theta": label, "copies": copies},
                              sum(masses, Fraction(0)), 1 if escaped else 0, "=="))
        table.append((label, "root", "" if m is None else m, fraction_str(root)))
        for c, v in enumerate(masses):
            table.append((label, f"copy-{c}", "" if m is None else m, fraction_str(v)))
        if escaped:
            # inside copy m the likelihood is the base one
            mism = sum(1 for s in base.tree.strings(depth) if lh.prob(theta, (m,) + s) != base.likelihood.prob(theta, s))
            rows.append(exact_row("reversal-copy-likelihood", {"theta": label, "depth": depth}, mism, 0, "=="))

    # posterior in copy m matches the base posterior with the prior restricted to level m
    ext = JointMeasure(base.prior, lh)
    events = [AtomSet([p]) for p in base.prior.points] + [AtomSet(base.prior.points[:2])]
    by_copy = {}
    for p in base.prior.points:
        by_copy.setdefault(lh.copy_index(p), []).append(p)
    for m, members in sorted(by_copy.items(), key=lambda kv: (kv[0] is None, kv[0])):
        if m is None:
            continue
        restricted = JointMeasure(_restricted(base.prior, lambda p: p in members), base.likelihood)
        mism = 0
        for e_idx, ev in enumerate(events):
            for s in base.tree.strings(depth):
                if posterior_eval(ext, ev, (m,) + s) != posterior_eval(restricted, ev, s):
                    mism += 1
        rows.append(exact_row("reversal-copy-posterior", {"copy": m, "events": len(events), "depth": depth},
                              mism, 0, "=="))

    # the captured point: every likelihood value is 0, posteriors degenerate from the root on
    captured = JointMeasure(AtomicPrior.dirac(ZEROS), lh)
    nondeg = 0
    for c in range(copies):
        traj = posterior_trajectory(captured, Omega(), (c,) + (0,) * depth)
        nondeg += sum(1 for v in traj.values[1:] if not v.degenerate)
    rows.append(exact_row("reversal-captured-degenerate", {"copies": copies, "depth": depth}, nondeg, 0, "=="))
    return rows, table


def run_reversal(cfg: ExperimentConfig) -> RunReport:
    started = time.time()
    model = cfg.model_obj("cantor-reversal-base")
    jm = model.joint
    if not isinstance(jm.prior, AtomicPrior) or not all(isinstance(p, CantorPoint) for p in jm.prior.points):
        raise ConfigError("the reversal demo needs an atomic prior on Cantor points")
    rows, table = reversal_checks(jm, int(_param(cfg, "levels", 8)), int(_param(cfg, "copies", 4)),
                                  min(cfg.horizon, 8))
    report = RunReport("reversal", rows)
    report.tables["reversal_likelihood"] = (("theta", "tau", "copy_index", "value"), table)
    report.metadata = _metadata(cfg, started)
    return report


# ---------------------------------------------------------------------------
# bound checks

def chebyshev_rows(prior, label: str, eps_list, ns, mode="exact", replicas=200, seed=0) -> list[CheckRow]:
    rows = []
    for eps in eps_list:
        for n in ns:
            try:
                r = chebyshev_check(prior, eps, n, mode=mode, replicas=replicas, seed=seed)
            except ExplosionGuard:
                continue
            params = {"prior": label, "eps": as_fraction(eps), "n": n, "mode": mode}
            if r.exact:
                rows.append(exact_row("chebyshev", params, r.lhs, r.rhs))
            else:
                rows.append(CheckRow("chebyshev", _params_str(params), "<=", None, r.rhs, r.holds,
                                     estimate=r.estimate, ci=r.ci))
    return rows


def run_chebyshev(cfg: ExperimentConfig) -> RunReport:
    started = time.time()
    model = cfg.model_obj("bernoulli-quarters")
    eps = [_fraction_param(cfg, "eps", "1/4")] if not isinstance(_param(cfg, "eps", None), list) \
        else [as_fraction(e) for e in cfg.params["eps"]]
    ns = _param(cfg, "ns", [cfg.horizon])
    mode = _param(cfg, "mode", "exact")
    if mode not in ("exact", "monte_carlo"):
        raise ConfigError("mode must be exact or monte_carlo")
    report = RunReport("chebyshev", chebyshev_rows(model.joint.prior, model.name, eps, ns, mode, cfg.replicas,
                                                   cfg.seed))
    report.metadata = _metadata(cfg, started)
    return report


DOOB_CASES = [
    ("bernoulli-lebesgue", [[1]], 1),
    ("bernoulli-lebesgue", [], 3),
    ("bernoulli-lebesgue", [[]], 3),
    ("bernoulli-lebesgue", [[1, 1]], 2),
    ("bernoulli-lebesgue", [[0, 1, 0]], 6),
    ("bernoulli-lebesgue", [[1, 0, 1], [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1]], 12),
    ("bernoulli-lebesgue", [[1] * 10], 12),
    ("bernoulli-lebesgue", [[0, 1] * 6], 12),
    ("bernoulli-beta-2-3", [[1]], 4),
    ("bernoulli-beta-2-3", [[0, 0], [1, 1]], 8),
    ("bernoulli-beta-2-3", [[1, 0, 0, 1, 1, 0, 1, 0]], 10),
    ("bernoulli-two-atom", [[1]], 1),
    ("bernoulli-two-atom", [[1, 1, 1]], 6),
    ("bernoulli-two-atom", [[0], [1, 1]], 12),
    ("bernoulli-quarters", [[0, 0, 0, 0]], 8),
    ("bernoulli-quarters", [[1, 0], [0, 1]], 10),
    ("bernoulli-endpoints", [[1]], 5),
    ("bernoulli-endpoints", [[1, 1, 0]], 6),
    ("bernoulli-three-atom", [[0, 1, 1, 0, 1]], 12),
    ("bernoulli-three-atom", [[1] * 12], 12),
]


def doob_rows(cases, k: int) -> list[CheckRow]:
    rows = []
    for name, prefixes, depth in cases:
        jm = get_model(name).joint if isinstance(name, str) else model_from_dict(name).joint
        res = doob_maximal_check(jm, CantorCylinders(prefixes), depth)
        label = "|".join("".join(map(str, w)) or "root" for w in prefixes) or "empty"
        params = {"model": name if isinstance(name, str) else "custom", "B": label, "depth": depth}
        rows.append(enclosure_row("doob-maximal", params, res.lhs(k).lo, res.rhs, res.holds, k))
        rows.append(exact_row("doob-maximal-squared", params, res.lhs_squared, 4 * res.event_mass))
        rows.append(exact_row("martingale-tower", params, int(not res.truncation.tower_holds()), 0, "=="))
    return rows


def run_doob_maximal(cfg: ExperimentConfig) -> RunReport:
    started = time.time()
    if "cases" in cfg.params:
        spec = cfg.model if cfg.model is not None else "bernoulli-lebesgue"
        try:
            cases = [(spec, c["cylinders"], int(c["depth"])) for c in cfg.params["cases"]]
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad doob-maximal case: {exc}") from exc
    else:
        cases = DOOB_CASES
    report = RunReport("doob-maximal", doob_rows(cases, cfg.precision))
    report.metadata = _metadata(cfg, started)
    return report


SCHNORR_PRIORS = ["bernoulli-lebesgue", "bernoulli-beta-2-3", "bernoulli-two-atom", "bernoulli-quarters",
                  "bernoulli-endpoints", "bernoulli-three-atom"]


def schnorr_rows(names, n_max: int, k: int) -> list[CheckRow]:
    rows = []
    for name in names:
        rep = lrf_schnorr_test(get_model(name).joint.prior, n_max)
        for lvl in rep.levels:
            params = {"prior": name, "n": lvl.n, "eta": lvl.eta}
            rows.append(enclosure_row("schnorr-level-bound", params, lvl.measure, lvl.bound,
                                      lvl.holds_exact and lvl.holds_enclosure, k))
    return rows


def run_schnorr_bounds(cfg: ExperimentConfig) -> RunReport:
    started = time.time()
    names = [cfg.model] if isinstance(cfg.model, str) else SCHNORR_PRIORS
    report = RunReport("schnorr-bounds", schnorr_rows(names, int(_param(cfg, "n_max", 6)), cfg.precision))
    report.metadata = _metadata(cfg, started)
    return report


COND_EXP_CASES = [
    ("bernoulli-two-atom", [("atom-2/3", AtomSet([Fraction(2, 3)])), ("omega", Omega())]),
    ("bernoulli-lebesgue", [("lower-half", Intervals.closed(0, Fraction(1, 2))),
                            ("middle", Intervals.open(Fraction(1, 4), Fraction(3, 4)))]),
    ("simplex-finite-atoms", [("skewed-atom", AtomSet([SimplexPoint.finite([Fraction(1, 2), Fraction(1, 4),
                                                                            Fraction(1, 4)])])),
                              ("not-skewed", Complement(AtomSet([SimplexPoint.finite(
                                  [Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)])])))]),
]


def cond_exp_rows(cases, max_depth: int) -> list[CheckRow]:
    rows = []
    for name, events in cases:
        jm = get_model(name).joint
        for ev_id, ev in events:
            for n in range(max_depth + 1):
                rep = verify_conditional_expectation(jm, ev, n)
                rows.append(exact_row("conditional-expectation", {"model": name, "event": ev_id, "depth": n,
                                                                  "subsets": rep.n_subsets},
                                      rep.max_discrepancy, 0, "=="))
    return rows


def run_cond_exp(cfg: ExperimentConfig) -> RunReport:
    started = time.time()
    depth = int(_param(cfg, "depth", 4))
    if cfg.model is not None:
        model = cfg.model_obj("")
        try:
            events = [(e["id"], event_from_dict(e["event"])) for e in _param(cfg, "events", [])] or \
                [("omega", Omega())]
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad event: {exc}") from exc
        rows = []
        for ev_id, ev in events:
            for n in range(depth + 1):
                rep = verify_conditional_expectation(model.joint, ev, n)
                rows.append(exact_row("conditional-expectation", {"model": model.name, "event": ev_id, "depth": n,
                                                                  "subsets": rep.n_subsets},
                                      rep.max_discrepancy, 0, "=="))
    else:
        rows = cond_exp_rows(COND_EXP_CASES, depth)
    report = RunReport("cond-exp", rows)
    report.metadata = _metadata(cfg, started)
    return report


# ---------------------------------------------------------------------------
# suite

def _posterior_rows() -> list[CheckRow]:
    two = get_model("bernoulli-two-atom").joint
    leb = get_model("bernoulli-lebesgue").joint
    fre = get_model("freedman-default")
    fp = fre.freedman
    null = fp.nulls[0][0]
    cases = [
        ("two-atom;A={2/3};sigma=1", posterior_eval(two, AtomSet([Fraction(2, 3)]), (1,)).value, Fraction(2, 3)),
        ("lebesgue;A=[0,1/2];sigma=1", posterior_eval(leb, Intervals.closed(0, Fraction(1, 2)), (1,)).value,
         Fraction(1, 4)),
        ("lebesgue;A=[1/4,3/4];sigma=root", posterior_eval(leb, Intervals.closed(Fraction(1, 4), Fraction(3, 4)),
                                                            ()).value, Fraction(1, 2)),
        ("freedman;A=positive;sigma=01", posterior_eval(fre.joint, fp.positive_event, (0, 1)).value, Fraction(1, 3)),
        ("freedman;A=positive;sigma=012", posterior_eval(fre.joint, fp.positive_event, (0, 1, 2)).value, Fraction(1)),
        ("freedman;A=null;sigma=012", posterior_eval(fre.joint, AtomSet([null]), (0, 1, 2)).value, Fraction(0)),
    ]
    return [exact_row("posterior-exact", {"case": c}, got, want, "==") for c, got, want in cases]


def _sigma2_rows() -> list[CheckRow]:
    classes = [
        ("cantor-single", SigmaTwoClass("cantor", [[(1, 0)]]), Fraction(1, 10)),
        ("cantor-two-disjoint", SigmaTwoClass("cantor", [[(0, 0)], [(1, 1)]]), Fraction(1, 100)),
        ("interval-point", SigmaTwoClass("interval", [[(Fraction(1, 2), Fraction(1, 2))]]), Fraction(1, 10)),
        ("interval-pieces", SigmaTwoClass("interval", [[(0, Fraction(1, 4))],
                                                       [(Fraction(1, 3), Fraction(1, 2)), (1, 1)]]),
         Fraction(1, 100)),
    ]
    rows = []
    for label, cls, eps in classes:
        rep = sigma2_cover(cls, eps)
        rows.append(exact_row("sigma2-cover-excess", {"class": label, "eps": eps}, rep.excess, eps, "<"))
        rows.append(exact_row("sigma2-cover-contains", {"class": label}, int(rep.contains_input), 1, "=="))
    return rows


def _freedman_certificate_rows() -> list[CheckRow]:
    fp = get_model("freedman-default").freedman
    cert = inconsistency_certificate(fp, DEFAULT_TRUTH, 27)
    return [exact_row("inconsistency-certificate", {"n": 27}, cert.bound, 1, "<"),
            exact_row("inconsistency-certificate-value", {"n": 27}, cert.bound, Fraction(25, 27) ** 27, "==")]


def _metric_rows(k: int) -> list[CheckRow]:
    e = [SimplexPoint.unit(i) for i in range(4)]
    rows = []
    for i in range(4):
        for n in range(4):
            for which in ("C_n", "D_n"):
                if which == "D_n" and n == 0:
                    continue
                d = simplex_closed_set_distance(e[i], n, which).exact_value
                want = _unit_distance(i, n, which)
                rows.append(exact_row("closed-set-distance", {"i": i, "n": n, "set": which}, d, want, "=="))
    g = SimplexPoint.geometric(Fraction(1, 2), Fraction(1, 2))
    for x in e[:3] + [g]:
        d = d0_distance(x, x)(k)
        rows.append(CheckRow("d0-self", _params_str({"x": repr(x)}), "<=", d.lo, Fraction(0), d.lo <= 0, d.width))
    return rows


def _unit_distance(i: int, n: int, which: str) -> Fraction:
    """Hilbert-cube distance from e_i to C_n / D_n, worked out by hand."""
    delta = Fraction(1, n + 1)
    if which == "C_n":
        return delta / 2 ** (i + 1)          # lower coordinate i by delta
    if i < n:
        return delta / 2 ** (n + 1)          # raise coordinate n by delta
    if i == n:
        return delta / 2 ** n                # coordinate n is full: raise n-1 instead
    return Fraction(1, 2 ** (n + 1)) + delta / 2 ** n   # fill coordinate n, then delta at n-1


SUITE_SECTIONS = ("posterior", "chebyshev", "chebyshev-mc", "doob-maximal", "schnorr-bounds", "cond-exp",
                  "sigma2-cover", "freedman-certificate", "reversal", "simplex-metric")

CHEBYSHEV_PRIORS = ["bernoulli-two-atom", "bernoulli-quarters", "bernoulli-endpoints", "bernoulli-three-atom"]
CHEBYSHEV_EPS = [Fraction(1, 10), Fraction(1, 4), Fraction(3, 5)]
CHEBYSHEV_NS = [1, 2, 10, 100, 1000, 10 ** 4]


def suite_section(name: str, seed: int, k: int) -> list[CheckRow]:
    if name == "posterior":
        return _posterior_rows()
    if name == "chebyshev":
        rows = []
        for p in CHEBYSHEV_PRIORS:
            rows += chebyshev_rows(get_model(p).joint.prior, p, CHEBYSHEV_EPS, CHEBYSHEV_NS)
        rows += chebyshev_rows(get_model("bernoulli-lebesgue").joint.prior, "bernoulli-lebesgue", CHEBYSHEV_EPS,
                               [1, 2, 10, 96])
        return rows
    if name == "chebyshev-mc":
        return chebyshev_rows(get_model("bernoulli-lebesgue").joint.prior, "bernoulli-lebesgue",
                              [Fraction(1, 4)], [96], mode="monte_carlo", replicas=200, seed=seed)
    if name == "doob-maximal":
        return doob_rows(DOOB_CASES, k)
    if name == "schnorr-bounds":
        return schnorr_rows(SCHNORR_PRIORS, 6, k)
    if name == "cond-exp":
        return cond_exp_rows(COND_EXP_CASES, 4)
    if name == "sigma2-cover":
        return _sigma2_rows()
    if name == "freedman-certificate":
        return _freedman_certificate_rows()
    if name == "reversal":
        return reversal_checks(get_model("cantor-reversal-base").joint, 8, 4, 6)[0]
    if name == "simplex-metric":
        return _metric_rows(k)
    raise ConfigError(f"unknown suite section {name!r}")


def run_suite(cfg: ExperimentConfig) -> RunReport:
    started = time.time()
    matrix = _param(cfg, "matrix", list(SUITE_SECTIONS))
    if not isinstance(matrix, list) or any(m not in SUITE_SECTIONS for m in matrix):
        raise ConfigError(f"suite matrix entries must be among {', '.join(SUITE_SECTIONS)}")
    report = RunReport("suite")
    for section in matrix:
        report.rows.extend(suite_section(section, cfg.seed, cfg.precision))
    if _param(cfg, "fault", False):
        report.rows = [r.perturbed(Fraction(9, 10)) for r in report.rows]
    report.metadata = _metadata(cfg, started)
    report.metadata["sections"] = matrix
    return report


RUNNERS = {
    "doob": run_doob,
    "freedman": run_freedman,
    "reversal": run_reversal,
    "chebyshev": run_chebyshev,
    "doob-maximal": run_doob_maximal,
    "schnorr-bounds": run_schnorr_bounds,
    "cond-exp": run_cond_exp,
    "suite": run_suite,
}


def run(cfg: ExperimentConfig) -> RunReport:
    return RUNNERS[cfg.experiment](cfg)


def list_models() -> list[tuple[str, str]]:
    return [(name, m.description) for name, m in sorted(MODELS.items())]
