"""Posterior collapse onto a fully supported atom, and the resulting inconsistency.

A prior mixes one atom with every coordinate positive and some "null" atoms,
each with a designated zero coordinate k_j.  As soon as every k_j has been
observed, the null atoms have likelihood exactly 0 and the posterior sits on
the positive atom, whatever the data-generating parameter was.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .estimators import clopper_pearson
from .measures import (
    AtomicPrior,
    AtomSet,
    Ball,
    Complement,
    Event,
    IIDSimplex,
    JointMeasure,
    sample_path,
)
from .numeric import Ordering, RealOracle, as_fraction, compare_with_gap, decimal_str, fraction_str
from .posterior import PosteriorTrajectory, posterior_trajectory
from .rng import BitSource, bernoulli
from .spaces import SimplexPoint, d0_distance, point_to_dict


class NotInteriorPoint(ValueError):
    pass


class BadZeroCoordinate(ValueError):
    pass


class SeparationFailure(ValueError):
    pass


@dataclass(frozen=True)
class FreedmanPrior:
    positive: SimplexPoint
    positive_weight: Fraction
    nulls: tuple  # ((point, zero_coordinate, weight), ...)

    def __post_init__(self):
        object.__setattr__(self, "positive_weight", as_fraction(self.positive_weight))
        object.__setattr__(self, "nulls", tuple((p, int(k), as_fraction(w)) for p, k, w in self.nulls))
        if not self.positive.is_interior:
            raise NotInteriorPoint(f"{self.positive} has a zero coordinate")
        for p, k, _ in self.nulls:
            if p(k) != 0:
                raise BadZeroCoordinate(f"coordinate {k} of {p} is {p(k)}, not 0")
        weights = [self.positive_weight] + [w for _, _, w in self.nulls]
        if any(w <= 0 for w in weights):
            raise ValueError("weights must be positive")
        if sum(weights, Fraction(0)) != 1:
            raise ValueError(f"weights sum to {sum(weights, Fraction(0))}, not 1")

    @property
    def zero_coordinates(self) -> list[int]:
        return sorted({k for _, k, _ in self.nulls})

    @property
    def prior(self) -> AtomicPrior:
        return AtomicPrior(((self.positive_weight, self.positive),) + tuple((w, p) for p, _, w in self.nulls))

    @property
    def joint(self) -> JointMeasure:
        return JointMeasure(self.prior, IIDSimplex())

    @property
    def positive_event(self) -> AtomSet:
        return AtomSet([self.positive])

    def to_dict(self):
        return {"positive": point_to_dict(self.positive), "positive_weight": fraction_str(self.positive_weight),
                "nulls": [{"point": point_to_dict(p), "zero_coordinate": k, "weight": fraction_str(w)}
                          for p, k, w in self.nulls]}


def build_freedman_prior(positive: SimplexPoint, nulls: Sequence[tuple], weights: Sequence) -> FreedmanPrior:
    """``nulls`` is a list of (point, zero coordinate); ``weights`` starts with the positive atom's."""
    if len(weights) != len(nulls) + 1:
        raise ValueError("need one weight per atom")
    return FreedmanPrior(positive, weights[0], tuple((p, k, w) for (p, k), w in zip(nulls, weights[1:])))


DEFAULT_TRUTH = SimplexPoint.geometric(Fraction(2, 3), Fraction(1, 3))


def default_prior() -> FreedmanPrior:
    return build_freedman_prior(SimplexPoint.geometric(Fraction(1, 2), Fraction(1, 2)),
                                [(SimplexPoint.finite([Fraction(1, 2), Fraction(1, 2)]), 2)],
                                [Fraction(1, 2), Fraction(1, 2)])


def enumerate_priors(positive: SimplexPoint, max_support: int):
    """A few members of the dense family: one null atom uniform on {0..s-1}, zero at s."""
    for s in range(1, max_support + 1):
        null = SimplexPoint.finite([Fraction(1, s)] * s)
        for w in (Fraction(1, 2), Fraction(1, 4), Fraction(3, 4)):
            yield build_freedman_prior(positive, [(null, s)], [w, 1 - w])


# ---------------------------------------------------------------------------
# collapse

def hitting_time(x: Sequence[int], coords: Sequence[int]) -> int | None:
    """Smallest n with every coordinate in ``coords`` among x[:n]."""
    need = set(coords)
    if not need:
        return 0
    for i, s in enumerate(x):
        need.discard(s)
        if not need:
            return i + 1
    return None


@dataclass
class CollapseRun:
    trajectory: PosteriorTrajectory
    hitting_time: int | None
    exact_after_hit: bool


def collapse_trajectory(fp: FreedmanPrior, true_theta: SimplexPoint, horizon: int, seed: int = 0,
                        replica: int = 0, experiment: str = "freedman") -> CollapseRun:
    jm = fp.joint
    x = sample_path(jm, true_theta, horizon, BitSource(seed, experiment, replica))
    traj = posterior_trajectory(jm, fp.positive_event, x)
    hit = hitting_time(x, fp.zero_coordinates)
    exact = hit is None or all(v.value == 1 and not v.degenerate for v in traj.values[hit:])
    return CollapseRun(traj, hit, exact)


def miss_probability(true_theta: SimplexPoint, coords: Sequence[int], n: int) -> Fraction:
    """P(some coordinate in ``coords`` has not appeared among n i.i.d. draws), by inclusion-exclusion."""
    coords = sorted(set(coords))
    total = Fraction(0)
    for r in range(1, len(coords) + 1):
        for subset in itertools.combinations(coords, r):
            total += (-1) ** (r + 1) * (1 - sum((true_theta(k) for k in subset), Fraction(0))) ** n
    return total


# ---------------------------------------------------------------------------
# certificates

@dataclass
class InconsistencyCertificate:
    true_parameter: SimplexPoint
    prior: FreedmanPrior
    event: Event
    horizon: int
    bound: Fraction

    @property
    def holds(self) -> bool:
        return self.bound < 1

    def to_dict(self):
        return {"prior": self.prior.to_dict(), "true_parameter": point_to_dict(self.true_parameter),
                "V": self.event.describe(), "horizon": self.horizon,
                "exact_bound": fraction_str(self.bound), "decimal": decimal_str(self.bound)}


def separating_event(fp: FreedmanPrior, true_theta: SimplexPoint, radius=None, gap=Fraction(1, 2 ** 20)) -> Event:
    """The atom complement by default, or a d0-ball around the truth certified to miss the positive atom."""
    if radius is None:
        return Complement(fp.positive_event)
    ball = Ball(true_theta, radius)
    verdict = compare_with_gap(d0_distance(true_theta, fp.positive), RealOracle.exact(radius), gap)
    if verdict is not Ordering.GREATER:
        raise SeparationFailure("could not certify that the ball misses the positive atom")
    return ball


def inconsistency_certificate(fp: FreedmanPrior, true_theta: SimplexPoint, horizon: int,
                              event: Event | None = None) -> InconsistencyCertificate:
    """E[p(V | x[:n])] under the truth is at most the chance that some zero coordinate is still unseen."""
    if true_theta == fp.positive:
        raise ValueError("the truth coincides with the collapse target; nothing to certify")
    if not true_theta.is_interior:
        raise NotInteriorPoint("the truth must charge every symbol")
    event = separating_event(fp, true_theta) if event is None else event
    if event.contains(fp.positive):
        raise SeparationFailure("V contains the positive atom")
    return InconsistencyCertificate(true_theta, fp, event, horizon,
                                    miss_probability(true_theta, fp.zero_coordinates, horizon))


# ---------------------------------------------------------------------------
# double integral  int_X int f(theta') dp(theta'|x[:n]) dP(x|theta)

def _value(f, theta) -> Fraction:
    if isinstance(f, Event):
        return Fraction(int(f.contains(theta)))
    v = f(theta)
    if isinstance(v, RealOracle):
        e = v(48)
        return e.lo  # lower end: the estimate stays a lower bound for lower-bound certificates
    return as_fraction(v)


def inner_integral(jm: JointMeasure, f, sigma) -> Fraction:
    """int f dp(.|sigma) for an atomic prior: the posterior-weighted sum over atoms."""
    from .posterior import posterior_eval

    return sum((posterior_eval(jm, AtomSet([p]), sigma).value * _value(f, p) for p in jm.prior.points),
               Fraction(0))


@dataclass
class DoubleIntegralEstimate:
    estimate: float
    ci: tuple[float, float]
    replicas: int
    lower_bound: Fraction | None = None
    upper_bound: Fraction | None = None

    def consistent(self) -> bool:
        lo_ok = self.lower_bound is None or self.ci[1] >= float(self.lower_bound)
        hi_ok = self.upper_bound is None or self.ci[0] <= float(self.upper_bound)
        return lo_ok and hi_ok


def double_integral_estimate(fp: FreedmanPrior, true_theta: SimplexPoint, f: Event | Callable, n: int,
                             replicas: int, seed: int = 0) -> DoubleIntegralEstimate:
    """Monte Carlo over sample paths of the exact inner integral.

    The 99% interval comes from binarizing each inner value v (a Bernoulli(v)
    draw) and applying Clopper-Pearson to the count.  When f is at least the
    indicator of the positive atom, 1 - miss(n) is attached as a lower bound;
    when f vanishes there, miss(n) is attached as an upper bound.
    """
    jm = fp.joint
    coords = fp.zero_coordinates
    total = Fraction(0)
    hits = 0
    for r in range(replicas):
        bits = BitSource(seed, "double-integral", r)
        x = sample_path(jm, true_theta, n, bits)
        if hitting_time(x, coords) is not None:
            v = _value(f, fp.positive)  # collapsed: the posterior is the point mass
        else:
            v = inner_integral(jm, f, x)
        total += v
        hits += bernoulli(v, bits)
    miss = miss_probability(true_theta, coords, n)
    f_top = _value(f, fp.positive)
    lower = upper = None
    if f_top == 1:
        lower = 1 - miss
    elif f_top == 0:
        upper = miss
    return DoubleIntegralEstimate(float(total / replicas), clopper_pearson(hits, replicas), replicas, lower, upper)
