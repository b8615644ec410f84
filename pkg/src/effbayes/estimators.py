"""Relative-frequency estimators, prior moments, and two classical bounds.

* Chebyshev:  mu(|f_n(X) - Theta| > eps) <= (alpha - beta) / (eps^2 n)
* Doob:       || max_n mu_X(B | x[:n]) ||_{L2(mu_X)} <= 2 sqrt(mu_X(B))

Both left-hand sides are computed exactly.  Frequencies depend on a string
only through its count of ones, so binomial grouping replaces the 2^n string
enumeration by n+1 terms per atom.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from scipy import stats

from .measures import (
    AtomicPrior,
    CantorCylinders,
    JointMeasure,
    PolyDensityPrior,
    Prior,
    RationalInterval,
    binomial_upper_tail,
    pushforward_sample,
    sample_path,
)
from .numeric import RealOracle, as_fraction
from .rng import BitSource
from .spaces import CANTOR


class ExplosionGuard(RuntimeError):
    """Raised when an exact computation would exceed its work budget."""


def lrf(x: Sequence[int], n: int) -> Fraction:
    """Relative frequency of ones among the first n symbols."""
    if not 1 <= n <= len(x):
        raise ValueError("need 1 <= n <= len(x)")
    return Fraction(sum(1 for s in x[:n] if s == 1), n)


def lrf_coordinate(x: Sequence[int], j: int, n: int) -> Fraction:
    if not 1 <= n <= len(x):
        raise ValueError("need 1 <= n <= len(x)")
    return Fraction(sum(1 for s in x[:n] if s == j), n)


def symbol_frequencies(x: Sequence[int], n: int) -> dict[int, Fraction]:
    return {j: Fraction(c, n) for j, c in Counter(x[:n]).items()}


@dataclass(frozen=True)
class MomentPair:
    alpha: Fraction
    beta: Fraction

    def __post_init__(self):
        if not 0 <= self.beta <= self.alpha <= 1:
            raise ValueError("moments must satisfy 0 <= beta <= alpha <= 1")

    @property
    def spread(self) -> Fraction:
        return self.alpha - self.beta


def _rate(theta) -> Fraction:
    return theta.value if hasattr(theta, "value") else as_fraction(theta)


def moments(prior: Prior) -> MomentPair:
    """First and second moments of the parameter under the prior."""
    if isinstance(prior, AtomicPrior):
        a = sum((w * _rate(t) for w, t in prior.atoms), Fraction(0))
        b = sum((w * _rate(t) ** 2 for w, t in prior.atoms), Fraction(0))
        return MomentPair(a, b)
    if isinstance(prior, PolyDensityPrior):
        a = sum((c / (k + 2) for k, c in enumerate(prior.coeffs)), Fraction(0))
        b = sum((c / (k + 3) for k, c in enumerate(prior.coeffs)), Fraction(0))
        return MomentPair(a, b)
    raise TypeError(f"no moments for {prior!r}")


# ---------------------------------------------------------------------------
# deviation probabilities

def _atom_deviation(theta: Fraction, n: int, eps: Fraction) -> Fraction:
    """P(|C/n - theta| > eps) for C ~ Bin(n, theta)."""
    above = math.floor(n * (theta + eps)) + 1        # C >= above  <=>  C/n > theta + eps
    below = math.ceil(n * (theta - eps))             # C < below   <=>  C/n < theta - eps
    p = binomial_upper_tail(n, above, theta)
    if below > 0:
        p += 1 - binomial_upper_tail(n, below, theta)
    return p


def _outside(center: Fraction, eps: Fraction) -> list[RationalInterval]:
    lo, hi = center - eps, center + eps
    parts = []
    if lo > 0:
        parts.append(RationalInterval(Fraction(0), lo, True, False))
    if hi < 1:
        parts.append(RationalInterval(hi, Fraction(1), False, True))
    return parts


def deviation_probability(prior: Prior, n: int, eps, budget: int = 10 ** 7) -> Fraction:
    """mu(|f_n(X) - Theta| > eps) exactly, for the Bernoulli family."""
    eps = as_fraction(eps)
    if n < 1:
        raise ValueError("n >= 1")
    if isinstance(prior, AtomicPrior):
        if n * len(prior.atoms) > budget:
            raise ExplosionGuard(f"n={n} with {len(prior.atoms)} atoms exceeds the budget")
        return sum((w * _atom_deviation(_rate(t), n, eps) for w, t in prior.atoms), Fraction(0))
    if isinstance(prior, PolyDensityPrior):
        # each count c contributes C(n,c) * int_{|c/n - t| > eps} t^c (1-t)^(n-c) p(t) dt
        if n * n * len(prior.coeffs) > budget:
            raise ExplosionGuard(f"n={n} is too large for exact density integration")
        total = Fraction(0)
        for c in range(n + 1):
            parts = _outside(Fraction(c, n), eps)
            if parts:
                total += math.comb(n, c) * prior.integrate_monomial(c, n - c, parts)
        return total
    raise TypeError(f"unsupported prior {prior!r}")


def clopper_pearson(k: int, n: int, level: float = 0.99) -> tuple[float, float]:
    a = 1 - level
    lo = 0.0 if k == 0 else float(stats.beta.ppf(a / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(stats.beta.ppf(1 - a / 2, k + 1, n - k))
    return lo, hi


@dataclass
class ChebyshevResult:
    n: int
    eps: Fraction
    rhs: Fraction
    lhs: Fraction | None = None              # exact mode
    estimate: float | None = None           # Monte Carlo mode
    ci: tuple[float, float] | None = None
    replicas: int = 0

    @property
    def exact(self) -> bool:
        return self.lhs is not None

    @property
    def holds(self) -> bool:
        if self.lhs is not None:
            return self.lhs <= self.rhs
        # a violation needs the whole interval above the bound
        return self.ci[0] <= float(self.rhs)


def chebyshev_rhs(prior: Prior, eps, n: int) -> Fraction:
    eps = as_fraction(eps)
    return moments(prior).spread / (eps * eps * n)


def chebyshev_check(prior: Prior, eps, n: int, mode: str = "exact", replicas: int = 2000,
                    seed: int = 0) -> ChebyshevResult:
    """Compare mu(|f_n - Theta| > eps) with (alpha - beta) / (eps^2 n)."""
    from .measures import BernoulliProduct

    eps = as_fraction(eps)
    rhs = chebyshev_rhs(prior, eps, n)
    if mode == "exact":
        return ChebyshevResult(n, eps, rhs, lhs=deviation_probability(prior, n, eps))
    if mode != "monte_carlo":
        raise ValueError(f"unknown mode {mode!r}")
    jm = JointMeasure(prior, BernoulliProduct())
    hits = 0
    for r in range(replicas):
        bits = BitSource(seed, "chebyshev", r)
        theta = prior.sample(bits)
        x = sample_path(jm, _rate(theta), n, bits)
        if abs(lrf(x, n) - _rate(theta)) > eps:
            hits += 1
    return ChebyshevResult(n, eps, rhs, estimate=hits / replicas, ci=clopper_pearson(hits, replicas),
                           replicas=replicas)


# ---------------------------------------------------------------------------
# Doob maximal inequality on Cantor space

@dataclass
class MartingaleTruncation:
    """M_n(sigma) = mu_X(B | [sigma]) for every string of length <= depth."""

    event: CantorCylinders
    depth: int
    mass: dict = field(default_factory=dict)      # sigma -> mu_X([sigma])
    values: dict = field(default_factory=dict)    # sigma -> M(sigma), only where mass > 0

    def tower_holds(self) -> bool:
        for sigma, m in self.values.items():
            if len(sigma) == self.depth:
                continue
            kids = [sigma + (b,) for b in (0, 1)]
            lhs = sum((self.mass[k] * self.values.get(k, Fraction(0)) for k in kids), Fraction(0))
            if lhs != self.mass[sigma] * m:
                return False
        return True


def martingale_truncation(jm: JointMeasure, event: CantorCylinders, depth: int,
                          budget: int = 2 ** 16) -> MartingaleTruncation:
    if jm.tree is not CANTOR:
        raise TypeError("the maximal check runs on Cantor space")
    if 2 ** depth > budget:
        raise ExplosionGuard(f"depth {depth} exceeds the string budget")
    if any(len(w) > depth for w in event.prefixes):
        raise ValueError("cylinders must have length <= depth")
    mt = MartingaleTruncation(event, depth)
    in_b = {}
    leaves = list(CANTOR.strings(depth))
    for s in leaves:
        mt.mass[s] = pushforward_sample(jm, s)
        in_b[s] = mt.mass[s] if any(s[:len(w)] == w for w in event.prefixes) else Fraction(0)
    level = leaves
    for d in range(depth, 0, -1):
        parents = {}
        for s in level:
            p = s[:-1]
            if p not in parents:
                parents[p] = None
                mt.mass[p] = mt.mass[p + (0,)] + mt.mass[p + (1,)]
                in_b[p] = in_b[p + (0,)] + in_b[p + (1,)]
        level = list(parents)
    for s, m in mt.mass.items():
        if m:
            mt.values[s] = in_b[s] / m
    return mt


@dataclass
class DoobResult:
    lhs_squared: Fraction
    event_mass: Fraction
    lhs: RealOracle
    rhs: RealOracle
    truncation: MartingaleTruncation

    @property
    def holds(self) -> bool:
        return self.lhs_squared <= 4 * self.event_mass


def doob_maximal_check(jm: JointMeasure, event: CantorCylinders, depth: int) -> DoobResult:
    """Exact || max_{n<=depth} M_n ||_2 against 2 sqrt(mu_X(B)).

    B is measurable at depth ``depth``, so M_n is constant for n >= depth and
    the truncated maximum is the full supremum.
    """
    mt = martingale_truncation(jm, event, depth)
    total = Fraction(0)
    stack = [((), Fraction(0))]
    while stack:
        sigma, running = stack.pop()
        if sigma not in mt.values:
            continue  # null cylinder
        running = max(running, mt.values[sigma])
        if len(sigma) == depth:
            total += mt.mass[sigma] * running * running
        else:
            stack.extend((sigma + (b,), running) for b in (0, 1))
    mass_b = sum((mt.mass[s] * v for s, v in mt.values.items() if len(s) == depth), Fraction(0))
    return DoobResult(total, mass_b, RealOracle.sqrt(total), RealOracle.sqrt(4 * mass_b), mt)
