"""Priors, parameter events, likelihood families and the joint measure.

The joint measure of a rectangle is  mu(A x [sigma]) = int_A P(sigma|theta) dp(theta).
For atomic priors this is a finite weighted sum; for polynomial densities
on [0,1] with the Bernoulli family it reduces to incomplete Beta integrals
with integer parameters, which are evaluated exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .numeric import Ordering, RealOracle, as_fraction, compare_with_gap, fraction_str
from .rng import BitSource, bernoulli, draw_index
from .spaces import (
    BAIRE,
    CANTOR,
    CantorPoint,
    CoordinateInterval,
    RationalInterval,
    SampleTree,
    SimplexPoint,
    d0_distance,
    hilbert_distance,
    point_from_dict,
    point_to_dict,
)


class SpaceMismatch(TypeError):
    pass


class UndecidableEvent(ValueError):
    pass


class ZeroMassParameter(ValueError):
    pass


# ---------------------------------------------------------------------------
# exact Beta-type integrals

def binomial_upper_tail(n: int, lo: int, t: Fraction) -> Fraction:
    """P(Bin(n, t) >= lo), exact."""
    if lo <= 0:
        return Fraction(1)
    if lo > n:
        return Fraction(0)
    if t == 0:
        return Fraction(0)
    if t == 1:
        return Fraction(1)
    p, q = t.numerator, t.denominator - t.numerator
    den = t.denominator ** n
    # sum over the shorter side
    if lo > n // 2:
        js = range(lo, n + 1)
        upper = True
    else:
        js = range(0, lo)
        upper = False
    total = 0
    c = math.comb(n, js.start)
    if p == q:
        for j in js:
            total += c
            c = c * (n - j) // (j + 1)
    else:
        pj = p ** js.start
        qpow = [1]
        for _ in range(n - js.start):
            qpow.append(qpow[-1] * q)
        for j in js:
            total += c * pj * qpow[n - j]
            c = c * (n - j) // (j + 1)
            pj *= p
    s = Fraction(total, den)
    return s if upper else 1 - s


def beta_integral(a: int, b: int, lo: Fraction, hi: Fraction) -> Fraction:
    """int_lo^hi theta^a (1-theta)^b dtheta for integers a, b >= 0 and 0 <= lo <= hi <= 1."""
    if hi <= lo:
        return Fraction(0)
    n = a + b + 1
    scale = Fraction(math.factorial(a) * math.factorial(b), math.factorial(n))
    return scale * (binomial_upper_tail(n, a + 1, as_fraction(hi)) - binomial_upper_tail(n, a + 1, as_fraction(lo)))


def poly_eval(coeffs: Sequence[Fraction], t: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def poly_integral(coeffs: Sequence[Fraction], lo: Fraction, hi: Fraction) -> Fraction:
    anti = [Fraction(0)] + [c / (k + 1) for k, c in enumerate(coeffs)]
    return poly_eval(anti, hi) - poly_eval(anti, lo)


def _bernstein_nonnegative(coeffs: Sequence[Fraction], elevations: int = 64) -> bool:
    """Sufficient certificate: all Bernstein coefficients >= 0 after some degree elevation."""
    d = len(coeffs) - 1
    b = [sum((Fraction(math.comb(j, k), math.comb(d, k)) * coeffs[k] for k in range(j + 1)), Fraction(0))
         for j in range(d + 1)]
    for _ in range(elevations + 1):
        if all(x >= 0 for x in b):
            return True
        d += 1
        b = [b[0]] + [Fraction(j, d) * b[j - 1] + (1 - Fraction(j, d)) * b[j] for j in range(1, d)] + [b[-1]]
    return False


# ---------------------------------------------------------------------------
# parameter events

class Event:
    """A parameter event.  ``contains`` decides membership of a point.

    ``density_intervals`` describes the event up to a Lebesgue-null set as a
    union of disjoint intervals of [0,1]; it is None when the event has no such
    description (then only atomic priors can measure it).
    """

    label = "event"

    def contains(self, theta) -> bool:
        raise NotImplementedError

    def density_intervals(self) -> list[RationalInterval] | None:
        return None

    def describe(self) -> dict:
        return {"kind": self.label}


class Omega(Event):
    label = "omega"

    def contains(self, theta):
        return True

    def density_intervals(self):
        return [RationalInterval(Fraction(0), Fraction(1))]


def _merge(parts: Iterable[RationalInterval]) -> list[RationalInterval]:
    parts = sorted((p for p in parts if not p.empty), key=lambda p: (p.lo, not p.lo_closed))
    out: list[RationalInterval] = []
    for p in parts:
        last = out[-1] if out else None
        if last is not None and (p.lo < last.hi or (p.lo == last.hi and (p.lo_closed or last.hi_closed))):
            if p.hi > last.hi:
                hi, hi_closed = p.hi, p.hi_closed
            else:
                hi, hi_closed = last.hi, last.hi_closed or (p.hi == last.hi and p.hi_closed)
            out[-1] = RationalInterval(last.lo, hi, last.lo_closed, hi_closed)
        else:
            out.append(p)
    return out


class Intervals(Event):
    """Finite union of rational intervals in [0,1]."""

    label = "intervals"

    def __init__(self, parts: Iterable[RationalInterval]):
        self.parts = _merge(parts)

    @classmethod
    def closed(cls, a, b):
        return cls([RationalInterval(as_fraction(a), as_fraction(b), True, True)])

    @classmethod
    def open(cls, a, b):
        return cls([RationalInterval(as_fraction(a), as_fraction(b), False, False)])

    @classmethod
    def left_open(cls, a, b):
        """(a, b]"""
        return cls([RationalInterval(as_fraction(a), as_fraction(b), False, True)])

    @classmethod
    def right_open(cls, a, b):
        """[a, b)"""
        return cls([RationalInterval(as_fraction(a), as_fraction(b), True, False)])

    def contains(self, theta):
        if isinstance(theta, CantorPoint):
            theta = theta.value
        if not isinstance(theta, Fraction):
            raise SpaceMismatch("interval events live on [0,1]")
        return any(p.contains(theta) for p in self.parts)

    def density_intervals(self):
        return list(self.parts)

    def describe(self):
        return {"kind": self.label, "parts": [str(p) for p in self.parts]}


class AtomSet(Event):
    label = "atoms"

    def __init__(self, points: Iterable):
        self.points = tuple(points)

    def contains(self, theta):
        return any(theta == p for p in self.points)

    def density_intervals(self):
        return []

    def describe(self):
        return {"kind": self.label, "points": [point_to_dict(p) for p in self.points]}


class Complement(Event):
    label = "complement"

    def __init__(self, inner: Event):
        self.inner = inner

    def contains(self, theta):
        return not self.inner.contains(theta)

    def density_intervals(self):
        parts = self.inner.density_intervals()
        if parts is None:
            return None
        out, cur, cur_closed = [], Fraction(0), True
        for p in _merge(parts):
            gap = RationalInterval(cur, p.lo, cur_closed, not p.lo_closed)
            if not gap.empty:
                out.append(gap)
            cur, cur_closed = p.hi, not p.hi_closed
        tail = RationalInterval(cur, Fraction(1), cur_closed, True)
        if not tail.empty:
            out.append(tail)
        return out

    def describe(self):
        return {"kind": self.label, "of": self.inner.describe()}


class Ball(Event):
    """Open ball {theta : dist(theta, center) < radius} under ``d0`` or ``hilbert``.

    Membership is decided with a comparison gap; points within ``gap`` of the
    boundary raise UndecidableEvent rather than being guessed.
    """

    label = "ball"

    def __init__(self, center: SimplexPoint, radius, metric: str = "d0", gap=Fraction(1, 2 ** 30)):
        self.center, self.radius, self.metric, self.gap = center, as_fraction(radius), metric, as_fraction(gap)

    def distance(self, theta) -> RealOracle:
        if self.metric == "d0":
            return d0_distance(theta, self.center)
        return hilbert_distance(theta, self.center)

    def contains(self, theta):
        cmp = compare_with_gap(self.distance(theta), RealOracle.exact(self.radius), self.gap)
        if cmp is Ordering.WITHIN_GAP:
            raise UndecidableEvent(f"point within {self.gap} of the ball boundary")
        return cmp is Ordering.LESS

    def describe(self):
        return {"kind": self.label, "metric": self.metric, "center": point_to_dict(self.center),
                "radius": fraction_str(self.radius)}


class CoordinateBox(Event):
    """Simplex points whose first coordinates satisfy open constraints."""

    label = "box"

    def __init__(self, constraints: Sequence[CoordinateInterval]):
        self.constraints = tuple(constraints)

    def contains(self, theta):
        if not isinstance(theta, SimplexPoint):
            raise SpaceMismatch("coordinate boxes live on the simplex")
        return all(v.contains(theta(j)) for j, v in enumerate(self.constraints))


class CantorCylinders(Event):
    """Union of cylinders [w] of Cantor space (parameter side)."""

    label = "cylinders"

    def __init__(self, prefixes: Iterable[Sequence[int]]):
        self.prefixes = tuple(tuple(p) for p in prefixes)

    def contains(self, theta):
        if not isinstance(theta, CantorPoint):
            raise SpaceMismatch("cylinder events live on Cantor space")
        return any(theta.bits(len(w)) == w for w in self.prefixes)


# ---------------------------------------------------------------------------
# priors

class Prior:
    kind = "abstract"


@dataclass(frozen=True)
class AtomicPrior(Prior):
    """Finite mixture of point masses; weights positive rationals summing to 1."""

    atoms: tuple  # ((weight, point), ...)

    kind = "atomic"

    def __post_init__(self):
        atoms = tuple((as_fraction(w), p) for w, p in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise ValueError("atomic prior needs at least one atom")
        if any(w <= 0 for w, _ in atoms):
            raise ValueError("atom weights must be positive")
        total = sum((w for w, _ in atoms), Fraction(0))
        if total != 1:
            raise ValueError(f"atom weights sum to {total}, not 1")

    @classmethod
    def of(cls, *pairs) -> "AtomicPrior":
        return cls(tuple(pairs))

    @classmethod
    def dirac(cls, point) -> "AtomicPrior":
        return cls(((Fraction(1), point),))

    @property
    def weights(self):
        return [w for w, _ in self.atoms]

    @property
    def points(self):
        return [p for _, p in self.atoms]

    def measure(self, event: Event) -> Fraction:
        return sum((w for w, p in self.atoms if event.contains(p)), Fraction(0))

    def sample(self, bits: BitSource):
        cum = []
        acc = Fraction(0)
        for w, _ in self.atoms:
            acc += w
            cum.append(acc)
        j = draw_index(lambda i: cum[i] if i < len(cum) else Fraction(1), bits)
        return self.atoms[j][1]

    def to_dict(self):
        return {"kind": "atomic", "atoms": [{"weight": fraction_str(w), "point": point_to_dict(p)}
                                             for w, p in self.atoms]}


@dataclass(frozen=True)
class PolyDensityPrior(Prior):
    """Prior on [0,1] with density sum_k coeffs[k] theta^k."""

    coeffs: tuple

    kind = "poly_density"

    def __post_init__(self):
        coeffs = tuple(as_fraction(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if poly_integral(coeffs, Fraction(0), Fraction(1)) != 1:
            raise ValueError("density does not integrate to 1")
        if not _bernstein_nonnegative(coeffs):
            raise ValueError("density could not be certified nonnegative on [0,1]")

    @classmethod
    def lebesgue(cls):
        return cls((Fraction(1),))

    @classmethod
    def beta(cls, a: int, b: int):
        """Beta(a, b) with integer a, b >= 1."""
        norm = Fraction(math.factorial(a + b - 1), math.factorial(a - 1) * math.factorial(b - 1))
        m = b - 1
        coeffs = [Fraction(0)] * (a - 1) + [norm * (-1) ** j * math.comb(m, j) for j in range(m + 1)]
        return cls(tuple(coeffs))

    def density(self, t) -> Fraction:
        return poly_eval(self.coeffs, as_fraction(t))

    def measure(self, event: Event) -> Fraction:
        parts = event.density_intervals()
        if parts is None:
            raise UndecidableEvent(f"{event.label} event has no interval description")
        return sum((poly_integral(self.coeffs, p.lo, p.hi) for p in parts), Fraction(0))

    def integrate_monomial(self, ones: int, zeros: int, parts: Iterable[RationalInterval]) -> Fraction:
        """int over parts of density(theta) theta^ones (1-theta)^zeros."""
        total = Fraction(0)
        for p in parts:
            lo, hi = max(p.lo, Fraction(0)), min(p.hi, Fraction(1))
            for k, c in enumerate(self.coeffs):
                if c:
                    total += c * beta_integral(ones + k, zeros, lo, hi)
        return total

    def cdf(self, t: Fraction) -> Fraction:
        return poly_integral(self.coeffs, Fraction(0), t)

    def sample(self, bits: BitSource, precision: int = 48) -> Fraction:
        """Inverse-CDF draw returned on the dyadic grid of spacing 2**-precision."""
        u = bits.uniform_dyadic(64)
        lo, hi = Fraction(0), Fraction(1)
        for _ in range(precision):
            mid = (lo + hi) / 2
            if self.cdf(mid) <= u:
                lo = mid
            else:
                hi = mid
        return lo

    def to_dict(self):
        return {"kind": "poly_density", "coefficients": [fraction_str(c) for c in self.coeffs]}


def prior_from_dict(d: dict) -> Prior:
    kind = d["kind"]
    if kind == "atomic":
        return AtomicPrior(tuple((as_fraction(a["weight"]), point_from_dict(a["point"])) for a in d["atoms"]))
    if kind == "poly_density":
        return PolyDensityPrior(tuple(as_fraction(c) for c in d["coefficients"]))
    if kind == "lebesgue":
        return PolyDensityPrior.lebesgue()
    if kind == "beta":
        return PolyDensityPrior.beta(int(d["a"]), int(d["b"]))
    raise ValueError(f"unknown prior kind {kind!r}")


# ---------------------------------------------------------------------------
# likelihoods

class Likelihood:
    """theta -> P(.|theta) on the paths of ``tree``.

    ``support`` is an optional per-point callback; points reported outside it
    get likelihood 0 on every string (the version that is zero off the
    support set).
    """

    family = "abstract"
    tree: SampleTree = CANTOR
    space: type | tuple = object

    def __init__(self, support: Callable[[object], bool] | None = None):
        self.support = support

    def check_space(self, theta):
        if not isinstance(theta, self.space):
            raise SpaceMismatch(f"{self.family} likelihood expects {self.space}, got {type(theta).__name__}")

    def in_support(self, theta) -> bool:
        return self.support is None or bool(self.support(theta))

    def prob(self, theta, sigma) -> Fraction:
        self.check_space(theta)
        if not self.in_support(theta):
            return Fraction(0)
        return self.raw(theta, tuple(sigma))

    def raw(self, theta, sigma) -> Fraction:
        raise NotImplementedError

    def step_cdf(self, theta, prefix) -> Callable[[int], Fraction]:
        """CDF over the next symbol given the prefix (used for exact sampling)."""
        raise NotImplementedError

    def symbol_masses(self, theta) -> Callable[[int], Fraction] | None:
        """Per-symbol mass for i.i.d. families, else None."""
        return None

    def to_dict(self):
        return {"family": self.family}


class BernoulliProduct(Likelihood):
    """Theta in [0,1]; P(sigma|theta) = theta^ones (1-theta)^zeros on Cantor space."""

    family = "bernoulli"
    tree = CANTOR
    space = Fraction

    def raw(self, theta, sigma):
        ones = sum(sigma)
        return theta ** ones * (1 - theta) ** (len(sigma) - ones)

    def rate(self, theta) -> Fraction:
        return theta

    def step_cdf(self, theta, prefix):
        q = 1 - self.rate(theta)
        return lambda j: q if j == 0 else Fraction(1)

    def symbol_masses(self, theta):
        r = self.rate(theta)
        return lambda j: (1 - r) if j == 0 else (r if j == 1 else Fraction(0))


class CantorCodedBernoulli(BernoulliProduct):
    """Cantor-space parameters read as binary expansions of a Bernoulli rate."""

    family = "cantor_bernoulli"
    space = CantorPoint

    def rate(self, theta) -> Fraction:
        return theta.value

    def raw(self, theta, sigma):
        return super().raw(theta.value, sigma)


class IIDSimplex(Likelihood):
    """Theta in the simplex; P(sigma|theta) = prod_j theta(sigma(j)) on Baire space."""

    family = "iid_simplex"
    tree = BAIRE
    space = SimplexPoint

    def raw(self, theta, sigma):
        out = Fraction(1)
        for s in sigma:
            out *= theta(s)
            if out == 0:
                break
        return out

    def step_cdf(self, theta, prefix):
        return theta.cdf

    def symbol_masses(self, theta):
        return theta.coordinate


class SuperspaceLikelihood(Likelihood):
    """Base likelihood multiplied by the indicator of the original parameter space."""

    family = "superspace"

    def __init__(self, base: Likelihood, membership: Callable[[object], bool]):
        super().__init__(None)
        self.base = base
        self.membership = membership
        self.tree = base.tree
        self.space = object

    def prob(self, theta, sigma):
        if not self.membership(theta):
            return Fraction(0)
        return self.base.prob(theta, sigma)

    def in_support(self, theta):
        return bool(self.membership(theta)) and self.base.in_support(theta)

    def check_space(self, theta):
        pass

    def step_cdf(self, theta, prefix):
        return self.base.step_cdf(theta, prefix)

    def symbol_masses(self, theta):
        return self.base.symbol_masses(theta)

    @property
    def rate(self):
        return getattr(self.base, "rate", None)

    def to_dict(self):
        return {"family": self.family, "base": self.base.to_dict()}


_FAMILIES = {"bernoulli": BernoulliProduct, "cantor_bernoulli": CantorCodedBernoulli, "iid_simplex": IIDSimplex}


def likelihood_from_dict(d: dict) -> Likelihood:
    family = d["family"]
    if family not in _FAMILIES:
        raise ValueError(f"unknown likelihood family {family!r}")
    support = None
    if "support" in d:
        support_event = event_from_dict(d["support"])
        support = support_event.contains
    return _FAMILIES[family](support)


def event_from_dict(d) -> Event:
    if d in ("omega", None):
        return Omega()
    kind = d["kind"]
    if kind == "omega":
        return Omega()
    if kind == "intervals":
        parts = []
        for part in d["parts"]:
            lo, hi = as_fraction(part["lo"]), as_fraction(part["hi"])
            parts.append(RationalInterval(lo, hi, part.get("lo_closed", True), part.get("hi_closed", True)))
        return Intervals(parts)
    if kind == "atoms":
        return AtomSet(point_from_dict(p) for p in d["points"])
    if kind == "complement":
        return Complement(event_from_dict(d["of"]))
    if kind == "ball":
        return Ball(point_from_dict(d["center"]), d["radius"], d.get("metric", "d0"))
    raise ValueError(f"unknown event kind {kind!r}")


def likelihood_eval(lh: Likelihood, theta, sigma) -> Fraction:
    return lh.prob(theta, tuple(sigma))


# ---------------------------------------------------------------------------
# joint measure

@dataclass(frozen=True, eq=False)
class JointMeasure:
    prior: Prior
    likelihood: Likelihood

    @property
    def tree(self) -> SampleTree:
        return self.likelihood.tree

    def rectangle(self, event: Event, sigma) -> Fraction:
        return joint_rectangle(self, event, sigma)

    def marginal(self, sigma) -> Fraction:
        return pushforward_sample(self, sigma)

    def to_dict(self):
        return {"prior": self.prior.to_dict(), "likelihood": self.likelihood.to_dict()}


def joint_rectangle(jm: JointMeasure, event: Event, sigma) -> Fraction:
    """mu(event x [sigma]) = int_event P(sigma|theta) dp(theta), exactly."""
    sigma = tuple(sigma)
    prior, lh = jm.prior, jm.likelihood
    if isinstance(prior, AtomicPrior):
        total = Fraction(0)
        for w, theta in prior.atoms:
            if event.contains(theta):
                total += w * lh.prob(theta, sigma)
        return total
    if isinstance(prior, PolyDensityPrior):
        if type(lh) is not BernoulliProduct:
            raise SpaceMismatch("polynomial-density priors pair with the Bernoulli family only")
        parts = event.density_intervals()
        if parts is None:
            raise UndecidableEvent(f"{event.label} event has no interval description")
        if lh.support is not None:
            raise UndecidableEvent("support callbacks are not integrable against a density")
        ones = sum(sigma)
        return prior.integrate_monomial(ones, len(sigma) - ones, parts)
    raise TypeError(f"unsupported prior {prior!r}")


def pushforward_sample(jm: JointMeasure, sigma) -> Fraction:
    """mu_X([sigma])."""
    return joint_rectangle(jm, Omega(), sigma)


def sample_path(jm: JointMeasure, theta, horizon: int, bits: BitSource) -> tuple:
    """Exact draw of the first ``horizon`` symbols of a path from P(.|theta)."""
    lh = jm.likelihood
    lh.check_space(theta)
    if not lh.in_support(theta):
        raise ZeroMassParameter("theta lies outside the likelihood's support")
    rate = getattr(lh, "rate", None)
    if rate is not None:
        p = rate(theta)
        return tuple(bernoulli(p, bits) for _ in range(horizon))
    out: list[int] = []
    for _ in range(horizon):
        out.append(draw_index(lh.step_cdf(theta, tuple(out)), bits))
    return tuple(out)


def extend_to_superspace(prior: AtomicPrior, lh: Likelihood, membership: Callable[[object], bool]):
    """Prior and likelihood on a superspace: same atoms, likelihood times I_Omega."""
    if not isinstance(prior, AtomicPrior):
        raise TypeError("superspace extension is implemented for atomic priors")
    return AtomicPrior(prior.atoms), SuperspaceLikelihood(lh, membership)
