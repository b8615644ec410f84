"""Finite-stage Schnorr-test machinery.

Nothing here decides randomness.  Tests report whether a point has been
captured by the finite approximations available at a given stage, and the
reversal construction gates a likelihood on those reports.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .estimators import ExplosionGuard, _rate, deviation_probability, moments
from .measures import AtomicPrior, Likelihood, Prior
from .numeric import RealOracle, as_fraction, avoid_atoms, fraction_str, rational_between
from .spaces import CANTOR, RationalInterval, ReversalTree


class UndecidedMembership(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Cantor cylinder algebra (finite unions of cylinders)

def _minimal(prefixes) -> tuple:
    """Drop cylinders contained in shorter ones and merge sibling pairs."""
    ws = sorted(set(tuple(w) for w in prefixes), key=lambda w: (len(w), w))
    kept: list[tuple] = []
    for w in ws:
        if not any(w[:len(v)] == v for v in kept):
            kept.append(w)
    changed = True
    s = set(kept)
    while changed:
        changed = False
        for w in sorted(s, key=len, reverse=True):
            if w and w[:-1] + (1 - w[-1],) in s:
                s -= {w, w[:-1] + (1 - w[-1],)}
                s.add(w[:-1])
                changed = True
                break
    return tuple(sorted(s, key=lambda w: (len(w), w)))


def cylinder_measure(prefixes, rate: Fraction = Fraction(1, 2)) -> Fraction:
    """Product-Bernoulli(rate) measure of a finite union of cylinders."""
    total = Fraction(0)
    for w in _minimal(prefixes):
        ones = sum(w)
        total += rate ** ones * (1 - rate) ** (len(w) - ones)
    return total


def cylinders_subset(inner, outer) -> bool:
    """Every cylinder of ``inner`` lies inside the union ``outer``."""
    outer = _minimal(outer)
    if not outer:
        return not _minimal(inner)
    depth = max(len(w) for w in outer)

    def covered(w):
        if any(w[:len(v)] == v for v in outer):
            return True
        if len(w) >= depth:
            return False
        return covered(w + (0,)) and covered(w + (1,))

    return all(covered(tuple(w)) for w in inner)


def cylinders_minus(a, b, rate=Fraction(1, 2)) -> Fraction:
    """Measure of (union a) minus (union b)."""
    return cylinder_measure(list(a) + list(b), rate) - cylinder_measure(b, rate)


# ---------------------------------------------------------------------------
# open sets and tests

@dataclass
class OpenSetDesc:
    """An effectively open set given by stage-wise finite lists of basic opens.

    ``generators(k)`` is the finite union enumerated by stage k.  When
    ``complete_at`` is set, the stage-k list is the whole set for every
    k >= complete_at, so non-membership becomes decidable from then on.
    """

    kind: str                                    # "cantor", "interval" or "product"
    generators: Callable[[int], list]
    member: Callable[[object, object], bool]     # (point, generator) -> bool
    measure: RealOracle
    complete_at: int | None = None

    def contains(self, point, stage: int) -> bool | None:
        if any(self.member(point, g) for g in self.generators(stage)):
            return True
        if self.complete_at is not None and stage >= self.complete_at:
            return False
        return None

    def to_dict(self, stage: int) -> dict:
        gens = []
        for g in self.generators(stage):
            if isinstance(g, tuple):
                gens.append(list(g))
            elif isinstance(g, RationalInterval):
                gens.append({"lo": fraction_str(g.lo), "hi": fraction_str(g.hi),
                             "lo_closed": g.lo_closed, "hi_closed": g.hi_closed})
            else:
                gens.append(g.to_dict() if hasattr(g, "to_dict") else repr(g))
        m = self.measure.exact_value
        return {"kind": self.kind, "stage": stage, "generators": gens,
                "measure": fraction_str(m) if m is not None else str(self.measure(32))}


def cantor_open(prefixes, complete_at: int = 0, rate=Fraction(1, 2)) -> OpenSetDesc:
    ps = _minimal(prefixes)
    return OpenSetDesc("cantor", lambda k: list(ps),
                       lambda pt, w: pt.bits(len(w)) == w,
                       RealOracle.exact(cylinder_measure(ps, rate)), complete_at)


def _in_interval(pt, g: RationalInterval) -> bool:
    return g.contains(_rate(pt))


def interval_open(parts: Sequence[RationalInterval], complete_at: int = 0) -> OpenSetDesc:
    """Relatively open finite union of intervals in [0,1], Lebesgue measure."""
    parts = list(parts)
    return OpenSetDesc("interval", lambda k: parts, _in_interval,
                       RealOracle.exact(_union_length(parts)), complete_at)


def _union_length(parts: Sequence[RationalInterval]) -> Fraction:
    spans = sorted((max(p.lo, Fraction(0)), min(p.hi, Fraction(1))) for p in parts)
    total = Fraction(0)
    cur = None
    for lo, hi in spans:
        if hi <= lo:
            continue
        if cur is None or lo > cur[1]:
            if cur:
                total += cur[1] - cur[0]
            cur = [lo, hi]
        else:
            cur[1] = max(cur[1], hi)
    if cur:
        total += cur[1] - cur[0]
    return total


EMPTY_CANTOR = cantor_open(())


class Capture(enum.Enum):
    CAPTURED_AT = "CAPTURED_AT"
    NOT_YET = "NOT_YET"


@dataclass(frozen=True)
class MembershipReport:
    status: Capture
    level: int = 0          # deepest level n with the point in every U_1..U_n (0 for NOT_YET)

    def __str__(self):
        return f"CAPTURED_AT({self.level})" if self.status is Capture.CAPTURED_AT else "NOT_YET"


@dataclass
class SequentialSchnorrTest:
    """Levels U_1, U_2, ... with a certified bound on every level's measure."""

    level: Callable[[int], OpenSetDesc]
    bound: Callable[[int], Fraction] = lambda n: Fraction(1, 2 ** n)
    name: str = "test"

    def certify(self, n_max: int, k: int = 40) -> list[tuple[int, Fraction | None, bool]]:
        out = []
        for n in range(1, n_max + 1):
            m = self.level(n).measure
            v = m.exact_value
            ok = v <= self.bound(n) if v is not None else m(k).hi <= self.bound(n)
            out.append((n, v, ok))
        return out


def test_membership_stage(test: SequentialSchnorrTest, point, stage: int) -> MembershipReport:
    """Largest n <= stage with the point in the stage-``stage`` approximation of U_1..U_n."""
    level = 0
    for n in range(1, stage + 1):
        if test.level(n).contains(point, stage) is not True:
            break
        level = n
    return MembershipReport(Capture.CAPTURED_AT, level) if level else MembershipReport(Capture.NOT_YET)


test_membership_stage.__test__ = False  # keep pytest from collecting it on import


def zeros_cylinder_test() -> SequentialSchnorrTest:
    """U_n = [0^n] under the uniform measure on Cantor space."""
    return SequentialSchnorrTest(lambda n: cantor_open([(0,) * n]), name="zeros-cylinder")


def empty_test() -> SequentialSchnorrTest:
    return SequentialSchnorrTest(lambda n: EMPTY_CANTOR, name="empty")


# ---------------------------------------------------------------------------
# Sigma^0_2 classes and their effective covers

@dataclass
class SigmaTwoClass:
    """B = union of closed pieces C_i, each with an exact measure.

    Cantor pieces are finite unions of cylinders (clopen); interval pieces are
    finite unions of closed rational intervals in [0,1] (possibly points).
    """

    kind: str
    pieces: list   # list of lists of prefixes, or of (lo, hi) pairs
    rate: Fraction = Fraction(1, 2)

    def piece_measure(self, i: int) -> Fraction:
        return self._measure(self.pieces[i])

    def _measure(self, piece) -> Fraction:
        if self.kind == "cantor":
            return cylinder_measure(piece, self.rate)
        return _union_length([RationalInterval(as_fraction(a), as_fraction(b)) for a, b in piece])

    def cumulative(self, i: int):
        out = []
        for p in self.pieces[:i + 1]:
            out.extend(p)
        return out

    @property
    def total_measure(self) -> RealOracle:
        return RealOracle.exact(self._measure(self.cumulative(len(self.pieces) - 1)) if self.pieces else 0)


@dataclass
class CoverReport:
    open_set: OpenSetDesc
    generators: list
    measure: Fraction
    excess: Fraction
    eps: Fraction
    contains_input: bool

    @property
    def holds(self) -> bool:
        return self.contains_input and self.excess < self.eps


def _interval_excess(piece, r: Fraction) -> tuple[list[RationalInterval], Fraction]:
    opens = [RationalInterval(as_fraction(a) - r, as_fraction(b) + r, False, False) for a, b in piece]
    closed = [RationalInterval(as_fraction(a), as_fraction(b)) for a, b in piece]
    return opens, _union_length(opens) - _union_length(closed)


def sigma2_cover(B: SigmaTwoClass, eps) -> CoverReport:
    """Open U containing B with measure(U minus B) < eps.

    The pieces are made increasing (C_n := C_0 u ... u C_n) and each gets the
    budget (eps/2) * delta_n with delta_n = eta_n + 2^-(n+2), where eta_n is the
    measure C_n adds to C_{n-1}.  Clopen Cantor pieces are their own cover;
    interval pieces are thickened, halving the radius until the exact excess
    is under budget.
    """
    eps = as_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    gens: list = []
    prev = Fraction(0)
    for n in range(len(B.pieces)):
        c_n = B.cumulative(n)
        mass = B._measure(c_n)
        eta, prev = mass - prev, mass
        budget = eps / 2 * (eta + Fraction(1, 2 ** (n + 2)))
        if B.kind == "cantor":
            gens.extend(tuple(w) for w in c_n)
            continue
        r = eps / 4
        opens, excess = _interval_excess(c_n, r)
        while excess >= budget:
            r /= 2
            opens, excess = _interval_excess(c_n, r)
        gens.extend(opens)
    whole = B.cumulative(len(B.pieces) - 1) if B.pieces else []
    if B.kind == "cantor":
        gens = list(_minimal(gens))
        u = cantor_open(gens, rate=B.rate)
        measure = u.measure.exact_value
        excess = cylinders_minus(gens, whole, B.rate)
        inside = cylinders_subset(whole, gens)
    else:
        u = interval_open(gens)
        measure = u.measure.exact_value
        excess = measure - B._measure(whole)
        inside = all(any(g.lo < as_fraction(a) and as_fraction(b) < g.hi for g in gens) for a, b in whole)
    return CoverReport(u, gens, measure, excess, eps, inside)


def measure_one_test(piece: Callable[[int], list], rate=Fraction(1, 2)) -> SequentialSchnorrTest:
    """Test built from a measure-one class B = union of increasing clopen C_i on Cantor space.

    Level n is the complement of the first C_i whose complement has measure
    <= 2^-n, so a point captured at every level avoids every C_i.
    """
    def first_index(n):
        i = 0
        while 1 - cylinder_measure(piece(i), rate) > Fraction(1, 2 ** n):
            i += 1
            if i > 10 ** 4:
                raise ExplosionGuard("no piece reaches the level bound")
        return i

    def level(n):
        c = _minimal(piece(first_index(n)))
        depth = max((len(w) for w in c), default=0)
        comp = [s for s in CANTOR.strings(depth) if not any(s[:len(w)] == w for w in c)]
        return cantor_open(comp, rate=rate)

    return SequentialSchnorrTest(level, name="measure-one-complement")


# ---------------------------------------------------------------------------
# the relative-frequency test on parameter x sample space

def eta_window(n: int, k: int = 16) -> tuple[Fraction, Fraction]:
    """A rational subinterval of ((n+1)^(-1/3), n^(-1/3))."""
    lo = RealOracle.root(Fraction(1, n + 1), 3)
    hi = RealOracle.root(Fraction(1, n), 3)
    return rational_between(lo, hi, k)


def deviation_jumps(prior: Prior, N: int) -> list[Fraction]:
    """Thresholds where mu(|f_N - Theta| > eta) jumps: |i/N - theta_j| over atoms."""
    if not isinstance(prior, AtomicPrior):
        return []
    return sorted({abs(Fraction(i, N) - _rate(t)) for t in prior.points for i in range(N + 1)})


@dataclass
class LrfLevel:
    n: int
    eta: Fraction
    measure: Fraction
    bound: RealOracle
    holds_exact: bool           # measure^3 <= 4 (alpha - beta)^3 / n^4
    holds_enclosure: bool       # measure <= upper end of the bound enclosure


@dataclass
class LrfTestReport:
    test: SequentialSchnorrTest
    levels: list

    @property
    def holds(self) -> bool:
        return all(l.holds_exact and l.holds_enclosure for l in self.levels)


def lrf_schnorr_test(prior: Prior, horizon: int, eta: dict | None = None,
                     budget: int = 10 ** 7) -> LrfTestReport:
    """U_n = {(theta, x): |f_{n^2}(x) - theta| > eta_n}, measures and bounds for n <= horizon.

    eta_n is a rational in ((n+1)^(-1/3), n^(-1/3)) avoiding the jump points of
    the deviation probability; ``eta`` overrides it per level.
    """
    spread = moments(prior).spread
    levels = []
    etas: dict[int, Fraction] = {}
    for n in range(1, horizon + 1):
        N = n * n
        if eta and n in eta:
            e = as_fraction(eta[n])
        else:
            a, b = eta_window(n)
            e = avoid_atoms(a, b, deviation_jumps(prior, N))
        etas[n] = e
        mu = deviation_probability(prior, N, e, budget)
        bound = RealOracle.root(Fraction(4, n ** 4), 3).scale(spread)
        exact_ok = mu ** 3 <= 4 * spread ** 3 / n ** 4
        levels.append(LrfLevel(n, e, mu, bound, exact_ok, mu <= bound(40).hi))

    measures = {l.n: l.measure for l in levels}

    def level(n):
        N, e = n * n, etas[n]

        def member(point, g):
            theta, x = point
            return len(x) >= N and abs(Fraction(sum(x[:N]), N) - _rate(theta)) > e

        return OpenSetDesc("product", lambda k: ["deviation"], member, RealOracle.exact(measures[n]), 0)

    def bound_of(n):
        return levels[n - 1].bound(40).hi

    return LrfTestReport(SequentialSchnorrTest(level, bound_of, "relative-frequency"), levels)


# ---------------------------------------------------------------------------
# reversal construction

class ReversalLikelihood(Likelihood):
    """Likelihood on the extended tree: the root carries mass 1 unless theta is
    captured by every level, and copy m carries P(sigma|theta) exactly when
    theta lies in U_m minus U_{m+1}.

    Levels are examined up to ``max_level``; a parameter still captured there
    is treated as captured by all levels and gets likelihood 0 everywhere.
    """

    family = "reversal"

    def __init__(self, base: Likelihood, test: SequentialSchnorrTest, max_level: int, stage: int | None = None):
        super().__init__(None)
        self.base = base
        self.test = test
        self.max_level = max_level
        self.stage = max_level if stage is None else stage
        self.tree = ReversalTree(base.tree)
        self.space = base.space
        self._cache: dict = {}

    def copy_index(self, theta) -> int | None:
        """m with theta in U_m \\ U_{m+1} (U_0 is everything), or None if captured through max_level."""
        if theta in self._cache:
            return self._cache[theta]
        m = None
        for n in range(1, self.max_level + 1):
            inside = self.test.level(n).contains(theta, self.stage)
            if inside is None:
                raise UndecidedMembership(f"level {n} membership of {theta} unsettled at stage {self.stage}")
            if not inside:
                m = n - 1
                break
        self._cache[theta] = m
        return m

    def check_space(self, theta):
        self.base.check_space(theta)

    def raw(self, theta, tau):
        m = self.copy_index(theta)
        if m is None:
            return Fraction(0)
        if len(tau) == 0:
            return Fraction(1)
        if tau[0] != m:
            return Fraction(0)
        return self.base.prob(theta, tau[1:])

    def step_cdf(self, theta, prefix):
        if len(prefix) == 0:
            m = self.copy_index(theta)
            if m is None:
                raise UndecidedMembership("captured parameters have no sample paths")
            return lambda j: Fraction(1) if j >= m else Fraction(0)
        return self.base.step_cdf(theta, prefix[1:])

    def to_dict(self):
        return {"family": self.family, "base": self.base.to_dict(), "test": self.test.name,
                "max_level": self.max_level}


@dataclass
class ExtendedModel:
    base_likelihood: Likelihood
    test: SequentialSchnorrTest
    likelihood: ReversalLikelihood

    @property
    def tree(self) -> ReversalTree:
        return self.likelihood.tree

    def copy_masses(self, theta, copies: int) -> list[Fraction]:
        """Total mass of copy m = P~((m)|theta) for m < copies."""
        return [self.likelihood.prob(theta, (m,)) for m in range(copies)]


def reversal_build(base: Likelihood, test: SequentialSchnorrTest, max_level: int,
                   stage: int | None = None) -> ExtendedModel:
    return ExtendedModel(base, test, ReversalLikelihood(base, test, max_level, stage))
