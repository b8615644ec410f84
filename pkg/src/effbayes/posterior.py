"""Posterior of a parameter event given an observed string.

p(A|sigma) = mu(A x [sigma]) / mu(Omega x [sigma]), and 0 (flagged as
degenerate) whenever the denominator vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .measures import (
    AtomicPrior,
    Event,
    JointMeasure,
    joint_rectangle,
    pushforward_sample,
)


class TooManyStrings(ValueError):
    pass


@dataclass(frozen=True)
class PosteriorValue:
    value: Fraction
    degenerate: bool = False

    def __post_init__(self):
        if self.degenerate and self.value != 0:
            raise ValueError("degenerate posteriors are 0 by convention")
        if not 0 <= self.value <= 1:
            raise ValueError(f"posterior {self.value} outside [0,1]")


def posterior_eval(jm: JointMeasure, event: Event, sigma) -> PosteriorValue:
    den = pushforward_sample(jm, sigma)
    if den == 0:
        return PosteriorValue(Fraction(0), True)
    return PosteriorValue(joint_rectangle(jm, event, sigma) / den)


@dataclass
class PosteriorTrajectory:
    event: Event
    sample: tuple
    values: list  # PosteriorValue for n = 0..N (or at the requested indices)
    indices: list = field(default_factory=list)

    @property
    def degenerate_onset(self) -> int | None:
        for n, v in zip(self.indices, self.values):
            if v.degenerate:
                return n
        return None

    def rows(self, event_id: str):
        """CSV rows (n, event_id, value_num, value_den, value_decimal, degenerate_flag)."""
        from .numeric import decimal_str

        for n, v in zip(self.indices, self.values):
            yield (n, event_id, v.value.numerator, v.value.denominator, decimal_str(v.value), int(v.degenerate))


class _AtomicState:
    """Per-atom running likelihoods for i.i.d. families; one update per symbol."""

    def __init__(self, jm: JointMeasure, event: Event):
        lh = jm.likelihood
        self.weights = []
        self.masses = []
        self.inside = []
        for w, theta in jm.prior.atoms:
            lh.check_space(theta)
            alive = lh.in_support(theta)
            self.weights.append(w if alive else Fraction(0))
            self.masses.append(lh.symbol_masses(theta))
            self.inside.append(event.contains(theta))
        self.lik = [Fraction(1)] * len(self.weights)

    def push(self, symbol: int):
        self.lik = [l * m(symbol) if l else l for l, m in zip(self.lik, self.masses)]

    def value(self) -> PosteriorValue:
        den = Fraction(0)
        num = Fraction(0)
        for w, l, inside in zip(self.weights, self.lik, self.inside):
            t = w * l
            den += t
            if inside:
                num += t
        if den == 0:
            return PosteriorValue(Fraction(0), True)
        return PosteriorValue(num / den)


def _iid(jm: JointMeasure) -> bool:
    return isinstance(jm.prior, AtomicPrior) and all(
        jm.likelihood.symbol_masses(theta) is not None for theta in jm.prior.points)


def posterior_trajectory(jm: JointMeasure, event: Event, x: Sequence[int],
                         indices: Iterable[int] | None = None) -> PosteriorTrajectory:
    """p(event | x[:n]) for n in ``indices`` (default 0..len(x))."""
    x = tuple(x)
    idx = list(range(len(x) + 1)) if indices is None else sorted(set(indices))
    if idx and idx[-1] > len(x):
        raise ValueError("index beyond the sample length")
    values = []
    if _iid(jm):
        state = _AtomicState(jm, event)
        wanted = set(idx)
        for n in range(idx[-1] + 1 if idx else 0):
            if n in wanted:
                values.append(state.value())
            if n < len(x):
                state.push(x[n])
    else:
        values = [posterior_eval(jm, event, x[:n]) for n in idx]
    return PosteriorTrajectory(event, x, values, idx)


def reachable_strings(jm: JointMeasure, depth: int, limit: int = 2 ** 20) -> list[tuple]:
    """Depth-n strings that can carry positive mass, for finite effective branching.

    Atomic priors restrict the alphabet to symbols with positive mass under
    some atom; strings outside carry mu_X = 0 and contribute 0 to both sides
    of every identity checked here.
    """
    tree = jm.tree
    alphabet = None
    if tree.child_list(()) is None:
        if not isinstance(jm.prior, AtomicPrior):
            raise TooManyStrings("infinite branching without an atomic prior")
        symbols = set()
        for theta in jm.prior.points:
            bound = getattr(theta, "support_bound", None)
            if bound is None:
                raise TooManyStrings("an atom charges infinitely many symbols")
            masses = jm.likelihood.symbol_masses(theta)
            symbols.update(j for j in range(bound) if masses(j) > 0)
        alphabet = sorted(symbols)
        count = len(alphabet) ** depth
    else:
        count = 2 ** depth if tree.kind == "cantor" else None
    if count is not None and count > limit:
        raise TooManyStrings(f"{count} strings at depth {depth}")
    out = list(tree.strings(depth, alphabet))
    if len(out) > limit:
        raise TooManyStrings(f"{len(out)} strings at depth {depth}")
    return out


@dataclass
class ConditionalExpectationReport:
    depth: int
    n_strings: int
    n_subsets: int
    enumerated: bool
    max_discrepancy: Fraction

    @property
    def holds(self) -> bool:
        return self.max_discrepancy == 0


def verify_conditional_expectation(jm: JointMeasure, event: Event, n: int,
                                   enumerate_limit: int = 16) -> ConditionalExpectationReport:
    """Check  sum_{sigma in D} mu(A x [sigma]) = sum_{sigma in D} p(A|sigma) mu_X([sigma])  for every D.

    Both sides are additive in D, so the largest discrepancy over all subsets
    is max(sum of positive per-string gaps, -sum of negative ones), exact for
    any number of strings.  Up to ``enumerate_limit`` strings the subsets are
    also walked explicitly in Gray-code order as an independent check.
    """
    strings = reachable_strings(jm, n)
    diffs = []
    for sigma in strings:
        lhs = joint_rectangle(jm, event, sigma)
        rhs = posterior_eval(jm, event, sigma).value * pushforward_sample(jm, sigma)
        diffs.append(lhs - rhs)
    pos = sum((d for d in diffs if d > 0), Fraction(0))
    neg = sum((d for d in diffs if d < 0), Fraction(0))
    worst = max(pos, -neg)
    m = len(strings)
    enumerated = m <= enumerate_limit
    if enumerated:
        acc = Fraction(0)
        walked = Fraction(0)
        included = [False] * m
        for g in range(1, 2 ** m):
            bit = (g & -g).bit_length() - 1  # Gray code: one member flips per step
            included[bit] = not included[bit]
            acc += diffs[bit] if included[bit] else -diffs[bit]
            walked = max(walked, abs(acc))
        if walked != worst:
            raise AssertionError("subset walk disagrees with the additive maximum")
    return ConditionalExpectationReport(n, m, 2 ** m, enumerated, worst)


@dataclass
class LscReport:
    values: list
    nondecreasing: bool
    limit: Fraction | None
    gap_to_limit: Fraction | None
    tolerance: Fraction

    @property
    def holds(self) -> bool:
        if not self.nondecreasing:
            return False
        return self.gap_to_limit is None or self.gap_to_limit <= self.tolerance


def posterior_lsc_check(jm: JointMeasure, inner: Sequence[Event], sigma, limit_event: Event | None = None,
                        tolerance=Fraction(1, 100)) -> LscReport:
    """Inner approximations U_1 c U_2 c ... of U: p(U_m|sigma) must increase towards p(U|sigma)."""
    values = [posterior_eval(jm, u, sigma).value for u in inner]
    nondecreasing = all(a <= b for a, b in zip(values, values[1:]))
    limit = gap = None
    if limit_event is not None:
        limit = posterior_eval(jm, limit_event, sigma).value
        gap = limit - values[-1] if values else limit
    return LscReport(values, nondecreasing, limit, gap, Fraction(tolerance))
