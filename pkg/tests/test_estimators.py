import itertools
import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from effbayes.estimators import (
    ExplosionGuard,
    MomentPair,
    chebyshev_check,
    clopper_pearson,
    deviation_probability,
    doob_maximal_check,
    lrf,
    lrf_coordinate,
    martingale_truncation,
    moments,
    symbol_frequencies,
)
from effbayes.measures import (
    AtomicPrior,
    BernoulliProduct,
    CantorCylinders,
    JointMeasure,
    PolyDensityPrior,
    pushforward_sample,
    sample_path,
)
from effbayes.rng import BitSource

QUARTERS = AtomicPrior.of((F(1, 2), F(1, 4)), (F(1, 2), F(3, 4)))
ENDPOINTS = AtomicPrior.of((F(1, 2), F(0)), (F(1, 2), F(1)))
LEBESGUE = PolyDensityPrior.lebesgue()

unit_fracs = st.fractions(0, 1, max_denominator=10)
atomic = st.lists(st.tuples(st.integers(1, 5), unit_fracs), min_size=1, max_size=3, unique_by=lambda t: t[1]) \
    .map(lambda ws: AtomicPrior(tuple((F(w, sum(v for v, _ in ws)), p) for w, p in ws)))
eps_values = st.sampled_from([F(1, 10), F(1, 4), F(3, 5), F(1, 3), F(1, 7)])


def brute_deviation(prior, n, eps):
    """Sum over all 2^n strings and every atom."""
    total = F(0)
    for w, t in prior.atoms:
        for s in itertools.product((0, 1), repeat=n):
            ones = sum(s)
            if abs(F(ones, n) - t) > eps:
                total += w * t ** ones * (1 - t) ** (n - ones)
    return total


def lebesgue_deviation_oracle(n, eps):
    """Integrate t^c (1-t)^(n-c) by monomial expansion over the set |c/n - t| > eps."""
    def integral(c, lo, hi):
        return sum((math.comb(n - c, j) * (-1) ** j * (hi ** (c + j + 1) - lo ** (c + j + 1)) / (c + j + 1)
                    for j in range(n - c + 1)), F(0))

    total = F(0)
    for c in range(n + 1):
        centre = F(c, n)
        if centre - eps > 0:
            total += math.comb(n, c) * integral(c, F(0), centre - eps)
        if centre + eps < 1:
            total += math.comb(n, c) * integral(c, centre + eps, F(1))
    return total


# ---------------------------------------------------------------------------
# relative frequencies and moments

def test_lrf_examples():
    assert lrf((0, 1, 0, 1), 4) == F(1, 2)
    assert all(lrf((1,) * 9, n) == 1 for n in range(1, 10))
    assert lrf_coordinate((0, 2, 0, 5), 0, 4) == F(1, 2)


@given(st.lists(st.integers(0, 6), min_size=1, max_size=40))
def test_frequencies_are_a_distribution(x):
    n = len(x)
    freqs = symbol_frequencies(x, n)
    assert sum(freqs.values()) == 1
    assert all(0 <= lrf_coordinate(x, j, n) <= 1 for j in range(7))
    assert all(freqs[j] == lrf_coordinate(x, j, n) for j in freqs)


def test_moment_examples():
    assert moments(LEBESGUE) == MomentPair(F(1, 2), F(1, 3))
    assert moments(QUARTERS) == MomentPair(F(1, 2), F(5, 16))
    assert moments(AtomicPrior.dirac(F(1))) == MomentPair(F(1), F(1))
    assert moments(PolyDensityPrior.beta(2, 3)) == MomentPair(F(2, 5), F(1, 5))


@given(atomic)
def test_moments_ordered(prior):
    m = moments(prior)
    assert 0 <= m.beta <= m.alpha <= 1


# ---------------------------------------------------------------------------
# Chebyshev

def test_chebyshev_examples():
    r = chebyshev_check(QUARTERS, F(3, 5), 2)
    assert (r.lhs, r.rhs, r.holds) == (F(1, 16), F(25, 96), True)
    for n in (1, 5, 50):
        r = chebyshev_check(ENDPOINTS, F(1, 10), n)
        assert r.lhs == 0 and r.rhs == 0 and r.holds


@settings(max_examples=40, deadline=None)
@given(atomic, st.integers(1, 10), eps_values)
def test_exact_deviation_matches_enumeration(prior, n, eps):
    assert deviation_probability(prior, n, eps) == brute_deviation(prior, n, eps)


@pytest.mark.parametrize("n", [1, 2, 3, 7, 12])
@pytest.mark.parametrize("eps", [F(1, 10), F(1, 4), F(3, 5)])
def test_lebesgue_deviation_matches_expansion(n, eps):
    assert deviation_probability(LEBESGUE, n, eps) == lebesgue_deviation_oracle(n, eps)


def test_lebesgue_single_draw():
    # |X - t| > 4/5 for one draw: t < 1/5 with X = 1, or t > 4/5 with X = 0
    assert deviation_probability(LEBESGUE, 1, F(4, 5)) == 2 * (F(1, 50))


@settings(max_examples=30, deadline=None)
@given(atomic, st.integers(1, 300), eps_values)
def test_chebyshev_holds_exactly(prior, n, eps):
    assert chebyshev_check(prior, eps, n).holds


def test_chebyshev_large_n_is_fast_and_holds():
    r = chebyshev_check(AtomicPrior.of((F(1, 4), F(1, 10)), (F(1, 2), F(1, 2)), (F(1, 4), F(9, 10))), F(1, 10), 10_000)
    assert r.holds and r.lhs < r.rhs


def test_lebesgue_monte_carlo_mode():
    r = chebyshev_check(LEBESGUE, F(1, 4), 96, mode="monte_carlo", replicas=2000, seed=3)
    assert r.rhs == F(1, 36)
    assert r.holds
    exact = deviation_probability(LEBESGUE, 96, F(1, 4))
    assert r.ci[0] <= float(exact) <= r.ci[1]


def test_explosion_guard():
    with pytest.raises(ExplosionGuard):
        deviation_probability(LEBESGUE, 10 ** 5, F(1, 4))


def test_clopper_pearson_brackets_the_proportion():
    lo, hi = clopper_pearson(30, 100)
    assert lo < 0.3 < hi
    assert clopper_pearson(0, 50)[0] == 0.0 and clopper_pearson(50, 50)[1] == 1.0


def test_empirical_slln():
    jm = JointMeasure(LEBESGUE, BernoulliProduct())
    good = 0
    for r in range(100):
        theta = F(1 + r % 9, 10)
        x = sample_path(jm, theta, 10_000, BitSource(17, "slln", r))
        good += abs(lrf(x, 10_000) - theta) < F(1, 20)
    assert good >= 97


# ---------------------------------------------------------------------------
# Doob maximal inequality

def brute_doob(jm, prefixes, depth):
    """E[max_n M_n^2] from explicit per-prefix conditional probabilities."""
    leaves = list(itertools.product((0, 1), repeat=depth))
    in_b = {s: any(s[:len(w)] == tuple(w) for w in prefixes) for s in leaves}
    mass = {s: pushforward_sample(jm, s) for s in leaves}

    def m(sigma):
        below = [s for s in leaves if s[:len(sigma)] == sigma]
        den = sum((mass[s] for s in below), F(0))
        return sum((mass[s] for s in below if in_b[s]), F(0)) / den

    total = F(0)
    for s in leaves:
        if mass[s]:
            total += mass[s] * max(m(s[:k]) for k in range(depth + 1)) ** 2
    return total, sum((mass[s] for s in leaves if in_b[s]), F(0))


def test_doob_examples():
    jm = JointMeasure(LEBESGUE, BernoulliProduct())
    r = doob_maximal_check(jm, CantorCylinders([(1,)]), 1)
    assert r.lhs_squared == F(5, 8) and r.event_mass == F(1, 2) and r.holds
    assert r.lhs(30).contains(F("0.790569415"))
    empty = doob_maximal_check(jm, CantorCylinders([]), 3)
    assert empty.lhs_squared == 0 and empty.event_mass == 0 and empty.holds
    full = doob_maximal_check(jm, CantorCylinders([()]), 3)
    assert full.lhs_squared == 1 and full.rhs.exact_value == 2


prefix_sets = st.lists(st.lists(st.integers(0, 1), max_size=4).map(tuple), max_size=4)


@settings(max_examples=30, deadline=None)
@given(prefix_sets, st.integers(4, 6), st.sampled_from([LEBESGUE, QUARTERS, PolyDensityPrior.beta(2, 3)]))
def test_doob_matches_brute_force(prefixes, depth, prior):
    jm = JointMeasure(prior, BernoulliProduct())
    r = doob_maximal_check(jm, CantorCylinders(prefixes), depth)
    sq, mass = brute_doob(jm, prefixes, depth)
    assert (r.lhs_squared, r.event_mass) == (sq, mass)
    assert r.holds
    assert r.truncation.tower_holds()


def test_truncation_rejects_deep_cylinders():
    jm = JointMeasure(LEBESGUE, BernoulliProduct())
    with pytest.raises(ValueError):
        martingale_truncation(jm, CantorCylinders([(0, 1, 1)]), 2)
    with pytest.raises(ExplosionGuard):
        martingale_truncation(jm, CantorCylinders([(0,)]), 20)
