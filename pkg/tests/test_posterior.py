import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from effbayes.measures import (
    AtomicPrior,
    AtomSet,
    BernoulliProduct,
    Complement,
    IIDSimplex,
    Intervals,
    JointMeasure,
    Omega,
    PolyDensityPrior,
    pushforward_sample,
)
from effbayes.models import MODELS
from effbayes.posterior import (
    TooManyStrings,
    posterior_eval,
    posterior_lsc_check,
    posterior_trajectory,
    reachable_strings,
    verify_conditional_expectation,
)
from effbayes.spaces import SimplexPoint

TWO_ATOM = JointMeasure(AtomicPrior.of((F(1, 2), F(1, 3)), (F(1, 2), F(2, 3))), BernoulliProduct())
LEBESGUE = JointMeasure(PolyDensityPrior.lebesgue(), BernoulliProduct())
THETA1 = SimplexPoint.geometric(F(1, 2), F(1, 2))
THETA2 = SimplexPoint.finite([F(1, 2), F(1, 2)])
FREEDMAN = JointMeasure(AtomicPrior.of((F(1, 2), THETA1), (F(1, 2), THETA2)), IIDSimplex())

bitstrings = st.lists(st.integers(0, 1), max_size=10).map(tuple)
unit_fracs = st.fractions(0, 1, max_denominator=12)


def bayes_oracle(prior, theta, sigma):
    """Discrete Bayes ratio written out directly."""
    ones = sum(sigma)

    def lik(t):
        return t ** ones * (1 - t) ** (len(sigma) - ones)

    den = sum((w * lik(t) for w, t in prior.atoms), F(0))
    num = sum((w * lik(t) for w, t in prior.atoms if t == theta), F(0))
    return num / den if den else F(0)


def test_examples():
    assert posterior_eval(LEBESGUE, Intervals.closed(F(1, 5), F(7, 10)), ()).value == F(1, 2)
    assert posterior_eval(TWO_ATOM, AtomSet([F(2, 3)]), (1,)).value == F(2, 3)
    assert posterior_eval(LEBESGUE, Intervals.closed(0, F(1, 2)), (1,)).value == F(1, 4)
    assert posterior_eval(FREEDMAN, AtomSet([THETA1]), (0, 2, 1)).value == 1
    assert posterior_eval(FREEDMAN, AtomSet([THETA2]), (0, 2, 1)).value == 0


def test_degenerate_flag():
    jm = JointMeasure(AtomicPrior.dirac(THETA2), IIDSimplex())
    v = posterior_eval(jm, Omega(), (0, 2))
    assert v.degenerate and v.value == 0
    traj = posterior_trajectory(jm, Omega(), (0, 1, 0, 2, 1, 0))
    assert traj.degenerate_onset == 4
    assert all(v.degenerate for v in traj.values[4:])
    assert not any(v.degenerate for v in traj.values[:4])


def test_all_ones_trajectory():
    traj = posterior_trajectory(LEBESGUE, Intervals.closed(F(3, 4), 1), (1,) * 12)
    assert [v.value for v in traj.values] == [1 - F(3, 4) ** (n + 1) for n in range(13)]


def test_trajectory_fast_path_agrees_with_direct_evaluation():
    from effbayes.freedman import DEFAULT_TRUTH, default_prior
    from effbayes.measures import sample_path
    from effbayes.rng import BitSource

    fp = default_prior()
    x = sample_path(fp.joint, DEFAULT_TRUTH, 30, BitSource(4))
    traj = posterior_trajectory(fp.joint, fp.positive_event, x)
    assert [v.value for v in traj.values] == [posterior_eval(fp.joint, fp.positive_event, x[:n]).value
                                               for n in range(31)]
    subset = posterior_trajectory(fp.joint, fp.positive_event, x, indices=[0, 7, 30])
    assert [v.value for v in subset.values] == [traj.values[i].value for i in (0, 7, 30)]


def test_trajectory_rows_schema():
    traj = posterior_trajectory(TWO_ATOM, AtomSet([F(2, 3)]), (1, 0))
    rows = list(traj.rows("A"))
    assert len(rows) == 3
    assert rows[1][:4] == (1, "A", 2, 3)


@given(bitstrings)
def test_omega_normalized(sigma):
    for jm in (TWO_ATOM, LEBESGUE):
        assert posterior_eval(jm, Omega(), sigma).value == 1


@given(bitstrings, unit_fracs, unit_fracs)
def test_complement_sums_to_one(sigma, a, b):
    a, b = min(a, b), max(a, b)
    event = Intervals.closed(a, b)
    total = posterior_eval(LEBESGUE, event, sigma).value + posterior_eval(LEBESGUE, Complement(event), sigma).value
    assert total == 1


@given(bitstrings, unit_fracs)
def test_tower_property(sigma, t):
    event = Intervals.closed(0, t)
    for jm in (TWO_ATOM, LEBESGUE):
        here = pushforward_sample(jm, sigma) * posterior_eval(jm, event, sigma).value
        kids = sum((pushforward_sample(jm, sigma + (c,)) * posterior_eval(jm, event, sigma + (c,)).value
                    for c in (0, 1)), F(0))
        assert kids == here


atomic = st.lists(st.tuples(st.integers(1, 5), unit_fracs), min_size=1, max_size=4, unique_by=lambda t: t[1]) \
    .map(lambda ws: AtomicPrior(tuple((F(w, sum(v for v, _ in ws)), p) for w, p in ws)))


@given(atomic, bitstrings)
def test_discrete_bayes_agreement(prior, sigma):
    jm = JointMeasure(prior, BernoulliProduct())
    for theta in prior.points:
        assert posterior_eval(jm, AtomSet([theta]), sigma).value == bayes_oracle(prior, theta, sigma)


@settings(max_examples=30, deadline=None)
@given(atomic, st.integers(0, 4))
def test_conditional_expectation_atomic(prior, n):
    jm = JointMeasure(prior, BernoulliProduct())
    report = verify_conditional_expectation(jm, AtomSet(prior.points[:1]), n)
    assert report.holds and report.max_discrepancy == 0


def test_conditional_expectation_examples():
    r = verify_conditional_expectation(TWO_ATOM, AtomSet([F(2, 3)]), 1)
    assert r.holds and r.n_strings == 2 and r.enumerated
    assert verify_conditional_expectation(TWO_ATOM, Omega(), 3).holds
    r = verify_conditional_expectation(LEBESGUE, Intervals.closed(0, F(1, 2)), 2)
    assert r.holds and r.n_strings == 4


def test_conditional_expectation_simplex_model():
    jm = MODELS["simplex-finite-atoms"].joint
    r = verify_conditional_expectation(jm, AtomSet(jm.prior.points[:1]), 2)
    assert r.holds and r.n_strings == 9


def test_reachable_strings_limits():
    with pytest.raises(TooManyStrings):
        reachable_strings(FREEDMAN, 2)   # the geometric atom charges every symbol
    with pytest.raises(TooManyStrings):
        reachable_strings(LEBESGUE, 21)
    assert len(reachable_strings(LEBESGUE, 3)) == 8
    assert sorted(reachable_strings(MODELS["simplex-finite-atoms"].joint, 1)) == [(0,), (1,), (2,)]


def test_lsc_examples():
    inner = [Intervals.closed(0, F(1, 2) - F(1, m)) for m in range(3, 40)]
    report = posterior_lsc_check(LEBESGUE, inner, (1,), Intervals.right_open(0, F(1, 2)), tolerance=F(1, 36))
    assert report.nondecreasing
    assert report.values == [(F(1, 2) - F(1, m)) ** 2 for m in range(3, 40)]
    assert report.limit == F(1, 4)
    assert report.holds
    # the atom 1/3 enters the union at m = 6: flat at 0, one jump, then flat
    inner = [Intervals.closed(0, F(1, 2) - F(1, m)) for m in range(2, 10)]
    vals = posterior_lsc_check(TWO_ATOM, inner, (1, 1)).values
    assert vals[:4] == [0] * 4 and vals[4:] == [F(1, 5)] * 4


def test_lsc_flags_non_monotone_family():
    events = [Intervals.closed(0, F(1, 2)), Intervals.closed(0, F(1, 4))]
    assert not posterior_lsc_check(LEBESGUE, events, ()).holds


@pytest.mark.parametrize("name", ["bernoulli-two-atom", "bernoulli-quarters", "bernoulli-three-atom",
                                  "bernoulli-endpoints", "bernoulli-lebesgue", "bernoulli-beta-2-3"])
def test_conditional_expectation_shipped_models(name):
    jm = MODELS[name].joint
    event = Intervals.closed(0, F(1, 2))
    for n in range(5):
        assert verify_conditional_expectation(jm, event, n).holds


def test_gray_walk_used_only_for_small_sets():
    r = verify_conditional_expectation(LEBESGUE, Intervals.closed(0, F(1, 3)), 5)
    assert r.n_strings == 32 and not r.enumerated and r.holds
    assert set(itertools.chain.from_iterable(reachable_strings(LEBESGUE, 2))) == {0, 1}
