from decimal import Decimal, getcontext
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from effbayes.numeric import (
    DivisionByIntervalContainingZero,
    Enclosure,
    Ordering,
    RealOracle,
    avoid_atoms,
    compare_with_gap,
    decimal_str,
    interval_arith,
    rational_between,
    root_enclosure,
    sqrt_enclosure,
)

fractions = st.fractions(min_value=-8, max_value=8, max_denominator=64)
positive = st.fractions(min_value=F(1, 64), max_value=16, max_denominator=64)


@st.composite
def enclosures(draw, elems=fractions):
    a, b = draw(elems), draw(elems)
    return Enclosure(min(a, b), max(a, b))


def test_interval_examples():
    assert interval_arith("add", Enclosure(F(1, 3), F(1, 3)), Enclosure(F(2, 3), F(2, 3))) == Enclosure(1, 1)
    assert interval_arith("div", Enclosure(1, 1), Enclosure(2, 3)) == Enclosure(F(1, 3), F(1, 2))
    root = interval_arith("sqrt-approx", Enclosure(F(1, 2), F(1, 2)), k=40)
    assert f"{float(root.lo):.10f}".startswith("0.70710678")
    assert root.contains(F("0.7071067811865"))


def test_division_by_zero_straddling_interval():
    with pytest.raises(DivisionByIntervalContainingZero):
        interval_arith("div", Enclosure(1, 2), Enclosure(-1, 1))


@given(enclosures(), enclosures(), st.sampled_from(["add", "sub", "mul", "min", "max"]))
def test_binary_ops_contain_pointwise_results(a, b, op):
    # every pair of endpoints, and midpoints, must map inside the result
    result = interval_arith(op, a, b)
    fn = {"add": lambda x, y: x + y, "sub": lambda x, y: x - y, "mul": lambda x, y: x * y,
          "min": min, "max": max}[op]
    for x in (a.lo, a.hi, a.midpoint):
        for y in (b.lo, b.hi, b.midpoint):
            assert result.contains(fn(x, y))


@given(enclosures(), enclosures(positive))
def test_division_contains_quotients(a, b):
    result = a / b
    for x in (a.lo, a.hi):
        for y in (b.lo, b.hi):
            assert result.contains(x / y)


@given(positive, st.integers(min_value=0, max_value=60))
def test_sqrt_enclosure_width_and_containment(q, k):
    e = sqrt_enclosure(q, k)
    assert e.width <= F(1, 2 ** k)
    assert e.lo ** 2 <= q <= e.hi ** 2


@given(positive, st.integers(min_value=2, max_value=5), st.integers(min_value=0, max_value=40))
def test_root_enclosure(q, degree, k):
    e = root_enclosure(q, degree, k)
    assert e.width <= F(1, 2 ** k)
    assert e.lo ** degree <= q <= e.hi ** degree


@given(positive, st.lists(st.integers(min_value=0, max_value=50), min_size=2, max_size=8))
def test_oracle_enclosures_nest(q, ks):
    oracle = RealOracle.sqrt(q)
    previous = None
    for k in sorted(ks):
        e = oracle(k)
        assert e.width <= F(1, 2 ** k)
        if previous is not None:
            assert previous.contains_enclosure(e)
        previous = e


def test_sqrt_of_square_is_exact():
    assert RealOracle.sqrt(F(9, 4)).exact_value == F(3, 2)


def test_sqrt2_digits_against_decimal():
    getcontext().prec = 60
    ref = Decimal(2).sqrt()
    e = RealOracle.sqrt(2)(150)
    assert Decimal(e.lo.numerator) / Decimal(e.lo.denominator) <= ref
    assert Decimal(e.hi.numerator) / Decimal(e.hi.denominator) >= ref - Decimal(10) ** -45


def test_compare_examples():
    assert compare_with_gap(RealOracle.exact(F(1, 3)), RealOracle.exact(F(1, 2)), F(1, 1000)) is Ordering.LESS
    assert compare_with_gap(RealOracle.sqrt(2), RealOracle.exact(F(3, 2)), F(1, 64)) is Ordering.LESS
    r = RealOracle.sqrt(3)
    assert compare_with_gap(r, r, F(1, 1000)) is Ordering.WITHIN_GAP


@given(fractions, fractions, positive)
def test_compare_matches_exact_order(a, b, gap):
    verdict = compare_with_gap(RealOracle.exact(a), RealOracle.exact(b), gap)
    if verdict is Ordering.LESS:
        assert a < b
    elif verdict is Ordering.GREATER:
        assert a > b
    else:
        assert abs(a - b) < gap


def test_compare_rejects_nonpositive_gap():
    with pytest.raises(ValueError):
        compare_with_gap(RealOracle.exact(0), RealOracle.exact(1), 0)


def test_avoid_atoms_examples():
    assert avoid_atoms(F(1, 4), F(1, 2), [F(1, 3), F(3, 8)]) == F(5, 16)
    assert avoid_atoms(0, 1, []) == F(1, 2)


@given(fractions, positive, st.lists(fractions, max_size=20))
def test_avoid_atoms_lands_strictly_inside_and_off_atoms(a, width, atoms):
    b = a + width
    # make the midpoint chain collide with atoms on purpose
    atoms = atoms + [(a + b) / 2, (3 * a + b) / 4]
    r = avoid_atoms(a, b, atoms)
    assert a < r < b
    assert r not in set(atoms)


@given(positive, positive)
def test_rational_between(x, dx):
    lo, hi = RealOracle.sqrt(x), RealOracle.sqrt(x + dx)
    a, b = rational_between(lo, hi)
    assert a < b
    assert a ** 2 >= x and b ** 2 <= x + dx


@settings(max_examples=50)
@given(st.integers(min_value=301, max_value=2000), st.integers(min_value=1, max_value=9))
def test_decimal_str_tiny_values(exp, mantissa):
    q = F(mantissa, 10 ** exp)
    text = decimal_str(q, 6)
    m, e = text.split("e")
    assert int(e) == -exp
    assert float(m) == pytest.approx(mantissa)
