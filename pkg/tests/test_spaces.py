import itertools
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from effbayes.numeric import RealOracle
from effbayes.spaces import (
    BAIRE,
    CANTOR,
    CantorPoint,
    CoordinateInterval,
    CustomTree,
    EmptyBox,
    HilbertPoint,
    NotInSimplex,
    PiecewiseMultilinear,
    ReversalTree,
    SimplexPoint,
    bump,
    compact_extremum,
    d0_distance,
    distance_to_C,
    distance_to_D,
    hilbert_distance,
    point_from_dict,
    point_to_dict,
    projection,
    projection_feasible,
    projection_image,
    simplex_closed_set_distance,
)


@st.composite
def finite_points(draw, max_len=5):
    """Finitely supported simplex points from integer compositions."""
    parts = draw(st.lists(st.integers(min_value=0, max_value=6), min_size=1, max_size=max_len))
    assume(sum(parts) > 0)
    total = sum(parts)
    return SimplexPoint.finite([F(p, total) for p in parts])


@st.composite
def geometric_points(draw):
    ratio = draw(st.sampled_from([F(1, 2), F(1, 3), F(2, 3), F(1, 4)]))
    head_len = draw(st.integers(min_value=0, max_value=3))
    head_share = draw(st.sampled_from([F(0), F(1, 4), F(1, 2)])) if head_len else F(0)
    weights = draw(st.lists(st.integers(min_value=1, max_value=4), min_size=head_len, max_size=head_len))
    head = [head_share * w / sum(weights) for w in weights] if head_len else []
    tail_mass = 1 - head_share
    return SimplexPoint.geometric(tail_mass * (1 - ratio), ratio, head)


points = st.one_of(finite_points(), geometric_points())


# ---------------------------------------------------------------------------
# trees and points

@pytest.mark.parametrize("tree", [CANTOR, BAIRE, CustomTree({(): (0, 1, 2), (2,): (5,)}), ReversalTree(CANTOR)])
def test_trees_have_no_dead_ends(tree):
    frontier = [()]
    for depth in range(12):
        nxt = []
        for sigma in frontier:
            kids = list(itertools.islice(tree.children(sigma), 3))
            assert kids, f"dead end at {sigma}"
            nxt.extend(sigma + (c,) for c in kids[:2])
        frontier = nxt[:64]


def test_cantor_point_value():
    assert CantorPoint((), (0, 1)).value == F(1, 3)
    assert CantorPoint((1,), (0,)).value == F(1, 2)
    assert CantorPoint((), (1,)).value == 1
    assert CantorPoint((1, 0), (1, 1, 0)).bits(8) == (1, 0, 1, 1, 0, 1, 1, 0)


@given(points)
def test_simplex_mass_is_exactly_one(x):
    n = 12
    head = sum((x(i) for i in range(n)), F(0))
    assert head + x.mass_from(n) == 1


def test_simplex_rejects_bad_mass():
    with pytest.raises(NotInSimplex):
        SimplexPoint.finite([F(1, 2), F(1, 3)])
    with pytest.raises(NotInSimplex):
        SimplexPoint.geometric(F(1, 2), F(1, 3))


@given(points)
def test_point_json_round_trip(x):
    assert point_from_dict(point_to_dict(x)) == x


def test_projection():
    assert projection(SimplexPoint.unit(1), 1) == 1
    assert projection(SimplexPoint.geometric(F(1, 2), F(1, 2)), 3) == F(1, 16)


# ---------------------------------------------------------------------------
# Hilbert distance

def test_hilbert_examples():
    e0, e1 = SimplexPoint.unit(0), SimplexPoint.unit(1)
    assert hilbert_distance(e0, e0).exact_value == 0
    assert hilbert_distance(e0, e1).exact_value == F(3, 4)
    zero = HilbertPoint(lambda i: F(0), support=0)
    assert hilbert_distance(e0, zero).exact_value == F(1, 2)


@settings(max_examples=60)
@given(points, points)
def test_hilbert_exact_matches_truncated_sum(x, y):
    # independent oracle: a long truncated sum with the tail bound
    exact = hilbert_distance(x, y).exact_value
    n = 80
    partial = sum((F(abs(x(i) - y(i)), 2 ** (i + 1)) for i in range(n)), F(0))
    assert partial <= exact <= partial + F(1, 2 ** n)


def test_hilbert_generic_oracle_width():
    x = HilbertPoint(lambda i: F(1, i + 2))
    y = HilbertPoint(lambda i: F(1, 2 ** i))
    d = hilbert_distance(x, y)
    for k in (1, 5, 20):
        assert d(k).width <= F(1, 2 ** k)


# ---------------------------------------------------------------------------
# distances to C_n and D_n, checked against a linear program

def _lp_distance_C(x: SimplexPoint, n: int, length: int) -> float:
    # min sum w_i t_i  s.t.  t >= x - y, t >= y - x, sum y <= 1 - 1/(n+1), 0 <= y <= 1
    w = np.array([2.0 ** -(i + 1) for i in range(length)])
    xs = np.array([float(x(i)) for i in range(length)])
    c = np.concatenate([np.zeros(length), w])
    eye = np.eye(length)
    a_ub = np.vstack([np.hstack([-eye, -eye]), np.hstack([eye, -eye]),
                      np.concatenate([np.ones(length), np.zeros(length)])[None, :]])
    b_ub = np.concatenate([-xs, xs, [1 - 1 / (n + 1)]])
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=[(0, 1)] * length + [(0, None)] * length, method="highs")
    return res.fun


def _lp_distance_D(x: SimplexPoint, n: int) -> float:
    # only coordinates 0..n matter; raise their sum to 1 + 1/(n+1)
    m = n + 1
    w = np.array([2.0 ** -(i + 1) for i in range(m)])
    xs = np.array([float(x(i)) for i in range(m)])
    res = linprog(w, A_ub=-np.ones((1, m)), b_ub=[-(1 + 1 / (n + 1)) + xs.sum()],
                  bounds=[(0, 1 - xi) for xi in xs], method="highs")
    return res.fun


@settings(max_examples=60, deadline=None)
@given(finite_points(), st.integers(min_value=0, max_value=6))
def test_distance_to_C_matches_lp(x, n):
    length = max(x.support_bound, 1)
    assert float(distance_to_C(x, n)) == pytest.approx(_lp_distance_C(x, n, length), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(geometric_points(), st.integers(min_value=0, max_value=5))
def test_distance_to_C_geometric_matches_truncated_lp(x, n):
    # mass past coordinate 40 is negligible at float resolution
    assert float(distance_to_C(x, n)) == pytest.approx(_lp_distance_C(x, n, 40), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(points, st.integers(min_value=1, max_value=6))
def test_distance_to_D_matches_lp(x, n):
    assert float(distance_to_D(x, n)) == pytest.approx(_lp_distance_D(x, n), abs=1e-9)


def test_closed_set_examples():
    e0 = SimplexPoint.unit(0)
    assert simplex_closed_set_distance(e0, 0, "C_n").exact_value == F(1, 2)
    for n in range(1, 8):
        assert simplex_closed_set_distance(e0, n, "C_n").exact_value == F(1, 2 * (n + 1))
        assert simplex_closed_set_distance(e0, n, "D_n").exact_value == F(1, 2 ** (n + 1) * (n + 1))


def test_D0_is_empty():
    with pytest.raises(ValueError):
        simplex_closed_set_distance(SimplexPoint.unit(0), 0, "D_n")


@given(st.integers(min_value=0, max_value=8), st.integers(min_value=0, max_value=8))
def test_unit_vector_closed_forms(i, n):
    e = SimplexPoint.unit(i)
    delta = F(1, n + 1)
    assert distance_to_C(e, n) == delta / 2 ** (i + 1)
    if n >= 1:
        expected = delta / 2 ** (n + 1) if i < n else delta / 2 ** n if i == n else F(1, 2 ** (n + 1)) + delta / 2 ** n
        assert distance_to_D(e, n) == expected


# ---------------------------------------------------------------------------
# d0

def test_d0_examples():
    e0, e1 = SimplexPoint.unit(0), SimplexPoint.unit(1)
    assert d0_distance(e0, e0).exact_value == 0
    lo = d0_distance(e0, e1)(0).lo
    # the Hilbert part 3/4 plus the capped C_0 term 1/2
    assert lo == F(3, 4) + F(1, 2)


@settings(max_examples=60, deadline=None)
@given(points, points, st.integers(min_value=0, max_value=12))
def test_d0_dominates_hilbert_and_is_symmetric(x, y, k):
    d0 = d0_distance(x, y)(k)
    assert d0.lo >= hilbert_distance(x, y)(k).lo
    assert d0 == d0_distance(y, x)(k)


@settings(max_examples=60, deadline=None)
@given(points, points, points)
def test_d0_triangle_inequality(x, y, z):
    k = 16
    xy, yz, xz = d0_distance(x, y)(k), d0_distance(y, z)(k), d0_distance(x, z)(k)
    slack = xy.width + yz.width + xz.width
    assert xz.lo <= xy.hi + yz.hi + slack


# ---------------------------------------------------------------------------
# projection images

def test_projection_image_examples():
    box = [CoordinateInterval.open(F(1, 4), F(1, 2))]
    (image,) = projection_image(box, 0)
    assert (image.lo, image.hi, image.lo_closed, image.hi_closed) == (F(1, 4), F(1, 2), False, False)
    box = [CoordinateInterval.full(), CoordinateInterval.right(F(3, 4))]
    (image,) = projection_image(box, 0)
    assert (image.lo, image.hi, image.lo_closed, image.hi_closed) == (0, F(1, 4), True, False)


def test_projection_empty_box():
    with pytest.raises(EmptyBox):
        projection_image([CoordinateInterval.right(F(2, 3)), CoordinateInterval.right(F(1, 2))], 0)


constraints = st.one_of(
    st.just(CoordinateInterval.full()),
    st.fractions(0, 1, max_denominator=8).map(lambda q: CoordinateInterval.left(q) if q > 0 else CoordinateInterval.full()),
    st.fractions(0, 1, max_denominator=8).map(lambda p: CoordinateInterval.right(p) if p < 1 else CoordinateInterval.full()),
    st.tuples(st.fractions(0, 1, max_denominator=8), st.fractions(0, 1, max_denominator=8))
      .filter(lambda pq: pq[0] < pq[1]).map(lambda pq: CoordinateInterval.open(*pq)),
)


@settings(max_examples=40, deadline=None)
@given(st.lists(constraints, min_size=1, max_size=3), st.integers(min_value=0, max_value=2))
def test_projection_image_matches_feasibility(box, i):
    try:
        (image,) = projection_image(box, i)
    except EmptyBox:
        assume(False)
    for r in (F(j, 48) for j in range(49)):
        assert image.contains(r) == projection_feasible(box, i, r), r


# ---------------------------------------------------------------------------
# extrema and bumps

def test_compact_extremum_examples():
    grid = [F(j, 6) for j in range(7)]
    assert compact_extremum(PiecewiseMultilinear((grid,), lambda t: t), "max").exact_value == 1
    assert compact_extremum(PiecewiseMultilinear((grid,), lambda t: abs(t - F(1, 3))), "min").exact_value == 0
    f = PiecewiseMultilinear(((0, 1), (0, 1)), lambda s, t: s + 2 * t - s * t)
    assert compact_extremum(f, "max").exact_value == 2
    assert compact_extremum(f, "min").exact_value == 0


@given(st.lists(st.fractions(0, 1, max_denominator=10), min_size=4, max_size=4),
       st.fractions(0, 1, max_denominator=50), st.fractions(0, 1, max_denominator=50))
def test_bilinear_extremum_dominates_interior(corners, s, t):
    a, b, c, d = corners
    f = PiecewiseMultilinear(((0, 1), (0, 1)),
                             lambda u, v: a * (1 - u) * (1 - v) + b * u * (1 - v) + c * (1 - u) * v + d * u * v)
    inside = f.values(s, t)
    assert compact_extremum(f, "min").exact_value <= inside <= compact_extremum(f, "max").exact_value


def test_bump_examples():
    c = SimplexPoint.geometric(F(1, 2), F(1, 2))
    assert bump(c, F(1, 4), F(1, 8), c).exact_value == 1
    far = SimplexPoint.unit(3)
    assert bump(c, F(1, 4), F(1, 8), far)(20).hi == 0
    # a point whose d0 to c can be computed; put the ramp midpoint there
    theta = SimplexPoint.geometric(F(1, 3), F(2, 3))
    d = d0_distance(theta, c)(60).lo
    eps_k, eps_k1 = d + F(1, 10), d - F(1, 10)
    value = bump(c, eps_k, eps_k1, theta)(30)
    assert value.contains(F(1, 2)) or abs(value.midpoint - F(1, 2)) < F(1, 2 ** 20)


@given(points, st.fractions(F(1, 64), 1, max_denominator=64))
def test_bump_in_unit_interval(theta, eps):
    c = SimplexPoint.geometric(F(1, 2), F(1, 2))
    e = bump(c, eps, eps / 2, theta)(10)
    assert 0 <= e.lo <= e.hi <= 1


def test_bump_rejects_bad_radii():
    c = SimplexPoint.unit(0)
    with pytest.raises(ValueError):
        bump(c, F(1, 8), F(1, 4), c)
    assert isinstance(bump(c, F(1, 4), F(1, 8), SimplexPoint.unit(1)), RealOracle)
