"""Sample trees and the parameter spaces used by the models.

Parameter points are plain values: a :class:`~fractions.Fraction` is a point
of the unit interval, :class:`CantorPoint` a point of Cantor space,
:class:`SimplexPoint` a point of the infinite simplex and
:class:`HilbertPoint` an arbitrary point of the Hilbert cube given by a
coordinate oracle.  Sample strings are tuples of naturals.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

from .numeric import Enclosure, RealOracle, as_fraction, fraction_str

Sigma = tuple  # a finite sample string: tuple[int, ...]


class EmptyBox(ValueError):
    pass


class NotInSimplex(ValueError):
    pass


# ---------------------------------------------------------------------------
# trees

class SampleTree:
    """A tree of finite strings without dead ends.

    ``children(sigma)`` yields the legal next symbols; for Baire-type trees the
    iterator is infinite and must be consumed lazily.
    """

    kind = "abstract"

    def children(self, sigma: Sigma) -> Iterator[int]:
        raise NotImplementedError

    def child_list(self, sigma: Sigma) -> list[int] | None:
        """The finite child list, or None when the branching is infinite."""
        return None

    def contains(self, sigma: Sigma) -> bool:
        raise NotImplementedError

    def strings(self, depth: int, alphabet: Sequence[int] | None = None) -> Iterator[Sigma]:
        """All strings of the given depth (restricted to ``alphabet`` if given)."""
        if depth == 0:
            yield ()
            return
        for prefix in self.strings(depth - 1, alphabet):
            kids = self.child_list(prefix)
            if kids is None:
                if alphabet is None:
                    raise ValueError(f"{self.kind} tree has infinite branching; pass an alphabet")
                kids = [a for a in alphabet]
            elif alphabet is not None:
                kids = [a for a in kids if a in alphabet]
            for a in kids:
                yield prefix + (a,)

    def to_dict(self) -> dict:
        return {"kind": self.kind}


class CantorTree(SampleTree):
    kind = "cantor"

    def children(self, sigma):
        return iter((0, 1))

    def child_list(self, sigma):
        return [0, 1]

    def contains(self, sigma):
        return all(s in (0, 1) for s in sigma)


class BaireTree(SampleTree):
    kind = "baire"

    def children(self, sigma):
        return itertools.count()

    def contains(self, sigma):
        return all(isinstance(s, int) and s >= 0 for s in sigma)


class CustomTree(SampleTree):
    """Finite-branching tree given by a child table; missing keys use ``default``."""

    kind = "custom"

    def __init__(self, table: dict[Sigma, Sequence[int]], default: Sequence[int] = (0, 1)):
        self.table = {tuple(k): tuple(v) for k, v in table.items()}
        self.default = tuple(default)
        if not self.default or any(len(v) == 0 for v in self.table.values()):
            raise ValueError("tree would have a dead end")

    def child_list(self, sigma):
        return list(self.table.get(tuple(sigma), self.default))

    def children(self, sigma):
        return iter(self.child_list(sigma))

    def contains(self, sigma):
        return all(sigma[i] in self.child_list(sigma[:i]) for i in range(len(sigma)))

    def to_dict(self):
        return {"kind": self.kind, "default": list(self.default),
                "table": [[list(k), list(v)] for k, v in sorted(self.table.items())]}


class ReversalTree(SampleTree):
    """Root followed by countably many copies of ``base``: {()} u {(m,)+s : s in base}."""

    kind = "extended"

    def __init__(self, base: SampleTree):
        self.base = base

    def children(self, sigma):
        if len(sigma) == 0:
            return itertools.count()
        return self.base.children(sigma[1:])

    def child_list(self, sigma):
        if len(sigma) == 0:
            return None
        return self.base.child_list(sigma[1:])

    def contains(self, sigma):
        if len(sigma) == 0:
            return True
        return isinstance(sigma[0], int) and sigma[0] >= 0 and self.base.contains(tuple(sigma[1:]))

    def to_dict(self):
        return {"kind": self.kind, "base": self.base.to_dict()}


CANTOR = CantorTree()
BAIRE = BaireTree()


def tree_from_dict(d: dict) -> SampleTree:
    kind = d["kind"]
    if kind == "cantor":
        return CANTOR
    if kind == "baire":
        return BAIRE
    if kind == "custom":
        return CustomTree({tuple(k): v for k, v in d.get("table", [])}, d.get("default", (0, 1)))
    if kind == "extended":
        return ReversalTree(tree_from_dict(d["base"]))
    raise ValueError(f"unknown tree kind {kind!r}")


# ---------------------------------------------------------------------------
# parameter points

@dataclass(frozen=True)
class CantorPoint:
    """Eventually periodic bit sequence: ``prefix`` then ``period`` repeated forever."""

    prefix: tuple = ()
    period: tuple = (0,)

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(int(b) for b in self.prefix))
        object.__setattr__(self, "period", tuple(int(b) for b in self.period))
        if not self.period or any(b not in (0, 1) for b in self.prefix + self.period):
            raise ValueError("Cantor points need a nonempty 0/1 period")

    def bit(self, i: int) -> int:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.period[(i - len(self.prefix)) % len(self.period)]

    def bits(self, n: int) -> tuple:
        return tuple(self.bit(i) for i in range(n))

    @property
    def value(self) -> Fraction:
        """The real sum_i bit(i) 2^-(i+1), exact."""
        p, q = len(self.prefix), len(self.period)
        head = sum((Fraction(b, 2 ** (i + 1)) for i, b in enumerate(self.prefix)), Fraction(0))
        block = sum((Fraction(b, 2 ** (i + 1)) for i, b in enumerate(self.period)), Fraction(0))
        return head + Fraction(1, 2 ** p) * block / (1 - Fraction(1, 2 ** q))

    def to_dict(self):
        return {"space": "cantor", "prefix": list(self.prefix), "period": list(self.period)}


@dataclass(frozen=True)
class Geometric:
    """Tail coordinates first, first*ratio, first*ratio^2, ... after the head."""

    first: Fraction
    ratio: Fraction

    def __post_init__(self):
        object.__setattr__(self, "first", as_fraction(self.first))
        object.__setattr__(self, "ratio", as_fraction(self.ratio))
        if not (self.first > 0 and 0 < self.ratio < 1):
            raise ValueError("geometric tail needs first > 0 and ratio in (0,1)")

    @property
    def mass(self) -> Fraction:
        return self.first / (1 - self.ratio)


@dataclass(frozen=True)
class SimplexPoint:
    """A point of the infinite simplex with an exact head and a ZERO or GEOMETRIC tail."""

    head: tuple = ()
    tail: Geometric | None = None

    def __post_init__(self):
        head = tuple(as_fraction(c) for c in self.head)
        if self.tail is None:
            while head and head[-1] == 0:
                head = head[:-1]
        object.__setattr__(self, "head", head)
        if any(c < 0 or c > 1 for c in head):
            raise NotInSimplex("coordinates must lie in [0,1]")
        if self.tail is not None and self.tail.first > 1:
            raise NotInSimplex("coordinates must lie in [0,1]")
        total = sum(head, Fraction(0)) + (self.tail.mass if self.tail else 0)
        if total != 1:
            raise NotInSimplex(f"coordinates sum to {total}, not 1")

    # constructors -----------------------------------------------------
    @classmethod
    def finite(cls, coords: Iterable) -> "SimplexPoint":
        coords = [as_fraction(c) for c in coords]
        while coords and coords[-1] == 0:
            coords.pop()
        return cls(tuple(coords), None)

    @classmethod
    def geometric(cls, first, ratio, head: Iterable = ()) -> "SimplexPoint":
        return cls(tuple(head), Geometric(as_fraction(first), as_fraction(ratio)))

    @classmethod
    def unit(cls, i: int) -> "SimplexPoint":
        return cls.finite([0] * i + [1])

    # access -------------------------------------------------------------
    def __call__(self, i: int) -> Fraction:
        return self.coordinate(i)

    def coordinate(self, i: int) -> Fraction:
        if i < 0:
            raise IndexError(i)
        if i < len(self.head):
            return self.head[i]
        if self.tail is None:
            return Fraction(0)
        return self.tail.first * self.tail.ratio ** (i - len(self.head))

    @property
    def support_bound(self) -> int | None:
        """Index past which every coordinate is 0, or None for an infinite support."""
        return len(self.head) if self.tail is None else None

    @property
    def is_interior(self) -> bool:
        """All coordinates strictly positive."""
        return self.tail is not None and all(c > 0 for c in self.head)

    def mass_from(self, j: int) -> Fraction:
        """sum_{i >= j} theta(i), exact."""
        h = len(self.head)
        if j < h:
            rest = sum(self.head[j:], Fraction(0))
            return rest + (self.tail.mass if self.tail else 0)
        if self.tail is None:
            return Fraction(0)
        return self.tail.first * self.tail.ratio ** (j - h) / (1 - self.tail.ratio)

    def weighted_mass_from(self, j: int) -> Fraction:
        """sum_{i >= j} 2^-(i+1) theta(i), exact."""
        h = len(self.head)
        total = sum((Fraction(c, 2 ** (i + 1)) for i, c in enumerate(self.head) if i >= j), Fraction(0))
        if self.tail is not None:
            start = max(j, h)
            r = self.tail.ratio / 2
            a = self.coordinate(start) / Fraction(2 ** (start + 1))
            total += a / (1 - r)
        return total

    def cdf(self, j: int) -> Fraction:
        """sum_{i <= j} theta(i)."""
        return 1 - self.mass_from(j + 1)

    def to_dict(self):
        tail = {"kind": "zero"} if self.tail is None else {
            "kind": "geometric", "first": fraction_str(self.tail.first), "ratio": fraction_str(self.tail.ratio)}
        return {"space": "simplex", "head": [fraction_str(c) for c in self.head], "tail": tail}

    def __repr__(self):
        head = ", ".join(str(c) for c in self.head)
        if self.tail is None:
            return f"SimplexPoint([{head}])"
        return f"SimplexPoint([{head}] + geom({self.tail.first}, {self.tail.ratio}))"


@dataclass(frozen=True, eq=False)
class HilbertPoint:
    """Hilbert cube point from an exact coordinate oracle; optionally zero from ``support`` on."""

    coords: Callable[[int], Fraction]
    support: int | None = None
    name: str = field(default="", compare=False)

    def coordinate(self, i: int) -> Fraction:
        if self.support is not None and i >= self.support:
            return Fraction(0)
        return as_fraction(self.coords(i))

    __call__ = coordinate

    @property
    def support_bound(self):
        return self.support


def point_to_dict(theta) -> dict:
    if isinstance(theta, Fraction):
        return {"space": "unit", "value": fraction_str(theta)}
    if hasattr(theta, "to_dict"):
        return theta.to_dict()
    raise TypeError(f"cannot serialize {theta!r}")


def point_from_dict(d) -> object:
    if isinstance(d, (str, int)):
        return as_fraction(d)
    space = d.get("space", "simplex" if "head" in d else "unit")
    if space == "unit":
        return as_fraction(d["value"])
    if space == "cantor":
        return CantorPoint(tuple(d.get("prefix", ())), tuple(d.get("period", (0,))))
    if space == "simplex":
        tail = d.get("tail", {"kind": "zero"})
        head = [as_fraction(c) for c in d.get("head", [])]
        if tail["kind"] == "zero":
            return SimplexPoint(tuple(head), None)
        if tail["kind"] == "geometric":
            return SimplexPoint.geometric(tail["first"], tail["ratio"], head)
        raise ValueError(f"unknown tail kind {tail['kind']!r}")
    raise ValueError(f"unknown space {space!r}")


# ---------------------------------------------------------------------------
# Hilbert cube metric  d(x,y) = sum_n 2^-(n+1) |x(n) - y(n)|

def _geometric_abs_sum(a: Fraction, r: Fraction, b: Fraction, s: Fraction, offset: int) -> Fraction:
    """sum_{j>=0} 2^-(offset+j+1) |a r^j - b s^j| for nonnegative geometric sequences.

    The ratio of two geometric sequences is monotone in j, so the difference
    changes sign at most once; both sides of the crossing are closed-form.
    """
    def gsum(c, q, start):  # sum_{j>=start} c q^j 2^-(offset+j+1)
        if c == 0:
            return Fraction(0)
        h = q / 2
        return c * h ** start / Fraction(2 ** (offset + 1)) / (1 - h)

    def sign(j):
        d = a * r ** j - b * s ** j
        return (d > 0) - (d < 0)

    if a == 0 or b == 0:
        return gsum(a, r, 0) + gsum(b, s, 0)
    first = sign(0)
    limit = (r > s) - (r < s) if r != s else first
    if first == 0 or first == limit:
        return abs(gsum(a, r, 0) - gsum(b, s, 0))
    # first index whose sign differs from sign(0); solve a r^j = b s^j approximately, then fix up
    est = math.log(b / a) / math.log(r / s)
    cross = max(1, int(est))
    while cross > 1 and sign(cross - 1) != first:
        cross -= 1
    while sign(cross) == first:
        cross += 1
    before = (gsum(a, r, 0) - gsum(a, r, cross)) - (gsum(b, s, 0) - gsum(b, s, cross))
    after = gsum(a, r, cross) - gsum(b, s, cross)
    return abs(before) + abs(after)


def _exact_hilbert(x: SimplexPoint, y: SimplexPoint) -> Fraction:
    h = max(len(x.head), len(y.head))
    total = sum((Fraction(abs(x(i) - y(i)), 2 ** (i + 1)) for i in range(h)), Fraction(0))
    a = x(h) if x.tail else Fraction(0)
    r = x.tail.ratio if x.tail else Fraction(0)
    b = y(h) if y.tail else Fraction(0)
    s = y.tail.ratio if y.tail else Fraction(0)
    return total + _geometric_abs_sum(a, r, b, s, h)


def hilbert_distance(x, y) -> RealOracle:
    """Hilbert-cube distance as a RealOracle; exact for pairs of SimplexPoints."""
    if isinstance(x, SimplexPoint) and isinstance(y, SimplexPoint):
        return RealOracle.exact(_exact_hilbert(x, y))
    sx, sy = getattr(x, "support_bound", None), getattr(y, "support_bound", None)
    if sx is not None and sy is not None:
        n = max(sx, sy)
        return RealOracle.exact(sum((Fraction(abs(x(i) - y(i)), 2 ** (i + 1)) for i in range(n)), Fraction(0)))

    def evaluate(k: int) -> Enclosure:
        # coordinates past index k contribute at most 2^-(k+1)
        s = sum((Fraction(abs(x(i) - y(i)), 2 ** (i + 1)) for i in range(k + 1)), Fraction(0))
        return Enclosure(s, s + Fraction(1, 2 ** (k + 1)))

    return RealOracle(evaluate)


# ---------------------------------------------------------------------------
# distances to the closed sets C_n, D_n whose complements cut out the simplex

def distance_to_C(x: SimplexPoint, n: int) -> Fraction:
    """d(x, C_n) with C_n = {y : sum_i y(i) <= 1 - 1/(n+1)}.

    Fractional knapsack: remove mass delta = 1/(n+1) from the coordinates
    with the smallest weights 2^-(i+1), i.e. from the far end first.
    """
    delta = Fraction(1, n + 1)
    # smallest index i* with mass_from(i*+1) < delta <= mass_from(i*)
    bound = x.support_bound
    if bound is not None:
        i = bound - 1
        while x.mass_from(i) < delta:
            i -= 1
    else:
        # mass_from decreases geometrically; walk forward until it drops below delta
        i = 0
        while x.mass_from(i + 1) >= delta:
            i += 1
    removed_beyond = x.mass_from(i + 1)
    return x.weighted_mass_from(i + 1) + (delta - removed_beyond) / Fraction(2 ** (i + 1))


def distance_to_D(x: SimplexPoint, n: int) -> Fraction | None:
    """d(x, D_n) with D_n = {y : sum_{i<=n} y(i) >= 1 + 1/(n+1)}; None when D_n is empty (n = 0)."""
    delta = Fraction(1, n + 1)
    need = 1 + delta - sum((x(i) for i in range(n + 1)), Fraction(0))
    if n + 1 < 1 + delta:
        return None
    cost = Fraction(0)
    for i in range(n, -1, -1):
        if need <= 0:
            break
        add = min(1 - x(i), need)
        cost += add / Fraction(2 ** (i + 1))
        need -= add
    return cost


def simplex_closed_set_distance(x: SimplexPoint, n: int, which: str) -> RealOracle:
    """d(x, C_n) or d(x, D_n) as an exact RealOracle.

    D_0 is empty inside the Hilbert cube (it would need y(0) >= 2); asking for
    its distance raises ValueError.
    """
    if which == "C_n":
        return RealOracle.exact(distance_to_C(x, n))
    if which == "D_n":
        d = distance_to_D(x, n)
        if d is None:
            raise ValueError("D_0 is empty in the Hilbert cube")
        return RealOracle.exact(d)
    raise ValueError(f"which must be 'C_n' or 'D_n', not {which!r}")


def _closed_set_term(x: SimplexPoint, y: SimplexPoint, m: int) -> Fraction:
    """m-th term of the d0 correction; the closed sets interleave C_0, D_0, C_1, D_1, ..."""
    j, is_d = divmod(m, 2)
    if is_d:
        dx, dy = distance_to_D(x, j), distance_to_D(y, j)
        if dx is None:  # empty set: 1/d = 0 for every point
            return Fraction(0)
    else:
        dx, dy = distance_to_C(x, j), distance_to_C(y, j)
    return min(Fraction(1, 2 ** (m + 1)), abs(1 / dx - 1 / dy))


def d0_distance(x: SimplexPoint, y: SimplexPoint) -> RealOracle:
    """The complete metric on the simplex: d(x,y) + sum_m min(2^-(m+1), |1/d(x,F_m) - 1/d(y,F_m)|)."""
    if x == y:
        return RealOracle.exact(0)
    base = _exact_hilbert(x, y)
    cache: list[Fraction] = []

    def evaluate(k: int) -> Enclosure:
        # terms m >= k+1 are each capped by 2^-(m+1): tail <= 2^-(k+1)
        while len(cache) < k + 1:
            cache.append(_closed_set_term(x, y, len(cache)))
        s = base + sum(cache[: k + 1], Fraction(0))
        return Enclosure(s, s + Fraction(1, 2 ** (k + 1)))

    return RealOracle(evaluate)


# ---------------------------------------------------------------------------
# projections

@dataclass(frozen=True)
class CoordinateInterval:
    """One coordinate constraint: (p,q), [0,q), (p,1] or [0,1]."""

    kind: str
    p: Fraction = Fraction(0)
    q: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "p", as_fraction(self.p))
        object.__setattr__(self, "q", as_fraction(self.q))
        if self.kind not in ("open", "left", "right", "full"):
            raise ValueError(f"bad constraint kind {self.kind!r}")

    @classmethod
    def open(cls, p, q):
        return cls("open", p, q)

    @classmethod
    def left(cls, q):
        return cls("left", 0, q)

    @classmethod
    def right(cls, p):
        return cls("right", p, 1)

    @classmethod
    def full(cls):
        return cls("full", 0, 1)

    @property
    def lower(self) -> Fraction:
        return self.p if self.kind in ("open", "right") else Fraction(0)

    @property
    def lower_attained(self) -> bool:
        return self.kind in ("left", "full")

    def contains(self, r: Fraction) -> bool:
        if self.kind == "open":
            return self.p < r < self.q
        if self.kind == "left":
            return 0 <= r < self.q
        if self.kind == "right":
            return self.p < r <= 1
        return 0 <= r <= 1

    def as_interval(self) -> "RationalInterval":
        return RationalInterval(self.lower, self.q if self.kind in ("open", "left") else Fraction(1),
                                self.lower_attained, self.kind in ("right", "full"))


@dataclass(frozen=True)
class RationalInterval:
    lo: Fraction
    hi: Fraction
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "lo", as_fraction(self.lo))
        object.__setattr__(self, "hi", as_fraction(self.hi))

    @property
    def empty(self) -> bool:
        if self.lo > self.hi:
            return True
        return self.lo == self.hi and not (self.lo_closed and self.hi_closed)

    def contains(self, r) -> bool:
        r = as_fraction(r)
        above = r > self.lo or (self.lo_closed and r == self.lo)
        below = r < self.hi or (self.hi_closed and r == self.hi)
        return above and below

    def __str__(self):
        return f"{'[' if self.lo_closed else '('}{self.lo}, {self.hi}{']' if self.hi_closed else ')'}"


def projection(x: SimplexPoint, i: int) -> Fraction:
    return x.coordinate(i)


def box_contains(box: Sequence[CoordinateInterval], x: SimplexPoint) -> bool:
    return all(v.contains(x(j)) for j, v in enumerate(box))


def projection_image(box: Sequence[CoordinateInterval], i: int) -> list[RationalInterval]:
    """pi_i(box n S_inf) for a box constraining coordinates 0..len(box)-1.

    A value r is attained iff r lies in V_i and the other constrained
    coordinates can sit at their lower ends with total at most 1 - r (the
    remainder goes on a later, unconstrained coordinate).  The lower ends
    of (p,q) and (p,1] are not attained, which makes the bound strict.
    """
    box = list(box)
    while len(box) <= i:
        box.append(CoordinateInterval.full())
    others = [v for j, v in enumerate(box) if j != i]
    low = sum((v.lower for v in others), Fraction(0))
    attained = all(v.lower_attained for v in others)
    target = box[i].as_interval()
    cap = RationalInterval(Fraction(0), 1 - low, True, attained)
    lo, lo_closed = target.lo, target.lo_closed
    if cap.hi < target.hi or (cap.hi == target.hi and not cap.hi_closed):
        hi, hi_closed = cap.hi, cap.hi_closed
    else:
        hi, hi_closed = target.hi, target.hi_closed
    result = RationalInterval(lo, hi, lo_closed, hi_closed)
    if low > 1 or result.empty:
        raise EmptyBox("box does not meet the simplex")
    return [result]


def projection_feasible(box: Sequence[CoordinateInterval], i: int, r: Fraction, tries: int = 64) -> bool:
    """Brute-force: try to build an explicit simplex point in the box with coordinate i = r."""
    r = as_fraction(r)
    box = list(box)
    while len(box) <= i:
        box.append(CoordinateInterval.full())
    if not box[i].contains(r):
        return False
    for t in range(tries):
        coords = []
        for j, v in enumerate(box):
            if j == i:
                coords.append(r)
            elif v.lower_attained:
                coords.append(Fraction(0))
            else:
                hi = v.q if v.kind == "open" else Fraction(1)
                coords.append(v.p + (hi - v.p) / 2 ** (t + 1))
        rest = 1 - sum(coords, Fraction(0))
        if rest < 0:
            continue
        point = SimplexPoint.finite(coords + [rest])
        if box_contains(box, point):
            return True
    return False


# ---------------------------------------------------------------------------
# extrema of piecewise multilinear functions on a rational grid

@dataclass(frozen=True, eq=False)
class PiecewiseMultilinear:
    """f on [0,1]^m given by its exact values on a rational grid, multilinear on each cell.

    Multilinear cells attain their extrema at cell corners, so the global
    extrema are the extreme grid values.
    """

    grids: tuple
    values: Callable[..., Fraction]

    def vertices(self):
        return itertools.product(*[tuple(as_fraction(g) for g in grid) for grid in self.grids])


def compact_extremum(f: PiecewiseMultilinear, mode: str) -> RealOracle:
    vals = [as_fraction(f.values(*v)) for v in f.vertices()]
    if mode == "max":
        return RealOracle.exact(max(vals))
    if mode == "min":
        return RealOracle.exact(min(vals))
    raise ValueError("mode must be 'min' or 'max'")


# ---------------------------------------------------------------------------
# Urysohn bump around a simplex point

def urysohn_ramp(d: Fraction, eps_k: Fraction, eps_k1: Fraction) -> Fraction:
    """clamp((eps_k - d) / (eps_k - eps_k1), 0, 1)."""
    v = (eps_k - d) / (eps_k - eps_k1)
    return min(Fraction(1), max(Fraction(0), v))


def bump(center: SimplexPoint, eps_k, eps_k1, theta: SimplexPoint) -> RealOracle:
    """1 on the closed d0-ball of radius eps_k1, 0 outside the open ball of radius eps_k, linear between."""
    eps_k, eps_k1 = as_fraction(eps_k), as_fraction(eps_k1)
    if not 0 < eps_k1 < eps_k:
        raise ValueError("need 0 < eps_k1 < eps_k")
    d = d0_distance(theta, center)
    slope = 1 / (eps_k - eps_k1)
    return d.map_monotone(lambda t: urysohn_ramp(t, eps_k, eps_k1), slope, increasing=False)
