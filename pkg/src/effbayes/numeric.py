"""Exact rationals, directed rational intervals and precision-indexed real oracles.

Every real quantity in the package (measures, distances, bounds involving
roots) is either an exact :class:`fractions.Fraction` or a :class:`RealOracle`
that returns a rational :class:`Enclosure` of width at most ``2**-k`` on
request.  Nothing here ever rounds through floating point.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Union

ExactScalar = Fraction
Rational = Union[Fraction, int]


class DivisionByIntervalContainingZero(ArithmeticError):
    pass


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and ``"num/den"`` strings; floats are rejected."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def fraction_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Enclosure:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", as_fraction(self.lo))
        object.__setattr__(self, "hi", as_fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty enclosure [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, q: Rational) -> "Enclosure":
        return cls(q, q)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    def contains(self, q: Rational) -> bool:
        return self.lo <= q <= self.hi

    def contains_enclosure(self, other: "Enclosure") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersect(self, other: "Enclosure") -> "Enclosure":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            raise ValueError("disjoint enclosures of the same real")
        return Enclosure(lo, hi)

    def __add__(self, other):
        other = _enc(other)
        return Enclosure(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self):
        return Enclosure(-self.hi, -self.lo)

    def __sub__(self, other):
        other = _enc(other)
        return Enclosure(self.lo - other.hi, self.hi - other.lo)

    def __rsub__(self, other):
        return _enc(other) - self

    def __mul__(self, other):
        other = _enc(other)
        products = [self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi]
        return Enclosure(min(products), max(products))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _enc(other)
        if other.lo <= 0 <= other.hi:
            raise DivisionByIntervalContainingZero(f"divisor {other} contains 0")
        return self * Enclosure(1 / other.hi, 1 / other.lo)

    def __rtruediv__(self, other):
        return _enc(other) / self

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Enclosure(0, max(-self.lo, self.hi))

    def __str__(self):
        return f"[{self.lo}, {self.hi}]"


def _enc(x) -> Enclosure:
    if isinstance(x, Enclosure):
        return x
    return Enclosure.point(as_fraction(x))


def enc_min(a: Enclosure, b: Enclosure) -> Enclosure:
    return Enclosure(min(a.lo, b.lo), min(a.hi, b.hi))


def enc_max(a: Enclosure, b: Enclosure) -> Enclosure:
    return Enclosure(max(a.lo, b.lo), max(a.hi, b.hi))


# ---------------------------------------------------------------------------
# roots

def _dyadic_floor(q: Fraction, bits: int) -> Fraction:
    return Fraction(math.floor(q * (1 << bits)), 1 << bits)


def _dyadic_ceil(q: Fraction, bits: int) -> Fraction:
    return Fraction(math.ceil(q * (1 << bits)), 1 << bits)


def sqrt_enclosure(q: Rational, k: int) -> Enclosure:
    """Enclosure of sqrt(q) of width <= 2**-k by outward-rounded Newton steps.

    Newton's map x -> (x + q/x)/2 overestimates sqrt(q) from any positive
    start, so the iterate (rounded up) is an upper bound and q/x (rounded
    down) a lower bound.
    """
    q = as_fraction(q)
    if q < 0:
        raise ValueError("sqrt of a negative rational")
    if q == 0:
        return Enclosure(0, 0)
    bits = k + 4
    x = _dyadic_ceil(max(q, Fraction(1)), bits)
    while True:
        lo = _dyadic_floor(q / x, bits)
        if x - lo <= Fraction(1, 1 << k):
            return Enclosure(lo, x)
        nxt = _dyadic_ceil((x + q / x) / 2, bits)
        if nxt >= x:
            # grid too coarse to make progress; refine the working precision
            bits += 8
            nxt = _dyadic_ceil((x + q / x) / 2, bits)
        x = nxt


def root_enclosure(q: Rational, degree: int, k: int) -> Enclosure:
    """Enclosure of the positive real ``degree``-th root of q >= 0, width <= 2**-k.

    Works on the integer floor root of ``q * 2**(degree*m)``; the answer is
    certified by raising the endpoints back to the power exactly.
    """
    q = as_fraction(q)
    if q < 0 or degree < 1:
        raise ValueError("root of a negative rational or bad degree")
    if degree == 2:
        return sqrt_enclosure(q, k)
    m = k + 1
    scaled = (q.numerator << (degree * m)) // q.denominator
    r = _iroot(scaled, degree)
    lo, hi = Fraction(r, 1 << m), Fraction(r + 1, 1 << m)
    assert lo ** degree <= q <= hi ** degree
    return Enclosure(lo, hi)


def _iroot(n: int, degree: int) -> int:
    """Largest integer r with r**degree <= n."""
    if n < 2:
        return n
    x = 1 << ((n.bit_length() + degree - 1) // degree)
    while True:
        y = ((degree - 1) * x + n // x ** (degree - 1)) // degree
        if y >= x:
            break
        x = y
    while x ** degree > n:
        x -= 1
    while (x + 1) ** degree <= n:
        x += 1
    return x


def interval_arith(op: str, a: Enclosure, b: Enclosure | None = None, *, k: int = 32) -> Enclosure:
    """Apply ``op`` to enclosures; ``k`` only matters for ``sqrt-approx``."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    if op == "min":
        return enc_min(a, b)
    if op == "max":
        return enc_max(a, b)
    if op == "abs":
        return abs(a)
    if op == "sqrt-approx":
        if a.lo < 0:
            raise ValueError("sqrt of an enclosure reaching below 0")
        return Enclosure(sqrt_enclosure(a.lo, k).lo, sqrt_enclosure(a.hi, k).hi)
    raise ValueError(f"unknown interval op {op!r}")


# ---------------------------------------------------------------------------
# real oracles

class RealOracle:
    """A computable real: ``oracle(k)`` is an Enclosure of width <= 2**-k.

    Successive answers are intersected with the previous ones, so the
    enclosures handed out are nested regardless of the underlying procedure.
    """

    def __init__(self, evaluate: Callable[[int], Enclosure], exact: Fraction | None = None):
        self._evaluate = evaluate
        self._exact = exact
        self._last: Enclosure | None = None

    @classmethod
    def exact(cls, q: Rational) -> "RealOracle":
        q = as_fraction(q)
        return cls(lambda k: Enclosure(q, q), exact=q)

    @classmethod
    def sqrt(cls, q: Rational) -> "RealOracle":
        q = as_fraction(q)
        r = math.isqrt(q.numerator * q.denominator) if q >= 0 else -1
        if r >= 0 and r * r == q.numerator * q.denominator:
            return cls.exact(Fraction(r, q.denominator))
        return cls(lambda k: sqrt_enclosure(q, k))

    @classmethod
    def root(cls, q: Rational, degree: int) -> "RealOracle":
        q = as_fraction(q)
        return cls(lambda k: root_enclosure(q, degree, k))

    @property
    def exact_value(self) -> Fraction | None:
        return self._exact

    def __call__(self, k: int) -> Enclosure:
        if k < 0:
            raise ValueError("precision must be nonnegative")
        if self._exact is not None:
            return Enclosure(self._exact, self._exact)
        e = self._evaluate(k)
        if e.width > Fraction(1, 1 << k):
            raise AssertionError(f"oracle returned width {e.width} at precision {k}")
        if self._last is not None:
            e = e.intersect(self._last) if not self._last.contains_enclosure(e) else e
        self._last = e
        return e

    enclosure = __call__

    def map_monotone(self, f: Callable[[Fraction], Fraction], lipschitz: Fraction,
                     increasing: bool = True) -> "RealOracle":
        """Image under a monotone ``lipschitz``-Lipschitz rational map."""
        if self._exact is not None:
            return RealOracle.exact(f(self._exact))
        extra = max(0, math.ceil(math.log2(lipschitz)) + 1) if lipschitz > 0 else 0

        def evaluate(k: int) -> Enclosure:
            e = self(k + extra)
            a, b = f(e.lo), f(e.hi)
            return Enclosure(a, b) if increasing else Enclosure(b, a)

        return RealOracle(evaluate)

    def __add__(self, other: "RealOracle") -> "RealOracle":
        if self._exact is not None and other._exact is not None:
            return RealOracle.exact(self._exact + other._exact)
        return RealOracle(lambda k: self(k + 1) + other(k + 1))

    def scale(self, c: Rational) -> "RealOracle":
        c = as_fraction(c)
        if self._exact is not None:
            return RealOracle.exact(c * self._exact)
        extra = max(0, math.ceil(math.log2(abs(c)))) if c != 0 else 0
        return RealOracle(lambda k: self(k + extra) * c)

    def __repr__(self):
        if self._exact is not None:
            return f"RealOracle.exact({self._exact})"
        return f"RealOracle({self(16)})"


class Ordering(enum.Enum):
    LESS = "LESS"
    GREATER = "GREATER"
    WITHIN_GAP = "WITHIN_GAP"


def compare_with_gap(a: RealOracle, b: RealOracle, gap: Rational) -> Ordering:
    """Decide a < b, a > b, or |a - b| < gap by refining both oracles.

    Stops by precision ``ceil(log2(1/gap)) + 2``: there each enclosure has
    width <= gap/4, so overlapping enclosures span less than ``gap``.
    """
    gap = as_fraction(gap)
    if gap <= 0:
        raise ValueError("gap must be positive")
    if not isinstance(a, RealOracle):
        a = RealOracle.exact(a)
    if not isinstance(b, RealOracle):
        b = RealOracle.exact(b)
    last = math.ceil(math.log2(1 / gap)) + 2 if gap < 1 else 2
    for k in range(0, last + 1):
        ea, eb = a(k), b(k)
        if ea.hi < eb.lo:
            return Ordering.LESS
        if ea.lo > eb.hi:
            return Ordering.GREATER
        if max(ea.hi, eb.hi) - min(ea.lo, eb.lo) < gap:
            return Ordering.WITHIN_GAP
    raise AssertionError("compare_with_gap failed to terminate; oracle contract violated")


def avoid_atoms(a: Rational, b: Rational, atoms: Iterable[Rational]) -> Fraction:
    """A rational in the open interval (a, b) different from every atom.

    Tries the midpoint, and on hitting an atom bisects into the left half.
    """
    a, b = as_fraction(a), as_fraction(b)
    if not a < b:
        raise ValueError("need a < b")
    forbidden = {as_fraction(t) for t in atoms}
    lo, hi = a, b
    while True:
        mid = (lo + hi) / 2
        if mid not in forbidden:
            return mid
        hi = mid


def rational_between(lo: RealOracle, hi: RealOracle, k: int = 8) -> tuple[Fraction, Fraction]:
    """A rational subinterval of (lo, hi) for reals known to satisfy lo < hi."""
    while True:
        el, eh = lo(k), hi(k)
        if el.hi < eh.lo:
            return el.hi, eh.lo
        k += 8
        if k > 4096:
            raise ValueError("reals are not separated")


def decimal_str(q: Fraction, digits: int = 12) -> str:
    """Decimal rendering of a rational to ``digits`` significant digits."""
    if q == 0:
        return "0"
    return f"{float(q):.{digits}g}" if abs(q) > Fraction(1, 10 ** 300) else _small_decimal(q, digits)


def _small_decimal(q: Fraction, digits: int) -> str:
    # below float range: scale by a power of ten estimated from bit lengths
    e = math.floor((abs(q.numerator).bit_length() - q.denominator.bit_length()) * math.log10(2))
    scaled = q / Fraction(10) ** e
    while abs(scaled) >= 10:
        scaled /= 10
        e += 1
    while abs(scaled) < 1:
        scaled *= 10
        e -= 1
    mantissa = f"{float(scaled):.{digits}g}"
    if mantissa.lstrip("-").startswith("10"):
        mantissa = mantissa.replace("10", "1", 1)
        e += 1
    return f"{mantissa}e{'-' if e < 0 else '+'}{abs(e):02d}"
