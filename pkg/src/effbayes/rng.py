"""Seeded random bits and exact inverse-CDF sampling on rationals.

Streams come from numpy's Philox4x64 counter-based generator.  The 128-bit
Philox key for a stream is

    key[0] = seed                                   (low 64 bits)
    key[1] = (crc32(experiment) << 32) | replica    (replica < 2**32)

so every (seed, experiment, replica) triple owns a disjoint, platform
independent stream and replicas can run in any order or in parallel.
"""

from __future__ import annotations

import zlib
from fractions import Fraction
from typing import Callable

import numpy as np

_MASK64 = (1 << 64) - 1


def stream_key(seed: int, experiment: str, replica: int) -> tuple[int, int]:
    if not 0 <= replica < 2 ** 32:
        raise ValueError("replica index must fit in 32 bits")
    return seed & _MASK64, (zlib.crc32(experiment.encode()) << 32) | replica


class BitSource:
    """Buffered 64-bit words from a Philox stream."""

    def __init__(self, seed: int = 0, experiment: str = "default", replica: int = 0, block: int = 256):
        self.key = stream_key(seed, experiment, replica)
        self._gen = np.random.Philox(key=np.array(self.key, dtype=np.uint64))
        self._block = block
        self._buf: list[int] = []

    def word(self) -> int:
        if not self._buf:
            self._buf = [int(w) for w in self._gen.random_raw(self._block)][::-1]
        return self._buf.pop()

    def uniform_dyadic(self, bits: int = 64) -> Fraction:
        """A uniform draw from the grid {j / 2**bits}."""
        words = (bits + 63) // 64
        v = 0
        for _ in range(words):
            v = (v << 64) | self.word()
        v >>= words * 64 - bits
        return Fraction(v, 1 << bits)


def draw_index(cdf: Callable[[int], Fraction], bits: BitSource) -> int:
    """Exact draw of J with P(J <= j) = cdf(j), cdf nondecreasing with limit 1.

    Refines a dyadic interval [u, u + 2**-m) of a uniform variate 64 bits at a
    time until it sits inside a single CDF step, so the result has exactly the
    target law (no rounding of the probabilities).
    """
    num, m, j = 0, 0, 0
    c = cdf(0)
    while True:
        num = (num << 64) | bits.word()
        m += 64
        scale = 1 << m
        # smallest j with cdf(j) > num / 2**m
        while c.numerator * scale <= num * c.denominator:
            j += 1
            c = cdf(j)
        if (num + 1) * c.denominator <= c.numerator * scale:
            return j


def bernoulli(p: Fraction, bits: BitSource) -> int:
    """Exact Bernoulli(p) draw; returns 1 with probability p."""
    if p <= 0:
        return 0
    if p >= 1:
        return 1
    q = 1 - p
    return draw_index(lambda j: q if j == 0 else Fraction(1), bits)
