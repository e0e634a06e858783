"""Rigorous rational enclosures for the few transcendental quantities we need.

Everything here works with integers and ``Fraction``; results are either exact
or come as ``(lower, upper)`` pairs that provably contain the true value.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import ceil, floor

import gmpy2


def iroot_floor(a: int, n: int) -> int:
    """Largest integer r with r**n <= a."""
    if a < 0 or n < 1:
        raise ValueError("need a >= 0 and n >= 1")
    return int(gmpy2.iroot(a, n)[0])


def dyadic_down(q: Fraction, bits: int) -> Fraction:
    """A dyadic rational <= q keeping about ``bits`` significant bits."""
    return _dyadic(q, bits, floor)


def dyadic_up(q: Fraction, bits: int) -> Fraction:
    """A dyadic rational >= q keeping about ``bits`` significant bits."""
    return _dyadic(q, bits, ceil)


def _dyadic(q: Fraction, bits: int, rnd) -> Fraction:
    q = Fraction(q)
    if q == 0:
        return q
    shift = bits - (abs(q.numerator).bit_length() - q.denominator.bit_length())
    if shift >= 0:
        return Fraction(rnd(q * (1 << shift)), 1 << shift)
    return Fraction(rnd(q / (1 << -shift)) * (1 << -shift))


@lru_cache(maxsize=64)
def e_bounds(bits: int = 128) -> tuple[Fraction, Fraction]:
    """Dyadic enclosure of e with width about 2**-bits.

    Uses the partial sum of 1/k! (a lower bound) and the tail bound
    1/(K! K) for the remainder after the K-th term.
    """
    total, fact, k = Fraction(1), 1, 0
    while True:
        k += 1
        fact *= k
        total += Fraction(1, fact)
        if fact * k > (1 << (bits + 2)):
            break
    lo = dyadic_down(total, bits + 8)
    hi = dyadic_up(total + Fraction(1, fact * k), bits + 8)
    return lo, hi


def log_bounds(x: Fraction, bits: int = 128) -> tuple[Fraction, Fraction]:
    """Enclosure of the natural log of a rational x > 0.

    log x = 2 atanh(z) with z = (x-1)/(x+1); for x >= 1 every series term is
    non-negative so partial sums bound from below, and the geometric tail
    z^(2K+3) / ((2K+3)(1-z^2)) bounds from above.
    """
    x = Fraction(x)
    if x <= 0:
        raise ValueError("log of non-positive number")
    if x < 1:
        lo, hi = log_bounds(1 / x, bits)
        return -hi, -lo
    # halve the argument by powers of two to keep z small: log x = m log 2 + log(x / 2^m)
    m = 0
    while x > Fraction(3, 2):
        x /= 2
        m += 1
    lo_r, hi_r = _atanh_log(x, bits + 8)
    if m:
        lo2, hi2 = _atanh_log(Fraction(2), bits + 8 + m.bit_length())
        lo_r, hi_r = lo_r + m * lo2, hi_r + m * hi2
    return dyadic_down(lo_r, bits + 8), dyadic_up(hi_r, bits + 8)


def _atanh_log(x: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    if x < 1:
        lo, hi = _atanh_log(1 / x, bits)
        return -hi, -lo
    z = (x - 1) / (x + 1)
    if z == 0:
        return Fraction(0), Fraction(0)
    z2 = z * z
    target = Fraction(1, 1 << (bits + 2))
    s, p, k = Fraction(0), z, 0
    while True:
        s += p / (2 * k + 1)
        p *= z2
        tail = p / ((2 * k + 3) * (1 - z2))
        if tail < target:
            break
        k += 1
    s = dyadic_down(s, bits + 16)
    tail = dyadic_up(tail, bits)
    return 2 * s, 2 * (s + tail) + Fraction(1, 1 << (bits + 14))


def sqrt_bounds(x: Fraction, bits: int = 128) -> tuple[Fraction, Fraction]:
    """Dyadic enclosure of sqrt(x) for rational x >= 0."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("sqrt of negative number")
    scale = 1 << (2 * bits)
    a = x.numerator * scale // x.denominator
    r = iroot_floor(a, 2)
    lo = Fraction(r, 1 << bits)
    hi = Fraction(r + 1, 1 << bits)
    return lo, hi


def exp_int_ceil(k: int) -> int:
    """Exact ceil(e**k) for an integer k >= 0.

    Working precision is raised until both ends of the e enclosure give the
    same ceiling; e**k is never an integer for k >= 1, so this terminates.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return 1
    bits = 2 * k + 64
    while True:
        lo, hi = e_bounds(bits)
        a = ceil(lo ** k)
        if a == ceil(hi ** k):
            return a
        bits *= 2


def rational_pow_le(a: Fraction, p: int, q: int, b: Fraction) -> bool:
    """Exact test a**(p/q) <= b for a, b >= 0 and positive integers p, q."""
    if a < 0 or b < 0:
        raise ValueError("non-negative operands required")
    return a ** p <= b ** q


def decimal_floor_root(value: int, n: int, places: int) -> tuple[int, bool]:
    """floor(value**(1/n) * 10**places) and whether the root is exact there."""
    a = value * 10 ** (places * n)
    r = iroot_floor(a, n)
    return r, r ** n == a
