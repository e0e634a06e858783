"""Exact Pierce digit dynamics on rationals and finite digit words.

A Pierce expansion writes x in [0, 1] as

    x = 1/d1 - 1/(d1 d2) + 1/(d1 d2 d3) - ...

with strictly increasing positive digits.  All arithmetic here is exact
(``fractions.Fraction`` and Python integers); there is no float path.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Protocol, Sequence, Union

INFINITY = math.inf
"""Digit value after an expansion terminates (``1/INFINITY == 0``)."""

NO_DIFFERENCE = None
"""Returned by :func:`rho` when two open prefixes agree as far as they go."""

ExtDigit = Union[int, float]


class Tail(enum.Enum):
    TERMINATED = "terminated"
    OPEN_PREFIX = "open"


class DigitSource(Protocol):
    """Anything that can hand out the first n digits of an infinite sequence."""

    def prefix(self, n: int) -> tuple[int, ...]: ...


def as_rational01(x) -> Fraction:
    """Coerce to a reduced Fraction and check 0 <= x <= 1."""
    if isinstance(x, str):
        x = parse_rational(x)
    elif isinstance(x, float):
        raise TypeError("floats are not accepted; pass a Fraction or 'p/q'")
    q = Fraction(x)
    if not 0 <= q <= 1:
        raise ValueError(f"{q} is outside [0, 1]")
    return q


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if "." in text or "e" in text.lower():
        raise ValueError(f"expected an exact rational 'p/q', got {text!r}")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse rational {text!r}") from exc


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def _check_increasing(digits: Sequence[int]) -> None:
    prev = 0
    for d in digits:
        if not isinstance(d, int) or isinstance(d, bool):
            raise TypeError(f"digits must be integers, got {d!r}")
        if d <= prev:
            raise ValueError(f"digits must be strictly increasing positive integers: {tuple(digits)}")
        prev = d


@dataclass(frozen=True)
class DigitWord:
    """A finite strictly increasing digit word.

    ``TERMINATED`` words stand for (d1, ..., dn, inf, inf, ...), an element of
    Sigma_n; ``OPEN_PREFIX`` words are the visible start of an infinite
    sequence whose later digits are unknown.
    """

    digits: tuple[int, ...]
    tail: Tail = Tail.TERMINATED

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(self.digits))
        _check_increasing(self.digits)

    @classmethod
    def terminated(cls, digits: Iterable[int]) -> "DigitWord":
        return cls(tuple(digits), Tail.TERMINATED)

    @classmethod
    def open(cls, digits: Iterable[int]) -> "DigitWord":
        return cls(tuple(digits), Tail.OPEN_PREFIX)

    @classmethod
    def parse(cls, text: str) -> "DigitWord":
        """Parse ``"1,4,9,inf"`` (terminated) or ``"1,4,9"`` (open prefix).

        A lone ``"inf"`` (or an empty string) is the empty terminated word.
        """
        parts = [p.strip() for p in text.strip().split(",") if p.strip()]
        if not parts:
            return cls((), Tail.TERMINATED)
        terminated = parts[-1].lower() in ("inf", "infinity")
        if terminated:
            parts = parts[:-1]
        try:
            digits = tuple(int(p) for p in parts)
        except ValueError as exc:
            raise ValueError(f"cannot parse digit word {text!r}") from exc
        return cls(digits, Tail.TERMINATED if terminated else Tail.OPEN_PREFIX)

    def __str__(self) -> str:
        body = [str(d) for d in self.digits]
        if self.is_terminated:
            body.append("inf")
        return ",".join(body)

    def __len__(self) -> int:
        return len(self.digits)

    @property
    def is_terminated(self) -> bool:
        return self.tail is Tail.TERMINATED

    def digit(self, k: int) -> ExtDigit | None:
        """k-th digit (1-based); INFINITY past a terminated end, None if unknown."""
        if k < 1:
            raise IndexError("digit indices start at 1")
        if k <= len(self.digits):
            return self.digits[k - 1]
        return INFINITY if self.is_terminated else None

    def prefix(self, n: int) -> tuple[int, ...]:
        if n > len(self.digits):
            raise ValueError(f"word has only {len(self.digits)} digits, {n} requested")
        return self.digits[:n]


def pierce_step(x) -> tuple[ExtDigit, Fraction]:
    """One application of the digit map: (floor(1/x), 1 - floor(1/x) x)."""
    x = as_rational01(x)
    if x == 0:
        return INFINITY, Fraction(0)
    p, q = x.numerator, x.denominator
    d = q // p
    # 1 - d p/q = (q - d p)/q = (q mod p)/q
    return d, Fraction(q % p, q)


def digit_expand(x, max_depth: int = 10_000) -> DigitWord:
    """Pierce digits of x, stopping at termination or after ``max_depth`` digits."""
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    x = as_rational01(x)
    digits = []
    while len(digits) < max_depth:
        d, x = pierce_step(x)
        if d == INFINITY:
            return DigitWord(tuple(digits), Tail.TERMINATED)
        digits.append(d)
    if x == 0:
        return DigitWord(tuple(digits), Tail.TERMINATED)
    return DigitWord(tuple(digits), Tail.OPEN_PREFIX)


def expand_trace(x, max_depth: int = 10_000) -> list[tuple[int, ExtDigit, Fraction]]:
    """Rows (k, d_k, T^k x) of the digit algorithm, ending with the INFINITY step."""
    x = as_rational01(x)
    rows = []
    for k in range(1, max_depth + 1):
        d, x = pierce_step(x)
        rows.append((k, d, x))
        if d == INFINITY:
            break
    return rows


def _alternating_sum(digits: Sequence[int]) -> tuple[int, int]:
    # S_m = A_m / P_m with A_m = A_{m-1} d_m + (-1)^(m+1), P_m = d_1 ... d_m
    a, p = 0, 1
    sign = 1
    for d in digits:
        a = a * d + sign
        p *= d
        sign = -sign
    return a, p


def phi_eval(word) -> Fraction:
    """Exact value 1/s1 - 1/(s1 s2) + ... of a terminated word."""
    if isinstance(word, DigitWord):
        if not word.is_terminated:
            raise ValueError("phi_eval needs a TERMINATED word; use phi_partial for prefixes")
        digits = word.digits
    else:
        digits = tuple(word)
        _check_increasing(digits)
    a, p = _alternating_sum(digits)
    return Fraction(a, p)


def phi_partial(source: DigitSource, n: int) -> tuple[Fraction, Fraction]:
    """phi of the depth-n truncation and the tail bound prod_{k<=n+1} 1/s_k."""
    if n < 1:
        raise ValueError("n must be >= 1")
    digits = source.prefix(n + 1)
    a, p = _alternating_sum(digits[:n])
    return Fraction(a, p), Fraction(1, p * digits[n])


def is_realizable(word: DigitWord) -> bool:
    """Whether some x in [0, 1] has exactly this digit sequence."""
    if not word.is_terminated or len(word) < 2:
        return True
    return word.digits[-2] + 1 < word.digits[-1]


def hat(word: DigitWord) -> DigitWord:
    """Same word with its last digit increased by one."""
    if not word.is_terminated or len(word) < 1:
        raise ValueError("hat needs a non-empty TERMINATED word")
    return DigitWord(word.digits[:-1] + (word.digits[-1] + 1,), Tail.TERMINATED)


def truncate(source, n: int) -> DigitWord:
    """The terminated word made of the first n digits (n = 0 gives the empty word)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return DigitWord(tuple(source.prefix(n)), Tail.TERMINATED)


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction
    lo_closed: bool
    hi_closed: bool

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("lo > hi")

    def __contains__(self, x) -> bool:
        x = Fraction(x)
        above = x > self.lo or (self.lo_closed and x == self.lo)
        below = x < self.hi or (self.hi_closed and x == self.hi)
        return above and below

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    def issubset(self, other: "Interval") -> bool:
        if self.lo == self.hi and not (self.lo_closed and self.hi_closed):
            return True  # empty
        lo_ok = self.lo > other.lo or (self.lo == other.lo and (other.lo_closed or not self.lo_closed))
        hi_ok = self.hi < other.hi or (self.hi == other.hi and (other.hi_closed or not self.hi_closed))
        return lo_ok and hi_ok

    def __str__(self) -> str:
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{format_rational(self.lo)}, {format_rational(self.hi)}{right}"


def fundamental_interval(word: DigitWord) -> Interval:
    """The set of x whose first n digits are ``word``, as an exact interval.

    The endpoint at phi(word) is included only when the word is realizable;
    the endpoint at phi(hat(word)) is never included.
    """
    if not word.is_terminated:
        word = DigitWord(word.digits, Tail.TERMINATED)
    if len(word) < 1:
        raise ValueError("fundamental intervals need at least one digit")
    own, other = phi_eval(word), phi_eval(hat(word))
    closed = is_realizable(word)
    if len(word) % 2:
        return Interval(other, own, False, closed)
    return Interval(own, other, closed, False)


def interval_length(digits: Sequence[int]) -> Fraction:
    """|I(s)| = prod_{k<n} 1/s_k * 1/(s_n (s_n + 1))."""
    p = 1
    for d in digits[:-1]:
        p *= d
    last = digits[-1]
    return Fraction(1, p * last * (last + 1))


def rho(a: DigitWord, b: DigitWord):
    """Least index where the two digit sequences differ.

    Terminated words continue with INFINITY.  Returns ``NO_DIFFERENCE`` when
    the words agree on every index both of them can answer for.
    """
    k = 1
    while True:
        da, db = a.digit(k), b.digit(k)
        if da is None or db is None:
            return NO_DIFFERENCE
        if da != db:
            return k
        if da == INFINITY:
            return NO_DIFFERENCE
        k += 1


def distance_bounds(x_word: DigitWord, y_word: DigitWord) -> tuple[Fraction, Fraction]:
    """Digit-based lower and upper bounds on |x - y|.

    With n the first differing index and y the side with the larger n-th
    digit, the bounds are P/(d_n(y)(d_{n+1}(y)+1)) and P, where P is the
    product of 1/d_k over the shared digits.
    """
    n = rho(x_word, y_word)
    if n is NO_DIFFERENCE:
        raise ValueError("words do not differ within their known digits")
    if x_word.digit(n) > y_word.digit(n):
        x_word, y_word = y_word, x_word
    shared = 1
    for d in x_word.digits[: n - 1]:
        shared *= d
    upper = Fraction(1, shared)
    dn, dn1 = y_word.digit(n), y_word.digit(n + 1)
    if dn1 is None:
        raise ValueError(f"need digit {n + 1} of the larger side to bound the distance")
    if dn == INFINITY or dn1 == INFINITY:
        return Fraction(0), upper
    return Fraction(1, shared * dn * (dn1 + 1)), upper
