"""Infinite digit sequences standing in for irrational points.

A :class:`DigitGenerator` produces sigma_1 < sigma_2 < ... on demand and
checks every new digit as it is produced.  Generators are built from a rule
``rule(k, previous_digits) -> sigma_k`` and carry a spec string that
:func:`parse_generator` can turn back into an equal generator.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from math import floor
from typing import Callable, Sequence

import numpy as np

from .certify import exp_int_ceil, iroot_floor
from .expansion import DigitWord, Tail, pierce_step, INFINITY

RNG_ALGORITHM = "numpy-philox4x64"
DEFAULT_MAX_DEPTH = 200_000
DEFAULT_MAX_BITS = 1 << 22

Rule = Callable[[int, Sequence[int]], int]


class GeneratorError(ValueError):
    """A generator broke its contract or hit its depth/size cap."""


class SamplingBudgetExceeded(RuntimeError):
    pass


class DigitGenerator:
    """Lazily evaluated, validated strictly increasing digit sequence."""

    def __init__(self, rule: Rule, spec: str, *, max_depth: int = DEFAULT_MAX_DEPTH,
                 max_bits: int = DEFAULT_MAX_BITS):
        self._rule = rule
        self.spec = spec
        self.max_depth = max_depth
        self.max_bits = max_bits
        self._digits: list[int] = []
        self._lock = threading.Lock()

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.spec!r})"

    @property
    def validated_depth(self) -> int:
        return len(self._digits)

    def _check(self, k: int, d: int, prev: int) -> None:
        if not isinstance(d, int) or d <= prev:
            raise GeneratorError(f"{self.spec}: digit {k} = {d} does not exceed {prev}")
        if d < k:
            raise GeneratorError(f"{self.spec}: digit {k} = {d} is below its index")

    def _extend(self, n: int) -> None:
        with self._lock:
            digits = self._digits
            if n > self.max_depth:
                raise GeneratorError(f"{self.spec}: depth {n} exceeds cap {self.max_depth}")
            while len(digits) < n:
                k = len(digits) + 1
                d = self._rule(k, digits)
                self._check(k, d, digits[-1] if digits else 0)
                if d.bit_length() > self.max_bits:
                    raise GeneratorError(f"{self.spec}: digit {k} exceeds {self.max_bits} bits")
                digits.append(d)

    def digit(self, k: int) -> int:
        if k < 1:
            raise IndexError("digit indices start at 1")
        if k > len(self._digits):
            self._extend(k)
        return self._digits[k - 1]

    def prefix(self, n: int) -> tuple[int, ...]:
        if n > len(self._digits):
            self._extend(n)
        return tuple(self._digits[:n])

    def word(self, n: int) -> DigitWord:
        """First n digits as an open prefix."""
        return DigitWord(self.prefix(n), Tail.OPEN_PREFIX)

    def validate(self, depth: int) -> "DigitGenerator":
        self._extend(depth)
        return self


class AdmissibleGenerator(DigitGenerator):
    """Generator whose digits satisfy 2**k < sigma_k < 4**k for every k >= 1.

    The window holds from index 1 on, so any M >= 2 can be used with the
    stretching transform.
    """

    window_start = 1

    def _check(self, k: int, d: int, prev: int) -> None:
        super()._check(k, d, prev)
        if not (1 << k) < d < (1 << (2 * k)):
            raise GeneratorError(f"{self.spec}: digit {k} = {d} outside (2^{k}, 4^{k})")


@dataclass(frozen=True)
class Enclosure:
    """Closed rational interval [lo, hi] certified to contain a real value."""

    lo: Fraction
    hi: Fraction
    width: Fraction
    depth: int = 0

    def __post_init__(self):
        if self.lo > self.hi or self.hi - self.lo > self.width:
            raise ValueError("malformed enclosure")

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def contains(self, other: "Enclosure") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def separated_from(self, other: "Enclosure") -> bool:
        return self.hi < other.lo or other.hi < self.lo

    def distance_bounds(self, other: "Enclosure") -> tuple[Fraction, Fraction]:
        """Bounds on |a - b| for a in self and b in other."""
        lower = max(Fraction(0), other.lo - self.hi, self.lo - other.hi)
        upper = max(self.hi - other.lo, other.hi - self.lo)
        return lower, upper


def enclose(source, bits: int, max_depth: int = DEFAULT_MAX_DEPTH) -> Enclosure:
    """Enclose phi(source) to width <= 2**-bits.

    The value lies between consecutive partial sums S_m and S_{m+1}, whose
    gap prod_{k<=m+1} 1/sigma_k is the same quantity that bounds
    |phi - S_m|.  Depth grows until that gap is small enough.
    """
    target = 1 << bits
    a, p, sign = 0, 1, 1
    for m in range(1, max_depth + 1):
        d = source.digit(m)
        a, p, sign = a * d + sign, p * d, -sign
        if p >= target:
            # S_m = a/p and S_{m-1} = (a + sign)/p since sign has already flipped
            s_prev, s_cur = Fraction(a + sign, p), Fraction(a, p)
            return Enclosure(min(s_prev, s_cur), max(s_prev, s_cur), Fraction(1, p), m - 1)
    raise GeneratorError(f"depth cap {max_depth} reached before width 2^-{bits}")


def phi_enclosure(source, n: int) -> Enclosure:
    """Enclosure of phi(source) from its depth-n truncation (width prod_{k<=n+1} 1/sigma_k)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    digits = source.prefix(n + 1)
    a, p, sign = 0, 1, 1
    for d in digits[:n]:
        a, p, sign = a * d + sign, p * d, -sign
    s_n = Fraction(a, p)
    s_next = s_n + Fraction(sign, p * digits[n])
    return Enclosure(min(s_n, s_next), max(s_n, s_next), Fraction(1, p * digits[n]), n)


# -- deterministic families ---------------------------------------------------

def make_power_generator(base_num: int, base_den: int = 1) -> AdmissibleGenerator:
    """sigma_k = ceil(base**k) for a rational base strictly between 2 and 4."""
    base = Fraction(base_num, base_den)
    if not 2 < base < 4:
        raise ValueError(f"base {base} must lie strictly between 2 and 4")
    num, den = base.numerator, base.denominator

    def rule(k, _prev):
        return -((-num ** k) // den ** k)

    return AdmissibleGenerator(rule, f"pow:{num}/{den}")


def make_exp_generator() -> AdmissibleGenerator:
    """sigma_k = ceil(e**k), computed exactly."""
    return AdmissibleGenerator(lambda k, _prev: exp_int_ceil(k), "exp")


def _round_half_up(q: Fraction) -> int:
    return floor(q + Fraction(1, 2))


def make_ratio_generator(alpha, first: int = 2) -> DigitGenerator:
    """d_{n+1} = max(d_n + 1, round(alpha d_n)) so d_{n+1}/d_n tends to alpha."""
    alpha = Fraction(alpha)
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    if first < 1:
        raise ValueError("first digit must be >= 1")

    def rule(k, prev):
        if k == 1:
            return first
        d = prev[-1]
        return max(d + 1, _round_half_up(alpha * d))

    return DigitGenerator(rule, f"ratio:{_fmt(alpha)}:{first}")


def _round_power(d: int, beta: Fraction) -> int:
    # round(d**(p/q)) = floor((t + 1)/2) with t = floor(2 d**(p/q)) = iroot(2^q d^p, q)
    p, q = beta.numerator, beta.denominator
    t = iroot_floor((d ** p) << q, q)
    return (t + 1) // 2


def make_logratio_generator(beta, first: int = 2, max_bits: int = 1 << 20) -> DigitGenerator:
    """d_{n+1} = max(d_n + 1, round(d_n**beta)) so log d_{n+1}/log d_n tends to beta.

    Digits grow doubly exponentially; generation stops with GeneratorError
    once a digit would exceed ``max_bits`` bits.
    """
    beta = Fraction(beta)
    if beta < 1:
        raise ValueError("beta must be >= 1")
    if first < 1:
        raise ValueError("first digit must be >= 1")

    def rule(k, prev):
        if k == 1:
            return first
        d = prev[-1]
        if d.bit_length() * beta > max_bits:
            raise GeneratorError(f"logratio:{_fmt(beta)}: digit {k} exceeds {max_bits} bits")
        return max(d + 1, _round_power(d, beta))

    return DigitGenerator(rule, f"logratio:{_fmt(beta)}:{first}", max_bits=max_bits)


def make_explicit_generator(digits: Sequence[int]) -> DigitGenerator:
    """Given leading digits, continued by doubling the last one."""
    digits = tuple(int(d) for d in digits)
    if not digits:
        raise ValueError("explicit generator needs at least one digit")

    def rule(k, prev):
        if k <= len(digits):
            return digits[k - 1]
        return 2 * prev[-1]

    return DigitGenerator(rule, "explicit:" + ",".join(map(str, digits)))


# -- seeded random families ---------------------------------------------------

def rng_for(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent counter-based stream for (seed, stream)."""
    ss = np.random.SeedSequence([int(seed), int(stream)])
    return np.random.Generator(np.random.Philox(ss))


def _randint(rng: np.random.Generator, lo: int, hi: int) -> int:
    """Uniform integer in [lo, hi] (arbitrary size)."""
    span = hi - lo + 1
    if span <= 0:
        raise ValueError("empty range")
    if span < (1 << 62):
        return lo + int(rng.integers(span))
    nbits = span.bit_length()
    nbytes = (nbits + 7) // 8
    while True:
        v = int.from_bytes(rng.bytes(nbytes), "little") >> (8 * nbytes - nbits)
        if v < span:
            return lo + v


def _loguniform(rng, lo: int, hi: int) -> int:
    """Integer in [lo, hi], bit length uniform first, then uniform within it."""
    b = _randint(rng, lo.bit_length(), hi.bit_length())
    a = max(lo, 1 << (b - 1))
    z = min(hi, (1 << b) - 1)
    return _randint(rng, a, z)


def _free_range(k, prev):
    if k == 1:
        return 1, 6
    d = prev[-1]
    return d + 1, 2 * d + 1


def _admissible_range(k, prev):
    lo = (1 << k) + 1
    if prev:
        lo = max(lo, prev[-1] + 1)
    return lo, (1 << (2 * k)) - 1


def _family(admissible: bool):
    if admissible:
        return _admissible_range, _loguniform, AdmissibleGenerator
    return _free_range, _randint, DigitGenerator


def random_generator(seed: int, stream: int = 0, admissible: bool = False) -> DigitGenerator:
    """Seeded random strictly increasing sequence.

    The free family has ratios between 1 and 2 (consecutive digits occur);
    the admissible family stays inside the (2^k, 4^k) window.
    """
    bounds, draw, cls = _family(admissible)
    rng = rng_for(seed, stream)

    def rule(k, prev):
        return draw(rng, *bounds(k, prev))

    kind = "admissible" if admissible else "random"
    return cls(rule, f"{kind}:{seed}:{stream}")


def fork_generator(base: DigitGenerator, shared: int, seed: int, stream: int = 0) -> DigitGenerator:
    """A generator agreeing with ``base`` on exactly ``shared`` leading digits.

    The next digit is redrawn from the family's range excluding the base's
    digit; later digits continue from a fresh random stream.
    """
    admissible = isinstance(base, AdmissibleGenerator)
    bounds, draw, cls = _family(admissible)
    rng = rng_for(seed, stream)
    k0 = shared + 1
    lo, hi = bounds(k0, base.prefix(shared))
    if hi <= lo:
        raise GeneratorError(f"no alternative digit at index {k0} for {base.spec}")
    avoid = base.digit(k0)

    def rule(k, prev):
        if k <= shared:
            return base.digit(k)
        if k == k0:
            while True:
                d = draw(rng, lo, hi)
                if d != avoid:
                    return d
        return draw(rng, *bounds(k, prev))

    return cls(rule, f"fork:{shared}:{seed}:{stream}:{base.spec}")


# -- transforms ---------------------------------------------------------------

def psi_index(n: int, M: int) -> tuple[int, int]:
    """Write n = j (M + 1) + l with 0 <= l <= M."""
    return divmod(n, M + 1)


def psi_transform(gen: DigitGenerator, M: int) -> DigitGenerator:
    """Stretch a sequence: output n = j(M+1)+l is sigma_{jM+l} + j.

    Every (M+1)-th output repeats the previous input digit shifted up by one,
    which slows growth enough to move (d_n)^(1/n) away from e.
    """
    if M < 2:
        raise ValueError("M must be >= 2")

    def rule(n, _prev):
        j, l = psi_index(n, M)
        return gen.digit(j * M + l) + j

    return DigitGenerator(rule, f"psi:{M}:{gen.spec}", max_depth=gen.max_depth)


def g_map(gen: AdmissibleGenerator, M: int, precision_bits: int = 64,
          max_depth: int = DEFAULT_MAX_DEPTH) -> Enclosure:
    """Enclosure of phi(psi(sigma)) with width <= 2**-precision_bits."""
    if not isinstance(gen, AdmissibleGenerator):
        raise TypeError("g_map needs an AdmissibleGenerator")
    if M <= gen.window_start:
        raise ValueError(f"M must exceed the window start {gen.window_start}")
    return enclose(psi_transform(gen, M), precision_bits, max_depth)


# -- sampling ----------------------------------------------------------------

def sample_uniform_prefix(bits: int, depth: int, seed: int, stream: int = 0,
                          budget: int = 1000) -> DigitWord:
    """K leading digits of a uniformly drawn dyadic point num / 2**bits.

    A draw is rejected when its expansion ends before ``depth`` digits or
    the digit product passes 2**(bits/2); past that point the digits of a
    dyadic rational no longer behave like those of a typical real.
    """
    if bits < 64 or depth < 1:
        raise ValueError("need bits >= 64 and depth >= 1")
    rng = rng_for(seed, stream)
    limit = 1 << (bits // 2)
    for _ in range(budget):
        x = Fraction(_randint(rng, 1, (1 << bits) - 1), 1 << bits)
        digits, prod = [], 1
        while len(digits) < depth:
            d, x = pierce_step(x)
            if d == INFINITY:
                break
            prod *= d
            if prod > limit:
                break
            digits.append(d)
        if len(digits) == depth:
            return DigitWord(tuple(digits), Tail.OPEN_PREFIX)
    raise SamplingBudgetExceeded(f"{budget} draws of {bits} bits never reached depth {depth}")


# -- spec strings ---------------------------------------------------------------

def _fmt(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_generator(spec: str) -> DigitGenerator:
    """Build a generator from its spec string.

    Accepted forms: ``pow:num/den``, ``exp``, ``ratio:alpha[:first]``,
    ``logratio:beta[:first]``, ``explicit:1,4,9[,...]``,
    ``random:seed[:stream]``, ``admissible:seed[:stream]``,
    ``fork:shared:seed:stream:<spec>`` and ``psi:M:<spec>``.
    """
    spec = spec.strip()
    kind, _, rest = spec.partition(":")
    try:
        if kind == "pow":
            base = Fraction(rest)
            return make_power_generator(base.numerator, base.denominator)
        if kind == "exp":
            return make_exp_generator()
        if kind in ("ratio", "logratio"):
            parts = rest.split(":")
            first = int(parts[1]) if len(parts) > 1 else 2
            make = make_ratio_generator if kind == "ratio" else make_logratio_generator
            return make(Fraction(parts[0]), first)
        if kind == "explicit":
            items = [p.strip() for p in rest.split(",") if p.strip() and p.strip() != "..."]
            return make_explicit_generator([int(p) for p in items])
        if kind in ("random", "admissible"):
            parts = rest.split(":")
            stream = int(parts[1]) if len(parts) > 1 else 0
            return random_generator(int(parts[0]), stream, admissible=kind == "admissible")
        if kind == "fork":
            shared, seed, stream, base = rest.split(":", 3)
            return fork_generator(parse_generator(base), int(shared), int(seed), int(stream))
        if kind == "psi":
            m, base = rest.split(":", 1)
            return psi_transform(parse_generator(base), int(m))
    except (ValueError, ZeroDivisionError, IndexError) as exc:
        raise ValueError(f"bad generator spec {spec!r}: {exc}") from exc
    raise ValueError(f"unknown generator kind {kind!r} in {spec!r}")
