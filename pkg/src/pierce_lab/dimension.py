"""Box-counting style estimates for digit-constrained subsets of [0, 1].

The cover at depth n is the family of fundamental intervals I(w) over the
accepted words w of length n.  The estimate is a least-squares slope and is
only a desk-scale proxy; nothing here computes a Hausdorff dimension.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .certify import iroot_floor

DEFAULT_BUDGET = 2_000_000
UNIT_BITS = 192  # fixed-point unit 2**-UNIT_BITS for inexact mass sums


class BudgetExhausted(RuntimeError):
    def __init__(self, message: str, partial: "CoverResult"):
        super().__init__(message)
        self.partial = partial


class DigitPredicate:
    """Prefix-closed constraint given as an allowed range for the next digit.

    ``next_range(prefix)`` returns inclusive bounds ``(lo, hi)`` for the digit
    following ``prefix``; ``hi`` is None when unbounded.  Strict increase is
    applied on top by the enumerator.
    """

    spec = "true"

    def next_range(self, prefix: Sequence[int]) -> tuple[int, int | None]:
        return 1, None

    def accepts(self, digits: Sequence[int]) -> bool:
        prev = 0
        for k, d in enumerate(digits):
            lo, hi = self.next_range(digits[:k])
            if d <= prev or d < lo or (hi is not None and d > hi):
                return False
            prev = d
        return True

    def __and__(self, other: "DigitPredicate") -> "DigitPredicate":
        return AllOf((self, other))

    def __repr__(self) -> str:
        return f"<predicate {self.spec}>"


TRUE = DigitPredicate()


def _floor_pow(base: Fraction, k: int) -> int:
    return (base.numerator ** k) // (base.denominator ** k)


def _ceil_pow(base: Fraction, k: int) -> int:
    return -((-base.numerator ** k) // (base.denominator ** k))


class Window(DigitPredicate):
    """lo**k < sigma_k < hi**k at every index k."""

    def __init__(self, lo, hi):
        self.lo, self.hi = Fraction(lo), Fraction(hi)
        if not 1 <= self.lo < self.hi:
            raise ValueError("window needs 1 <= lo < hi")
        self.spec = f"window:{_fmt(self.lo)},{_fmt(self.hi)}"

    def next_range(self, prefix):
        k = len(prefix) + 1
        return _floor_pow(self.lo, k) + 1, _ceil_pow(self.hi, k) - 1


class Ratio(DigitPredicate):
    """lo <= sigma_{k+1} / sigma_k <= hi."""

    def __init__(self, lo, hi):
        self.lo, self.hi = Fraction(lo), Fraction(hi)
        if not 0 < self.lo <= self.hi:
            raise ValueError("ratio needs 0 < lo <= hi")
        self.spec = f"ratio:{_fmt(self.lo)},{_fmt(self.hi)}"

    def next_range(self, prefix):
        if not prefix:
            return 1, None
        d = prefix[-1]
        return math.ceil(self.lo * d), math.floor(self.hi * d)


def _root_floor(d: int, e: Fraction) -> int:
    return iroot_floor(d ** e.numerator, e.denominator)


class LogRatio(DigitPredicate):
    """sigma_k**lo <= sigma_{k+1} <= sigma_k**hi."""

    def __init__(self, lo, hi):
        self.lo, self.hi = Fraction(lo), Fraction(hi)
        if not 0 < self.lo <= self.hi:
            raise ValueError("logratio needs 0 < lo <= hi")
        self.spec = f"logratio:{_fmt(self.lo)},{_fmt(self.hi)}"

    def next_range(self, prefix):
        if not prefix:
            return 1, None
        d = prefix[-1]
        lo = _root_floor(d, self.lo)
        if lo ** self.lo.denominator != d ** self.lo.numerator:
            lo += 1
        return lo, _root_floor(d, self.hi)


class ExplicitPrefix(DigitPredicate):
    """Words starting with the given digits; unconstrained afterwards."""

    def __init__(self, digits: Sequence[int]):
        self.digits = tuple(int(d) for d in digits)
        self.spec = "explicit-prefix:" + ",".join(map(str, self.digits))

    def next_range(self, prefix):
        k = len(prefix)
        if k < len(self.digits):
            return self.digits[k], self.digits[k]
        return 1, None


class Point(DigitPredicate):
    """Only the prefixes of one fixed digit sequence."""

    def __init__(self, source):
        self.source = source
        self.spec = f"point:{getattr(source, 'spec', source)}"

    def next_range(self, prefix):
        d = self.source.digit(len(prefix) + 1)
        return d, d


class AllOf(DigitPredicate):
    def __init__(self, parts: Sequence[DigitPredicate]):
        self.parts = tuple(parts)
        self.spec = "&".join(p.spec for p in self.parts)

    def next_range(self, prefix):
        lo, hi = 1, None
        for p in self.parts:
            a, b = p.next_range(prefix)
            lo = max(lo, a)
            if b is not None:
                hi = b if hi is None else min(hi, b)
        return lo, hi


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_predicate(spec: str) -> DigitPredicate:
    """Mini-language: ``true``, ``window:2,4``, ``ratio:lo,hi``,
    ``logratio:lo,hi``, ``explicit-prefix:3,8``, ``point:<generator spec>``;
    join several with ``&``."""
    spec = spec.strip()
    if "&" in spec and not spec.startswith("point:"):
        return AllOf([parse_predicate(p) for p in spec.split("&")])
    kind, _, rest = spec.partition(":")
    try:
        if kind == "true":
            return TRUE
        if kind in ("window", "ratio", "logratio"):
            lo, hi = (Fraction(x) for x in rest.split(","))
            return {"window": Window, "ratio": Ratio, "logratio": LogRatio}[kind](lo, hi)
        if kind == "explicit-prefix":
            return ExplicitPrefix([int(x) for x in rest.split(",") if x.strip()])
        if kind == "point":
            from .generators import parse_generator

            return Point(parse_generator(rest))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad predicate spec {spec!r}: {exc}") from exc
    raise ValueError(f"unknown predicate kind {kind!r}")


@dataclass
class CoverResult:
    depth: int
    cap: int
    count: int = 0
    mass: Fraction = Fraction(0)
    remainder: Fraction = Fraction(0)
    mesh: Fraction = Fraction(0)
    nodes: int = 0
    exact: bool = True
    complete: bool = True


def cover_count(pred: DigitPredicate, depth: int, cap: int, budget: int = DEFAULT_BUDGET,
                exact: bool = True) -> CoverResult:
    """Count accepted depth-n words with all digits <= cap.

    Also returns the total length of their fundamental intervals (``mass``),
    the largest such length (``mesh``) and an upper bound (``remainder``) on
    the length of intervals of accepted words that the cap cut off.  With
    ``exact=False`` the sums are kept in fixed point, mass rounded down and
    remainder rounded up.
    """
    if depth < 1 or cap < 1:
        raise ValueError("depth and cap must be >= 1")
    res = CoverResult(depth, cap, exact=exact)
    unit = 1 << UNIT_BITS
    mass = Fraction(0) if exact else 0
    rem = Fraction(0) if exact else 0
    min_den = None  # mesh = 1/min_den
    stack = [((), 1)]
    while stack:
        prefix, prod = stack.pop()
        res.nodes += 1
        if res.nodes > budget:
            res.complete = False
            res.mass = mass if exact else Fraction(mass, unit)
            res.remainder = rem if exact else Fraction(rem, unit)
            res.mesh = Fraction(1, min_den) if min_den else Fraction(0)
            raise BudgetExhausted(f"node budget {budget} exhausted at depth {depth}", res)
        lo, hi = pred.next_range(prefix)
        lo = max(lo, prefix[-1] + 1 if prefix else 1)
        top = cap if hi is None else min(hi, cap)
        if hi is None or hi > cap:
            # digits m..hi after this prefix fill an interval of length (1/m - 1/(hi+1))/prod
            m = max(cap + 1, lo)
            if hi is None:
                num, den = 1, prod * m
            else:
                num, den = hi + 1 - m, prod * m * (hi + 1)
            rem += Fraction(num, den) if exact else -((-num * unit) // den)
        if lo > top:
            continue
        if len(prefix) + 1 == depth:
            # telescoping: sum_{d=lo}^{top} 1/(d(d+1)) = 1/lo - 1/(top+1)
            res.count += top - lo + 1
            num, den = top + 1 - lo, prod * lo * (top + 1)
            mass += Fraction(num, den) if exact else (num * unit) // den
            d = prod * lo * (lo + 1)
            if min_den is None or d < min_den:
                min_den = d
            continue
        for d in range(top, lo - 1, -1):
            stack.append((prefix + (d,), prod * d))
    res.mass = mass if exact else Fraction(mass, unit)
    res.remainder = rem if exact else Fraction(rem, unit)
    res.mesh = Fraction(1, min_den) if min_den else Fraction(0)
    return res


@dataclass
class BoxDimEstimate:
    slope: float
    intercept: float
    points: list = field(default_factory=list)  # (depth, log(1/mesh), log(mass/mesh))
    residuals: list = field(default_factory=list)
    covers: list = field(default_factory=list)


def _log(q: Fraction) -> float:
    return math.log(q.numerator) - math.log(q.denominator)


def boxdim_estimate(pred: DigitPredicate, depths: Sequence[int], caps: int | Sequence[int] = 48,
                    budget: int = DEFAULT_BUDGET) -> BoxDimEstimate:
    """Slope of log(mass / mesh) against log(1 / mesh) across depths.

    mass / mesh is the number of mesh-sized boxes the accepted intervals
    would fill; for a set of full dimension it tracks 1/mesh, for a single
    point it stays at 1.
    """
    depths = list(depths)
    if len(depths) < 2:
        raise ValueError("need at least two depths")
    if isinstance(caps, int):
        caps = [caps] * len(depths)
    if len(caps) != len(depths):
        raise ValueError("one cap per depth")
    covers = []
    for n, cap in zip(depths, caps):
        res = cover_count(pred, n, cap, budget, exact=False)
        if res.count == 0:
            raise ValueError(f"no accepted words at depth {n} under cap {cap}")
        covers.append(res)
    return fit_slope(covers)


def cover_point(res: CoverResult) -> tuple[float, float]:
    """(log(1/mesh), log((mass + remainder)/mesh)) for one cover."""
    return -_log(res.mesh), _log(res.mass + res.remainder) - _log(res.mesh)


def fit_slope(covers: Sequence[CoverResult]) -> BoxDimEstimate:
    covers = list(covers)
    if len(covers) < 2:
        raise ValueError("need at least two covers to fit a slope")
    xs, ys = zip(*(cover_point(c) for c in covers))
    if max(xs) - min(xs) == 0:
        slope, intercept = 0.0, ys[0]
    else:
        slope, intercept = statistics.linear_regression(xs, ys)
    residuals = [y - (slope * x + intercept) for x, y in zip(xs, ys)]
    points = [(c.depth, x, y) for c, x, y in zip(covers, xs, ys)]
    return BoxDimEstimate(slope, intercept, points, residuals, covers)
