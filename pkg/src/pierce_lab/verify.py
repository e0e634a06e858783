"""Certified checks of the inequalities behind the exceptional-set construction.

Every check returns a :class:`Report` with a three-valued verdict.  PASS is
only issued when exact rational arithmetic (or disjoint rational enclosures)
settles the inequality; overlapping enclosures at the precision cap give
INDETERMINATE, never PASS.
"""

from __future__ import annotations

import bisect
import enum
import os
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence

from .certify import decimal_floor_root, dyadic_down, dyadic_up, e_bounds, log_bounds, sqrt_bounds
from .expansion import (
    INFINITY,
    NO_DIFFERENCE,
    DigitWord,
    distance_bounds,
    fundamental_interval,
    phi_eval,
    rho,
)
from .generators import (
    RNG_ALGORITHM,
    AdmissibleGenerator,
    DigitGenerator,
    Enclosure,
    enclose,
    fork_generator,
    psi_transform,
    random_generator,
    sample_uniform_prefix,
)

SCHEMA = "pierce-lab/report/1"


class Verdict(str, enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    INDETERMINATE = "INDETERMINATE"


@dataclass
class Report:
    claim: str
    inputs: dict
    values: dict
    verdict: Verdict
    depth: int | None = None
    notes: str = ""

    def to_dict(self) -> dict:
        return {
            "claim": self.claim,
            "inputs": jsonable(self.inputs),
            "values": jsonable(self.values),
            "verdict": self.verdict.value,
            "depth": self.depth,
            "notes": self.notes,
        }


@dataclass(frozen=True)
class Rounded:
    """A decimal string together with the direction it was rounded."""

    value: Decimal
    rounding: str  # "floor", "ceiling" or "exact"


def jsonable(obj: Any) -> Any:
    """Convert results to JSON-safe values; rationals become 'p/q' strings."""
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return "inf" if obj == INFINITY else obj
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, Rounded):
        return {"value": str(obj.value), "rounding": obj.rounding}
    if isinstance(obj, Decimal):
        return str(obj)
    if isinstance(obj, Enclosure):
        return {"lo": jsonable(obj.lo), "hi": jsonable(obj.hi), "width": jsonable(obj.width)}
    if isinstance(obj, DigitWord):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    return str(obj)


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("PIERCE_LAB_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn: Callable, items: Sequence) -> list:
    """Map in input order; uses PIERCE_LAB_THREADS worker threads when > 1."""
    n = worker_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# -- LLN statistic --------------------------------------------------------------

@dataclass(frozen=True)
class TracePoint:
    n: int
    digit: int | float
    lower: Decimal
    upper: Decimal

    def to_dict(self) -> dict:
        if self.digit == INFINITY:
            return {"n": self.n, "digit": "inf", "root": "inf"}
        exact = self.lower == self.upper
        return {
            "n": self.n,
            "digit": self.digit,
            "lower": jsonable(Rounded(self.lower, "exact" if exact else "floor")),
            "upper": jsonable(Rounded(self.upper, "exact" if exact else "ceiling")),
        }


def nth_root_decimal(value: int, n: int, places: int = 12) -> tuple[Decimal, Decimal]:
    """Decimal floor and ceiling of value**(1/n) at ``places`` decimals."""
    r, exact = decimal_floor_root(value, n, places)
    lower = Decimal(r).scaleb(-places)
    upper = lower if exact else Decimal(r + 1).scaleb(-places)
    return lower, upper


def _digit_at(source, n: int):
    if isinstance(source, DigitWord):
        d = source.digit(n)
        if d is None:
            raise ValueError(f"open prefix has only {len(source)} digits, trace needs {n}")
        return d
    return source.digit(n)


def lln_trace(source, depth: int, places: int = 12) -> list[TracePoint]:
    """(d_n)^(1/n) for n = 1..depth with outward-rounded decimals.

    A terminated word yields INFINITY entries past its last digit.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    inf = Decimal("Infinity")
    out = []
    for n in range(1, depth + 1):
        d = _digit_at(source, n)
        if d == INFINITY:
            out.append(TracePoint(n, INFINITY, inf, inf))
            continue
        lower, upper = nth_root_decimal(d, n, places)
        out.append(TracePoint(n, d, lower, upper))
    return out


def exceptional_trace(gen: DigitGenerator, M: int, depth: int, places: int = 12) -> list[TracePoint]:
    """LLN trace of the stretched point; it drifts to e**(M/(M+1)) instead of e."""
    return lln_trace(psi_transform(gen, M), depth, places)


def recover_exponents(gen: DigitGenerator, M: int, depth: int) -> list[tuple[int, Fraction]]:
    """For each output index n, locate the input index k with d_n - j == sigma_k.

    Returns (n, k/n).  The input index is found by searching the input digits,
    not from the index formula, so agreement with (jM+l)/(j(M+1)+l) is a
    genuine cross-check of the stretched digits.
    """
    out_digits = psi_transform(gen, M).prefix(depth)
    inp = gen.prefix(depth)
    result = []
    for n, d in enumerate(out_digits, start=1):
        j = n // (M + 1)
        k = bisect.bisect_left(inp, d - j) + 1
        if k > len(inp) or inp[k - 1] != d - j:
            raise AssertionError(f"digit {n} of the stretched sequence is not an input digit plus {j}")
        result.append((n, Fraction(k, n)))
    return result


def check_trace_limit(trace: Sequence[TracePoint], exponent: Fraction = Fraction(1),
                      tol: Fraction = Fraction(1, 100), claim: str = "lln",
                      inputs: dict | None = None) -> Report:
    """Certify that the last trace value is within ``tol`` (relative) of e**exponent.

    With t = e**(p/q) the test v >= (1 - tol) t is (v/(1 - tol))**q >= e**p,
    so only rational powers and certified bounds on e are needed.
    """
    exponent, tol = Fraction(exponent), Fraction(tol)
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    last = trace[-1]
    inputs = dict(inputs or {})
    inputs.update({"exponent": exponent, "tol": tol})
    values = {"n": last.n, "last": last, "target": f"e^({exponent.numerator}/{exponent.denominator})"}
    if last.digit == INFINITY:
        return Report(claim, inputs, values, Verdict.FAIL, last.n, "statistic is infinite: expansion terminated")
    p, q = exponent.numerator, exponent.denominator
    e_lo, e_hi = e_bounds(128)
    t_lo, t_hi = e_lo ** p, e_hi ** p
    v_lo, v_hi = Fraction(last.lower), Fraction(last.upper)
    if (v_lo / (1 - tol)) ** q >= t_hi and (v_hi / (1 + tol)) ** q <= t_lo:
        verdict = Verdict.PASS
    elif (v_hi / (1 - tol)) ** q < t_lo or (v_lo / (1 + tol)) ** q > t_hi:
        verdict = Verdict.FAIL
    else:
        verdict = Verdict.INDETERMINATE
    with localcontext() as ctx:
        ctx.prec = 20
        values["target_approx"] = (Decimal(p) / Decimal(q)).exp()
    return Report(claim, inputs, values, verdict, last.n)


# -- distance sandwich ----------------------------------------------------------

def _first_difference(a, b, depth: int):
    n = rho(a.word(depth), b.word(depth))
    if n is NO_DIFFERENCE:
        return None
    return n


def check_distance_sandwich(a: DigitGenerator, b: DigitGenerator, depth: int = 256,
                            precision_bits: int = 256, max_bits: int | None = None) -> Report:
    """Certify lower <= |phi(a) - phi(b)| <= upper for the digit bounds."""
    n = _first_difference(a, b, depth)
    if n is None:
        raise ValueError(f"no difference index within the first {depth} digits")
    lower, upper = distance_bounds(a.word(n + 1), b.word(n + 1))
    max_bits = max_bits or 64 * precision_bits
    inputs = {"a": a.spec, "b": b.spec, "depth": depth, "precision_bits": precision_bits}
    bits = precision_bits
    while True:
        ex, ey = enclose(a, bits), enclose(b, bits)
        dlo, dhi = ex.distance_bounds(ey)
        if dlo >= lower and dhi <= upper:
            verdict = Verdict.PASS
        elif dhi < lower or dlo > upper:
            verdict = Verdict.FAIL
        elif bits * 2 <= max_bits:
            bits *= 2
            continue
        else:
            verdict = Verdict.INDETERMINATE
        values = {
            "rho": n, "lower": lower, "upper": upper,
            "distance_lower": dlo, "distance_upper": dhi,
            "x": ex, "y": ey, "bits_used": bits,
        }
        return Report("distance_sandwich", inputs, values, verdict, max(ex.depth, ey.depth))


def sandwich_sweep(pairs: int, seed: int, precision_bits: int = 256, max_shared: int = 12,
                   max_bits: int | None = None) -> list[Report]:
    """Seeded random pairs sharing 0..max_shared-1 leading digits."""
    def one(i):
        a = random_generator(seed, 2 * i)
        b = fork_generator(a, i % max_shared, seed, 2 * i + 1)
        r = check_distance_sandwich(a, b, depth=max_shared + 2, precision_bits=precision_bits,
                                    max_bits=max_bits)
        r.inputs["pair"] = i
        return r

    return parallel_map(one, range(pairs))


# -- constants and the Hoelder certificate --------------------------------------

@dataclass(frozen=True)
class Constants:
    M: int
    epsilon: Fraction
    c_log4: int  # c = 4**c_log4

    @property
    def c(self) -> int:
        return 1 << (2 * self.c_log4)

    @property
    def holder_exponent(self) -> Fraction:
        return 1 + 3 * self.epsilon


def constants(M: int) -> Constants:
    """epsilon = 12/M and c = 4**(6M(M+1))."""
    if M < 2:
        raise ValueError("M must be >= 2")
    return Constants(M, Fraction(12, M), 6 * M * (M + 1))


def check_constants(M: int, bits: int = 128) -> Report:
    """Certify epsilon > 1/(M log M - 1) and c > 2e 4^(M(M+1))."""
    k = constants(M)
    log_lo, log_hi = log_bounds(Fraction(M), bits)
    e_lo, e_hi = e_bounds(bits)
    denom_lo = M * log_lo - 1
    denom_hi = M * log_hi - 1
    if denom_lo > 0 and k.epsilon * denom_lo > 1:
        eps_ok = Verdict.PASS
    elif denom_hi > 0 and k.epsilon * denom_hi <= 1:
        eps_ok = Verdict.FAIL
    else:
        eps_ok = Verdict.INDETERMINATE
    rhs_hi = 2 * e_hi * 4 ** (M * (M + 1))
    rhs_lo = 2 * e_lo * 4 ** (M * (M + 1))
    if k.c > rhs_hi:
        c_ok = Verdict.PASS
    elif k.c <= rhs_lo:
        c_ok = Verdict.FAIL
    else:
        c_ok = Verdict.INDETERMINATE
    verdict = _combine([eps_ok, c_ok])
    values = {
        "epsilon": k.epsilon,
        "c": f"4^{k.c_log4}",
        "holder_exponent": k.holder_exponent,
        "eps_threshold_upper": Enclosure(1 / denom_hi, 1 / denom_lo, 1 / denom_lo - 1 / denom_hi)
        if denom_lo > 0 else None,
        "epsilon_check": eps_ok,
        "c_check": c_ok,
        "c_reduced": f"4^{5 * M * (M + 1)} > 2e",
    }
    return Report("constants", {"M": M}, values, verdict)


def _combine(verdicts: Iterable[Verdict]) -> Verdict:
    vs = list(verdicts)
    if Verdict.FAIL in vs:
        return Verdict.FAIL
    if Verdict.INDETERMINATE in vs:
        return Verdict.INDETERMINATE
    return Verdict.PASS


def dimension_lower_bound(M: int) -> Fraction:
    """1/(1 + 3 epsilon) = M/(M + 36)."""
    if M < 2:
        raise ValueError("M must be >= 2")
    return 1 / constants(M).holder_exponent


def _holder_holds(c: int, gap_lower: Fraction, dist_upper: Fraction, M: int, bits: int) -> bool:
    # c * gap >= dist**((M+36)/M)  <=>  (c gap)^M >= dist^(M+36); round the sides apart
    if gap_lower <= 0:
        return False
    lhs = dyadic_down(c * gap_lower, bits)
    rhs = dyadic_up(dist_upper, bits)
    return lhs ** M >= rhs ** (M + 36)


def _holder_violated(c: int, gap_upper: Fraction, dist_lower: Fraction, M: int, bits: int) -> bool:
    if dist_lower <= 0:
        return False
    lhs = dyadic_up(c * gap_upper, bits)
    rhs = dyadic_down(dist_lower, bits)
    return lhs ** M < rhs ** (M + 36)


def check_holder(a: AdmissibleGenerator, b: AdmissibleGenerator, M: int,
                 precision_bits: int = 256, depth: int = 512,
                 max_bits: int | None = None) -> Report:
    """Certify |g(x) - g(y)| >= c^-1 |x - y|^(1 + 36/M) for one pair."""
    k = constants(M)
    inputs = {"a": a.spec, "b": b.spec, "M": M, "precision_bits": precision_bits}
    if a is b:
        return Report("holder", inputs, {"rho": None}, Verdict.PASS, 0, "x = y: equality branch")
    for g in (a, b):
        if not isinstance(g, AdmissibleGenerator):
            raise TypeError(f"{g.spec} is not an admissible generator")
    n = _first_difference(a, b, depth)
    if n is None:
        return Report("holder", inputs, {"rho": None}, Verdict.INDETERMINATE, depth,
                      f"generators agree on the first {depth} digits")
    pa, pb = psi_transform(a, M), psi_transform(b, M)
    r = _first_difference(pa, pb, depth + depth // M + 2)
    max_bits = max_bits or 256 * precision_bits
    bits = precision_bits
    while True:
        ex, ey = enclose(a, bits), enclose(b, bits)
        gx, gy = enclose(pa, bits), enclose(pb, bits)
        d_lo, d_hi = ex.distance_bounds(ey)
        g_lo, g_hi = gx.distance_bounds(gy)
        if _holder_holds(k.c, g_lo, d_hi, M, bits):
            verdict = Verdict.PASS
        elif _holder_violated(k.c, g_hi, d_lo, M, bits):
            verdict = Verdict.FAIL
        elif bits * 2 <= max_bits:
            bits *= 2
            continue
        else:
            verdict = Verdict.INDETERMINATE
        values = {
            "rho": n,
            "rho_image": r,
            "case": "I" if n <= 2 * M else "II",
            "epsilon": k.epsilon,
            "c": f"4^{k.c_log4}",
            "holder_exponent": k.holder_exponent,
            "image_distance_lower": dyadic_down(g_lo, 64),
            "distance_upper": dyadic_up(d_hi, 64),
            "log2_image_distance_lower": _log2_str(g_lo),
            "log2_rhs_upper": _log2_str(d_hi, k.holder_exponent, -2 * k.c_log4),
            "bits_used": bits,
        }
        return Report("holder", inputs, values, verdict, max(gx.depth, gy.depth))


def _log2_str(q: Fraction, power: Fraction = Fraction(1), shift: int = 0) -> str:
    """Approximate log2(q**power * 2**shift), for human reading only."""
    if q <= 0:
        return "-inf"
    approx = (q.numerator.bit_length() - q.denominator.bit_length()) * power + shift
    return f"~{float(approx):.1f}"


def holder_sweep(M: int, pairs: int, seed: int, precision_bits: int = 256,
                 max_shared: int = 60) -> list[Report]:
    """Admissible pairs sharing 1..max_shared leading digits (cycling)."""
    def one(i):
        a = random_generator(seed, 2 * i, admissible=True)
        b = fork_generator(a, 1 + i % max_shared, seed, 2 * i + 1)
        r = check_holder(a, b, M, precision_bits=precision_bits)
        r.inputs["pair"] = i
        return r

    return parallel_map(one, range(pairs))


# -- Monte-Carlo LLN ------------------------------------------------------------

def mc_lln_experiment(samples: int, bits: int, depth: int, seed: int, places: int = 12,
                      band: Fraction = Fraction(15, 100)) -> dict:
    """Distribution of (d_depth)^(1/depth) over uniformly sampled dyadic points."""
    if samples < 1:
        raise ValueError("samples must be >= 1")

    def one(i):
        w = sample_uniform_prefix(bits, depth, seed, stream=i)
        lower, upper = nth_root_decimal(w.digits[-1], depth, places)
        return lower, upper

    values = parallel_map(one, range(samples))
    lowers = [lo for lo, _ in values]
    e_lo, e_hi = e_bounds(64)
    inside = sum(
        1 for lo, hi in values
        if Fraction(lo) >= (1 - band) * e_hi and Fraction(hi) <= (1 + band) * e_lo
    )
    with localcontext() as ctx:
        ctx.prec = 40
        ordered = sorted(lowers)
        median = statistics.median(ordered)
        if samples >= 2:
            q1, _, q3 = statistics.quantiles(ordered, n=4, method="inclusive")
        else:
            q1 = q3 = ordered[0]
    return {
        "samples": samples,
        "bits": bits,
        "depth": depth,
        "seed": seed,
        "rng": RNG_ALGORITHM,
        "median": Rounded(median, "floor"),
        "q1": Rounded(q1, "floor"),
        "q3": Rounded(q3, "floor"),
        "iqr": q3 - q1,
        "fraction_within_band": Fraction(inside, samples),
        "band": band,
        "values": [Rounded(v, "floor") for v in lowers],
    }


# -- Shallit statistic ------------------------------------------------------------

def leap_sum(digits: Sequence[int], N: int) -> int:
    """sum_k (-1)^(k+1) floor(N / (d_1...d_k)) over the terms that are non-zero."""
    total, prod, sign = 0, 1, 1
    for d in digits:
        prod *= d
        if prod > N:
            break
        total += sign * (N // prod)
        sign = -sign
    return total


def shallit_statistic(source, N: int, bits: int = 96) -> Enclosure:
    """Enclosure of s_N = (N x - leap_sum) / sqrt(log N).

    ``source`` is a terminated word (x exact), an open prefix whose digit
    product exceeds N (x bounded by the fundamental interval), or a
    generator (deepened until the product exceeds N).
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    if isinstance(source, DigitWord):
        word = source
    else:
        n, prod = 0, 1
        while prod <= N:
            n += 1
            prod *= source.digit(n)
        word = source.word(n + 1)
    prod = 1
    for d in word.digits:
        prod *= d
    if not word.is_terminated and prod <= N:
        raise ValueError("prefix too shallow: digit product never exceeds N")
    s = leap_sum(word.digits, N)
    if word.is_terminated:
        x_lo = x_hi = phi_eval(word)
    else:
        iv = fundamental_interval(DigitWord.terminated(word.digits))
        x_lo, x_hi = iv.lo, iv.hi
    a_lo, a_hi = N * x_lo - s, N * x_hi - s
    log_lo, log_hi = log_bounds(Fraction(N), bits)
    r_lo, r_hi = sqrt_bounds(log_lo, bits)[0], sqrt_bounds(log_hi, bits)[1]
    lo = a_lo / r_hi if a_lo >= 0 else a_lo / r_lo
    hi = a_hi / r_lo if a_hi >= 0 else a_hi / r_hi
    return Enclosure(lo, hi, hi - lo, len(word))


def to_decimal(q: Fraction, places: int = 12, rounding: str = "floor") -> Decimal:
    scaled = q * 10 ** places
    n = scaled.numerator // scaled.denominator
    if rounding == "ceiling" and n * scaled.denominator != scaled.numerator:
        n += 1
    return Decimal(n).scaleb(-places)
