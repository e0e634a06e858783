from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pierce_lab.expansion import (
    INFINITY,
    NO_DIFFERENCE,
    DigitWord,
    Tail,
    as_rational01,
    digit_expand,
    distance_bounds,
    expand_trace,
    fundamental_interval,
    hat,
    interval_length,
    is_realizable,
    phi_eval,
    phi_partial,
    pierce_step,
    rho,
    truncate,
)

W = DigitWord.terminated


# frozen oracle values, worked by hand from the digit map
def test_seven_ninths():
    assert digit_expand(Fraction(7, 9)) == W((1, 4, 9))
    assert str(digit_expand(Fraction(7, 9))) == "1,4,9,inf"


def test_trace_of_seven_ninths():
    rows = expand_trace(Fraction(7, 9))
    assert [(k, d) for k, d, _ in rows] == [(1, 1), (2, 4), (3, 9), (4, INFINITY)]
    assert [r for _, _, r in rows] == [Fraction(2, 9), Fraction(1, 9), 0, 0]


def test_small_values():
    assert digit_expand(0) == W(())
    assert str(digit_expand(0)) == "inf"
    assert digit_expand(1) == W((1,))
    assert digit_expand(Fraction(1, 2)) == W((2,))
    assert digit_expand(Fraction(2, 3)) == W((1, 3))
    assert pierce_step(Fraction(2, 3)) == (1, Fraction(1, 3))


def test_phi_values():
    assert phi_eval(W((1, 4, 9))) == Fraction(7, 9)
    assert phi_eval(W(())) == 0
    assert phi_eval(W((1, 2))) == Fraction(1, 2)
    assert phi_eval((2, 3)) == Fraction(1, 3)


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        as_rational01(Fraction(3, 2))
    with pytest.raises(TypeError):
        as_rational01(0.5)
    with pytest.raises(ValueError):
        as_rational01("0.5")
    with pytest.raises(ValueError):
        W((3, 3))
    with pytest.raises(ValueError):
        phi_eval(DigitWord.open((1, 4)))


def test_parse_roundtrip():
    for text in ("1,4,9,inf", "inf", "2,5", ""):
        w = DigitWord.parse(text)
        assert DigitWord.parse(str(w)) == w
    assert DigitWord.parse("") == W(())
    assert DigitWord.parse("1,4").tail is Tail.OPEN_PREFIX


def test_realizability():
    assert not is_realizable(W((1, 2)))
    assert is_realizable(W((1, 3)))
    assert is_realizable(W((5,)))
    # the non-realizable word (1,2) lands on the realizable (2)
    assert digit_expand(phi_eval(W((1, 2)))) == W((2,))


def test_fundamental_interval_examples():
    iv = fundamental_interval(W((1, 4, 9)))
    assert (iv.lo, iv.hi, iv.lo_closed, iv.hi_closed) == (Fraction(31, 40), Fraction(7, 9), False, True)
    iv = fundamental_interval(W((2, 5)))
    assert iv.lo == phi_eval(W((2, 5))) and iv.lo_closed and not iv.hi_closed
    iv = fundamental_interval(W((1, 2)))
    assert not iv.lo_closed and not iv.hi_closed
    assert interval_length((1, 4, 9)) == Fraction(1, 360)


def test_hat_and_truncate():
    assert hat(W((1, 4, 9))) == W((1, 4, 10))
    assert truncate(W((1, 4, 9)), 2) == W((1, 4))
    assert truncate(W((1, 4, 9)), 0) == W(())


def test_rho_and_distance_example():
    a, b = DigitWord.open((1, 3, 7)), DigitWord.open((1, 4, 9))
    assert rho(a, b) == 2
    lower, upper = distance_bounds(a, b)
    assert lower == Fraction(1, 40)
    assert upper == 1
    assert rho(W((1, 4)), W((1, 4))) is NO_DIFFERENCE
    assert rho(W((1, 4)), W((1, 4, 9))) == 3
    assert rho(DigitWord.open((1, 4)), DigitWord.open((1, 4, 9))) is NO_DIFFERENCE


def test_phi_partial_bound():
    val, tail = phi_partial(W((1, 4, 9)), 2)
    assert val == Fraction(3, 4) and tail == Fraction(1, 36)


rationals = st.integers(1, 2000).flatmap(
    lambda q: st.builds(lambda p: Fraction(p, q), st.integers(0, q)))


@settings(max_examples=300, deadline=None)
@given(rationals)
def test_roundtrip(x):
    w = digit_expand(x)
    assert w.is_terminated
    assert phi_eval(w) == x
    assert len(w) <= max(x.numerator, 0) or x == 0


words = st.lists(st.integers(1, 40), min_size=1, max_size=5, unique=True).map(sorted)


@settings(max_examples=300, deadline=None)
@given(words)
def test_realizable_words_roundtrip(ds):
    w = W(ds)
    if is_realizable(w):
        assert digit_expand(phi_eval(w)) == w
    else:
        assert digit_expand(phi_eval(w)) != w


@settings(max_examples=200, deadline=None)
@given(words, st.integers(1, 60))
def test_interval_nesting_and_length(ds, extra):
    w = W(ds)
    iv = fundamental_interval(w)
    assert iv.length == interval_length(ds)
    child = W(ds + [ds[-1] + extra])
    assert fundamental_interval(child).issubset(iv)
    if is_realizable(child):
        assert phi_eval(child) in iv
    if is_realizable(w):
        assert phi_eval(w) in iv
    assert phi_eval(hat(w)) not in iv


@settings(max_examples=200, deadline=None)
@given(rationals.filter(lambda x: x != 0))
def test_membership_of_expanded_points(x):
    w = digit_expand(x)
    for n in range(1, len(w) + 1):
        assert x in fundamental_interval(truncate(w, n))


@settings(max_examples=200, deadline=None)
@given(rationals, rationals)
def test_distance_sandwich_on_rationals(x, y):
    a, b = digit_expand(x), digit_expand(y)
    n = rho(a, b)
    if n is NO_DIFFERENCE:
        assert x == y
        return
    lower, upper = distance_bounds(a, b)
    assert lower <= abs(x - y) <= upper
