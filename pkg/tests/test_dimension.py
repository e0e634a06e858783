from fractions import Fraction
from itertools import combinations

import pytest

from pierce_lab.dimension import (
    TRUE,
    BudgetExhausted,
    ExplicitPrefix,
    LogRatio,
    Point,
    Ratio,
    Window,
    boxdim_estimate,
    cover_count,
    parse_predicate,
)
from pierce_lab.expansion import interval_length
from pierce_lab.generators import make_exp_generator


def brute(pred, depth, cap):
    """All accepted words of the given length with digits <= cap."""
    return [w for w in combinations(range(1, cap + 1), depth) if pred.accepts(w)]


def test_true_depth_one():
    res = cover_count(TRUE, 1, 10)
    assert res.count == 10
    assert res.remainder == Fraction(1, 11)
    assert res.mass == Fraction(10, 11)
    assert res.mass + res.remainder == 1


@pytest.mark.parametrize("depth", [2, 3])
def test_true_mass_tiles_unit_interval(depth):
    res = cover_count(TRUE, depth, 12)
    assert res.mass + res.remainder == 1


def test_ratio_example():
    assert cover_count(Ratio(2, 2), 2, 20).count == 10


def test_window_example():
    words = brute(Window(2, 4), 2, 15)
    assert len(words) == 11
    assert cover_count(Window(2, 4), 2, 48).count == 11


@pytest.mark.parametrize("spec,depth,cap", [
    ("window:2,4", 3, 63),
    ("ratio:3/2,3", 3, 40),
    ("logratio:1,2", 3, 40),
    ("explicit-prefix:3,8", 3, 30),
    ("true", 3, 25),
])
def test_counts_and_mass_match_brute_force(spec, depth, cap):
    pred = parse_predicate(spec)
    words = brute(pred, depth, cap)
    res = cover_count(pred, depth, cap)
    assert res.count == len(words)
    assert res.mass == sum(interval_length(w) for w in words)
    assert res.mesh == max(interval_length(w) for w in words)


@pytest.mark.parametrize("spec,depth", [("window:2,4", 2), ("window:2,4", 3), ("window:1,3&ratio:1,2", 3)])
def test_remainder_bounds_missing_mass(spec, depth):
    pred = parse_predicate(spec)
    small = cover_count(pred, depth, 10)
    full = cover_count(pred, depth, 200)
    assert full.remainder == 0
    assert full.mass - small.mass <= small.remainder


def test_relaxation_is_monotone():
    strict, loose = Window(2, 4), Window(2, 5)
    both = Window(2, 4) & Ratio(1, 3)
    for depth in (1, 2, 3):
        a = cover_count(both, depth, 60).count
        b = cover_count(strict, depth, 60).count
        c = cover_count(loose, depth, 60).count
        d = cover_count(TRUE, depth, 60).count
        assert a <= b <= c <= d


def test_inexact_mode_brackets_exact():
    exact = cover_count(LogRatio(1, 2), 3, 30)
    approx = cover_count(LogRatio(1, 2), 3, 30, exact=False)
    assert approx.count == exact.count
    assert approx.mass <= exact.mass
    assert approx.remainder >= exact.remainder


def test_budget_exhaustion_keeps_partial():
    with pytest.raises(BudgetExhausted) as info:
        cover_count(TRUE, 4, 40, budget=100)
    assert not info.value.partial.complete
    assert info.value.partial.count > 0


def test_parse_predicate_forms():
    assert parse_predicate("true") is TRUE
    assert parse_predicate("window:2,4").spec == "window:2,4"
    assert parse_predicate("logratio:1,3/2").spec == "logratio:1,3/2"
    assert isinstance(parse_predicate("point:exp"), Point)
    combo = parse_predicate("window:2,4&ratio:1,3")
    assert combo.spec == "window:2,4&ratio:1,3"
    with pytest.raises(ValueError):
        parse_predicate("circle:1")


def test_slope_of_full_interval():
    est = boxdim_estimate(TRUE, range(2, 6), 48)
    assert abs(est.slope - 1) < 0.15


def test_slope_of_single_point():
    est = boxdim_estimate(Point(make_exp_generator()), range(2, 6), 10 ** 6)
    assert abs(est.slope) < 0.1


def test_explicit_prefix_behaves_like_full_interval_below_it():
    est = boxdim_estimate(ExplicitPrefix((3, 8)), range(3, 6), 40)
    assert abs(est.slope - 1) < 0.15


def test_logratio_ordering():
    # beta = 1 (band [1, 2]) against beta = 2 (band [2, 4]); calibrated at cap 256
    one = boxdim_estimate(LogRatio(1, 2), range(2, 5), 256, budget=5_000_000)
    two = boxdim_estimate(LogRatio(2, 4), range(2, 5), 256, budget=5_000_000)
    assert two.slope < one.slope - 0.1


def test_estimate_is_deterministic():
    a = boxdim_estimate(Window(2, 4), range(2, 5), 48)
    b = boxdim_estimate(Window(2, 4), range(2, 5), 48)
    assert a.slope == b.slope and a.residuals == b.residuals
