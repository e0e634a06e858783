from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pierce_lab.expansion import phi_eval, truncate
from pierce_lab.generators import (
    AdmissibleGenerator,
    DigitGenerator,
    GeneratorError,
    enclose,
    fork_generator,
    g_map,
    make_exp_generator,
    make_explicit_generator,
    make_logratio_generator,
    make_power_generator,
    make_ratio_generator,
    parse_generator,
    phi_enclosure,
    psi_index,
    psi_transform,
    random_generator,
    sample_uniform_prefix,
)


def test_power_examples():
    assert make_power_generator(2718281828, 1000000000).prefix(3) == (3, 8, 21)
    assert make_power_generator(3).prefix(3) == (3, 9, 27)
    g = make_power_generator(3).validate(64)
    assert all((1 << k) < g.digit(k) < (1 << (2 * k)) for k in range(1, 65))


def test_exp_generator():
    assert make_exp_generator().prefix(5) == (3, 8, 21, 55, 149)


def test_ratio_examples():
    assert make_ratio_generator(2, 2).prefix(5) == (2, 4, 8, 16, 32)
    assert make_ratio_generator(1, 5).prefix(4) == (5, 6, 7, 8)
    assert make_ratio_generator(Fraction(3, 2), 2).prefix(6) == (2, 3, 5, 8, 12, 18)


def test_logratio_examples():
    g = make_logratio_generator(2, 2)
    assert g.prefix(4) == (2, 4, 16, 256)
    assert g.digit(6) == 2 ** 32
    assert make_logratio_generator(1, 3).prefix(4) == (3, 4, 5, 6)


def test_explicit_generator():
    g = make_explicit_generator([1, 4, 9])
    assert g.prefix(5) == (1, 4, 9, 18, 36)
    with pytest.raises(GeneratorError):
        make_explicit_generator([3, 2]).prefix(2)


def test_window_violation_is_reported():
    with pytest.raises(GeneratorError):
        AdmissibleGenerator(lambda k, prev: 1 << k, "bad").digit(1)


def test_psi_examples():
    two = make_ratio_generator(2, 2)
    assert psi_transform(two, 2).prefix(7) == (2, 4, 5, 9, 17, 18, 34)
    ident = DigitGenerator(lambda k, prev: k, "identity")
    assert psi_transform(ident, 2).prefix(8) == tuple(range(1, 9))


def test_psi_boundary_columns():
    g = psi_transform(make_exp_generator(), 3)
    for n in range(4, 200, 4):
        assert g.digit(n) == g.digit(n - 1) + 1


@pytest.mark.parametrize("M", [2, 3, 7, 12])
def test_psi_index_bijection(M):
    seen = {psi_index(n, M) for n in range(1, 2000)}
    assert len(seen) == 1999
    assert (0, 0) not in seen
    assert all(0 <= l <= M for _, l in seen)
    for n in range(1, 2000):
        j, l = psi_index(n, M)
        assert n == j * (M + 1) + l


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(2, 12), st.booleans())
def test_psi_increase_and_bound(seed, M, admissible):
    base = random_generator(seed, 0, admissible)
    out = psi_transform(base, M)
    digits = out.prefix(300)
    assert all(a < b for a, b in zip(digits, digits[1:]))
    for n, d in enumerate(digits, start=1):
        j, l = psi_index(n, M)
        s = base.digit(j * M + l)
        assert s <= d <= 2 * s


def test_g_map_on_powers_of_two():
    stretched = psi_transform(make_ratio_generator(2, 2), 2)
    e64 = enclose(stretched, 64)
    assert e64.hi - e64.lo <= Fraction(1, 2 ** 64)
    first = phi_enclosure(stretched, 1)
    assert (first.lo, first.hi) == (Fraction(3, 8), Fraction(1, 2))
    assert first.contains(e64)
    assert abs(e64.lo - Fraction(1, 2)) <= Fraction(1, 8)
    e128 = enclose(stretched, 128)
    assert e64.contains(e128)


def test_g_map_requires_admissible():
    with pytest.raises(TypeError):
        g_map(make_ratio_generator(2, 2), 2)
    enc = g_map(make_exp_generator(), 4, 64)
    deeper = enclose(psi_transform(make_exp_generator(), 4), 256)
    assert enc.contains(deeper)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 40))
def test_enclosure_contains_deeper_truncations(seed, n):
    g = random_generator(seed, 1)
    enc = enclose(g, 96)
    depth = enc.depth + 2
    for m in (depth, depth + 5, depth + 30):
        assert phi_eval(truncate(g, m)) in enc
    # every later truncation stays within the depth-n truncation bound
    box = phi_enclosure(g, n)
    assert phi_eval(truncate(g, n + 25)) in box


def test_random_generators_are_replayable():
    a = random_generator(42, 3)
    b = parse_generator(a.spec)
    assert a.prefix(60) == b.prefix(60)
    f = fork_generator(a, 7, 42, 9)
    g = parse_generator(f.spec)
    assert f.prefix(40) == g.prefix(40)
    assert f.prefix(7) == a.prefix(7) and f.digit(8) != a.digit(8)


def test_admissible_random_window():
    g = random_generator(5, 0, admissible=True).validate(120)
    assert isinstance(g, AdmissibleGenerator)
    assert all((1 << k) < g.digit(k) < (1 << (2 * k)) for k in range(1, 121))


def test_parse_specs():
    assert parse_generator("exp").prefix(3) == (3, 8, 21)
    assert parse_generator("pow:2718281828/1000000000").prefix(3) == (3, 8, 21)
    assert parse_generator("ratio:3/2:2").prefix(4) == (2, 3, 5, 8)
    assert parse_generator("logratio:2").prefix(4) == (2, 4, 16, 256)
    assert parse_generator("explicit:1,3,7,...").prefix(3) == (1, 3, 7)
    assert parse_generator("psi:2:ratio:2:2").prefix(7) == (2, 4, 5, 9, 17, 18, 34)
    with pytest.raises(ValueError):
        parse_generator("nope:1")


def test_uniform_prefix():
    w = sample_uniform_prefix(4096, 30, seed=11)
    assert len(w) == 30 and not w.is_terminated
    assert all(a < b for a, b in zip(w.digits, w.digits[1:]))
    assert sample_uniform_prefix(4096, 30, seed=11) == w
    assert sample_uniform_prefix(4096, 30, seed=12) != w
