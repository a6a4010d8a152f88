from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import iv

from runnerlab.core import (
    BoundedReal,
    DuplicateSpeed,
    EmptySet,
    InvalidSpeedSet,
    NonPositiveSpeed,
    SpeedSet,
    dilate,
    iv_from_fraction,
    normalize,
    precision,
    torus_norm,
    validate_speed_set,
)

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=200)


@pytest.mark.parametrize(
    "x, expected",
    [(Fraction(3, 4), Fraction(1, 4)), (Fraction(7, 2), Fraction(1, 2)), (Fraction(13, 5), Fraction(2, 5))],
)
def test_torus_norm_examples(x, expected):
    assert torus_norm(x) == expected


def test_validate_sorts():
    assert validate_speed_set([3, 1, 2]) == SpeedSet((1, 2, 3))


@pytest.mark.parametrize(
    "raw, error",
    [([1, 1], DuplicateSpeed), ([0, 2], NonPositiveSpeed), ([-3], NonPositiveSpeed), ([], EmptySet), ([1.5], InvalidSpeedSet)],
)
def test_validate_rejects(raw, error):
    with pytest.raises(error):
        validate_speed_set(raw)


def test_speed_set_must_be_sorted():
    with pytest.raises(InvalidSpeedSet):
        SpeedSet((2, 1))


def test_normalize_and_dilate():
    V, g = normalize(SpeedSet((6, 10, 14)))
    assert (V, g) == (SpeedSet((3, 5, 7)), 2)
    assert dilate(V, 2) == SpeedSet((6, 10, 14))
    with pytest.raises(ValueError):
        dilate(V, 0)


@given(rationals)
def test_torus_norm_symmetries(x):
    assert torus_norm(x) == torus_norm(-x) == torus_norm(x + 1)
    assert 0 <= torus_norm(x) <= Fraction(1, 2)


@given(rationals)
def test_torus_norm_half_iff_odd_double(x):
    twice = 2 * x
    odd = twice.denominator == 1 and twice.numerator % 2 == 1
    assert (torus_norm(x) == Fraction(1, 2)) == odd


intervals = st.tuples(rationals, rationals).map(lambda t: BoundedReal(min(t), max(t)))


def _sample(b: BoundedReal, u: Fraction) -> Fraction:
    return b.lo + u * (b.hi - b.lo)


@given(intervals, intervals, st.fractions(0, 1), st.fractions(0, 1))
def test_bounded_real_arithmetic_is_conservative(a, b, u, w):
    x, y = _sample(a, u), _sample(b, w)
    assert (a + b).contains(x + y)
    assert (a - b).contains(x - y)
    assert (a * b).contains(x * y)
    if not b.lo <= 0 <= b.hi:
        assert (a / b).contains(x / y)


@given(rationals)
def test_iv_from_fraction_encloses(q):
    with precision(64):
        b = BoundedReal.from_iv(iv_from_fraction(q))
    assert b.contains(q)
    assert b.radius <= abs(q) / 2**60 + Fraction(1, 2**200)


def test_bounded_real_transcendental_enclosure():
    with precision(128):
        pi = BoundedReal.from_iv(iv.pi)
    assert Fraction(314159265358979323846, 10**20) < pi.lo <= pi.hi < Fraction(314159265358979323847, 10**20)
    assert 0 < pi.radius < Fraction(1, 10**35)


def test_compare():
    b = BoundedReal(Fraction(1, 3), Fraction(1, 2))
    assert b.compare(1) == -1
    assert b.compare(0) == 1
    assert b.compare(Fraction(2, 5)) is None
    assert BoundedReal.exact(1).compare(1) == 0


def test_empty_interval_rejected():
    with pytest.raises(ValueError):
        BoundedReal(1, 0)
