from fractions import Fraction
from math import lcm
from types import SimpleNamespace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from wadgebench.core import (Point, format_point, letter_at, mk_up_point, parse_point, prepend,
                             stratified_points, tail, vec)
from wadgebench.errors import RejectedInput

from conftest import expand, periods, points, words


def test_canonical_forms():
    assert mk_up_point((), (0,)) == vec(0)
    p = mk_up_point((1, 0), (0,))
    assert (p.prefix, p.period) == ((1,), (0,))
    q = mk_up_point((), (2, 2))
    assert (q.prefix, q.period) == ((), (2,))


def test_rotation_absorbed():
    p = mk_up_point((5, 1, 2), (1, 2))
    assert (p.prefix, p.period) == ((5,), (1, 2))


def test_empty_period_rejected():
    with pytest.raises(RejectedInput):
        mk_up_point((1,), ())


def test_letter_at():
    x = mk_up_point((3,), (1, 2))
    assert [letter_at(x, n) for n in (0, 2, 4)] == [3, 2, 2]


def test_prepend_and_tail_examples():
    five = prepend((5,), vec(0))
    assert (five.prefix, five.period) == ((5,), (0,))
    assert tail(five, 1) == vec(0)
    assert tail(mk_up_point((1,), (1,)), 3) == vec(1)


def test_point_literals():
    assert parse_point("3 1 2 ~ 0") == Point((3, 1, 2), (0,))
    assert parse_point("~ 0") == vec(0)
    assert format_point(Point((3, 1, 2), (0,))) == "3 1 2 ~ 0"
    with pytest.raises(RejectedInput):
        parse_point("1 2")


@given(words, periods)
def test_canonicalization_idempotent(pre, per):
    p = Point(pre, per)
    assert Point(p.prefix, p.period) == p
    assert expand(p, 40) == expand(SimpleNamespace(prefix=pre, period=per), 40)


@given(points, points)
def test_equality_matches_letters_up_to_horizon(x, y):
    bound = len(x.prefix) + len(y.prefix) + lcm(len(x.period), len(y.period))
    assert (x == y) == (expand(x, bound + 1) == expand(y, bound + 1))


@given(words, points)
def test_tail_left_inverse_of_prepend(s, x):
    assert tail(prepend(s, x), len(s)) == x


@given(points, st.integers(min_value=0, max_value=12))
def test_tail_drops_letters(x, k):
    assert expand(tail(x, k), 20) == expand(x, k + 20)[k:]


@given(points)
def test_literal_round_trip(x):
    assert parse_point(format_point(x)) == x


def test_exact_rationals():
    a, b = Fraction(3, 7), Fraction(-5, 11)
    assert (a + b) - b == a
    assert a * (1 / a) == 1


def test_stratified_sample_deterministic():
    first = stratified_points(50, seed=7)
    assert first == stratified_points(50, seed=7)
    assert {len(p.prefix) for p in first} <= set(range(7))
