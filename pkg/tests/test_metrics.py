import random
from fractions import Fraction

import pytest
from hypothesis import given

from wadgebench.core import Point, random_point, vec
from wadgebench.errors import InternalError
from wadgebench.metrics import (Metric, d, d0, d1, d1_is_image_of_d0, dagger_check, distance,
                                i_map, in_range, ultrametric_check)

from conftest import expand, points


def oracle(metric, x, y):
    """Distances straight from the definitions on expanded letter lists."""
    a, b = expand(x, 64), expand(y, 64)
    n = next((i for i in range(64) if a[i] != b[i]), None)
    if n is None:
        return Fraction(0)
    if metric is Metric.D or n > 0:
        return Fraction(1, 2 ** n)
    m = max(a[0], b[0])
    if metric is Metric.D0:
        return Fraction(m)
    return 2 - Fraction(2, 2 ** m)


def p(*prefix):
    return Point(prefix, (0,))


def test_distance_examples():
    assert d(p(7, 0), p(7, 1)) == Fraction(1, 2)
    assert d0(p(3), p(5)) == 5
    assert d1(p(3), p(5)) == Fraction(31, 16)
    assert d1(p(0), p(1)) == 1


def test_ultrametric_examples():
    x, y, z = p(0), p(1), p(2)
    assert ultrametric_check(Metric.D0, x, x, z)
    assert ultrametric_check(Metric.D0, x, y, z)
    assert d0(x, y) == 1 and d0(x, z) == d0(y, z) == 2


def test_dagger_examples():
    x, y = Point((4, 1, 1, 1), (0,)), Point((4, 1, 1, 2), (0,))
    assert d(x, y) == d0(x, y) == d1(x, y) == Fraction(1, 8)
    assert dagger_check(x, y)
    a, b = p(0), p(9)
    assert (d(a, b), d0(a, b), d1(a, b)) == (1, 9, 2 - Fraction(1, 256))
    assert dagger_check(a, b)
    assert dagger_check(a, a)


def test_i_map_examples():
    assert i_map(Fraction(1, 4)) == Fraction(1, 4)
    assert i_map(5) == 2 - Fraction(1, 16)
    assert i_map(0) == 0
    with pytest.raises(InternalError):
        i_map(Fraction(3, 4))


@given(points, points)
def test_distance_matches_definition(x, y):
    for m in Metric:
        assert distance(m, x, y) == oracle(m, x, y)


@given(points, points)
def test_zero_iff_equal(x, y):
    for m in Metric:
        assert (distance(m, x, y) == 0) == (x == y)


def test_properties_on_random_triples():
    rng = random.Random(11)
    for _ in range(2000):
        x, y, z = (random_point(rng, letters=4) for _ in range(3))
        for m in Metric:
            assert ultrametric_check(m, x, y, z)
            assert in_range(m, distance(m, x, y))
        assert dagger_check(x, y)
        assert d(x, y) <= d0(x, y)
        assert d1_is_image_of_d0(x, y)


def test_range_rejects_foreign_values():
    assert not in_range(Metric.D, Fraction(3, 4))
    assert not in_range(Metric.D0, Fraction(3, 2))
    assert in_range(Metric.D1, Fraction(7, 4))
    assert not in_range(Metric.D1, Fraction(5, 2))


def test_metric_parse():
    assert Metric.parse("d0") is Metric.D0
    with pytest.raises(ValueError):
        Metric.parse("D2")


def test_first_letter_glue():
    assert d1(vec(0), vec(1)) == 1
    assert d0(vec(0), vec(1)) == 1
