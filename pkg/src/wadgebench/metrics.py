"""The three ultrametrics on Baire space, evaluated exactly on UP points."""

from __future__ import annotations

from enum import Enum
from fractions import Fraction

from .core import Point


class Metric(Enum):
    D = "D"
    D0 = "D0"
    D1 = "D1"

    @classmethod
    def parse(cls, text):
        try:
            return cls(text.upper())
        except ValueError:
            from .errors import RejectedInput
            raise RejectedInput(f"unknown metric {text!r}; use D, D0 or D1") from None


def pow2(n):
    """Exact 2**n for any integer n."""
    return Fraction(2) ** n


def glue_d1(m):
    """Distance between different first-letter cylinders under D1 (m = max letter)."""
    return 2 - pow2(-(m - 1))


def i_map(value):
    """Monotone map sending D0 distances to D1 distances."""
    value = Fraction(value)
    if not in_range(Metric.D0, value):
        from .errors import InternalError
        raise InternalError(f"{value} is not a D0 distance")
    if value < 1:
        return value
    return glue_d1(int(value))


def distance(metric, x: Point, y: Point):
    n = x.first_difference(y)
    if n is None:
        return Fraction(0)
    if metric is Metric.D or n > 0:
        return pow2(-n)
    m = max(x[0], y[0])
    if metric is Metric.D0:
        return Fraction(m)
    return glue_d1(m)


def d(x, y):
    return distance(Metric.D, x, y)


def d0(x, y):
    return distance(Metric.D0, x, y)


def d1(x, y):
    return distance(Metric.D1, x, y)


def in_range(metric, value):
    """Whether ``value`` is a possible distance under ``metric``."""
    value = Fraction(value)
    if value == 0:
        return True
    if value < 0:
        return False
    if value <= Fraction(1, 2):
        n = value.denominator
        return value.numerator == 1 and n & (n - 1) == 0
    if metric is Metric.D:
        return value == 1
    if metric is Metric.D0:
        return value.denominator == 1 and value >= 1
    if value == 1:
        return True
    gap = 2 - value
    return 0 < gap < 1 and gap.numerator == 1 and gap.denominator & (gap.denominator - 1) == 0


def ultrametric_holds(metric, x, y, z):
    return distance(metric, x, z) <= max(distance(metric, x, y), distance(metric, y, z))


def dagger_holds(x, y):
    """Distances below 1 coincide for all three metrics; otherwise D <= D0."""
    a, b, c = d(x, y), d0(x, y), d1(x, y)
    if x[0] == y[0]:
        return a == b == c
    return a == 1 and b >= 1 and 1 <= c < 2


def ultrametric_check(metric, x, y, z):
    return ultrametric_holds(metric, x, y, z)


def dagger_check(x, y):
    return dagger_holds(x, y)


def d1_is_image_of_d0(x, y):
    return d1(x, y) == i_map(d0(x, y))
