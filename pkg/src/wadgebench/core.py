"""Ultimately periodic points of Baire space.

A point is stored as ``prefix`` followed by ``period`` repeated forever.
The constructor canonicalises: the period is made primitive and the prefix
is shortened as far as possible by rotating the period, so two points are
equal as sequences exactly when their stored tuples are equal.
"""

from __future__ import annotations

import random
from fractions import Fraction
from math import lcm

from .errors import RejectedInput

Rat = Fraction
Word = tuple


def _check_letters(letters, what):
    out = []
    for a in letters:
        if isinstance(a, bool) or not isinstance(a, int):
            raise RejectedInput(f"{what} letters must be natural numbers, got {a!r}")
        if a < 0:
            raise RejectedInput(f"{what} letters must be nonnegative, got {a}")
        out.append(a)
    return tuple(out)


def _primitive_root(period):
    n = len(period)
    for p in range(1, n + 1):
        if n % p == 0 and period[:p] * (n // p) == period:
            return period[:p]
    return period


class Point:
    """An ultimately periodic sequence of natural numbers."""

    __slots__ = ("prefix", "period", "_hash")

    def __init__(self, prefix=(), period=(0,)):
        prefix = _check_letters(prefix, "prefix")
        period = _check_letters(period, "period")
        if not period:
            raise RejectedInput("period must be nonempty")
        period = _primitive_root(period)
        while prefix and prefix[-1] == period[-1]:
            prefix = prefix[:-1]
            period = (period[-1],) + period[:-1]
        self.prefix = prefix
        self.period = period
        self._hash = hash((prefix, period))

    def __getitem__(self, n):
        if n < 0:
            raise IndexError(n)
        k = len(self.prefix)
        if n < k:
            return self.prefix[n]
        return self.period[(n - k) % len(self.period)]

    def __eq__(self, other):
        return isinstance(other, Point) and self.prefix == other.prefix and self.period == other.period

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Point({format_point(self)!r})"

    def __str__(self):
        return format_point(self)

    @property
    def horizon(self):
        """Length after which the point is a pure repetition of its period."""
        return len(self.prefix) + len(self.period)

    def take(self, n):
        return tuple(self[i] for i in range(n))

    def prepend(self, word):
        return Point(tuple(word) + self.prefix, self.period)

    def tail(self, k):
        if k < 0:
            raise RejectedInput("tail offset must be nonnegative")
        if k <= len(self.prefix):
            return Point(self.prefix[k:], self.period)
        shift = (k - len(self.prefix)) % len(self.period)
        return Point((), self.period[shift:] + self.period[:shift])

    def first_difference(self, other):
        """Least index where the two points differ, or None if equal."""
        if self == other:
            return None
        bound = len(self.prefix) + len(other.prefix) + lcm(len(self.period), len(other.period))
        for i in range(bound):
            if self[i] != other[i]:
                return i
        return None  # unreachable for canonical points

    def all_equal(self, start, stop, letter=0):
        """True when every letter at positions start..stop-1 equals ``letter``.

        Works for very large ranges by looking at one copy of the period.
        """
        if stop <= start:
            return True
        k = len(self.prefix)
        for i in range(start, min(stop, k)):
            if self.prefix[i] != letter:
                return False
        lo = max(start, k)
        if lo >= stop:
            return True
        p = len(self.period)
        if stop - lo >= p:
            return all(a == letter for a in self.period)
        return all(self[i] == letter for i in range(lo, stop))

    def first_not_equal(self, start, letter=0):
        """Least index >= start whose letter differs from ``letter``; None if none."""
        k = len(self.prefix)
        for i in range(start, k):
            if self.prefix[i] != letter:
                return i
        lo = max(start, k)
        for i in range(lo, lo + len(self.period)):
            if self[i] != letter:
                return i
        return None


def vec(letter):
    """The constant sequence letter, letter, ..."""
    return Point((), (letter,))


def mk_up_point(prefix, period):
    return Point(prefix, period)


def letter_at(x, n):
    return x[n]


def prepend(word, x):
    return x.prepend(word)


def tail(x, k):
    return x.tail(k)


def format_word(word):
    return " ".join(str(a) for a in word)


def format_point(x):
    pre = format_word(x.prefix)
    return f"{pre} ~ {format_word(x.period)}" if pre else f"~ {format_word(x.period)}"


def parse_point(text):
    """Parse ``"3 1 2 ~ 0"``; a missing ``~`` is rejected."""
    if "~" not in text:
        raise RejectedInput(f"point needs '~' between prefix and period: {text!r}")
    left, right = text.split("~", 1)
    try:
        pre = tuple(int(t) for t in left.split())
        per = tuple(int(t) for t in right.split())
    except ValueError as exc:
        raise RejectedInput(f"bad point {text!r}: {exc}") from None
    return Point(pre, per)


DEFAULT_SEED = 0x5EED


def random_point(rng, letters=5, max_prefix=6, max_period=3, zero_bias=0.0):
    def letter():
        if zero_bias and rng.random() < zero_bias:
            return 0
        return rng.randrange(letters)

    pre = tuple(letter() for _ in range(rng.randint(0, max_prefix)))
    per = tuple(letter() for _ in range(rng.randint(1, max_period)))
    return Point(pre, per)


def stratified_points(n, seed=DEFAULT_SEED, letters=5, max_prefix=6, max_period=3):
    """Deterministic sample cycling through prefix lengths 0..max_prefix.

    Every third point is drawn with a strong bias towards 0, which is where
    the structured families in this library keep their interesting members.
    """
    rng = random.Random(seed)
    out = []
    for i in range(n):
        depth = i % (max_prefix + 1)
        bias = 0.6 if i % 3 == 2 else 0.0

        def letter():
            if bias and rng.random() < bias:
                return 0
            return rng.randrange(letters)

        pre = tuple(letter() for _ in range(depth))
        per = tuple(letter() for _ in range(rng.randint(1, max_period)))
        out.append(Point(pre, per))
    return out
