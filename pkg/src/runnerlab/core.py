"""Shared domain types: speed sets, torus distance, rigorous intervals, errors."""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from mpmath import iv
from mpmath.libmp import to_rational

DEFAULT_PRECISION = 128
PRECISION_CAP = 4096


# -- errors -----------------------------------------------------------------


class RunnerLabError(Exception):
    """Base class for every error raised by this package."""


class InvalidSpeedSet(RunnerLabError, ValueError):
    pass


class NonPositiveSpeed(InvalidSpeedSet):
    pass


class DuplicateSpeed(InvalidSpeedSet):
    pass


class EmptySet(InvalidSpeedSet):
    pass


class BudgetExceeded(RunnerLabError):
    """The requested computation does not fit the configured enumeration budget."""


class Undecided(RunnerLabError):
    """An interval comparison stayed ambiguous up to the precision cap."""


# -- speed sets -------------------------------------------------------------


@dataclass(frozen=True)
class SpeedSet:
    """Sorted tuple of distinct positive integer speeds."""

    speeds: tuple[int, ...]

    def __post_init__(self):
        speeds = tuple(int(v) for v in self.speeds)
        if not speeds:
            raise EmptySet("speed set is empty")
        for v in speeds:
            if v <= 0:
                raise NonPositiveSpeed(f"speed {v} is not positive")
        for a, b in zip(speeds, speeds[1:]):
            if a == b:
                raise DuplicateSpeed(f"speed {a} appears more than once")
            if a > b:
                raise InvalidSpeedSet("speeds must be strictly increasing; use validate_speed_set")
        object.__setattr__(self, "speeds", speeds)

    @property
    def n(self) -> int:
        return len(self.speeds)

    @property
    def max(self) -> int:
        return self.speeds[-1]

    def __iter__(self) -> Iterator[int]:
        return iter(self.speeds)

    def __len__(self) -> int:
        return len(self.speeds)

    def __contains__(self, v) -> bool:
        return v in self.speeds

    def __str__(self) -> str:
        return "{" + ", ".join(map(str, self.speeds)) + "}"


def validate_speed_set(raw: Iterable[int]) -> SpeedSet:
    """Sort ``raw`` into a SpeedSet, rejecting empty input, non-positive and repeated speeds."""
    values = []
    for v in raw:
        if isinstance(v, bool) or int(v) != v:
            raise InvalidSpeedSet(f"speed {v!r} is not an integer")
        values.append(int(v))
    if not values:
        raise EmptySet("speed set is empty")
    for v in values:
        if v <= 0:
            raise NonPositiveSpeed(f"speed {v} is not positive")
    seen = set()
    for v in values:
        if v in seen:
            raise DuplicateSpeed(f"speed {v} appears more than once")
        seen.add(v)
    return SpeedSet(tuple(sorted(values)))


def as_speed_set(V) -> SpeedSet:
    return V if isinstance(V, SpeedSet) else validate_speed_set(V)


def normalize(V: SpeedSet) -> tuple[SpeedSet, int]:
    """Divide out the gcd of all speeds. ML is unchanged; the factor is returned so traces can show it."""
    g = math.gcd(*V.speeds)
    return SpeedSet(tuple(v // g for v in V.speeds)), g


def dilate(V: SpeedSet, factor: int) -> SpeedSet:
    if factor < 1:
        raise ValueError("dilation factor must be a positive integer")
    return SpeedSet(tuple(v * factor for v in V.speeds))


# -- torus ------------------------------------------------------------------


def torus_norm(x) -> Fraction:
    """Distance from ``x`` to the nearest integer, exactly."""
    x = Fraction(x)
    frac = x - math.floor(x)
    return min(frac, 1 - frac)


# -- rigorous reals ---------------------------------------------------------


@contextmanager
def precision(bits: int):
    """Temporarily set the working precision of the interval context."""
    old = iv.prec
    iv.prec = bits
    try:
        yield
    finally:
        iv.prec = old


def iv_from_fraction(q: Fraction):
    q = Fraction(q)
    if q.denominator == 1:
        return iv.mpf(q.numerator)
    return iv.mpf(q.numerator) / q.denominator


def _endpoint(x) -> Fraction:
    p, q = to_rational(x)
    return Fraction(int(p), int(q))


@dataclass(frozen=True)
class BoundedReal:
    """A real number known to lie in the closed interval [lo, hi].

    Endpoints are exact rationals, so arithmetic between BoundedReals is exact on the
    endpoints and needs no rounding; only transcendental constructors go through
    directed-rounding interval evaluation.
    """

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = Fraction(self.lo), Fraction(self.hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def exact(cls, value) -> "BoundedReal":
        value = Fraction(value)
        return cls(value, value)

    @classmethod
    def from_iv(cls, x) -> "BoundedReal":
        a, b = x._mpi_
        return cls(_endpoint(a), _endpoint(b))

    def to_iv(self):
        if self.lo == self.hi:
            return iv_from_fraction(self.lo)
        lo, hi = iv_from_fraction(self.lo), iv_from_fraction(self.hi)
        return iv.mpf([lo.a, hi.b])

    @property
    def center(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def radius(self) -> Fraction:
        return (self.hi - self.lo) / 2

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    def contains(self, x) -> bool:
        return self.lo <= Fraction(x) <= self.hi

    def _coerce(self, other) -> "BoundedReal":
        if isinstance(other, BoundedReal):
            return other
        if isinstance(other, (int, Fraction)):
            return BoundedReal.exact(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return BoundedReal(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self):
        return BoundedReal(-self.hi, -self.lo)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        products = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return BoundedReal(min(products), max(products))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.lo <= 0 <= other.hi:
            raise ZeroDivisionError("interval divisor contains zero")
        return self * BoundedReal(1 / other.hi, 1 / other.lo)

    def compare(self, threshold) -> int | None:
        """-1 if certainly below ``threshold``, +1 if certainly above, 0 if exactly equal, None if undecided."""
        t = Fraction(threshold)
        if self.hi < t:
            return -1
        if self.lo > t:
            return 1
        if self.lo == self.hi == t:
            return 0
        return None

    def decimal(self, digits: int = 12) -> str:
        return f"{float(self.center):.{digits}g} ± {float(self.radius):.2g}"

    def __float__(self) -> float:
        return float(self.center)

    def __str__(self) -> str:
        return self.decimal()
