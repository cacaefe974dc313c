"""Exact integer/rational helpers and base-b digit expansions.

Rationals are plain :class:`fractions.Fraction` objects, which are always kept
in lowest terms with a positive denominator. Nothing in this module touches
floating point.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterator, Tuple, Union

import gmpy2

ExactRational = Fraction
RationalLike = Union[int, Fraction, str]

# gmpy2 converts up to base 62, but only bases up to 36 use digit characters
# that int(c, b) can decode.
_GMPY_MAX_BASE = 36
_SCHOOLBOOK_LIMIT = 1 << 2048


def as_rational(value: RationalLike) -> Fraction:
    """Coerce ``value`` to an exact rational.

    Accepts ints, Fractions, and strings of the form ``"p/q"`` or ``"p"``.
    Floats are refused, since they would silently import rounding error.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text or any(c in text for c in ".eE") or text.count("/") > 1:
            raise ValueError(f"malformed rational {value!r}")
        return Fraction(text)
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def format_rational(q: Fraction) -> str:
    """Inverse of :func:`as_rational` for serialisation (``"p/q"`` or ``"p"``)."""
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class DigitWord:
    """A base-``base`` digit string, most-significant digit first."""

    base: int
    digits: Tuple[int, ...]

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("base must be at least 2")
        if not self.digits:
            raise ValueError("a digit word has at least one digit")
        if len(self.digits) > 1 and self.digits[0] == 0:
            raise ValueError("leading zero in a multi-digit word")
        if any(not 0 <= d < self.base for d in self.digits):
            raise ValueError("digit out of range")

    @property
    def value(self) -> int:
        v = 0
        for d in self.digits:
            v = v * self.base + d
        return v

    def __len__(self) -> int:
        return len(self.digits)


def _digits_schoolbook(y: int, b: int) -> list:
    out = []
    while y:
        y, d = divmod(y, b)
        out.append(d)
    out.reverse()
    return out


def _digits_split(y: int, b: int, width: int, powers: list) -> list:
    # Emits exactly ``width`` digits (zero padded) of y < b**width.
    if y < _SCHOOLBOOK_LIMIT and width <= 700:
        ds = _digits_schoolbook(y, b)
        return [0] * (width - len(ds)) + ds
    level = width.bit_length() - 2
    half = 1 << level
    hi, lo = divmod(y, powers[level])
    return _digits_split(hi, b, width - half, powers) + _digits_split(lo, b, half, powers)


def digits_python(y: int, b: int) -> list:
    """Pure-Python base conversion by recursive splitting on ``b**(2**k)``.

    Subquadratic for large ``y``; used as the independent cross-check of the
    gmpy2 fast path and as the fallback for bases gmpy2 does not support.
    """
    if y < 0:
        raise ValueError("y must be nonnegative")
    if b < 2:
        raise ValueError("base must be at least 2")
    if y == 0:
        return [0]
    if y < _SCHOOLBOOK_LIMIT:
        return _digits_schoolbook(y, b)
    powers = [b]
    while powers[-1] ** 2 <= y:
        powers.append(powers[-1] ** 2)
    width = 1 << len(powers)
    ds = _digits_split(y, b, width, powers + [powers[-1] ** 2])
    first = next(i for i, d in enumerate(ds) if d)
    return ds[first:]


def digit_list(y: int, b: int) -> list:
    """Digits of ``y`` in base ``b`` as a list of ints, most significant first."""
    if b < 2:
        raise ValueError("base must be at least 2")
    if y < 0:
        raise ValueError("y must be nonnegative")
    if b <= min(_GMPY_MAX_BASE, 10):
        return [ord(c) - 48 for c in gmpy2.mpz(y).digits(b)]
    if b <= _GMPY_MAX_BASE:
        return [int(c, b) for c in gmpy2.mpz(y).digits(b)]
    return digits_python(y, b)


def base_digits(y: int, b: int) -> DigitWord:
    """Canonical base-``b`` expansion of a nonnegative integer.

    >>> base_digits(1024, 3).digits
    (1, 1, 0, 1, 2, 2, 1)
    """
    if b < 2:
        raise ValueError("base must be at least 2")
    return DigitWord(b, tuple(digit_list(y, b)))


def ternary_digit_string(y: int) -> str:
    """Ternary expansion of ``y`` as a string; the hot path for digit scans."""
    return gmpy2.mpz(y).digits(3)


@dataclass(frozen=True)
class TernaryProfile:
    """Eventually periodic ternary expansion ``0.(preperiod)(period)(period)...``."""

    preperiod: Tuple[int, ...]
    period: Tuple[int, ...]

    def __post_init__(self):
        if not self.period:
            raise ValueError("period must be nonempty")

    def value(self) -> Fraction:
        pre = 0
        for d in self.preperiod:
            pre = 3 * pre + d
        per = 0
        for d in self.period:
            per = 3 * per + d
        k, p = len(self.preperiod), len(self.period)
        return Fraction(pre, 3**k) + Fraction(per, 3**k * (3**p - 1))

    def digit(self, i: int) -> int:
        """The ``i``-th ternary digit after the point (1-based)."""
        if i < 1:
            raise IndexError("digits are indexed from 1")
        k = len(self.preperiod)
        if i <= k:
            return self.preperiod[i - 1]
        return self.period[(i - k - 1) % len(self.period)]


def ternary_expansion(q: Fraction) -> Iterator[Tuple[int, int]]:
    """Yield ``(digit, state)`` pairs of the ternary long division of ``q``.

    ``q`` must lie in [0, 1). ``state`` is the remainder *before* emitting the
    digit, so two equal states start identical digit tails.
    """
    p, d = q.numerator, q.denominator
    while True:
        digit, rem = divmod(3 * p, d)
        yield digit, p
        p = rem


def ternary_profile(q: RationalLike) -> TernaryProfile:
    """Shortest eventually periodic ternary expansion of ``q`` in [0, 1].

    Triadic rationals get their terminating expansion padded with period
    ``(0,)``. The value 1 has no terminating expansion after the point and is
    returned as ``0.(2)``.
    """
    q = as_rational(q)
    if not 0 <= q <= 1:
        raise ValueError("ternary_profile needs 0 <= q <= 1")
    if q == 1:
        return TernaryProfile((), (2,))
    seen = {}
    digits = []
    for i, (digit, state) in enumerate(ternary_expansion(q)):
        if state in seen:
            start = seen[state]
            return TernaryProfile(tuple(digits[:start]), tuple(digits[start:]))
        seen[state] = i
        digits.append(digit)
    raise AssertionError("unreachable")


def floor_div(q: Fraction) -> int:
    """``floor(q)`` for an exact rational."""
    return q.numerator // q.denominator


def ceil_div(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)
