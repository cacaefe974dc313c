"""Exact geometry of the middle-third Cantor construction.

Everything here is exact rational arithmetic. The central routine is
:func:`system_components`: it walks the Cantor tree K_0, K_1, ... just far
enough to find which balls of a dyadic ball system come near the Cantor set,
and returns those balls merged into disjoint open intervals. Endpoint counts
and Cantor measures are then computed per component, without ever touching
balls that miss K.

Conventions
-----------
* Balls are open.
* ``L_N`` holds the points ``a / 3**N`` whose numerator ``a`` has ``N``
  ternary digits, all 0 or 2; ``R_N = 1 - L_N``; ``C_N = L_N | R_N``.
* Dilating the unit interval ``[0, 1]`` returns it unchanged (it stands for
  the whole support of the measure); every other interval dilates about its
  midpoint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, List, Optional, Tuple

from .numeric import RationalLike, as_rational, ternary_digit_string, ternary_profile

DEFAULT_NODE_BUDGET = 1 << 22
ENUMERATION_LIMIT = 16

ZERO = Fraction(0)
ONE = Fraction(1)


class BudgetExceeded(RuntimeError):
    """An exact computation would exceed its configured cost budget."""


@dataclass(frozen=True)
class RationalInterval:
    lo: Fraction
    hi: Fraction
    lo_open: bool = False
    hi_open: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lo", as_rational(self.lo))
        object.__setattr__(self, "hi", as_rational(self.hi))

    @classmethod
    def closed(cls, lo: RationalLike, hi: RationalLike) -> "RationalInterval":
        return cls(as_rational(lo), as_rational(hi))

    @classmethod
    def open(cls, lo: RationalLike, hi: RationalLike) -> "RationalInterval":
        return cls(as_rational(lo), as_rational(hi), True, True)

    @classmethod
    def ball(cls, center: RationalLike, radius: RationalLike) -> "RationalInterval":
        c, r = as_rational(center), as_rational(radius)
        return cls(c - r, c + r, True, True)

    @classmethod
    def unit(cls) -> "RationalInterval":
        return cls(ZERO, ONE)

    @property
    def is_unit(self) -> bool:
        return self.lo == 0 and self.hi == 1 and not self.lo_open and not self.hi_open

    @property
    def center(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def radius(self) -> Fraction:
        return (self.hi - self.lo) / 2

    def is_empty(self) -> bool:
        if self.lo > self.hi:
            return True
        return self.lo == self.hi and (self.lo_open or self.hi_open)

    def __contains__(self, x) -> bool:
        x = as_rational(x)
        if x < self.lo or (x == self.lo and self.lo_open):
            return False
        if x > self.hi or (x == self.hi and self.hi_open):
            return False
        return True

    def dilate(self, t: RationalLike) -> "RationalInterval":
        """``tI``: same centre, radius scaled by ``t``; ``[0, 1]`` is fixed."""
        if self.is_unit:
            return self
        t = as_rational(t)
        c, r = self.center, self.radius * t
        return RationalInterval(c - r, c + r, self.lo_open, self.hi_open)

    def reflect(self) -> "RationalInterval":
        """Image under ``x -> 1 - x``."""
        return RationalInterval(1 - self.hi, 1 - self.lo, self.hi_open, self.lo_open)

    def intersect(self, other: "RationalInterval") -> "RationalInterval":
        if self.lo > other.lo:
            lo, lo_open = self.lo, self.lo_open
        elif other.lo > self.lo:
            lo, lo_open = other.lo, other.lo_open
        else:
            lo, lo_open = self.lo, self.lo_open or other.lo_open
        if self.hi < other.hi:
            hi, hi_open = self.hi, self.hi_open
        elif other.hi < self.hi:
            hi, hi_open = other.hi, other.hi_open
        else:
            hi, hi_open = self.hi, self.hi_open or other.hi_open
        return RationalInterval(lo, hi, lo_open, hi_open)


@dataclass(frozen=True)
class BallSystem:
    """``Union_{a in a_range} B(a / 2**n + shift, radius)``, open balls."""

    n: int
    radius: Fraction
    shift: Fraction = ZERO
    a_lo: int = 0
    a_hi: Optional[int] = None

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        object.__setattr__(self, "radius", as_rational(self.radius))
        object.__setattr__(self, "shift", as_rational(self.shift))
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.a_hi is None:
            object.__setattr__(self, "a_hi", 1 << self.n)

    @classmethod
    def dyadic(cls, n: int, psi: RationalLike, t: RationalLike = 1, shift: RationalLike = 0) -> "BallSystem":
        """``t A_n + shift`` with ``A_n`` of radius ``psi / 2**n``."""
        return cls(n, as_rational(t) * as_rational(psi) / (1 << n), as_rational(shift))

    @classmethod
    def level(cls, n: int, M: int, t: RationalLike = 1, shift: RationalLike = 0) -> "BallSystem":
        """``t A_n(M) + shift`` with radius ``t / 3**M``."""
        return cls(n, Fraction(as_rational(t)) / 3**M, as_rational(shift))

    def dilate(self, t: RationalLike) -> "BallSystem":
        return replace(self, radius=self.radius * as_rational(t))

    def translate(self, theta: RationalLike) -> "BallSystem":
        return replace(self, shift=self.shift + as_rational(theta))

    def center(self, a: int) -> Fraction:
        return Fraction(a, 1 << self.n) + self.shift

    @property
    def overlapping(self) -> bool:
        """True when neighbouring balls overlap in an open interval."""
        return 2 * self.radius * (1 << self.n) > 1


# -- endpoint sets ------------------------------------------------------------


def cantor_numerators(N: int) -> List[int]:
    """All ``a < 3**N`` with ternary digits in {0, 2}, ascending."""
    out = [0]
    for _ in range(N):
        out = [3 * a + e for a in out for e in (0, 2)]
    return out


def enumerate_endpoints(N: int, which: str = "all") -> List[Fraction]:
    """Sorted ``L_N``, ``R_N`` or ``C_N``, by brute-force enumeration (N <= 16)."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    if N > ENUMERATION_LIMIT:
        raise ValueError(f"enumeration is limited to N <= {ENUMERATION_LIMIT}; use the counting functions")
    den = 3**N
    left = [Fraction(a, den) for a in cantor_numerators(N)]
    if which == "left":
        return left
    right = [1 - x for x in reversed(left)]
    if which == "right":
        return right
    if which == "all":
        return sorted(left + right)
    raise ValueError(f"unknown endpoint set {which!r}")


def count_cantor_integers(X: int, N: int) -> int:
    """Number of ``a`` in ``[0, X]`` with ``N`` ternary digits, all 0 or 2.

    Walks the digits of ``X`` from the top: a digit 2 lets the lower digits
    run free under a 0 here, a digit 1 does the same and then stops.
    """
    if X < 0:
        return 0
    full = 3**N
    if X >= full:
        return 1 << N
    s = ternary_digit_string(X).rjust(N, "0")
    count = 0
    for i, c in enumerate(s):
        free = N - 1 - i
        if c == "2":
            count += 1 << free
        elif c == "1":
            return count + (1 << free)
    return count + 1


def _numerator_range(N: int, I: RationalInterval) -> Tuple[int, int]:
    den = 3**N
    lo = I.lo * den
    hi = I.hi * den
    a_min = -((-lo.numerator) // lo.denominator)
    if I.lo_open and lo.denominator == 1:
        a_min += 1
    a_max = hi.numerator // hi.denominator
    if I.hi_open and hi.denominator == 1:
        a_max -= 1
    return a_min, a_max


def _count_left(N: int, I: RationalInterval) -> int:
    if I.is_empty():
        return 0
    a_min, a_max = _numerator_range(N, I)
    if a_max < a_min:
        return 0
    return count_cantor_integers(a_max, N) - count_cantor_integers(a_min - 1, N)


def count_endpoints_in_interval(N: int, I: RationalInterval, which: str = "all") -> int:
    """``|L_N & I|``, ``|R_N & I|`` or ``|C_N & I|`` in O(N) integer steps."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    if which == "left":
        return _count_left(N, I)
    if which == "right":
        return _count_left(N, I.reflect())
    if which == "all":
        return _count_left(N, I) + _count_left(N, I.reflect())
    raise ValueError(f"unknown endpoint set {which!r}")


# -- ball systems near the Cantor set ----------------------------------------


def _descent_level(sys: BallSystem) -> int:
    # Deep enough that a level interval is no longer than the ball spacing.
    level = 0
    while 3**level < (1 << sys.n):
        level += 1
    return level


def _ball_index_ranges(sys: BallSystem, window: RationalInterval, budget: int) -> List[Tuple[int, int]]:
    """Contiguous index ranges of balls meeting some Cantor interval of the
    descent level that also meets the closure of ``window``."""
    scale = 1 << sys.n
    lo_shift = (-sys.radius - sys.shift) * scale
    hi_shift = (sys.radius - sys.shift) * scale
    p0, q0 = lo_shift.numerator, lo_shift.denominator
    p1, q1 = hi_shift.numerator, hi_shift.denominator
    wl_n, wl_d = window.lo.numerator, window.lo.denominator
    wh_n, wh_d = window.hi.numerator, window.hi.denominator
    a_lo, a_hi = sys.a_lo, sys.a_hi
    target = _descent_level(sys)

    nodes = [0]
    visited = 0
    ranges: List[Tuple[int, int]] = []
    for level in range(target + 1):
        den = 3**level
        keep = []
        for u in nodes:
            # Closed node [u, u + 1] / den must meet the closed window.
            if (u + 1) * wl_d < wl_n * den or u * wh_d > wh_n * den:
                continue
            num = u * scale * q0 + p0 * den
            amin = num // (den * q0) + 1
            num = (u + 1) * scale * q1 + p1 * den
            amax = -((-num) // (den * q1)) - 1
            amin = max(amin, a_lo)
            amax = min(amax, a_hi)
            if amin > amax:
                continue
            if level == target:
                ranges.append((amin, amax))
            else:
                keep.append(u)
        visited += len(nodes)
        if visited > budget:
            raise BudgetExceeded(f"Cantor descent visited more than {budget} nodes")
        nodes = [3 * u + e for u in keep for e in (0, 2)]
    ranges.sort()
    merged: List[List[int]] = []
    for lo, hi in ranges:
        if merged and lo <= merged[-1][1] + 1:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(lo, hi) for lo, hi in merged]


@dataclass(frozen=True)
class Components:
    """Sorted disjoint open intervals ``(lo / den, hi / den)`` with integer ends.

    A shared denominator keeps merging, clipping and counting in plain integer
    arithmetic, which matters once a system has hundreds of thousands of balls.
    """

    den: int
    spans: Tuple[Tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.spans)

    def __iter__(self):
        return iter(self.spans)

    def as_fractions(self) -> List[Tuple[Fraction, Fraction]]:
        return [(Fraction(lo, self.den), Fraction(hi, self.den)) for lo, hi in self.spans]

    def rescale(self, den: int) -> "Components":
        if den % self.den:
            raise ValueError("new denominator must be a multiple of the old one")
        f = den // self.den
        return Components(den, tuple((lo * f, hi * f) for lo, hi in self.spans))

    @classmethod
    def empty(cls) -> "Components":
        return cls(1, ())


def _merge_spans(spans) -> Tuple[Tuple[int, int], ...]:
    # Touching spans stay separate: the shared point is not covered.
    out: List[List[int]] = []
    for lo, hi in sorted(spans):
        if lo >= hi:
            continue
        if out and lo < out[-1][1]:
            if hi > out[-1][1]:
                out[-1][1] = hi
        else:
            out.append([lo, hi])
    return tuple((lo, hi) for lo, hi in out)


def system_components(
    sys: BallSystem, window: Optional[RationalInterval] = None, budget: int = DEFAULT_NODE_BUDGET
) -> Components:
    """Disjoint open intervals whose union agrees with ``sys`` on ``K & window``.

    Balls that do not come near the Cantor set (within the window's closure)
    are dropped, so the result is exact for counting Cantor endpoints and for
    Cantor measure inside the window, but not a faithful picture of ``sys``
    elsewhere.
    """
    if window is None:
        window = RationalInterval.unit()
    window = window.intersect(RationalInterval.unit())
    if window.is_empty():
        return Components.empty()
    ranges = _ball_index_ranges(sys, window, budget)
    scale = 1 << sys.n
    den = math.lcm(scale, sys.shift.denominator, sys.radius.denominator)
    step = den // scale
    off = sys.shift.numerator * (den // sys.shift.denominator)
    r = sys.radius.numerator * (den // sys.radius.denominator)
    if sys.overlapping:
        spans = [(lo * step + off - r, hi * step + off + r) for lo, hi in ranges]
    else:
        total = sum(hi - lo + 1 for lo, hi in ranges)
        if total > budget:
            raise BudgetExceeded(f"{total} separate balls exceed the budget {budget}")
        spans = [(a * step + off - r, a * step + off + r) for lo, hi in ranges for a in range(lo, hi + 1)]
    return Components(den, _merge_spans(spans))


def _common(a: Components, b: Components):
    den = math.lcm(a.den, b.den)
    return a.rescale(den), b.rescale(den)


def intersect_components(a: Components, b: Components) -> Components:
    """Intersection of two component sets, as a component set."""
    a, b = _common(a, b)
    out = []
    i = j = 0
    sa, sb = a.spans, b.spans
    while i < len(sa) and j < len(sb):
        lo = max(sa[i][0], sb[j][0])
        hi = min(sa[i][1], sb[j][1])
        if lo < hi:
            out.append((lo, hi))
        if sa[i][1] < sb[j][1]:
            i += 1
        else:
            j += 1
    return Components(a.den, tuple(out))


def union_components(sets: Iterable[Components]) -> Components:
    """Union of component sets (open intervals merged where they overlap)."""
    sets = list(sets)
    if not sets:
        return Components.empty()
    den = math.lcm(*(c.den for c in sets))
    spans = [s for c in sets for s in c.rescale(den).spans]
    return Components(den, _merge_spans(spans))


def _inside(lo: int, hi: int, den: int, I: RationalInterval) -> bool:
    # Span lies within the closure of I, so clipping leaves it unchanged.
    return lo * I.lo.denominator >= I.lo.numerator * den and hi * I.hi.denominator <= I.hi.numerator * den


def _disjoint(lo: int, hi: int, den: int, I: RationalInterval) -> bool:
    return hi * I.lo.denominator <= I.lo.numerator * den or lo * I.hi.denominator >= I.hi.numerator * den


def clip_components(components: Components, I: RationalInterval) -> List[RationalInterval]:
    """Intersect open components with ``I``, dropping empty pieces."""
    out = []
    d = components.den
    for lo, hi in components.spans:
        if _disjoint(lo, hi, d, I):
            continue
        piece = RationalInterval(Fraction(lo, d), Fraction(hi, d), True, True).intersect(I)
        if not piece.is_empty():
            out.append(piece)
    return out


def _count_left_open(N: int, lo: int, hi: int, den: int) -> int:
    # Integers a with lo/den < a/3^N < hi/den.
    p = 3**N
    a_min = (lo * p) // den + 1
    a_max = -((-hi * p) // den) - 1
    if a_max < a_min:
        return 0
    return count_cantor_integers(a_max, N) - count_cantor_integers(a_min - 1, N)


def count_in_components(N: int, components: Components, I: Optional[RationalInterval] = None, which: str = "all") -> int:
    """Endpoints of level ``N`` inside ``components & I``."""
    if which not in ("left", "right", "all"):
        raise ValueError(f"unknown endpoint set {which!r}")
    if I is None:
        I = RationalInterval.unit()
    d = components.den
    total = 0
    for lo, hi in components.spans:
        if _disjoint(lo, hi, d, I):
            continue
        if not _inside(lo, hi, d, I):
            piece = RationalInterval(Fraction(lo, d), Fraction(hi, d), True, True).intersect(I)
            total += count_endpoints_in_interval(N, piece, which)
            continue
        if which != "right":
            total += _count_left_open(N, lo, hi, d)
        if which != "left":
            total += _count_left_open(N, d - hi, d - lo, d)
    return total


def count_endpoints_in_system(
    N: int,
    sys: BallSystem,
    I: Optional[RationalInterval] = None,
    which: str = "all",
    budget: int = DEFAULT_NODE_BUDGET,
) -> int:
    """Exact ``|C_N & sys & I|`` (or the ``L_N`` / ``R_N`` part)."""
    if I is None:
        I = RationalInterval.unit()
    return count_in_components(N, system_components(sys, I, budget), I, which)


# -- Cantor function and measure ---------------------------------------------


def _cdf(p: int, d: int) -> Fraction:
    # F(p/d) for integers 0 <= p < d, fraction not necessarily reduced.
    seen = {}
    bits = 0
    i = 0
    while True:
        if p in seen:
            start = seen[p]
            period = i - start
            # bits holds a preperiod of ``start`` binary digits then one period.
            per = bits & ((1 << period) - 1)
            pre = bits >> period
            return Fraction(pre * ((1 << period) - 1) + per, (1 << start) * ((1 << period) - 1))
        seen[p] = i
        digit, p = divmod(3 * p, d)
        if digit == 1:
            return Fraction(2 * bits + 1, 1 << (i + 1))
        bits = 2 * bits + (digit >> 1)
        i += 1


def _cdf_clamped(p: int, d: int) -> Fraction:
    if p <= 0:
        return ZERO
    if p >= d:
        return ONE
    return _cdf(p, d)


def cantor_cdf(x: RationalLike) -> Fraction:
    """Exact Cantor function ``F(x) = mu([0, x])`` at a rational point.

    Reads ternary digits lazily: digits 0/2 contribute binary digits 0/1, the
    first digit 1 contributes a final binary 1, and an eventually periodic tail
    of 0s and 2s is summed as a geometric series.

    >>> cantor_cdf(Fraction(1, 4))
    Fraction(1, 3)
    """
    x = as_rational(x)
    return _cdf_clamped(x.numerator, x.denominator)


def measure_of_pieces(pieces: Iterable[RationalInterval]) -> Fraction:
    """Cantor measure of a disjoint union of intervals."""
    total = ZERO
    for piece in pieces:
        if not piece.is_empty():
            total += cantor_cdf(piece.hi) - cantor_cdf(piece.lo)
    return total


def measure_of_components(components: Components, I: Optional[RationalInterval] = None) -> Fraction:
    """Exact ``mu(components & I)``."""
    if I is None:
        I = RationalInterval.unit()
    d = components.den
    total = ZERO
    for lo, hi in components.spans:
        if _disjoint(lo, hi, d, I):
            continue
        if _inside(lo, hi, d, I):
            total += _cdf_clamped(hi, d) - _cdf_clamped(lo, d)
        else:
            piece = RationalInterval(Fraction(lo, d), Fraction(hi, d), True, True).intersect(I)
            total += measure_of_pieces([piece])
    return total


def measure_of_system(
    sys: BallSystem, I: Optional[RationalInterval] = None, budget: int = DEFAULT_NODE_BUDGET
) -> Fraction:
    """Exact ``mu(sys & I)``. Openness of ends is immaterial (no atoms)."""
    if I is None:
        I = RationalInterval.unit()
    return measure_of_components(system_components(sys, I, budget), I)


def measure_of_interval(I: RationalInterval) -> Fraction:
    return measure_of_pieces([I.intersect(RationalInterval.unit())])


def in_cantor_set(x: RationalLike) -> bool:
    """Membership of a rational in K, via its eventually periodic expansion."""

    x = as_rational(x)
    if not 0 <= x <= 1:
        return False
    prof = ternary_profile(x)
    digits = prof.preperiod + prof.period
    if 1 not in digits:
        return True
    # A terminating expansion ending in ...1(0) also reads ...0(2).
    if prof.period == (0,) and prof.preperiod and prof.preperiod[-1] == 1:
        return 1 not in prof.preperiod[:-1]
    return False


def distance_to_cantor(x: RationalLike) -> Fraction:
    """Exact distance from a rational to K.

    Outside [0, 1] this is the distance to the nearer end. Inside, the
    ternary digits are read until the first 1 that cannot be rewritten as
    ``0222...``; ``x`` then lies in a removed gap whose two ends are in K.
    """
    x = as_rational(x)
    if x <= 0:
        return -x
    if x >= 1:
        return x - 1
    if in_cantor_set(x):
        return ZERO
    prefix = ZERO
    p, d = x.numerator, x.denominator
    i = 0
    while True:
        i += 1
        digit, p = divmod(3 * p, d)
        if digit == 1:
            lo = prefix + Fraction(1, 3**i)
            hi = prefix + Fraction(2, 3**i)
            return min(x - lo, hi - x)
        prefix += Fraction(digit, 3**i)
