"""Digit-change statistics in bases 2 and 3.

``D_b(y)`` counts adjacent unequal digit pairs in the base-``b`` expansion of
``y``. The scans here tabulate ``(D_2 + D_3)/log y`` over a range of integers and
``D_3(2^y)/(y log 2)`` over powers of two.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional

import numpy as np

from .numeric import digit_list, ternary_digit_string

SCAN_CHUNK = 1 << 16


def digit_changes(y: int, b: int) -> int:
    """Number of indices ``i`` with ``digits[i] != digits[i+1]`` in base ``b``.

    >>> digit_changes(5, 2)
    2
    """
    if y < 0:
        raise ValueError("y must be nonnegative")
    if b == 2:
        # Bits of y ^ (y >> 1) mark changes, plus one for the leading 1.
        return max((y ^ (y >> 1)).bit_count() - 1, 0) if y else 0
    ds = ternary_digit_string(y) if b == 3 else digit_list(y, b)
    return sum(1 for u, v in zip(ds, ds[1:]) if u != v)


def digit_count(y: int, b: int) -> int:
    """``Delta_b(y)``, the number of base-``b`` digits of ``y`` (1 for zero)."""
    if b == 2:
        return max(y.bit_length(), 1)
    if b == 3:
        return len(ternary_digit_string(y))
    return len(digit_list(y, b))


@dataclass(frozen=True)
class DigitChangeProfile:
    y: int
    d2: int
    d3: int
    len2: int
    len3: int

    @property
    def total(self) -> int:
        return self.d2 + self.d3


def digit_change_profile(y: int) -> DigitChangeProfile:
    if y < 1:
        raise ValueError("profiles are defined for y >= 1")
    return DigitChangeProfile(
        y, digit_changes(y, 2), digit_changes(y, 3), digit_count(y, 2), digit_count(y, 3)
    )


def naive_upper_bound(y: int) -> float:
    """The crude bound ``10 (1 + ln y)`` on ``D_2(y) + D_3(y)``."""
    return 10.0 * (1.0 + math.log(y))


def windowed_digit_changes_base3(y: int, L: int, M: int) -> int:
    """Ternary digit changes of ``y`` in the window ``(L, M]``.

    Digits are indexed from the least significant one (``digit_1``) and count
    as 0 past the top of the expansion. The result counts ``j`` in
    ``[max(L + 1, 2), M]`` with ``digit_j != digit_{j-1}``.
    """
    if not 1 <= L <= M:
        raise ValueError("need 1 <= L <= M")
    s = ternary_digit_string(y)[::-1]  # s[i] is digit_{i+1}
    width = len(s)
    count = 0
    for j in range(max(L + 1, 2), M + 1):
        hi = s[j - 1] if j <= width else "0"
        lo = s[j - 2] if j - 1 <= width else "0"
        if hi != lo:
            count += 1
        if j > width + 1:
            break
    return count


class StewartMargin(NamedTuple):
    lhs: int
    rhs: float
    satisfied: bool


def stewart_rhs(y: int, c: float) -> float:
    ll = math.log(math.log(y))
    return ll / (math.log(ll) + c) - 1.0


def stewart_margin(y: int, c: float) -> StewartMargin:
    """Compare ``D_2(y) + D_3(y)`` with ``loglog y / (logloglog y + c) - 1``."""
    if y <= 15:
        raise ValueError("stewart_margin needs y >= 16 so that logloglog y > 0")
    lhs = digit_changes(y, 2) + digit_changes(y, 3)
    rhs = stewart_rhs(y, c)
    return StewartMargin(lhs, rhs, lhs >= rhs)


# -- vectorised scans -------------------------------------------------------


def _d2_array(ys: np.ndarray) -> np.ndarray:
    return np.bitwise_count(ys ^ (ys >> 1)).astype(np.int64) - 1


def _d3_array(ys: np.ndarray) -> np.ndarray:
    out = np.zeros(ys.shape, dtype=np.int64)
    prev = ys % 3
    rest = ys // 3
    while True:
        alive = rest > 0
        if not alive.any():
            return out
        cur = rest % 3
        out += alive & (cur != prev)
        prev = cur
        rest = rest // 3


def digit_change_arrays(y_lo: int, y_hi: int):
    """``(ys, D_2, D_3)`` as int64 arrays for the inclusive range."""
    ys = np.arange(y_lo, y_hi + 1, dtype=np.int64)
    return ys, _d2_array(ys), _d3_array(ys)


class ScanRow(NamedTuple):
    y: int
    d2: int
    d3: int
    ratio: float


class RatioScan:
    """Stream of :class:`ScanRow` with a running minimum of the ratio.

    Iterate once; ``min_ratio`` and ``argmin`` are final when iteration ends.
    Chunks are computed independently, so a scan split into disjoint ranges and
    merged with :meth:`merge_minimum` gives the same minimum.
    """

    def __init__(self, y_lo: int, y_hi: int, mode: str = "all"):
        if y_lo < 2 and mode == "all":
            raise ValueError("scan_ratio needs y_lo >= 2")
        if y_lo < 1:
            raise ValueError("scan_ratio needs y_lo >= 1")
        if y_hi < y_lo:
            raise ValueError("empty scan range")
        if mode not in ("all", "powers_of_two"):
            raise ValueError(f"unknown scan mode {mode!r}")
        self.y_lo, self.y_hi, self.mode = y_lo, y_hi, mode
        self.min_ratio: Optional[float] = None
        self.argmin: Optional[int] = None

    def _observe(self, y: int, ratio: float):
        if self.min_ratio is None or ratio < self.min_ratio:
            self.min_ratio, self.argmin = ratio, y

    def __iter__(self) -> Iterator[ScanRow]:
        if self.mode == "all":
            yield from self._iter_all()
        else:
            yield from self._iter_powers()

    def _iter_all(self):
        if self.y_hi >= 1 << 62:
            raise ValueError("range scans are limited to y < 2**62")
        lo = self.y_lo
        while lo <= self.y_hi:
            hi = min(lo + SCAN_CHUNK - 1, self.y_hi)
            ys, d2, d3 = digit_change_arrays(lo, hi)
            ratios = (d2 + d3) / np.log(ys.astype(np.float64))
            k = int(np.argmin(ratios))
            self._observe(int(ys[k]), float(ratios[k]))
            yield from map(ScanRow._make, zip(ys.tolist(), d2.tolist(), d3.tolist(), ratios.tolist()))
            lo = hi + 1

    def _iter_powers(self):
        ln2 = math.log(2.0)
        for y in range(self.y_lo, self.y_hi + 1):
            d3 = digit_changes(1 << y, 3)
            ratio = d3 / (y * ln2)
            self._observe(y, ratio)
            yield ScanRow(y, 1, d3, ratio)

    def summary(self) -> dict:
        return {"min_ratio": self.min_ratio, "argmin": self.argmin, "y_lo": self.y_lo, "y_hi": self.y_hi}


def scan_ratio(y_lo: int, y_hi: int, mode: str = "all") -> RatioScan:
    """Stream ``(y, D_2, D_3, ratio)`` rows for the ratio scans.

    In ``"all"`` mode the ratio is ``(D_2(y) + D_3(y)) / ln y``. In
    ``"powers_of_two"`` mode ``y`` indexes ``2^y`` and the row is
    ``(y, 1, D_3(2^y), D_3(2^y) / (y ln 2))``.
    """
    return RatioScan(y_lo, y_hi, mode)


def merge_minimum(partials):
    """Combine ``(min_ratio, argmin)`` pairs from disjoint ranges.

    Ties resolve to the smallest ``y`` so the result does not depend on how the
    range was split.
    """
    best = None
    for ratio, arg in partials:
        if ratio is None:
            continue
        if best is None or (ratio, arg) < best:
            best = (ratio, arg)
    return best


def scan_minimum(y_lo: int, y_hi: int, mode: str = "all"):
    """``(min_ratio, argmin)`` over a range without materialising rows."""
    scan = RatioScan(y_lo, y_hi, mode)
    if mode == "all":
        lo = y_lo
        partials = []
        while lo <= y_hi:
            hi = min(lo + SCAN_CHUNK - 1, y_hi)
            ys, d2, d3 = digit_change_arrays(lo, hi)
            ratios = (d2 + d3) / np.log(ys.astype(np.float64))
            k = int(np.argmin(ratios))
            partials.append((float(ratios[k]), int(ys[k])))
            lo = hi + 1
        return merge_minimum(partials)
    for _ in scan:
        pass
    return scan.min_ratio, scan.argmin


def stewart_min_constant(y_lo: int, y_hi: int):
    """Smallest real ``c`` with ``stewart_margin(y, c)`` satisfied on the range.

    ``lhs >= ll / (lll + c) - 1`` rearranges to ``c >= ll / (lhs + 1) - lll``,
    so the answer is the maximum of the right side. Returns ``(c, argmax)``.
    """
    if y_lo <= 15:
        raise ValueError("need y_lo >= 16")
    best_c, best_y = -math.inf, None
    lo = y_lo
    while lo <= y_hi:
        hi = min(lo + SCAN_CHUNK - 1, y_hi)
        ys, d2, d3 = digit_change_arrays(lo, hi)
        ll = np.log(np.log(ys.astype(np.float64)))
        need = ll / (d2 + d3 + 1) - np.log(ll)
        k = int(np.argmax(need))
        if need[k] > best_c:
            best_c, best_y = float(need[k]), int(ys[k])
        lo = hi + 1
    return best_c, best_y


def stewart_violations(y_lo: int, y_hi: int, c: float):
    """``(count, first_y)`` of ``y`` in the range where ``stewart_margin(y, c)`` fails."""
    if y_lo <= 15:
        raise ValueError("need y_lo >= 16")
    count, first = 0, None
    lo = y_lo
    while lo <= y_hi:
        hi = min(lo + SCAN_CHUNK - 1, y_hi)
        ys, d2, d3 = digit_change_arrays(lo, hi)
        ll = np.log(np.log(ys.astype(np.float64)))
        bad = (d2 + d3) < ll / (np.log(ll) + c) - 1.0
        k = int(np.count_nonzero(bad))
        if k and first is None:
            first = int(ys[int(np.argmax(bad))])
        count += k
        lo = hi + 1
    return count, first
