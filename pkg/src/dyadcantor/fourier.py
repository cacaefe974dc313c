"""Fourier counting of Cantor endpoints near dyadic rationals.

The left side of the counting identity sums a smooth bump, centred at the
dyadics ``b / 2**n`` and scaled by ``r = 2**(n + k)``, over the level-``M``
left endpoints in ``I``. The right side is the frequency expansion

    2^(M-L-k) sum_{|m| <= 2^k T} phihat(m / 2^k) e(2^n m y)
              sum_{x in L_L & I} e(2^n m x) prod_{j=L+1}^{M} (1 + e(2^(n+1) m / 3^j)) / 2

with a truncation error of order ``2^(M-L) |L_L & I| / T^N``.

Every phase ``e(q)`` with rational ``q`` is reduced modulo 1 exactly, in
integers, before a single double-precision cosine or sine. This keeps the
phases of huge frequencies like ``2^(n+1) m / 3^j`` accurate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, NamedTuple, Optional, Tuple

import mpmath
import numpy as np

from . import cantor
from .cantor import RationalInterval
from .digits import windowed_digit_changes_base3
from .numeric import RationalLike, as_rational

RHO = math.cos(math.pi / 9)
MAX_LHS_LEVEL = 22
MAX_TERMS = 10**6
PRODUCT_SLACK = 1e-12
RHS_CHUNK = 4096

# Composite Gauss-Legendre rule on the ramp [1, 2] of the bump.
_GL_PANELS = 32
_GL_NODES = 24


class QuadratureError(ArithmeticError):
    """Quadrature could not reach the requested accuracy."""


class CertifiedValue(NamedTuple):
    value: mpmath.mpf
    error: mpmath.mpf


# -- the bump -----------------------------------------------------------------


def bump(x):
    """``phi(x)``: 1 on ``[-1, 1]``, a smooth ramp on ``1 < |x| < 2``, else 0."""
    x = np.abs(np.asarray(x, dtype=np.float64))
    s = x - 1.0
    out = np.where(x <= 1.0, 1.0, 0.0)
    ramp = (x > 1.0) & (x < 2.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        val = np.exp(1.0 - 1.0 / (1.0 - s * s))
    return np.where(ramp, val, out)


def _ramp_mp(x):
    s = x - 1
    d = 1 - s * s
    if d <= 0:
        return mpmath.mpf(0)
    return mpmath.exp(1 - 1 / d)


def bump_transform(t: RationalLike, precision: int = 53) -> CertifiedValue:
    """``phihat(t) = int phi(x) e(-t x) dx`` to absolute accuracy ``2**-precision``.

    The plateau contributes ``sin(2 pi t) / (pi t)`` in closed form. The two
    ramps are integrated by tanh-sinh quadrature at a raised working
    precision, and the result is accepted only when both the quadrature's own
    error estimate and the difference from a Gauss-Legendre evaluation are
    below the target.

    Raises
    ------
    QuadratureError
        If the two estimates do not agree to the requested accuracy.
    """
    t = as_rational(t)
    if precision < 1:
        raise ValueError("precision must be positive")
    tol = mpmath.mpf(2) ** (-precision)
    with mpmath.workprec(precision + 40):
        tm = mpmath.mpf(t.numerator) / t.denominator
        if t == 0:
            plateau = mpmath.mpf(2)
        else:
            plateau = mpmath.sin(2 * mpmath.pi * tm) / (mpmath.pi * tm)
        pieces = int(abs(t)) + 2
        nodes = [1 + mpmath.mpf(i) / pieces for i in range(pieces + 1)]

        def f(x):
            return _ramp_mp(x) * mpmath.cos(2 * mpmath.pi * tm * x)

        v1, err = mpmath.quad(f, nodes, error=True)
        v2 = mpmath.quad(f, nodes, method="gauss-legendre")
        bound = 2 * (abs(err) + abs(v1 - v2))
        if bound > tol:
            raise QuadratureError(f"phihat({t}) not resolved to 2^-{precision} (estimate {mpmath.nstr(bound, 3)})")
        return CertifiedValue(plateau + 2 * v1, bound)


def _gauss_legendre_ramp():
    x, w = np.polynomial.legendre.leggauss(_GL_NODES)
    h = 1.0 / _GL_PANELS
    starts = 1.0 + h * np.arange(_GL_PANELS)
    nodes = (starts[:, None] + h * (x[None, :] + 1.0) / 2.0).ravel()
    weights = np.tile(w * h / 2.0, _GL_PANELS)
    return nodes, weights * bump(nodes)


def bump_transform_fast(t) -> np.ndarray:
    """Vectorised double-precision ``phihat`` on an array of real frequencies.

    Accurate to about 1e-14 for ``|t| <= 64``; the reference values come from
    :func:`bump_transform`.
    """
    t = np.asarray(t, dtype=np.float64)
    flat = t.ravel()
    nodes, weights = _gauss_legendre_ramp()
    out = np.empty(flat.shape)
    for start in range(0, flat.size, RHS_CHUNK):
        chunk = flat[start:start + RHS_CHUNK]
        ramp = np.cos(2.0 * np.pi * np.outer(chunk, nodes)) @ weights
        # np.sinc(2t) = sin(2 pi t) / (2 pi t); the plateau integral is twice that.
        out[start:start + RHS_CHUNK] = 2.0 * np.sinc(2.0 * chunk) + 2.0 * ramp
    return out.reshape(t.shape)


@dataclass
class BumpSpec:
    """The fixed bump, a cache of its transform, and a fitted decay envelope.

    ``envelope_constant`` is ``C`` in ``|phihat(t)| <= C (1 + |t|)^-N`` for
    ``N = envelope_order``, fitted by :meth:`fit_envelope`.
    """

    envelope_order: int = 4
    envelope_constant: Optional[float] = None
    cache: Dict[Fraction, float] = field(default_factory=dict)

    def phi(self, x):
        return bump(x)

    def hat(self, t: RationalLike) -> float:
        t = abs(as_rational(t))
        if t not in self.cache:
            self.cache[t] = float(bump_transform(t).value)
        return self.cache[t]

    def hat_grid(self, k: int, m_max: int) -> np.ndarray:
        """``phihat(m / 2**k)`` for ``m = 0..m_max``."""
        return bump_transform_fast(np.arange(m_max + 1, dtype=np.float64) / (1 << k))

    @property
    def integral(self) -> float:
        return self.hat(0)

    def fit_envelope(self, frequencies) -> float:
        """Smallest ``C`` covering the given frequencies; stores and returns it."""
        N = self.envelope_order
        c = max(abs(self.hat(t)) * (1 + abs(float(as_rational(t)))) ** N for t in frequencies)
        self.envelope_constant = c
        return c

    def envelope(self, t: RationalLike) -> float:
        if self.envelope_constant is None:
            raise ValueError("envelope not fitted")
        return self.envelope_constant * (1 + abs(float(as_rational(t)))) ** -self.envelope_order


# -- parameters ---------------------------------------------------------------


def boundary_level(I: RationalInterval) -> int:
    """Least ``L_0`` with ``3**-L_0`` below the distance from ``I``'s ends to K.

    Zero for the unit interval. Raises ``ValueError`` when an endpoint lies in
    K, since then no such level exists.
    """
    if I.is_unit:
        return 0
    dist = min(cantor.distance_to_cantor(I.lo), cantor.distance_to_cantor(I.hi))
    if dist == 0:
        raise ValueError("interval endpoints must not lie in the Cantor set")
    level = 0
    while Fraction(1, 3**level) >= dist:
        level += 1
    return level


@dataclass(frozen=True)
class FourierParams:
    n: int
    k: int
    L: int
    M: int
    T: int = 16
    N: int = 4
    y: Fraction = Fraction(0)
    I: RationalInterval = field(default_factory=RationalInterval.unit)

    def __post_init__(self):
        object.__setattr__(self, "y", as_rational(self.y))
        if min(self.n, self.k, self.L) < 0:
            raise ValueError("n, k and L must be nonnegative")
        if self.L > self.M:
            raise ValueError("need L <= M")
        if self.T < 1 or self.N < 2:
            raise ValueError("need T >= 1 and N >= 2")
        if not (self.I.is_unit or (0 <= self.I.lo and self.I.hi <= 1)):
            raise ValueError("I must be [0, 1] or a subinterval of it")
        if self.L < boundary_level(self.I):
            raise ValueError(f"L = {self.L} is below the boundary level {boundary_level(self.I)} of I")

    @property
    def r(self) -> int:
        return 1 << (self.n + self.k)

    @property
    def term_count(self) -> int:
        return (1 << self.k) * self.T

    def error_scale(self) -> float:
        """``2^(M-L) |L_L & I| / T^N``, the shape of the truncation error."""
        size = cantor.count_endpoints_in_interval(self.L, self.I, "left")
        return 2.0 ** (self.M - self.L) * size / float(self.T) ** self.N


# -- exact phase reduction -----------------------------------------------------


def _mulmod(c, a: np.ndarray, p: int) -> np.ndarray:
    # (c * a) mod p in int64 for 0 <= c, a < p < 2**40, splitting a at bit 17.
    # c may be a scalar or an array broadcasting against a.
    a_hi, a_lo = a >> 17, a & ((1 << 17) - 1)
    hi = (c * a_hi) % p
    return ((hi << 17) % p + (c * a_lo) % p) % p


def _left_numerators(L: int, I: RationalInterval) -> np.ndarray:
    a = np.zeros(1, dtype=np.int64)
    for _ in range(L):
        a = (3 * a[:, None] + np.array([0, 2], dtype=np.int64)).ravel()
    if I.is_unit:
        return a
    lo, hi = cantor._numerator_range(L, I)
    return a[(a >= lo) & (a <= hi)]


def _frac_pow2_times(n: int, a: np.ndarray, L: int) -> np.ndarray:
    """``frac(2^n a / 3^L)`` as float64, exact up to the final rounding."""
    p = 3**L
    if p >= 1 << 40:
        return np.array([float(Fraction((pow(2, n, p) * int(v)) % p, p)) for v in a])
    return _mulmod(pow(2, n, p), a, p).astype(np.float64) / p


# -- the two sides --------------------------------------------------------------


def fourier_lhs(p: FourierParams, bump_spec: Optional[BumpSpec] = None) -> float:
    """``sum_{x in L_M & I (mod 1)} sum_b phi(2^(n+k) (x + y - b / 2^n))``.

    Since the left side runs over ``x`` modulo 1, ``b`` ranges over all
    integers; only the few ``b`` within ``2 / r`` of ``x + y`` contribute.
    """
    if p.M > MAX_LHS_LEVEL:
        raise cantor.BudgetExceeded(f"direct summation is limited to M <= {MAX_LHS_LEVEL}")
    a = _left_numerators(p.M, p.I)
    if a.size == 0:
        return 0.0
    # frac(2^n (x + y)) = frac(2^n a / 3^M + 2^n y)
    yq = p.y * (1 << p.n)
    yfrac = float(yq - math.floor(yq))
    z = _frac_pow2_times(p.n, a, p.M) + yfrac
    z -= np.floor(z)
    scale = float(1 << p.k)
    total = []
    # |u| < 2 with u = 2^k (z - shift) needs shift within 2^(1-k) of z in [0, 1).
    reach = int(math.ceil(2.0 / scale)) + 1
    for shift in range(-reach, reach + 2):
        total.append(math.fsum(bump(scale * (z - shift)).tolist()))
    return math.fsum(total)


class RhsResult(NamedTuple):
    main: float
    zero_mode: float


def _product_phases(n: int, m: np.ndarray, L: int, M: int) -> np.ndarray:
    """``prod_{j=L+1}^{M} (1 + e(2^(n+1) m / 3^j)) / 2`` as complex128."""
    out = np.ones(m.shape, dtype=np.complex128)
    for j in range(L + 1, M + 1):
        p = 3**j
        if p < 1 << 40:
            res = _mulmod(pow(2, n + 1, p), m % p, p)
            theta = res.astype(np.float64) / p
        else:
            c = pow(2, n + 1, p)
            theta = np.array([((c * int(v)) % p) / p for v in m], dtype=np.float64)
        # (1 + e(t)) / 2 = e(t / 2) cos(pi t)
        out *= np.cos(np.pi * theta) * np.exp(1j * np.pi * theta)
    return out


def _endpoint_sums(n: int, m: np.ndarray, a: np.ndarray, L: int) -> np.ndarray:
    """``sum_{x in L_L & I} e(2^n m x)`` for each ``m``."""
    p = 3**L
    out = np.empty(m.shape, dtype=np.complex128)
    if p >= 1 << 40:
        c = pow(2, n, p)
        for i, mv in enumerate(m.tolist()):
            ph = np.array([((c * mv * int(v)) % p) / p for v in a])
            out[i] = complex(np.cos(2 * np.pi * ph).sum(), np.sin(2 * np.pi * ph).sum())
        return out
    ai = _mulmod(pow(2, n, p), a, p)
    rows = max(1, (1 << 22) // a.size)
    for s in range(0, m.size, rows):
        mm = (m[s:s + rows] % p)[:, None]
        ph = 2 * np.pi * (_mulmod(mm, ai[None, :], p).astype(np.float64) / p)
        out[s:s + rows] = np.cos(ph).sum(axis=1) + 1j * np.sin(ph).sum(axis=1)
    return out


def _y_phases(n: int, m: np.ndarray, y: Fraction) -> np.ndarray:
    q = y.denominator
    c = (pow(2, n, q) * y.numerator) % q
    if q < 1 << 40:
        res = _mulmod(c, m % q, q).astype(np.float64) / q
    else:
        res = np.array([(c * int(v)) % q for v in m.tolist()], dtype=np.float64) / q
    return np.exp(2j * np.pi * res)


def fourier_rhs(
    p: FourierParams, bump_spec: Optional[BumpSpec] = None, chunk: int = RHS_CHUNK, max_terms: int = MAX_TERMS
) -> RhsResult:
    """Truncated frequency side of the counting identity and its ``m = 0`` term.

    Terms are grouped by ``m`` in ascending ``|m|``, in fixed-size chunks, and
    every sum is a correctly rounded :func:`math.fsum`. The result therefore
    does not depend on how the chunks are scheduled.
    """
    terms = p.term_count
    if terms > max_terms:
        raise cantor.BudgetExceeded(f"2^k T = {terms} exceeds the term limit {max_terms}")
    a = _left_numerators(p.L, p.I)
    if a.size == 0:
        return RhsResult(0.0, 0.0)
    bump_spec = bump_spec or BumpSpec()
    hats = bump_spec.hat_grid(p.k, terms)
    pref = 2.0 ** (p.M - p.L - p.k)
    zero = float(pref * hats[0] * a.size)
    partial = [zero]
    ms = np.arange(1, terms + 1, dtype=np.int64)
    for start in range(0, ms.size, chunk):
        m = ms[start:start + chunk]
        # m and -m give complex conjugates, so together they add twice the real part.
        s = _endpoint_sums(p.n, m, a, p.L) * _product_phases(p.n, m, p.L, p.M) * _y_phases(p.n, m, p.y)
        partial.append(math.fsum((2.0 * pref * hats[m] * s.real).tolist()))
    return RhsResult(math.fsum(partial), zero)


# -- product bound and final counts -----------------------------------------------


class ProductBound(NamedTuple):
    lhs: float
    rhs: float
    ok: bool


def product_bound_check(n: int, m: int, L: int, M: int) -> ProductBound:
    """Check ``|prod_{j=L+1}^M (1 + e(2^(n+1) m / 3^j)) / 2| <= rho^w``.

    ``w`` is the windowed base-3 digit-change count of ``2^(n+1) |m|`` and
    ``rho = cos(pi / 9)``.

    >>> product_bound_check(0, 1, 1, 2).ok
    True
    """
    if m == 0:
        raise ValueError("m must be nonzero")
    if not 1 <= L <= M:
        raise ValueError("need 1 <= L <= M")
    lhs = 1.0
    y = (1 << (n + 1)) * m
    for j in range(L + 1, M + 1):
        p = 3**j
        lhs *= abs(math.cos(math.pi * ((y % p) / p)))
    w = windowed_digit_changes_base3(abs(y), L, M)
    rhs = RHO**w
    return ProductBound(lhs, rhs, lhs <= rhs + PRODUCT_SLACK)


def final_count_level(variant: str, n: int, k: int) -> int:
    """The level ``M`` tied to ``2^-(n+k)`` for each part of the final count.

    ``lower``: ``3^(-5-M) < 2^(-n-k) <= 3^(-4-M)``;
    ``upper``: ``3^(5-M) < 2^(-n-k) <= 3^(6-M)``.
    """
    r = 1 << (n + k)
    e = 0
    while 3 ** (e + 1) <= r:
        e += 1
    # e is the exponent with 3^e <= 2^(n+k) < 3^(e+1).
    if variant == "lower":
        M = e - 4
    elif variant == "upper":
        M = e + 6
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if M < 1:
        raise ValueError(f"(n, k) = ({n}, {k}) gives no positive level M for the {variant} count")
    return M


class FinalCount(NamedTuple):
    M: int
    count: int
    predicted: Fraction
    ratio: float


def final_count_ratio(
    variant: str,
    n: int,
    k: int,
    theta: RationalLike = 0,
    I: Optional[RationalInterval] = None,
    budget: int = cantor.DEFAULT_NODE_BUDGET,
) -> FinalCount:
    """Exact count in the final-count region against ``2^(M-k) mu(I)``.

    ``lower`` counts ``C_M & 0.2 A_n(M) & 0.2 I``; ``upper`` counts
    ``C_M & (45 A_n(M) + theta) & 5 I``.
    """
    if k < 1:
        raise ValueError("need k >= 1")
    if I is None:
        I = RationalInterval.unit()
    M = final_count_level(variant, n, k)
    if variant == "lower":
        sys = cantor.BallSystem.level(n, M, Fraction(1, 5))
        region = I.dilate(Fraction(1, 5))
    else:
        sys = cantor.BallSystem.level(n, M, 45, as_rational(theta))
        region = I.dilate(5)
    count = cantor.count_endpoints_in_system(M, sys, region, "all", budget)
    predicted = Fraction(1 << M, 1 << k) * cantor.measure_of_interval(I)
    ratio = float(Fraction(count) / predicted) if predicted else math.inf
    return FinalCount(M, count, predicted, ratio)
