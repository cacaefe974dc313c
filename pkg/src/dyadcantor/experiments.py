"""Empirical studies: sampling, hit counting, series, and exact audits.

Approximation functions are given by :class:`PsiSpec`, which maps the
exponent ``n`` to ``psi(2^n)`` (or ``psi(3^n)`` in the triadic studies) and
certifies irrational values by a pair of rationals. Points of the Cantor set
are sampled digit by digit; hit verdicts are exact, or explicitly uncertain
when the truncated expansion cannot decide them.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import gmpy2
import mpmath
import numpy as np

from . import cantor
from .cantor import BallSystem, RationalInterval
from .numeric import RationalLike, as_rational

GAMMA = math.log(2) / math.log(3)
PRNG_NAME = "numpy.random.PCG64 seeded by SeedSequence([seed, index])"
BRACKET_BITS = 160
BRACKET_SLACK_BITS = 80

# Exponents that may be named instead of written as rationals.
_NAMED_EXPONENTS = {
    "gamma": lambda: mpmath.log(2) / mpmath.log(3),
    "1/gamma": lambda: mpmath.log(3) / mpmath.log(2),
    "log3/log2": lambda: mpmath.log(3) / mpmath.log(2),
}


def iterated_logs(n: float) -> Tuple[float, float, float]:
    """``(log n, log log n, log log log n)``; NaN where undefined."""
    l1 = math.log(n) if n > 0 else math.nan
    l2 = math.log(l1) if l1 > 0 else math.nan
    l3 = math.log(l2) if l2 > 0 else math.nan
    return l1, l2, l3


def _mpf_to_fraction(x) -> Fraction:
    man, exp = mpmath.mpf(x).man_exp
    man = int(man)
    return Fraction(man * 2**exp) if exp >= 0 else Fraction(man, 2 ** (-exp))


# -- approximation functions ------------------------------------------------------


class PsiSpec:
    """An approximation function ``n -> psi(b^n)`` given by a tag.

    Tags (as accepted by :meth:`parse`):

    ``const:c``
        the constant ``c >= 0``;
    ``power:a``
        ``n^-a``; ``a`` is a rational or one of ``gamma``, ``1/gamma``,
        ``log3/log2``;
    ``log_power:alpha:a``
        ``(log n)^alpha n^-a``, taken as 0 at ``n = 1`` where ``log n = 0``;
    ``thm_divergence``
        ``2^(-log log n / log log log n)``, taken as 0 for ``n <= 15`` where
        ``log log log n <= 0``;
    ``table:v1,v2,...``
        explicit rationals for ``n = 1, 2, ...``.

    :meth:`bracket` returns rationals ``lo <= psi <= hi`` with
    ``hi - lo <= 2^-64 psi``; rational values come back with ``lo == hi``.
    """

    def __init__(self, tag: str, params: Tuple = ()):
        self.tag = tag
        self.params = tuple(params)
        self._validate()

    def _validate(self):
        t, p = self.tag, self.params
        if t == "const":
            if len(p) != 1 or as_rational(p[0]) < 0:
                raise ValueError("const takes one nonnegative rational")
        elif t == "power":
            if len(p) != 1:
                raise ValueError("power takes one exponent")
            self._exponent(p[0])
        elif t == "log_power":
            if len(p) != 2:
                raise ValueError("log_power takes alpha and an exponent")
            self._exponent(p[0])
            self._exponent(p[1])
        elif t == "thm_divergence":
            if p:
                raise ValueError("thm_divergence takes no parameters")
        elif t == "table":
            if not p or any(as_rational(v) < 0 for v in p):
                raise ValueError("table needs nonnegative rationals")
        else:
            raise ValueError(f"unknown psi tag {t!r}")

    @staticmethod
    def _exponent(a):
        if isinstance(a, str) and a in _NAMED_EXPONENTS:
            return a
        return as_rational(a)

    @classmethod
    def parse(cls, text: str) -> "PsiSpec":
        """Build from ``tag:param:...``, e.g. ``"power:1/gamma"``."""
        head, _, rest = text.strip().partition(":")
        if head == "table":
            return cls(head, tuple(v for v in rest.split(",") if v))
        params = tuple(rest.split(":")) if rest else ()
        return cls(head, params)

    def __str__(self) -> str:
        if self.tag == "table":
            return "table:" + ",".join(str(v) for v in self.params)
        return ":".join([self.tag, *map(str, self.params)])

    def __repr__(self) -> str:
        return f"PsiSpec.parse({str(self)!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, PsiSpec) and str(self) == str(other)

    def __hash__(self) -> int:
        return hash(str(self))

    # exact or high-precision values

    def _exact(self, n: int) -> Optional[Fraction]:
        t, p = self.tag, self.params
        if t == "const":
            return as_rational(p[0])
        if t == "table":
            if not 1 <= n <= len(p):
                raise ValueError(f"table psi has no value at n = {n}")
            return as_rational(p[n - 1])
        if t == "thm_divergence" and n <= 15:
            return Fraction(0)
        if t == "log_power" and n == 1:
            return Fraction(0)
        if t == "power":
            a = self._exponent(p[0])
            if isinstance(a, Fraction):
                # n^(p/q) is rational exactly when n^|p| is a perfect q-th power.
                root, exact = gmpy2.iroot(gmpy2.mpz(n) ** abs(a.numerator), a.denominator)
                if exact:
                    return Fraction(1, int(root)) if a >= 0 else Fraction(int(root))
        return None

    def _mp(self, n: int):
        t, p = self.tag, self.params

        def expo(a):
            a = self._exponent(a)
            if isinstance(a, str):
                return _NAMED_EXPONENTS[a]()
            return mpmath.mpf(a.numerator) / a.denominator

        nm = mpmath.mpf(n)
        if t == "power":
            return nm ** (-expo(p[0]))
        if t == "log_power":
            return mpmath.log(nm) ** expo(p[0]) * nm ** (-expo(p[1]))
        if t == "thm_divergence":
            ll = mpmath.log(mpmath.log(nm))
            return mpmath.mpf(2) ** (-ll / mpmath.log(ll))
        raise AssertionError(t)

    def bracket(self, n: int) -> Tuple[Fraction, Fraction]:
        if n < 1:
            raise ValueError("psi is indexed by n >= 1")
        return _bracket_cached(self, n)

    def value(self, n: int) -> float:
        exact = self._exact(n)
        if exact is not None:
            return float(exact)
        with mpmath.workprec(BRACKET_BITS):
            return float(self._mp(n))

    def values(self, ns: np.ndarray) -> np.ndarray:
        """Double-precision ``psi`` on an array of exponents (for the series)."""
        ns = np.asarray(ns, dtype=np.float64)
        t, p = self.tag, self.params

        def expo(a):
            a = self._exponent(a)
            return float(_NAMED_EXPONENTS[a]()) if isinstance(a, str) else float(a)

        with np.errstate(divide="ignore", invalid="ignore"):
            if t == "const":
                return np.full(ns.shape, float(as_rational(p[0])))
            if t == "table":
                return np.array([self.value(int(n)) for n in ns])
            if t == "power":
                return ns ** (-expo(p[0]))
            if t == "log_power":
                out = np.log(ns) ** expo(p[0]) * ns ** (-expo(p[1]))
                return np.where(ns > 1, out, 0.0)
            ll = np.log(np.log(ns))
            out = 2.0 ** (-ll / np.log(ll))
            return np.where(ns > 15, out, 0.0)


@lru_cache(maxsize=1 << 16)
def _bracket_cached(spec: PsiSpec, n: int) -> Tuple[Fraction, Fraction]:
    exact = spec._exact(n)
    if exact is not None:
        return exact, exact
    with mpmath.workprec(BRACKET_BITS):
        v = _mpf_to_fraction(spec._mp(n))
    slack = v / 2**BRACKET_SLACK_BITS
    return v - slack, v + slack


# -- sampling -------------------------------------------------------------------


@dataclass(frozen=True)
class SampledPoint:
    """The first ``depth`` ternary digits of a mu-random point.

    The point itself lies in ``[numerator / 3^depth, (numerator + 1) / 3^depth]``.
    """

    seed: int
    index: int
    depth: int
    digits: str

    @property
    def numerator(self) -> int:
        return int(gmpy2.mpz(self.digits, 3))

    def bounds(self) -> Tuple[Fraction, Fraction]:
        d = 3**self.depth
        a = self.numerator
        return Fraction(a, d), Fraction(a + 1, d)


def sample_point(seed: int, depth: int, index: int = 0) -> SampledPoint:
    """Digits iid uniform on {0, 2}, from an independent stream per ``index``."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, index])))
    bits = rng.integers(0, 2, size=depth, dtype=np.uint8)
    digits = (bits * 2 + ord("0")).tobytes().decode("ascii")
    return SampledPoint(seed, index, depth, digits)


# -- certified hit counting ----------------------------------------------------------

HIT, MISS, UNCERTAIN = "hit", "miss", "uncertain"


def default_depth(n_max: int, base: int) -> int:
    """Enough digits that ``base^n_max 3^-depth`` is below ``3^-64``."""
    return int(math.ceil(n_max * math.log(base) / math.log(3))) + 64


def _norm_range2(r: int, w: int, d: int) -> Tuple[int, int]:
    """Min and max of ``2 d ||x||`` over ``x in [r, r + w] / d``, with ``0 <= r < d``."""
    if 2 * w >= d:
        lo = 0 if r == 0 or r + w >= d else min(r, d - r - w)
        return 2 * lo, d
    s = r + w
    if s >= d:
        # The interval straddles an integer.
        return 0, 2 * max(min(r, d - r), min(s - d, 2 * d - s))
    lo = 2 * min(r, d - s)
    if 2 * r <= d <= 2 * s:
        return lo, d
    return lo, 2 * max(min(r, d - r), min(s, d - s))


def _thresholds(psi: PsiSpec, n_max: int, d: int) -> List[Tuple[int, int, int, int]]:
    # ||x|| < p/q  <=>  (2 d ||x||) q < 2 d p, so scale the numerators once.
    out = []
    for n in range(1, n_max + 1):
        lo, hi = psi.bracket(n)
        out.append((2 * d * lo.numerator, lo.denominator, 2 * d * hi.numerator, hi.denominator))
    return out


def _verdicts(r: int, width: int, d: int, base: int, thresholds) -> List[str]:
    out = []
    for a_lo, q_lo, a_hi, q_hi in thresholds:
        r = (r * base) % d
        width *= base
        if width >= d:
            dmin, dmax = 0, d
        else:
            dmin, dmax = _norm_range2(r, width, d)
        if dmax * q_lo < a_lo:
            out.append(HIT)
        elif dmin * q_hi >= a_hi:
            out.append(MISS)
        else:
            out.append(UNCERTAIN)
    return out


def _start(alpha) -> Tuple[int, int, int]:
    if isinstance(alpha, SampledPoint):
        d = 3**alpha.depth
        return alpha.numerator % d, 1, d
    q = as_rational(alpha)
    return q.numerator % q.denominator, 0, q.denominator


def hit_verdicts(
    alpha: Union[SampledPoint, Fraction, int, str], base: int, psi: PsiSpec, n_max: int
) -> List[str]:
    """Verdict of ``||base^n alpha|| < psi(base^n)`` for ``n = 1..n_max``.

    For an exact rational the verdicts are ``hit`` or ``miss``. For a sampled
    point the unknown tail moves ``base^n alpha`` within an interval of width
    ``base^n / 3^depth``; a hit is reported only if it holds on the whole
    interval against ``psi^-``, a miss only if it fails on all of it against
    ``psi^+``, and anything else is ``uncertain``.
    """
    if base not in (2, 3):
        raise ValueError("base must be 2 or 3")
    if n_max < 1:
        raise ValueError("n_max must be positive")
    r, width, d = _start(alpha)
    return _verdicts(r, width, d, base, _thresholds(psi, n_max, d))


class HitCount(NamedTuple):
    hits: List[int]
    uncertain: List[int]


def hit_count(alpha, base: int, psi: PsiSpec, n_max: int) -> HitCount:
    """Certified hit indices ``n`` (and the undecided ones) up to ``n_max``."""
    verdicts = hit_verdicts(alpha, base, psi, n_max)
    hits = [n for n, v in enumerate(verdicts, 1) if v == HIT]
    unc = [n for n, v in enumerate(verdicts, 1) if v == UNCERTAIN]
    return HitCount(hits, unc)


class SampleHits(NamedTuple):
    index: int
    hits: int
    uncertain: int


def sample_hits(
    seed: int, samples: int, base: int, psi: PsiSpec, n_max: int, depth: Optional[int] = None
) -> List[SampleHits]:
    """Hit counts for ``samples`` independent mu-random points."""
    depth = depth or default_depth(n_max, base)
    d = 3**depth
    thresholds = _thresholds(psi, n_max, d)
    out = []
    for i in range(samples):
        r, width, _ = _start(sample_point(seed, depth, i))
        verdicts = _verdicts(r, width, d, base, thresholds)
        out.append(SampleHits(i, verdicts.count(HIT), verdicts.count(UNCERTAIN)))
    return out


# -- series ------------------------------------------------------------------------


def _decay_factor(ns: np.ndarray) -> np.ndarray:
    # 2^(-log n / (log log n log log log n)), counted as 1 while the logs are undefined.
    with np.errstate(divide="ignore", invalid="ignore"):
        l1 = np.log(ns)
        l2 = np.log(l1)
        l3 = np.log(l2)
        f = 2.0 ** (-l1 / (l2 * l3))
    return np.where(ns >= 16, f, 1.0)


def _h_values(h: str, ns: np.ndarray) -> np.ndarray:
    # h(2^n) for the conditional series.
    y_log = ns * math.log(2)
    with np.errstate(divide="ignore", invalid="ignore"):
        if h == "log":
            return y_log
        if h == "loglog":
            return np.log(y_log)
        if h == "stewart":
            l2 = np.log(y_log)
            return np.where(l2 > 1, l2 / np.log(l2), 0.0)
    raise ValueError(f"unknown h {h!r}")


def series_terms(series: str, psi: PsiSpec, n_max: int, eps: float = 1.0, h: str = "loglog") -> np.ndarray:
    """The terms ``a_1 .. a_{n_max}`` of one of the criteria series."""
    ns = np.arange(1, n_max + 1, dtype=np.float64)
    p = psi.values(ns)
    if series in ("benchmark", "lsv_triadic"):
        return p**GAMMA
    if series == "main_convergence":
        return _decay_factor(ns) * p**GAMMA + p
    if series == "conditional":
        return p + 2.0 ** (-eps * _h_values(h, ns))
    raise ValueError(f"unknown series {series!r}")


class SeriesResult(NamedTuple):
    checkpoints: List[Tuple[int, float]]
    verdict_hint: str
    tail_slope: float


CONVERGING_SLOPE = -0.02
DIVERGING_SLOPE = -0.005


def series_eval(
    series: str, psi: PsiSpec, n_max: int, eps: float = 1.0, h: str = "loglog", tail_blocks: int = 6
) -> SeriesResult:
    """Partial sums at ``n = 2^j`` (and ``n_max``) with a diagnostic label.

    The label looks at dyadic block sums ``B_j = sum_{2^j <= n < 2^(j+1)} a_n``,
    the condensed form of the series. A clearly falling ``log2 B_j`` (least
    squares slope below -0.02 over the last blocks) reads as ``converging``, a
    flat or rising one (slope above -0.005) as ``diverging``. The label says
    nothing about the infinite series; it only summarises the finite data.
    """
    if n_max < 3:
        raise ValueError("n_max must be at least 3")
    terms = series_terms(series, psi, n_max, eps, h)
    checkpoints = []
    j = 0
    while (1 << j) <= n_max:
        checkpoints.append((1 << j, math.fsum(terms[: 1 << j].tolist())))
        j += 1
    if checkpoints[-1][0] != n_max:
        checkpoints.append((n_max, math.fsum(terms.tolist())))
    blocks = []
    j = 0
    while (1 << (j + 1)) <= n_max + 1:
        blocks.append(math.fsum(terms[(1 << j) - 1:(1 << (j + 1)) - 1].tolist()))
        j += 1
    tail = [(i, b) for i, b in enumerate(blocks) if i >= 2][-tail_blocks:]
    if all(b == 0 for _, b in tail):
        return SeriesResult(checkpoints, "converging", -math.inf)
    if len(tail) < 3 or any(b <= 0 for _, b in tail):
        return SeriesResult(checkpoints, "inconclusive", math.nan)
    xs = np.array([i for i, _ in tail], dtype=np.float64)
    ys = np.log2(np.array([b for _, b in tail]))
    slope = float(np.polyfit(xs, ys, 1)[0])
    if slope < CONVERGING_SLOPE:
        hint = "converging"
    elif slope > DIVERGING_SLOPE:
        hint = "diverging"
    else:
        hint = "inconclusive"
    return SeriesResult(checkpoints, hint, slope)


# -- measure audits ---------------------------------------------------------------------


def _exp3_floor(x: Fraction) -> int:
    """Largest ``e`` with ``3^e <= x``, for rational ``x >= 1``."""
    e = 0
    while x >= 3 ** (e + 1):
        e += 1
    return e


class MeasureBracket(NamedTuple):
    lo: Fraction
    hi: Fraction


def measure_bracket(
    n: int, psi: PsiSpec, I: Optional[RationalInterval] = None, t: Fraction = Fraction(1),
    shift: Fraction = Fraction(0), budget: int = cantor.DEFAULT_NODE_BUDGET,
) -> MeasureBracket:
    """``mu(t A_n + shift & I)`` for ``psi^-`` and ``psi^+``; the truth lies between."""
    lo, hi = psi.bracket(n)
    vals = []
    for p in (lo, hi):
        if p == 0:
            vals.append(Fraction(0))
        else:
            vals.append(cantor.measure_of_system(BallSystem.dyadic(n, p, t, shift), I, budget))
    return MeasureBracket(vals[0], vals[1])


@dataclass
class ConvergenceRow:
    n: int
    k_n: Optional[int]
    M: int
    N: int
    psi: float
    mu_lo: Fraction
    mu_hi: Fraction
    bound_term: float
    ratio: float
    flags: Dict[str, bool]


def convergence_schedule(n: int, psi_value: float) -> Tuple[Optional[int], Dict[str, bool]]:
    """``k_n`` from the convergence argument, with flags on its ingredients."""
    flags = {}
    _, l2, l3 = iterated_logs(n)
    if psi_value <= 0:
        return None, {"psi_positive": False}
    second = math.floor(-math.log(psi_value) / math.log(2)) + 1
    if math.isnan(l3) or l3 <= 0:
        flags["iterated_logs_defined"] = False
        return second, flags
    flags["iterated_logs_defined"] = True
    first = 3 * math.floor(math.log(n) / (l2 * l3))
    return min(first, second), flags


def convergence_audit(
    psi: PsiSpec, ns: Iterable[int], budget: int = cantor.DEFAULT_NODE_BUDGET
) -> List[ConvergenceRow]:
    """Schedule values and exact ``mu(A_n)`` brackets, one row per ``n``.

    Hypotheses that the argument needs only for large ``n`` are evaluated and
    reported in ``flags`` rather than enforced.
    """
    rows = []
    for n in ns:
        p_lo, p_hi = psi.bracket(n)
        pv = psi.value(n)
        k, flags = convergence_schedule(n, pv)
        if k is None:
            M = N = 0
        else:
            M = _exp3_floor(Fraction(1 << (n + max(k, 0)))) - 4
            # 3^(1-N) < psi / (5 2^n) <= 3^(2-N)
            N = _exp3_floor(Fraction(5 << n) / p_lo) + 2
        mu = measure_bracket(n, psi, budget=budget)
        flags["k_positive"] = k is not None and k >= 1
        flags["M_positive"] = M >= 1
        flags["psi_below_3^-99"] = p_hi < Fraction(1, 3**99)
        if k is not None and p_lo > 0:
            x = p_lo / (1 << n)
            flags["valid_drop"] = (
                x / 125 <= Fraction(1, 3**N) <= 5 * x <= Fraction(1, 3**max(M, 0)) <= Fraction(2**9, 1 << n)
            )
        else:
            flags["valid_drop"] = False
        bound = 2.0 ** (-(k or 0) * (1 - GAMMA)) * pv**GAMMA if pv > 0 else 0.0
        ratio = float(mu.hi) / pv**GAMMA if pv > 0 else math.nan
        rows.append(ConvergenceRow(n, k, M, N, pv, mu.lo, mu.hi, bound, ratio, flags))
    return rows


def n_plus(n: int) -> Optional[int]:
    """``n + floor(log n / (log log n log log log n))``; None where undefined."""
    l1, l2, l3 = iterated_logs(n)
    if math.isnan(l3) or l3 <= 0:
        return None
    return n + math.floor(l1 / (l2 * l3))


@dataclass
class ChungErdosFamily:
    """The audit for one of the two bracket families."""

    mu: List[Fraction]
    pair_sum: Fraction
    bound: Fraction
    union: Fraction
    holds: bool
    max_overlap_ratio: float


@dataclass
class ChungErdosReport:
    n_lo: int
    n_hi: int
    window_capped: bool
    lower: ChungErdosFamily
    upper: ChungErdosFamily


def _chung_erdos_family(
    comps: Sequence[cantor.Components], I: RationalInterval, psis: Sequence[float], ns: Sequence[int]
) -> ChungErdosFamily:
    mu_I = cantor.measure_of_interval(I)
    if mu_I == 0:
        raise ValueError("the audit interval has zero measure")
    mus = [cantor.measure_of_components(c, I) / mu_I for c in comps]
    pair = Fraction(0)
    worst = 0.0
    for a in range(len(comps)):
        pair += mus[a]
        for b in range(a + 1, len(comps)):
            m = cantor.measure_of_components(cantor.intersect_components(comps[a], comps[b]), I) / mu_I
            pair += 2 * m
            i, j = ns[a], ns[b]
            claimed = 2.0 ** (i - j) * psis[b] + psis[a] * psis[b]
            if claimed > 0:
                worst = max(worst, float(m) / claimed)
    union = cantor.measure_of_components(cantor.union_components(comps), I) / mu_I
    total = sum(mus, Fraction(0))
    bound = total * total / pair if pair else Fraction(0)
    # The inequality is only asserted when the union has positive measure.
    holds = union == 0 or bound <= union
    return ChungErdosFamily(mus, pair, bound, union, holds, worst)


def chung_erdos_audit(
    psi: PsiSpec,
    n_lo: int,
    I: Optional[RationalInterval] = None,
    max_window: int = 8,
    n_hi: Optional[int] = None,
    budget: int = cantor.DEFAULT_NODE_BUDGET,
) -> ChungErdosReport:
    """Exact second-moment audit of ``A_{n_lo}, ..., A_{n_hi}`` inside ``I``.

    ``n_hi`` defaults to ``n^+`` of ``n_lo``, capped at ``n_lo + max_window``
    (the cap is reported). Both bracket families ``psi^-`` and ``psi^+`` are
    audited, each being a genuine family of sets.
    """
    if I is None:
        I = RationalInterval.unit()
    capped = False
    if n_hi is None:
        target = n_plus(n_lo)
        n_hi = n_lo + max_window if target is None else target
        if n_hi > n_lo + max_window:
            n_hi, capped = n_lo + max_window, True
    if n_hi < n_lo:
        raise ValueError("need n_hi >= n_lo")
    ns = list(range(n_lo, n_hi + 1))
    psis = [psi.value(n) for n in ns]
    families = []
    for side in (0, 1):
        comps = []
        for n in ns:
            p = psi.bracket(n)[side]
            if p == 0:
                comps.append(cantor.Components.empty())
            else:
                comps.append(cantor.system_components(BallSystem.dyadic(n, p), I, budget))
        families.append(_chung_erdos_family(comps, I, psis, ns))
    return ChungErdosReport(n_lo, n_hi, capped, families[0], families[1])


# -- lemma checks -----------------------------------------------------------------------


def connection_level(n: int, psi: Fraction) -> int:
    """Least ``N`` with ``3^-N <= psi / (5 2^n)``."""
    target = Fraction(5 << n) / psi
    N = 0
    while 3**N < target:
        N += 1
    return N


class ConnectionCheck(NamedTuple):
    N: int
    lower: Fraction
    measure: Fraction
    upper: Fraction
    ok: bool


def connection_check(
    n: int, psi: RationalLike, I: Optional[RationalInterval] = None,
    shift: Fraction = Fraction(0), N: Optional[int] = None, budget: int = cantor.DEFAULT_NODE_BUDGET,
) -> ConnectionCheck:
    """Both sides of the measure/count sandwich for ``B_n = A_n + shift``:

    ``2^-(N+1) |C_N & 0.2 B_n & 0.2 I| <= mu(B_n & I) <= 2^-(N-1) |C_N & 5 B_n & 5 I|``.
    """
    psi = as_rational(psi)
    if I is None:
        I = RationalInterval.unit()
    if N is None:
        N = connection_level(n, psi)
    elif Fraction(1, 3**N) > psi / (5 << n):
        raise ValueError("N is too small for the sandwich")
    B = BallSystem.dyadic(n, psi, 1, shift)
    inner = cantor.count_endpoints_in_system(N, B.dilate(Fraction(1, 5)), I.dilate(Fraction(1, 5)), "all", budget)
    outer = cantor.count_endpoints_in_system(N, B.dilate(5), I.dilate(5), "all", budget)
    measure = cantor.measure_of_system(B, I, budget)
    lower = Fraction(inner, 2 ** (N + 1))
    upper = Fraction(outer * 2, 2**N)
    return ConnectionCheck(N, lower, measure, upper, lower <= measure <= upper)


DROP_CONSTANT = 2049 * 1251


class DroppingCheck(NamedTuple):
    fine: int
    coarse: int
    ratio: float
    ok: bool


def valid_drop(n: int, psi: Fraction, M: int, N: int) -> bool:
    x = as_rational(psi) / (1 << n)
    return x / 125 <= Fraction(1, 3**N) <= 5 * x <= Fraction(1, 3**M) <= Fraction(2**9, 1 << n)


def dropping_check(n: int, psi: Fraction, M: int, N: int, budget: int = cantor.DEFAULT_NODE_BUDGET) -> DroppingCheck:
    """``|C_N & 5 A_n|`` against ``|C_M & 5 A_n(M)|``.

    ``ok`` compares with the explicit constant the counting argument gives:
    at most 2049 dyadics per coarse point and 1251 fine digits per dyadic.
    """
    psi = as_rational(psi)
    if not valid_drop(n, psi, M, N):
        raise ValueError("(n, psi, M, N) does not satisfy the level hypothesis")
    fine = cantor.count_endpoints_in_system(N, BallSystem.dyadic(n, psi, 5), None, "all", budget)
    coarse = cantor.count_endpoints_in_system(M, BallSystem.level(n, M, 5), None, "all", budget)
    ratio = fine / coarse if coarse else (0.0 if fine == 0 else math.inf)
    return DroppingCheck(fine, coarse, ratio, fine <= DROP_CONSTANT * coarse)


class ShiftingCheck(NamedTuple):
    coarse: int
    fine: int
    ok_plus_one: bool
    ok_plus_two: bool
    ok_no_term: bool


def shifting_check(
    n: int, M: int, J: int, t: int, shift: Fraction = Fraction(0), I: Optional[RationalInterval] = None,
    budget: int = cantor.DEFAULT_NODE_BUDGET,
) -> ShiftingCheck:
    """Compare ``|C_{M-J} & (t A_n(M-J) + shift) & I|`` with the level-``M`` count.

    Three forms are reported: ``2^(J+1) (coarse + 1) >= fine`` as the lemma
    states it, ``2^(J+1) (coarse + 2) >= fine`` as its proof delivers, and
    ``2^(J+1) coarse >= fine``, claimed when ``I`` contains ``[0, 1]``.
    """
    if not 0 <= J < M:
        raise ValueError("need 0 <= J < M")
    if t < 1:
        raise ValueError("t must be a positive integer")
    if not Fraction(1, 1 << n) > Fraction(2 * t, 3 ** (M - J)):
        raise ValueError("need 2^-n > 2t / 3^(M-J)")
    if I is None:
        I = RationalInterval.unit()
    shift = as_rational(shift)
    coarse = cantor.count_endpoints_in_system(M - J, BallSystem.level(n, M - J, t, shift), I, "all", budget)
    fine = cantor.count_endpoints_in_system(M, BallSystem.level(n, M, t, shift), I, "all", budget)
    c = 1 << (J + 1)
    return ShiftingCheck(coarse, fine, c * (coarse + 1) >= fine, c * (coarse + 2) >= fine, c * coarse >= fine)


def _random_cantor_endpoint(rng: np.random.Generator, level: int) -> Fraction:
    digits = "".join("02"[b] for b in rng.integers(0, 2, size=level))
    a = int(digits, 3)
    if rng.integers(0, 2):
        return Fraction(3**level - a, 3**level)
    return Fraction(a, 3**level)


def _stream(seed: int, tag: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, tag])))


def connection_instances(seed: int, count: int) -> List[dict]:
    """Admissible keyword sets for :func:`connection_check`.

    ``I`` is ``[0, 1]`` or a ball about a Cantor endpoint with radius above
    ``2^-n``; ``N`` is the least admissible level plus 0, 1 or 2.
    """
    rng = _stream(seed, 1)
    out = []
    for _ in range(count):
        n = int(rng.integers(2, 10))
        psi = Fraction(int(rng.integers(1, 64)), 128)
        shift = Fraction(int(rng.integers(0, 1000)), 1000)
        if rng.random() < 0.25:
            I = RationalInterval.unit()
        else:
            z = _random_cantor_endpoint(rng, int(rng.integers(1, 8)))
            I = RationalInterval.ball(z, Fraction(1, 1 << n) * (1 + Fraction(int(rng.integers(1, 200)), 10)))
        N = connection_level(n, psi) + int(rng.integers(0, 3))
        out.append(dict(n=n, psi=psi, I=I, shift=shift, N=N))
    return out


def shifting_instances(seed: int, count: int, max_J: int = 4) -> List[dict]:
    """Keyword sets for :func:`shifting_check` with ``J <= max_J``.

    Shifts put a ball centre near a level-``M`` endpoint so that the counts
    are not trivially zero.
    """
    rng = _stream(seed, 2)
    out = []
    for _ in range(count):
        n = int(rng.integers(1, 7))
        t = int(rng.integers(1, 4))
        J = int(rng.integers(0, max_J + 1))
        lead = 0
        while 3**lead <= 2 * t << n:
            lead += 1
        M = J + lead + int(rng.integers(0, 2))
        c = _random_cantor_endpoint(rng, M)
        shift = c - Fraction(int(rng.integers(0, (1 << n) + 1)), 1 << n) + Fraction(int(rng.integers(-3, 4)), 3 ** (M + 1))
        if rng.random() < 0.2:
            I = RationalInterval.unit()
        else:
            z = _random_cantor_endpoint(rng, M)
            I = RationalInterval.ball(z, Fraction(int(rng.integers(1, 31)), 3 ** int(rng.integers(M - J - 1, M + 1))))
        out.append(dict(n=n, M=M, J=J, t=t, shift=shift, I=I))
    return out


def dropping_instances(seed: int, count: int) -> List[dict]:
    """Keyword sets for :func:`dropping_check` satisfying the level hypothesis."""
    rng = _stream(seed, 3)
    out = []
    while len(out) < count:
        n = int(rng.integers(6, 15))
        psi = Fraction(int(rng.integers(1, 64)), 128)
        x = psi / (1 << n)
        Ns = [N for N in range(60) if x / 125 <= Fraction(1, 3**N) <= 5 * x]
        Ms = [M for M in range(60) if 5 * x <= Fraction(1, 3**M) <= Fraction(2**9, 1 << n)]
        if not Ns or not Ms:
            continue
        out.append(dict(n=n, psi=psi, M=Ms[int(rng.integers(0, len(Ms)))], N=Ns[int(rng.integers(0, len(Ns)))]))
    return out


def product_bound_instances(seed: int, count: int) -> List[Tuple[int, int, int, int]]:
    """Random ``(n, m, L, M)`` with ``n <= 40``, ``0 < |m| <= 10^6``, ``1 <= L < M <= 60``."""
    rng = _stream(seed, 4)
    out = []
    for _ in range(count):
        n = int(rng.integers(0, 41))
        m = int(rng.integers(1, 10**6 + 1)) * (1 if rng.integers(0, 2) else -1)
        L = int(rng.integers(1, 60))
        M = int(rng.integers(L + 1, 61))
        out.append((n, m, L, M))
    return out


# -- reports ----------------------------------------------------------------------------------


Cell = Union[int, float, str, Fraction, None]
RowSource = Union[Sequence[Tuple[Cell, ...]], Callable[[], Iterable[Tuple[Cell, ...]]]]


@dataclass
class ExperimentReport:
    """Rows and summary of one run, ready for :mod:`dyadcantor.emit`.

    ``rows`` is a sequence, or a zero-argument callable returning a fresh
    iterator so that long scans can be emitted more than once without being
    held in memory. ``plot`` names the ``(x, y)`` columns for SVG output.
    ``wall_time`` is kept for the caller but never written by the emitters,
    so outputs of identical runs are byte-identical.
    """

    experiment: str
    parameters: Dict[str, str]
    columns: List[str]
    rows: RowSource = field(default_factory=list)
    summary: Dict[str, Cell] = field(default_factory=dict)
    seed: Optional[int] = None
    plot: Optional[Tuple[str, str]] = None
    float_digits: Optional[int] = None
    wall_time: float = 0.0

    def iter_rows(self) -> Iterable[Tuple[Cell, ...]]:
        return self.rows() if callable(self.rows) else iter(self.rows)

    def timed(self, start: float) -> "ExperimentReport":
        self.wall_time = time.perf_counter() - start
        return self
