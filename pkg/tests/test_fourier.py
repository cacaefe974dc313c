import math
import random
from fractions import Fraction

import numpy as np
import pytest

from dyadcantor.cantor import BallSystem, BudgetExceeded, RationalInterval, count_endpoints_in_system
from dyadcantor.fourier import (
    RHO,
    BumpSpec,
    FourierParams,
    bump,
    bump_transform,
    bump_transform_fast,
    final_count_level,
    final_count_ratio,
    fourier_lhs,
    fourier_rhs,
    product_bound_check,
)

from oracles import endpoints

F = Fraction


def test_bump_shape():
    xs = np.linspace(-3, 3, 6001)
    v = bump(xs)
    assert np.all((v >= 0) & (v <= 1))
    assert np.all(v[np.abs(xs) <= 1] == 1)
    assert np.all(v[np.abs(xs) >= 2] == 0)
    assert np.array_equal(v, bump(-xs))


def test_transform_at_zero():
    v = bump_transform(0, 80)
    assert 2 <= v.value <= 4
    assert v.error <= 2.0**-80
    # Independent oracle: composite Simpson on the ramp, plus the plateau.
    x = np.linspace(1, 2, 200001)
    h = x[1] - x[0]
    y = bump(x)
    simpson = h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum())
    assert abs(float(v.value) - (2 + 2 * simpson)) < 1e-9


def test_transform_even_and_fast_path():
    for t in (F(1, 3), F(5, 2), F(7), F(33, 4)):
        a, b = bump_transform(t), bump_transform(-t)
        assert a.value == b.value
        assert abs(float(bump_transform_fast(float(t))) - float(a.value)) < 1e-13


def test_envelope_holds_on_held_out_frequencies():
    spec = BumpSpec()
    # Dense near the origin, where (1 + t)^4 |phihat(t)| peaks, then coarse.
    train = [F(i, 16) for i in range(0, 65, 2)] + [F(i, 2) for i in range(9, 81, 3)]
    held = [F(i, 16) for i in range(1, 65, 2)] + [F(i, 7) for i in range(29, 280, 17)]
    C = spec.fit_envelope(train)
    assert C > 0 and spec.envelope_order == 4
    assert all(abs(spec.hat(t)) <= spec.envelope(t) for t in held)


def _brute_lhs(n, k, M, y, I):
    r = 1 << (n + k)
    total = 0.0
    for x in endpoints(M, "left"):
        if x not in I:
            continue
        for b in range(-(2 << n), (3 << n) + 1):
            u = r * (x + y - F(b, 1 << n))
            if abs(u) < 2:
                total += float(bump(float(u)))
    return total


def test_lhs_brute_force():
    cases = [(2, 3, 4, 0, RationalInterval.unit()), (1, 1, 5, F(1, 7), RationalInterval.unit()),
             (3, 2, 6, F(2, 5), RationalInterval.closed(F(73, 100), F(19, 20)))]
    for n, k, M, y, I in cases:
        p = FourierParams(n, k, 1 if I.is_unit else 5, M, y=y, I=I)
        assert fourier_lhs(p) == pytest.approx(_brute_lhs(n, k, M, y, I), abs=1e-12)


def test_lhs_gap_interval_is_zero():
    gap = RationalInterval.closed(F(2, 5), F(3, 5))
    p = FourierParams(3, 2, 3, 8, I=gap)
    assert fourier_lhs(p) == 0
    assert fourier_rhs(p) == (0.0, 0.0)


def test_lhs_plateau_counts_exactly():
    # Once 2^(1-k) < 3^-M the only x near a dyadic sit on it, so weights are all 1.
    for n, M in ((2, 3), (3, 4), (1, 5)):
        k = math.ceil(M * math.log2(3)) + 2
        p = FourierParams(n, k, 1, M)
        sys = BallSystem(n, F(1, 1 << (n + k)) * 2)
        want = count_endpoints_in_system(M, sys, RationalInterval.closed(0, F(1, 2)), "left")
        assert fourier_lhs(p) == want


def test_lhs_rejects_large_level():
    with pytest.raises(BudgetExceeded):
        fourier_lhs(FourierParams(2, 1, 1, 23))


def test_rhs_zero_mode_and_term_guard():
    spec = BumpSpec()
    for n, k, L, M in ((2, 1, 2, 8), (3, 2, 5, 10), (5, 3, 6, 12)):
        z = fourier_rhs(FourierParams(n, k, L, M, T=8)).zero_mode
        assert z == pytest.approx(2.0 ** (M - k) * spec.hat(0), rel=1e-14)
    with pytest.raises(BudgetExceeded):
        fourier_rhs(FourierParams(2, 10, 1, 4, T=1000))


def test_rhs_L_equals_M():
    # Empty product: the rhs equals the bare endpoint sum, so it must match the lhs
    # as well as the L = M - 1 arrangement does.
    p = FourierParams(2, 3, 6, 6, T=32)
    q = FourierParams(2, 3, 5, 6, T=32)
    assert fourier_rhs(p).main == pytest.approx(fourier_lhs(p), rel=1e-6)
    assert fourier_rhs(q).main == pytest.approx(fourier_lhs(p), rel=1e-6)


def test_rhs_independent_of_chunking():
    p = FourierParams(3, 2, 4, 10, T=16, y=F(1, 7))
    a = fourier_rhs(p, chunk=7)
    b = fourier_rhs(p, chunk=4096)
    assert a == b


def test_params_reject_bad_levels():
    with pytest.raises(ValueError):
        FourierParams(1, 1, 5, 4)
    with pytest.raises(ValueError):
        FourierParams(1, 1, 1, 6, I=RationalInterval.closed(F(2, 5), F(3, 5)))
    with pytest.raises(ValueError):
        FourierParams(1, 1, 3, 6, I=RationalInterval.closed(F(1, 3), F(3, 5)))


def test_product_bound_examples():
    assert product_bound_check(3, 17, 5, 5) == (1.0, 1.0, True)
    r = product_bound_check(0, 1, 1, 3)
    assert r.lhs == pytest.approx(math.cos(2 * math.pi / 9) * math.cos(2 * math.pi / 27))
    assert r.rhs == pytest.approx(RHO) and r.ok
    r = product_bound_check(0, 1, 1, 2)
    assert r.lhs == pytest.approx(math.cos(2 * math.pi / 9)) and r.ok
    assert RHO == pytest.approx(abs((1 + np.exp(2j * np.pi / 9)) / 2))


def test_product_bound_random():
    rng = random.Random(5)
    for _ in range(2000):
        n = rng.randint(0, 40)
        m = rng.choice((-1, 1)) * rng.randint(1, 10**6)
        L = rng.randint(1, 59)
        M = rng.randint(L + 1, 60)
        assert product_bound_check(n, m, L, M).ok


def test_zero_mode_dominance():
    # FinalCount-admissible cells with small k: non-zero modes stay under half.
    worst = 0.0
    for n in (8, 12, 16, 20, 24, 30):
        for k in (1, 2, 3):
            M = final_count_level("lower", n, k)
            if M > 16:
                continue
            r = fourier_rhs(FourierParams(n, k, 1, M, T=16))
            worst = max(worst, abs(r.main - r.zero_mode) / r.zero_mode)
    assert worst <= 0.5


def test_final_count_levels():
    for n in range(1, 40):
        for k in (1, 2, 3):
            r = F(1, 1 << (n + k))
            try:
                M = final_count_level("lower", n, k)
                assert F(1, 3 ** (5 + M)) < r <= F(1, 3 ** (4 + M))
            except ValueError:
                pass
            M = final_count_level("upper", n, k)
            assert F(1, 3 ** (M - 5)) < r <= F(1, 3 ** (M - 6))


def test_final_count_grid_and_gap():
    lows, ups = [], []
    for n in range(8, 18):
        for k in (1, 2):
            lows.append(final_count_ratio("lower", n, k).ratio)
            ups.append(final_count_ratio("upper", n, k).ratio)
    assert min(lows) > 0 and max(ups) < math.inf
    gap = RationalInterval.ball(F(1, 2), F(1, 40))
    assert final_count_ratio("upper", 5, 1, 0, gap).count == 0
