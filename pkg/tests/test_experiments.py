import math
import random
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from dyadcantor.cantor import BallSystem, RationalInterval, measure_of_components, measure_of_system, system_components
from dyadcantor.experiments import (
    GAMMA,
    HIT,
    MISS,
    UNCERTAIN,
    ExperimentReport,
    PsiSpec,
    SampledPoint,
    chung_erdos_audit,
    connection_check,
    connection_instances,
    convergence_audit,
    convergence_schedule,
    default_depth,
    dropping_check,
    dropping_instances,
    hit_count,
    hit_verdicts,
    n_plus,
    product_bound_instances,
    sample_hits,
    sample_point,
    series_eval,
    series_terms,
    shifting_check,
    shifting_instances,
)

F = Fraction


def _norm(x):
    return abs(x - round(x))


# -- psi ------------------------------------------------------------------


def test_psi_parse_roundtrip():
    for text in ("const:3/4", "power:1/gamma", "power:log3/log2", "log_power:2:1/gamma", "thm_divergence", "table:1/2,1/3"):
        assert str(PsiSpec.parse(text)) == text
        assert PsiSpec.parse(text) == PsiSpec.parse(text)
    for bad in ("const", "power", "nope:1", "const:-1", "thm_divergence:3"):
        with pytest.raises(ValueError):
            PsiSpec.parse(bad)


def test_psi_brackets_contain_high_precision_value():
    with mpmath.workprec(400):
        g = mpmath.log(2) / mpmath.log(3)
        refs = {
            "power:1/gamma": lambda n: mpmath.mpf(n) ** (-1 / g),
            "power:log3/log2": lambda n: mpmath.mpf(n) ** (-1 / g),
            "power:1/2": lambda n: mpmath.mpf(n) ** -0.5,
            "log_power:-1:gamma": lambda n: mpmath.log(n) ** -1 * mpmath.mpf(n) ** (-g),
            "thm_divergence": lambda n: mpmath.mpf(2) ** (-mpmath.log(mpmath.log(n)) / mpmath.log(mpmath.log(mpmath.log(n)))),
        }
        for text, ref in refs.items():
            spec = PsiSpec.parse(text)
            for n in (2, 3, 9, 16, 17, 100, 4999):
                if text == "thm_divergence" and n <= 15:
                    continue
                lo, hi = spec.bracket(n)
                v = ref(n)
                assert 0 < lo <= hi
                assert mpmath.mpf(lo.numerator) / lo.denominator <= v <= mpmath.mpf(hi.numerator) / hi.denominator
                assert (hi - lo) <= lo / 2**64


def test_psi_exact_and_degenerate_values():
    assert PsiSpec.parse("power:2").bracket(5) == (F(1, 25), F(1, 25))
    assert PsiSpec.parse("power:1/2").bracket(16) == (F(1, 4), F(1, 4))
    assert PsiSpec.parse("power:-3/2").bracket(4) == (8, 8)
    assert PsiSpec.parse("const:3/4").bracket(7) == (F(3, 4), F(3, 4))
    assert PsiSpec.parse("thm_divergence").bracket(15) == (0, 0)
    assert PsiSpec.parse("log_power:1:1").bracket(1) == (0, 0)
    spec = PsiSpec.parse("log_power:1:1/gamma")
    ns = np.arange(1, 50)
    assert np.allclose(spec.values(ns), [spec.value(int(n)) for n in ns], rtol=1e-13)


# -- sampling ---------------------------------------------------------------


def test_sample_point_support_and_determinism():
    with pytest.raises(ValueError):
        sample_point(1, 0)
    assert sample_point(1, 1).digits in ("0", "2")
    assert sample_point(9, 40) == sample_point(9, 40)
    assert sample_point(9, 40, 1) != sample_point(9, 40, 0)
    p = sample_point(3, 30)
    lo, hi = p.bounds()
    assert hi - lo == F(1, 3**30)
    assert lo == sum(F(int(c), 3 ** (i + 1)) for i, c in enumerate(p.digits))


def test_digit_two_fraction():
    twos = sum(sample_point(7, 64, i).digits.count("2") for i in range(10**4))
    assert 0.48 <= twos / (64 * 10**4) <= 0.52


# -- hits -----------------------------------------------------------------------


def test_hit_examples():
    quarter = PsiSpec.parse("const:1/4")
    assert hit_count(F(1, 4), 2, quarter, 10).hits == list(range(2, 11))
    assert hit_count(F(1, 3), 2, PsiSpec.parse("const:2/5"), 20).hits == list(range(1, 21))
    assert hit_count(F(1, 3), 2, quarter, 20).hits == []
    assert hit_count(F(2, 3), 3, PsiSpec.parse("power:3"), 25).hits == list(range(1, 26))


def test_rational_hits_match_direct_evaluation():
    rng = random.Random(3)
    for _ in range(100):
        q = rng.randint(2, 500)
        alpha = F(rng.randint(0, q), q)
        base = rng.choice((2, 3))
        psi = PsiSpec.parse(rng.choice(("power:1", "power:1/2", "const:1/7", "power:log3/log2")))
        got = hit_verdicts(alpha, base, psi, 30)
        for n, v in enumerate(got, 1):
            lo, hi = psi.bracket(n)
            d = _norm(base**n * alpha)
            # Rationals are never uncertain, and the verdict matches both bracket ends here.
            assert v == (HIT if d < lo else MISS)
            assert (d < hi) == (v == HIT)


def test_sampled_hits_are_certified():
    psi = PsiSpec.parse("power:1/2")
    rng = random.Random(11)
    for i in range(20):
        p = sample_point(5, 40, i)
        verdicts = hit_verdicts(p, 2, psi, 60)
        lo, hi = p.bounds()
        for n, v in enumerate(verdicts, 1):
            if v == UNCERTAIN:
                continue
            thr = psi.bracket(n)
            for _ in range(5):
                x = lo + (hi - lo) * F(rng.randint(0, 1000), 1000)
                d = _norm(2**n * x)
                assert (d < thr[0]) if v == HIT else (d >= thr[1])


def test_uncertain_rate_falls_with_depth():
    psi = PsiSpec.parse("power:1")
    rates = []
    for depth in (60, 90, 120, 150, 200):
        res = [hit_verdicts(sample_point(2, depth, i), 2, psi, 200).count(UNCERTAIN) for i in range(20)]
        rates.append(sum(res) / (20 * 200))
    assert all(a >= b for a, b in zip(rates, rates[1:]))
    assert rates[-1] == 0 and rates[0] > 0.5


def test_sample_hits_matches_single_points():
    psi = PsiSpec.parse("power:1")
    rows = sample_hits(4, 6, 3, psi, 200)
    depth = default_depth(200, 3)
    for r in rows:
        h = hit_count(sample_point(4, depth, r.index), 3, psi, 200)
        assert (r.hits, r.uncertain) == (len(h.hits), len(h.uncertain))
    assert all(r.uncertain == 0 for r in rows)


# -- series -------------------------------------------------------------------------


def test_benchmark_harmonic():
    res = series_eval("benchmark", PsiSpec.parse("power:1/gamma"), 10**5)
    assert res.checkpoints[-1][0] == 10**5
    harmonic = math.fsum(1 / n for n in range(1, 10**5 + 1))
    assert res.checkpoints[-1][1] == pytest.approx(harmonic, rel=1e-12)
    assert res.checkpoints[-1][1] == pytest.approx(12.09, abs=0.005)
    assert res.verdict_hint == "diverging"


def test_main_convergence_converging_across_alpha():
    for alpha in (-2, -1, 0, 1, 2, 3, 5):
        res = series_eval("main_convergence", PsiSpec.parse(f"log_power:{alpha}:1/gamma"), 10**6)
        assert res.verdict_hint == "converging", alpha


def test_zero_psi_series():
    for name in ("benchmark", "main_convergence", "lsv_triadic"):
        res = series_eval(name, PsiSpec.parse("const:0"), 1000)
        assert all(v == 0 for _, v in res.checkpoints)


def test_series_terms_oracle():
    psi = PsiSpec.parse("power:1/2")
    t = series_terms("main_convergence", psi, 100)
    for n in (1, 15, 16, 50, 100):
        p = n**-0.5
        l1 = math.log(n)
        decay = 1.0 if n < 16 else 2 ** (-l1 / (math.log(l1) * math.log(math.log(l1))))
        assert t[n - 1] == pytest.approx(decay * p**GAMMA + p, rel=1e-13)


# -- audits ---------------------------------------------------------------------------


def test_convergence_audit_examples():
    (row,) = convergence_audit(PsiSpec.parse("const:3/4"), [10])
    assert 0 < row.mu_lo <= row.mu_hi <= 1
    assert row.mu_lo == row.mu_hi == 1
    # Balls of radius psi/2^n with psi >= 1/2 cover [0, 1].
    for row in convergence_audit(PsiSpec.parse("const:1/2"), range(1, 9)):
        assert row.mu_lo == 1
    rows = convergence_audit(PsiSpec.parse("power:1/gamma"), range(7, 15))
    assert max(r.ratio for r in rows) < 2


def test_convergence_schedule_values():
    k, flags = convergence_schedule(10, 0.75)
    assert k == 1 and flags["iterated_logs_defined"] is False
    k, flags = convergence_schedule(10**6, 2.0**-40)
    l1 = math.log(10**6)
    assert k == min(3 * math.floor(l1 / (math.log(l1) * math.log(math.log(l1)))), 41)


def test_convergence_mu_against_oracle():
    # The exact measure under psi^- and psi^+ brackets the measure at the float value.
    psi = PsiSpec.parse("power:1/gamma")
    for row in convergence_audit(psi, [8, 11]):
        lo, hi = psi.bracket(row.n)
        assert measure_of_system(BallSystem.dyadic(row.n, lo)) == row.mu_lo
        assert measure_of_system(BallSystem.dyadic(row.n, hi)) == row.mu_hi


def test_n_plus():
    assert n_plus(10) is None
    n = 10**4
    l1 = math.log(n)
    assert n_plus(n) == n + math.floor(l1 / (math.log(l1) * math.log(math.log(l1))))


def test_chung_erdos_single_and_small():
    rep = chung_erdos_audit(PsiSpec.parse("power:1"), 10, n_hi=10)
    for fam in (rep.lower, rep.upper):
        assert fam.bound == fam.mu[0] and fam.holds
    rep = chung_erdos_audit(PsiSpec.parse("power:1/2"), 6, RationalInterval.ball(F(2, 9), F(1, 27)), n_hi=10)
    assert rep.lower.holds and rep.upper.holds
    # Union measure against a direct merge of the components.
    I = RationalInterval.ball(F(2, 9), F(1, 27))
    from dyadcantor.cantor import measure_of_interval, union_components
    psi = PsiSpec.parse("power:1/2")
    comps = [system_components(BallSystem.dyadic(n, psi.bracket(n)[0]), I) for n in range(6, 11)]
    assert rep.lower.union == measure_of_components(union_components(comps), I) / measure_of_interval(I)


def test_chung_erdos_window_cap():
    # n^+ is undefined at 10, so the window falls back to max_window uncapped.
    rep = chung_erdos_audit(PsiSpec.parse("power:1"), 10, max_window=3)
    assert rep.n_hi == 13 and not rep.window_capped
    rep = chung_erdos_audit(PsiSpec.parse("power:1"), 16, max_window=3)
    assert n_plus(16) > 19 and rep.n_hi == 19 and rep.window_capped


# -- lemma checks ---------------------------------------------------------------------


def test_connection_instances_hold():
    for kw in connection_instances(0, 30):
        assert connection_check(**kw).ok


def test_connection_rejects_coarse_level():
    with pytest.raises(ValueError):
        connection_check(4, F(1, 4), N=1)


def test_shifting_instances_hold():
    res = [shifting_check(**kw) for kw in shifting_instances(0, 30)]
    assert all(r.ok_plus_one for r in res)
    assert any(r.fine > 0 for r in res)


def test_shifting_rejects_bad_levels():
    with pytest.raises(ValueError):
        shifting_check(3, 4, 4, 1)
    with pytest.raises(ValueError):
        shifting_check(5, 3, 0, 1)


def test_dropping_instances_hold():
    for kw in dropping_instances(0, 10):
        assert dropping_check(**kw).ok


def test_generators_are_seeded():
    assert product_bound_instances(1, 50) == product_bound_instances(1, 50)
    assert product_bound_instances(1, 50) != product_bound_instances(2, 50)
    for n, m, L, M in product_bound_instances(3, 500):
        assert 0 <= n <= 40 and 0 < abs(m) <= 10**6 and 1 <= L < M <= 60


def test_report_rows_callable_repeatable():
    rep = ExperimentReport("x", {}, ["a"], rows=lambda: iter([(1,), (2,)]))
    assert list(rep.iter_rows()) == list(rep.iter_rows()) == [(1,), (2,)]
