"""Acceptance criteria 1 to 10, each printed as one pass/fail line."""
import io
import json
import math
import random
import time
from fractions import Fraction

import numpy as np

from dyadcantor import cli
from dyadcantor.cantor import (
    BallSystem,
    RationalInterval,
    cantor_cdf,
    count_endpoints_in_interval,
    count_endpoints_in_system,
)
from dyadcantor.experiments import (
    GAMMA,
    HIT,
    PsiSpec,
    chung_erdos_audit,
    connection_check,
    connection_instances,
    convergence_audit,
    default_depth,
    hit_verdicts,
    product_bound_instances,
    sample_point,
    shifting_check,
    shifting_instances,
)
from dyadcantor.fourier import FourierParams, fourier_lhs, fourier_rhs, product_bound_check

from cli_cases import CASES
from oracles import count_interval, count_system

F = Fraction
SCAN_MIN = (0.28854239606917936, 32764)


def _verdict(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


def test_criterion_1_counting_oracle(capsys):
    start = time.perf_counter()
    rng = random.Random(1)
    mismatches = checks = 0
    for N in range(0, 13):
        for _ in range(200):
            d = 3 ** rng.randint(0, N + 1) * rng.choice((1, 2, 4, 5, 7))
            lo = F(rng.randint(-d // 3, d), d)
            I = RationalInterval(lo, lo + F(rng.randint(0, d), d), rng.random() < 0.5, rng.random() < 0.5)
            which = rng.choice(("left", "right", "all"))
            mismatches += count_endpoints_in_interval(N, I, which) != count_interval(N, I, which)
            checks += 1
        for _ in range(100):
            n = rng.randint(0, 7)
            sys = BallSystem(n, F(rng.randint(1, 50), rng.randint(51, 3**N * 8 + 60)), F(rng.randint(-40, 40), 81))
            I = None if rng.random() < 0.3 else RationalInterval.closed(F(rng.randint(0, 20), 40), F(rng.randint(20, 40), 40))
            which = rng.choice(("left", "right", "all"))
            mismatches += count_endpoints_in_system(N, sys, I, which) != count_system(N, sys, I, which)
            checks += 1
    elapsed = time.perf_counter() - start
    _verdict(capsys, 1, mismatches == 0 and elapsed < 60, f"{checks} counts, {mismatches} mismatches, {elapsed:.1f} s")


def test_criterion_2_exact_cdf(capsys):
    start = time.perf_counter()
    ok = (cantor_cdf(F(1, 3)), cantor_cdf(F(1, 4)), cantor_cdf(F(2, 9))) == (F(1, 2), F(1, 3), F(1, 4))
    rng = random.Random(2)
    bad = 0
    for _ in range(1000):
        q = rng.randint(1, 10**9)
        x = F(rng.randint(0, q), q)
        bad += cantor_cdf(1 - x) != 1 - cantor_cdf(x)
    elapsed = time.perf_counter() - start
    _verdict(capsys, 2, ok and bad == 0 and elapsed < 5, f"examples {'exact' if ok else 'wrong'}, {bad} symmetry failures, {elapsed:.2f} s")


def test_criterion_3_connection_and_shifting(capsys):
    conn = [connection_check(**kw) for kw in connection_instances(0, 100)]
    shift = [shifting_check(**kw) for kw in shifting_instances(0, 100, max_J=4)]
    c_bad = sum(not r.ok for r in conn)
    s_bad = sum(not r.ok_plus_one for r in shift)
    nonzero = sum(r.fine > 0 for r in shift)
    _verdict(capsys, 3, c_bad == 0 and s_bad == 0,
             f"connection {100 - c_bad}/100, shifting {100 - s_bad}/100 ({nonzero} with nonzero counts)")


def test_criterion_4_basic_proposition(capsys):
    start = time.perf_counter()
    parts = []
    ok = True
    for text in ("const:3/4", "power:1/gamma"):
        rows = convergence_audit(PsiSpec.parse(text), range(7, 25))
        C20 = max(r.ratio for r in rows if r.n <= 20)
        C24 = max(r.ratio for r in rows)
        # Every row satisfies mu(A_n) <= C psi^gamma with C the grid maximum.
        holds = all(float(r.mu_hi) <= C24 * r.psi**GAMMA * (1 + 1e-12) for r in rows)
        drift = abs(C24 - C20) / C20
        ok &= holds and drift < 0.05
        parts.append(f"{text}: C = {C24:.6f}, drift {drift:.2%}")
    elapsed = time.perf_counter() - start
    _verdict(capsys, 4, ok and elapsed < 600, "; ".join(parts) + f", {elapsed:.1f} s")


def _fourier_grid():
    grid = []
    for n in (2, 3, 5):
        for k in (1, 2, 3):
            for L, M in ((2, 8), (3, 12), (5, 14), (6, 18)):
                regions = [RationalInterval.unit()]
                if L >= 5:
                    regions.append(RationalInterval.closed(F(73, 100), F(19, 20)))
                for T in (8, 16, 32):
                    for y in (F(0), F(1, 7)):
                        for I in regions:
                            grid.append(FourierParams(n, k, L, M, T=T, N=4, y=y, I=I))
    return grid


def test_criterion_5_fourier_identity(capsys):
    start = time.perf_counter()
    lhs_cache = {}
    cells = []
    for p in _fourier_grid():
        key = (p.n, p.k, p.M, p.y, p.I)
        if key not in lhs_cache:
            lhs_cache[key] = fourier_lhs(p)
        lhs = lhs_cache[key]
        err = abs(lhs - fourier_rhs(p).main)
        cells.append((p, lhs, err, err / p.error_scale()))
    train, valid = cells[0::2], cells[1::2]
    C = max(c[3] for c in train)
    failures = sum(c[2] > C * c[0].error_scale() for c in valid)
    rel32 = max(c[2] / max(c[1], 1.0) for c in cells if c[0].T == 32)
    elapsed = time.perf_counter() - start
    ok = len(cells) >= 50 and failures == 0 and rel32 < 1e-3 and elapsed < 600
    _verdict(capsys, 5, ok, f"{len(cells)} cells, C = {C:.4g}, {failures} validation failures, "
                            f"max relative error at T=32 {rel32:.2e}, {elapsed:.1f} s")


def test_criterion_6_product_bound(capsys):
    start = time.perf_counter()
    bad = sum(not product_bound_check(*t).ok for t in product_bound_instances(0, 10**4))
    elapsed = time.perf_counter() - start
    _verdict(capsys, 6, bad == 0 and elapsed < 30, f"{bad} violations in 10^4 tuples, {elapsed:.1f} s")


def test_criterion_7_chung_erdos(capsys):
    start = time.perf_counter()
    instances = failures = 0
    worst = 0.0
    for text in ("power:1", "power:1/2", "thm_divergence", "log_power:1:1"):
        for n_lo in (10, 12, 14, 16):
            for I in (RationalInterval.unit(), RationalInterval.ball(F(2, 9), F(1, 27))):
                rep = chung_erdos_audit(PsiSpec.parse(text), n_lo, I, max_window=8, n_hi=min(n_lo + 8, 20))
                assert rep.n_hi - rep.n_lo <= 8 and rep.n_hi <= 20
                for fam in (rep.lower, rep.upper):
                    instances += 1
                    failures += not (fam.bound <= fam.union)
                    worst = max(worst, fam.max_overlap_ratio)
    elapsed = time.perf_counter() - start
    _verdict(capsys, 7, instances >= 20 and failures == 0 and elapsed < 600,
             f"{instances} audited families, {failures} failures, max overlap ratio {worst:.3f}, {elapsed:.1f} s")


def test_criterion_8_scan_figure(capsys, tmp_path):
    start = time.perf_counter()
    base = tmp_path / "scan"
    code = cli.run(["scan-ratio", "--y-lo", "2", "--y-hi", "1000000", "--format", "csv,svg", "--out", str(base)],
                   stdout=io.BytesIO())
    elapsed = time.perf_counter() - start
    meta = json.loads((tmp_path / "scan.meta.json").read_text())
    found = (meta["summary"]["min_ratio"], meta["summary"]["argmin"])
    svg = (tmp_path / "scan.svg").read_text()
    npts = svg.split('points="')[1].split('"')[0].count(",")
    lines = sum(1 for _ in open(tmp_path / "scan.csv"))
    ok = code == 0 and found[0] > 0 and tuple(found) == SCAN_MIN and npts <= 10**4 and lines == 10**6 and elapsed < 300
    _verdict(capsys, 8, ok, f"min {found[0]!r} at y = {found[1]}, {lines - 1} rows, {npts} SVG points, {elapsed:.1f} s")


def _hits(base, psi, n_max, cut, seeds):
    # One certified verdict list per point; the shorter horizon is its prefix.
    depth = default_depth(n_max, base)
    full, short = [], []
    for s in seeds:
        v = hit_verdicts(sample_point(s, depth), base, psi, n_max)
        full.append(v.count(HIT))
        short.append(v[:cut].count(HIT))
    return np.mean(short), np.mean(full)


def test_criterion_9_divergence_contrast(capsys):
    start = time.perf_counter()
    seeds = range(100)
    _, div = _hits(2, PsiSpec.parse("thm_divergence"), 5000, 5000, seeds)
    pow500, pow5000 = _hits(2, PsiSpec.parse("power:log3/log2"), 5000, 500, seeds)
    tri500, tri5000 = _hits(3, PsiSpec.parse("power:log3/log2"), 5000, 500, seeds)
    elapsed = time.perf_counter() - start
    ratio = div / pow5000
    ok = ratio >= 10 and tri5000 - tri500 >= 1 and pow5000 - pow500 < 0.5 and elapsed < 900
    _verdict(capsys, 9, ok, f"dyadic means {div:.1f} vs {pow5000:.2f} (x{ratio:.0f}); triadic {tri500:.2f} -> {tri5000:.2f}; "
                            f"dyadic power {pow500:.2f} -> {pow5000:.2f}; {elapsed:.0f} s")


_PLOTTABLE = {"scan-ratio", "cdf", "series", "convergence-audit"}


def test_criterion_10_determinism(capsys, tmp_path):
    differ = []
    for name, argv in CASES.items():
        fmts = "csv,json,svg" if name in _PLOTTABLE else "csv,json"
        outs = []
        for rep in (0, 1):
            base = tmp_path / f"{name}-{rep}"
            code = cli.run(argv + ["--format", fmts, "--out", str(base)], stdout=io.BytesIO())
            assert code == 0, name
            outs.append({ext: (tmp_path / f"{name}-{rep}.{ext}").read_bytes() for ext in fmts.split(",") + ["meta.json"]})
        if outs[0] != outs[1]:
            differ.append(name)
    # Worker count must not change the bytes either.
    par = tmp_path / "jobs"
    cli.run(CASES["sample-hits"] + ["--jobs", "2", "--format", "csv", "--out", str(par)], stdout=io.BytesIO())
    if (tmp_path / "jobs.csv").read_bytes() != (tmp_path / "sample-hits-0.csv").read_bytes():
        differ.append("sample-hits --jobs 2")
    _verdict(capsys, 10, not differ, f"{len(CASES)} subcommands run twice, differing: {differ or 'none'}")
