"""Command-line runner for the verifiers, scans and experiments.

Every subcommand builds an :class:`~dyadcantor.experiments.ExperimentReport`
and writes it as CSV, JSON or SVG. Parameters come from flags and an optional
``key = value`` file (flags win), are echoed verbatim into the output, and
are all declared in one table per subcommand so unknown keys fail loudly.

Exit codes: 0 success, 2 usage error, 3 budget exceeded, 4 verification
failure, 5 malformed parameter value, 6 missing required parameter.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

from . import __version__, cantor, digits, emit, experiments, fourier
from .cantor import BallSystem, BudgetExceeded, RationalInterval
from .experiments import ExperimentReport, PsiSpec
from .numeric import as_rational

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_VERIFY, EXIT_MALFORMED, EXIT_MISSING = 0, 2, 3, 4, 5, 6


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# -- value parsers --------------------------------------------------------------------
# Each takes the raw string and raises ValueError when it is malformed.


def _int(text: str) -> int:
    return int(text.strip(), 10)


def _float(text: str) -> float:
    return float(text)


def _rational(text: str) -> Fraction:
    return as_rational(text)


def _rationals(text: str) -> List[Fraction]:
    vals = [as_rational(v) for v in text.split(",") if v.strip()]
    if not vals:
        raise ValueError("empty list")
    return vals


def _interval(text: str) -> RationalInterval:
    """``unit``, or ``lo,hi`` for a closed interval."""
    if text.strip() == "unit":
        return RationalInterval.unit()
    lo, hi = text.split(",")
    I = RationalInterval.closed(lo, hi)
    if I.lo > I.hi:
        raise ValueError("interval with lo > hi")
    return I


def _ball(text: str) -> RationalInterval:
    """``center,radius`` for an open ball."""
    c, r = text.split(",")
    if as_rational(r) <= 0:
        raise ValueError("radius must be positive")
    return RationalInterval.ball(c, r)


def _formats(text: str) -> List[str]:
    fmts = [f.strip() for f in text.split(",")]
    if not fmts or any(f not in emit.FORMATS for f in fmts) or len(set(fmts)) != len(fmts):
        raise ValueError(f"formats are comma separated from {', '.join(emit.FORMATS)}")
    return fmts


def _choice(*options: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text

    parse.options = options
    return parse


class Param(NamedTuple):
    name: str
    parse: Callable[[str], object]
    default: Optional[str] = None
    required: bool = False
    help: str = ""


_REGION = [
    Param("interval", _interval, None, False, "closed interval lo,hi or 'unit'"),
    Param("ball", _ball, None, False, "open ball center,radius"),
]
_BUDGET = Param("node_budget", _int, str(cantor.DEFAULT_NODE_BUDGET), False, "max nodes in exact descents")

COMMON = [
    Param("format", _formats, "csv", False, "csv, json or svg; comma separated with --out"),
    Param("out", str, None),
    Param("seed", _int, None),
    Param("jobs", _int, "1"),
    Param("max_points", _int, str(emit.DEFAULT_MAX_POINTS)),
]


# -- subcommands --------------------------------------------------------------------


class Outcome(NamedTuple):
    report: ExperimentReport
    verified: bool = True


def _region(v) -> Optional[RationalInterval]:
    if v.get("interval") is not None and v.get("ball") is not None:
        raise CliError(EXIT_USAGE, "give at most one of --interval and --ball")
    return v.get("interval") or v.get("ball")


def run_scan_ratio(v, raw) -> Outcome:
    y_lo, y_hi, mode = v["y_lo"], v["y_hi"], v["mode"]
    digits.RatioScan(y_lo, y_hi, mode)  # validates the range
    best = digits.scan_minimum(y_lo, y_hi, mode)
    rep = ExperimentReport(
        "scan-ratio", raw, ["y", "d2", "d3", "ratio"],
        rows=lambda: iter(digits.scan_ratio(y_lo, y_hi, mode)),
        summary={"min_ratio": best[0], "argmin": best[1], "y_lo": y_lo, "y_hi": y_hi},
        plot=("y", "ratio"), float_digits=10,
    )
    return Outcome(rep)


def run_stewart(v, raw) -> Outcome:
    c_min, arg = digits.stewart_min_constant(v["y_lo"], v["y_hi"])
    summary = {"c_min": c_min, "argmax": arg}
    columns = ["y_lo", "y_hi", "c_min", "argmax"]
    row = [v["y_lo"], v["y_hi"], c_min, arg]
    ok = True
    if v["c"] is not None:
        count, first = digits.stewart_violations(v["y_lo"], v["y_hi"], v["c"])
        summary.update(c=v["c"], violations=count, first_violation=first)
        columns += ["c", "violations"]
        row += [v["c"], count]
        ok = count == 0
    return Outcome(ExperimentReport("stewart", raw, columns, [tuple(row)], summary), ok)


def _system(v) -> Optional[BallSystem]:
    if v["n"] is None:
        if v["psi"] is not None or v["M"] is not None:
            raise CliError(EXIT_MISSING, "a ball system needs --n")
        return None
    if (v["psi"] is None) == (v["M"] is None):
        raise CliError(EXIT_USAGE, "give exactly one of --psi and --M with --n")
    if v["psi"] is not None:
        return BallSystem.dyadic(v["n"], v["psi"], v["t"], v["shift"])
    return BallSystem.level(v["n"], v["M"], v["t"], v["shift"])


def run_count(v, raw) -> Outcome:
    I = _region(v)
    sys_ = _system(v)
    N, which = v["N"], v["which"]
    if sys_ is None:
        count = cantor.count_endpoints_in_interval(N, I or RationalInterval.unit(), which)
    else:
        count = cantor.count_endpoints_in_system(N, sys_, I, which, v["node_budget"])
    rep = ExperimentReport("count", raw, ["N", "which", "count"], [(N, which, count)], {"count": count})
    return Outcome(rep)


def run_measure(v, raw) -> Outcome:
    I = _region(v)
    if v["psi"] is None:
        if I is None:
            raise CliError(EXIT_MISSING, "measure needs --psi and --n, or a region")
        mu = cantor.measure_of_interval(I)
        rep = ExperimentReport("measure", raw, ["mu"], [(mu,)], {"mu": mu})
        return Outcome(rep)
    if v["n"] is None:
        raise CliError(EXIT_MISSING, "missing required parameter --n")
    n, psi, t = v["n"], v["psi"], v["t"]
    lo, hi = psi.bracket(n)
    mu = experiments.measure_bracket(n, psi, I, t, v["shift"], v["node_budget"])
    r_lo, r_hi = t * lo / (1 << n), t * hi / (1 << n)
    rep = ExperimentReport(
        "measure", raw, ["n", "radius_lo", "radius_hi", "mu_lo", "mu_hi"],
        [(n, r_lo, r_hi, mu.lo, mu.hi)],
        {"radius_lo": r_lo, "radius_hi": r_hi, "mu_lo": mu.lo, "mu_hi": mu.hi},
    )
    return Outcome(rep)


def run_cdf(v, raw) -> Outcome:
    rows = [(x, cantor.cantor_cdf(x)) for x in v["x"]]
    return Outcome(ExperimentReport("cdf", raw, ["x", "F"], rows, {"count": len(rows)}, plot=("x", "F")))


def run_fourier_verify(v, raw) -> Outcome:
    p = fourier.FourierParams(v["n"], v["k"], v["L"], v["M"], v["T"], v["N"], v["y"], _region(v) or RationalInterval.unit())
    lhs = fourier.fourier_lhs(p)
    rhs = fourier.fourier_rhs(p, max_terms=v["max_terms"])
    err = abs(lhs - rhs.main)
    scale = p.error_scale()
    rel = err / max(lhs, 1.0)
    summary = {"lhs": lhs, "main": rhs.main, "zero_mode": rhs.zero_mode, "abs_err": err, "error_scale": scale, "rel_err": rel}
    ok = True
    if v["C"] is not None:
        ok = err <= v["C"] * scale
        summary["within_C"] = ok
    rep = ExperimentReport(
        "fourier-verify", raw, ["lhs", "main", "zero_mode", "abs_err", "error_scale", "rel_err"],
        [(lhs, rhs.main, rhs.zero_mode, err, scale, rel)], summary,
    )
    return Outcome(rep, ok)


def run_product_bound(v, raw) -> Outcome:
    explicit = [v[k] for k in ("n", "m", "L", "M")]
    if all(x is not None for x in explicit):
        tuples = [tuple(explicit)]
    elif any(x is not None for x in explicit):
        raise CliError(EXIT_MISSING, "give all of --n --m --L --M, or --samples")
    else:
        tuples = experiments.product_bound_instances(v["seed"], v["samples"])
    rows = []
    for n, m, L, M in tuples:
        pb = fourier.product_bound_check(n, m, L, M)
        rows.append((n, m, L, M, pb.lhs, pb.rhs, pb.ok))
    bad = sum(1 for r in rows if not r[-1])
    rep = ExperimentReport(
        "product-bound", raw, ["n", "m", "L", "M", "lhs", "rhs", "ok"], rows,
        {"instances": len(rows), "violations": bad, "rho": fourier.RHO, "slack": fourier.PRODUCT_SLACK},
        seed=None if explicit[0] is not None else v["seed"],
    )
    return Outcome(rep, bad == 0)


def run_final_count(v, raw) -> Outcome:
    fc = fourier.final_count_ratio(v["variant"], v["n"], v["k"], v["theta"], _region(v), v["node_budget"])
    rep = ExperimentReport(
        "final-count", raw, ["variant", "n", "k", "M", "count", "predicted", "ratio"],
        [(v["variant"], v["n"], v["k"], fc.M, fc.count, fc.predicted, fc.ratio)],
        {"M": fc.M, "count": fc.count, "predicted": fc.predicted, "ratio": fc.ratio},
    )
    return Outcome(rep)


def _hits_job(args):
    seed, lo, hi, base, psi_text, n_max, depth = args
    psi = PsiSpec.parse(psi_text)
    d = 3**depth
    th = experiments._thresholds(psi, n_max, d)
    out = []
    for i in range(lo, hi):
        r, w, _ = experiments._start(experiments.sample_point(seed, depth, i))
        vs = experiments._verdicts(r, w, d, base, th)
        out.append(experiments.SampleHits(i, vs.count(experiments.HIT), vs.count(experiments.UNCERTAIN)))
    return out


def run_sample_hits(v, raw) -> Outcome:
    base, psi, n_max, samples, seed = v["base"], v["psi"], v["n_max"], v["samples"], v["seed"]
    depth = v["depth"] or experiments.default_depth(n_max, base)
    jobs = max(1, v["jobs"])
    if jobs == 1:
        results = experiments.sample_hits(seed, samples, base, psi, n_max, depth)
    else:
        bounds = [(samples * j // jobs, samples * (j + 1) // jobs) for j in range(jobs)]
        tasks = [(seed, lo, hi, base, str(psi), n_max, depth) for lo, hi in bounds if hi > lo]
        with ProcessPoolExecutor(jobs) as pool:
            results = sorted((r for part in pool.map(_hits_job, tasks) for r in part), key=lambda r: r.index)
    rows = [tuple(r) for r in results]
    mean = Fraction(sum(r.hits for r in results), len(results)) if results else Fraction(0)
    unc = Fraction(sum(r.uncertain for r in results), len(results)) if results else Fraction(0)
    rep = ExperimentReport(
        "sample-hits", raw, ["index", "hits", "uncertain"], rows,
        {"mean_hits": float(mean), "mean_uncertain": float(unc), "depth": depth}, seed=seed,
    )
    return Outcome(rep)


def run_series(v, raw) -> Outcome:
    res = experiments.series_eval(v["series"], v["psi"], v["n_max"], v["eps"], v["h"])
    rep = ExperimentReport(
        "series", raw, ["n", "partial_sum"], res.checkpoints,
        {"verdict_hint": res.verdict_hint, "tail_slope": res.tail_slope, "final": res.checkpoints[-1][1]},
        plot=("n", "partial_sum"),
    )
    return Outcome(rep)


_FLAG_NAMES = ["iterated_logs_defined", "k_positive", "M_positive", "valid_drop", "psi_below_3^-99"]


def run_convergence_audit(v, raw) -> Outcome:
    if v["n_hi"] < v["n_lo"]:
        raise CliError(EXIT_USAGE, "need n_hi >= n_lo")
    rows_ = experiments.convergence_audit(v["psi"], range(v["n_lo"], v["n_hi"] + 1), v["node_budget"])
    rows = [
        (r.n, r.k_n, r.M, r.N, r.psi, r.mu_lo, r.mu_hi, r.bound_term, r.ratio, *(r.flags.get(f) for f in _FLAG_NAMES))
        for r in rows_
    ]
    ratios = [r.ratio for r in rows_ if r.ratio == r.ratio]
    rep = ExperimentReport(
        "convergence-audit", raw,
        ["n", "k_n", "M", "N", "psi", "mu_lo", "mu_hi", "bound_term", "ratio", *_FLAG_NAMES], rows,
        {"C": max(ratios) if ratios else None, "rows": len(rows)}, plot=("n", "ratio"),
    )
    return Outcome(rep)


def run_chung_erdos(v, raw) -> Outcome:
    I = _region(v)
    rep_ = experiments.chung_erdos_audit(v["psi"], v["n_lo"], I, v["max_window"], v["n_hi"], v["node_budget"])
    ns = range(rep_.n_lo, rep_.n_hi + 1)
    rows = list(zip(ns, rep_.lower.mu, rep_.upper.mu))
    summary = {"n_hi": rep_.n_hi, "window_capped": rep_.window_capped}
    for name, fam in (("lower", rep_.lower), ("upper", rep_.upper)):
        summary.update({
            f"{name}_bound": fam.bound, f"{name}_union": fam.union, f"{name}_holds": fam.holds,
            f"{name}_max_overlap_ratio": fam.max_overlap_ratio,
        })
    rep = ExperimentReport("chung-erdos", raw, ["n", "mu_I_lower", "mu_I_upper"], rows, summary)
    return Outcome(rep, rep_.lower.holds and rep_.upper.holds)


def run_lemma_verify(v, raw) -> Outcome:
    lemma, count, seed, budget = v["lemma"], v["instances"], v["seed"], v["node_budget"]
    if lemma == "connection":
        cols = ["n", "psi", "I_lo", "I_hi", "shift", "N", "lower", "measure", "upper", "ok"]
        rows = []
        for kw in experiments.connection_instances(seed, count):
            c = experiments.connection_check(**kw, budget=budget)
            rows.append((kw["n"], kw["psi"], kw["I"].lo, kw["I"].hi, kw["shift"], c.N, c.lower, c.measure, c.upper, c.ok))
        bad = sum(not r[-1] for r in rows)
    elif lemma == "shifting":
        cols = ["n", "M", "J", "t", "shift", "I_lo", "I_hi", "coarse", "fine", "ok_plus_one", "ok_plus_two", "ok_no_term"]
        rows = []
        bad = 0
        for kw in experiments.shifting_instances(seed, count):
            s = experiments.shifting_check(**kw, budget=budget)
            I = kw["I"]
            rows.append((kw["n"], kw["M"], kw["J"], kw["t"], kw["shift"], I.lo, I.hi, s.coarse, s.fine,
                         s.ok_plus_one, s.ok_plus_two, s.ok_no_term))
            bad += (not s.ok_plus_one) or (I.is_unit and not s.ok_no_term)
    else:
        cols = ["n", "psi", "M", "N", "fine", "coarse", "ratio", "ok"]
        rows = []
        for kw in experiments.dropping_instances(seed, count):
            d = experiments.dropping_check(**kw, budget=budget)
            rows.append((kw["n"], kw["psi"], kw["M"], kw["N"], d.fine, d.coarse, d.ratio, d.ok))
        bad = sum(not r[-1] for r in rows)
    rep = ExperimentReport(f"lemma-verify {lemma}", raw, cols, rows, {"instances": len(rows), "violations": bad}, seed=seed)
    return Outcome(rep, bad == 0)


_PSI = Param("psi", PsiSpec.parse, None, True, "approximation function, e.g. power:1/gamma")

SUBCOMMANDS: Dict[str, Tuple[Callable, List[Param], str]] = {
    "scan-ratio": (run_scan_ratio, [
        Param("y_lo", _int, None, True), Param("y_hi", _int, None, True),
        Param("mode", _choice("all", "powers_of_two"), "all"),
    ], "digit-change ratio scan"),
    "stewart": (run_stewart, [
        Param("y_lo", _int, "20"), Param("y_hi", _int, None, True), Param("c", _float, None),
    ], "empirical constant in the digit-change lower bound"),
    "count": (run_count, [
        Param("N", _int, None, True), Param("which", _choice("all", "left", "right"), "all"), *_REGION,
        Param("n", _int), Param("psi", _rational, None, False, "radius factor: radius = t psi / 2^n"),
        Param("M", _int, None, False, "level radius: radius = t / 3^M"),
        Param("t", _rational, "1"), Param("shift", _rational, "0"), _BUDGET,
    ], "count Cantor endpoints in a region"),
    "measure": (run_measure, [
        Param("psi", PsiSpec.parse), Param("n", _int), Param("t", _rational, "1"), Param("shift", _rational, "0"),
        *_REGION, _BUDGET,
    ], "exact Cantor measure of t A_n + shift, or of a region"),
    "cdf": (run_cdf, [Param("x", _rationals, None, True, "comma separated rationals")], "exact Cantor function values"),
    "fourier-verify": (run_fourier_verify, [
        Param("n", _int, None, True), Param("k", _int, None, True), Param("L", _int, None, True),
        Param("M", _int, None, True), Param("T", _int, "16"), Param("N", _int, "4"), Param("y", _rational, "0"),
        *_REGION, Param("C", _float, None, False, "fail unless |lhs - main| <= C * error_scale"),
        Param("max_terms", _int, str(fourier.MAX_TERMS)),
    ], "both sides of the Fourier counting identity"),
    "product-bound": (run_product_bound, [
        Param("n", _int), Param("m", _int), Param("L", _int), Param("M", _int),
        Param("samples", _int, "10000"), Param("seed", _int, "0"),
    ], "ternary product against rho^(digit changes)"),
    "final-count": (run_final_count, [
        Param("variant", _choice("lower", "upper"), None, True), Param("n", _int, None, True),
        Param("k", _int, None, True), Param("theta", _rational, "0"), *_REGION, _BUDGET,
    ], "endpoint count in the final-count regions"),
    "sample-hits": (run_sample_hits, [
        _PSI, Param("base", _choice("2", "3"), "2"), Param("n_max", _int, None, True),
        Param("samples", _int, "100"), Param("seed", _int, "0"), Param("depth", _int),
    ], "certified hit counts for mu-random points"),
    "series": (run_series, [
        Param("series", _choice("benchmark", "main_convergence", "lsv_triadic", "conditional"), None, True),
        _PSI, Param("n_max", _int, None, True), Param("eps", _float, "1"),
        Param("h", _choice("log", "loglog", "stewart"), "loglog"),
    ], "partial sums of the criteria series"),
    "convergence-audit": (run_convergence_audit, [
        _PSI, Param("n_lo", _int, None, True), Param("n_hi", _int, None, True), _BUDGET,
    ], "schedule values and exact mu(A_n)"),
    "chung-erdos": (run_chung_erdos, [
        _PSI, Param("n_lo", _int, None, True), Param("n_hi", _int), Param("max_window", _int, "8"), *_REGION, _BUDGET,
    ], "exact second-moment audit"),
    "lemma-verify": (run_lemma_verify, [
        Param("instances", _int, "100"), Param("seed", _int, "0"), _BUDGET,
    ], "random admissible instances of a counting lemma"),
}

_INT_CONVERTED = {"base"}


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dyadcantor", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (_, params, help_) in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=help_, description=help_)
        if name == "lemma-verify":
            p.add_argument("lemma", choices=["connection", "dropping", "shifting"])
        p.add_argument("--config", help="key = value file; flags override it")
        seen = set()
        for prm in params + COMMON:
            if prm.name in seen:
                continue
            seen.add(prm.name)
            extra = f" (default {prm.default})" if prm.default is not None else ""
            req = " [required]" if prm.required else ""
            p.add_argument(_flag(prm.name), dest=prm.name, default=None, metavar="VALUE", help=prm.help + extra + req)
    return parser


def read_config(text: str) -> Dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for no, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(EXIT_USAGE, f"config line {no}: expected key = value")
        k, val = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = val
    return out


class RunConfig(NamedTuple):
    command: str
    values: Dict[str, object]
    raw: Dict[str, str]


def parse_config(argv: Sequence[str], file_text: Optional[str] = None) -> RunConfig:
    """Merge flags over config-file values and convert every parameter."""
    parser = build_parser()
    ns = parser.parse_args(list(argv))
    command = ns.command
    _, params, _ = SUBCOMMANDS[command]
    table = {p.name: p for p in params}
    for p in COMMON:
        table.setdefault(p.name, p)
    merged: Dict[str, str] = {}
    if file_text is None and ns.config:
        try:
            with open(ns.config, encoding="utf-8") as fh:
                file_text = fh.read()
        except OSError as exc:
            raise CliError(EXIT_USAGE, f"cannot read config: {exc}") from exc
    if file_text:
        for k, val in read_config(file_text).items():
            if k not in table:
                raise CliError(EXIT_USAGE, f"unknown config key {k!r}")
            merged[k] = val
    for k in table:
        given = getattr(ns, k, None)
        if given is not None:
            merged[k] = given
    values: Dict[str, object] = {}
    raw: Dict[str, str] = {}
    if command == "lemma-verify":
        values["lemma"] = raw["lemma"] = ns.lemma
    for k, prm in table.items():
        text = merged.get(k, prm.default)
        if text is None:
            if prm.required:
                raise CliError(EXIT_MISSING, f"missing required parameter {_flag(k)}")
            values[k] = None
            continue
        try:
            val = prm.parse(text)
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise CliError(EXIT_MALFORMED, f"malformed value for {_flag(k)}: {text!r} ({exc})") from exc
        values[k] = int(val) if k in _INT_CONVERTED else val
        # Output plumbing does not change the result, so it is not echoed.
        if k not in ("format", "out", "jobs"):
            raw[k] = text
    return RunConfig(command, values, raw)


def _emit_all(report: ExperimentReport, values, stdout) -> None:
    fmts = values["format"]
    out = values["out"]
    if out is None:
        if len(fmts) > 1:
            raise CliError(EXIT_USAGE, "several formats need --out")
        stdout.write(emit.emit(report, fmts[0], values["max_points"]))
        if fmts[0] == "csv":
            sys.stderr.write(json.dumps(emit.metadata(report), sort_keys=True) + "\n")
        return
    for fmt in fmts:
        with open(f"{out}.{fmt}", "wb") as fh:
            fh.write(emit.emit(report, fmt, values["max_points"]))
    if "csv" in fmts:
        with open(f"{out}.meta.json", "wb") as fh:
            fh.write(emit.emit_metadata(report))


def run(argv: Sequence[str], stdout=None) -> int:
    stdout = stdout or sys.stdout.buffer
    try:
        cfg = parse_config(argv)
        handler = SUBCOMMANDS[cfg.command][0]
        start = time.perf_counter()
        try:
            outcome = handler(cfg.values, cfg.raw)
        except BudgetExceeded as exc:
            raise CliError(EXIT_BUDGET, f"budget exceeded: {exc}") from exc
        except (ValueError, ArithmeticError) as exc:
            raise CliError(EXIT_USAGE, str(exc)) from exc
        outcome.report.timed(start)
        try:
            _emit_all(outcome.report, cfg.values, stdout)
        except emit.NotPlottable as exc:
            raise CliError(EXIT_USAGE, str(exc)) from exc
        if not outcome.verified:
            sys.stderr.write(f"{cfg.command}: verification failed\n")
            return EXIT_VERIFY
        return EXIT_OK
    except CliError as exc:
        sys.stderr.write(f"dyadcantor: {exc}\n")
        return exc.code
    except SystemExit as exc:
        return int(exc.code or 0)


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
