"""Serialise an :class:`~dyadcantor.experiments.ExperimentReport` to CSV, JSON or SVG.

All three emitters are pure functions of the report, so equal reports give
byte-identical output.
"""
from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from typing import Iterable, List, Optional, Tuple
from xml.sax.saxutils import escape

from .experiments import PRNG_NAME, ExperimentReport
from .numeric import format_rational

FORMATS = ("csv", "json", "svg")
DEFAULT_MAX_POINTS = 10_000

SVG_WIDTH, SVG_HEIGHT = 800, 500
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 20, 30, 50
_TICKS = 5


class NotPlottable(ValueError):
    """The report has no two-column numeric series to draw."""


def _cell_text(v, digits: Optional[int]) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return format_rational(v)
    if isinstance(v, float):
        if digits is not None and math.isfinite(v):
            return format(v, f".{digits}g")
        return repr(v)
    return str(v)


def _json_value(v):
    if isinstance(v, Fraction):
        return format_rational(v)
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _json_value(x) for k, x in v.items()}
    return v


def emit_csv(report: ExperimentReport) -> bytes:
    """Header line plus one line per row, quoted as needed, ``\\n`` endings."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(report.columns)
    for row in report.iter_rows():
        w.writerow([_cell_text(v, report.float_digits) for v in row])
    return buf.getvalue().encode("utf-8")


def metadata(report: ExperimentReport) -> dict:
    """Everything except the rows: parameters, summary, seed and PRNG."""
    meta = {
        "experiment": report.experiment,
        "parameters": dict(report.parameters),
        "columns": list(report.columns),
        "summary": _json_value(report.summary),
        "seed": report.seed,
    }
    if report.seed is not None:
        meta["prng"] = PRNG_NAME
    return meta


def emit_json(report: ExperimentReport) -> bytes:
    """A single object with sorted keys; rationals appear as ``"p/q"`` strings."""
    obj = metadata(report)
    obj["rows"] = [_json_value(list(r)) for r in report.iter_rows()]
    return (json.dumps(obj, sort_keys=True, indent=1) + "\n").encode("utf-8")


def emit_metadata(report: ExperimentReport) -> bytes:
    return (json.dumps(metadata(report), sort_keys=True, indent=1) + "\n").encode("utf-8")


def _series(report: ExperimentReport) -> Iterable[Tuple[float, float]]:
    if report.plot is None:
        raise NotPlottable(f"{report.experiment} has no plottable series")
    xi, yi = (report.columns.index(c) for c in report.plot)
    for row in report.iter_rows():
        yield float(row[xi]), float(row[yi])


def downsample(points: Iterable[Tuple[float, float]], count: int, max_points: int) -> List[Tuple[float, float]]:
    """Min/max bucketing of ``count`` points in x order to at most ``max_points``.

    Each bucket keeps its lowest and highest point (in their original order),
    so the running minimum and maximum of the series are preserved exactly.
    """
    if max_points < 2:
        raise ValueError("max_points must be at least 2")
    if count <= max_points:
        return list(points)
    size = -(-count // (max_points // 2))
    out: List[Tuple[float, float]] = []
    bucket: List[Tuple[int, Tuple[float, float]]] = []

    def flush():
        lo = min(bucket, key=lambda t: (t[1][1], t[0]))
        hi = max(bucket, key=lambda t: (t[1][1], -t[0]))
        for _, p in sorted({lo, hi}):
            out.append(p)

    for i, p in enumerate(points):
        bucket.append((i, p))
        if len(bucket) == size:
            flush()
            bucket = []
    if bucket:
        flush()
    return out


def _ticks(lo: float, hi: float) -> List[float]:
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / (_TICKS - 1) for i in range(_TICKS)]


def emit_svg(report: ExperimentReport, max_points: int = DEFAULT_MAX_POINTS) -> bytes:
    """A self-contained SVG with one polyline and linear, labelled axes."""
    count = sum(1 for _ in report.iter_rows())
    pts = downsample(_series(report), count, max_points)
    if not pts:
        raise NotPlottable("no rows to plot")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if y0 == y1:
        y0, y1 = y0 - 1, y1 + 1
    if x0 == x1:
        x0, x1 = x0 - 1, x1 + 1
    pw = SVG_WIDTH - _MARGIN_L - _MARGIN_R
    ph = SVG_HEIGHT - _MARGIN_T - _MARGIN_B

    def sx(x):
        return _MARGIN_L + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return _MARGIN_T + (y1 - y) / (y1 - y0) * ph

    xname, yname = report.plot
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" '
        f'viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">',
        f'<title>{escape(report.experiment)}: {escape(yname)} against {escape(xname)}</title>',
        f'<desc>{escape(json.dumps(metadata(report), sort_keys=True))}</desc>',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<g stroke="black" stroke-width="1"><line x1="{_MARGIN_L}" y1="{_MARGIN_T + ph}" '
        f'x2="{_MARGIN_L + pw}" y2="{_MARGIN_T + ph}"/><line x1="{_MARGIN_L}" y1="{_MARGIN_T}" '
        f'x2="{_MARGIN_L}" y2="{_MARGIN_T + ph}"/></g>',
        '<g font-family="sans-serif" font-size="11" fill="black">',
    ]
    for t in _ticks(x0, x1):
        x = sx(t)
        lines.append(
            f'<line x1="{x:.2f}" y1="{_MARGIN_T + ph}" x2="{x:.2f}" y2="{_MARGIN_T + ph + 5}" stroke="black"/>'
            f'<text x="{x:.2f}" y="{_MARGIN_T + ph + 18}" text-anchor="middle">{t:.6g}</text>'
        )
    for t in _ticks(y0, y1):
        y = sy(t)
        lines.append(
            f'<line x1="{_MARGIN_L - 5}" y1="{y:.2f}" x2="{_MARGIN_L}" y2="{y:.2f}" stroke="black"/>'
            f'<text x="{_MARGIN_L - 8}" y="{y + 4:.2f}" text-anchor="end">{t:.6g}</text>'
        )
    lines.append(
        f'<text x="{_MARGIN_L + pw / 2:.2f}" y="{SVG_HEIGHT - 12}" text-anchor="middle">{escape(xname)}</text>'
        f'<text x="16" y="{_MARGIN_T + ph / 2:.2f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {_MARGIN_T + ph / 2:.2f})">{escape(yname)}</text>'
    )
    lines.append("</g>")
    coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
    lines.append(f'<polyline fill="none" stroke="steelblue" stroke-width="1" points="{coords}"/>')
    lines.append("</svg>")
    return ("\n".join(lines) + "\n").encode("utf-8")


def emit(report: ExperimentReport, fmt: str, max_points: int = DEFAULT_MAX_POINTS) -> bytes:
    if fmt == "csv":
        return emit_csv(report)
    if fmt == "json":
        return emit_json(report)
    if fmt == "svg":
        return emit_svg(report, max_points)
    raise ValueError(f"unknown format {fmt!r}")
