"""Deterministic CSV tables and minimal SVG line plots."""
from __future__ import annotations

import csv
import io as _io
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

SWEEP_HEADER = ("l", "x0", "lambda", "epsilon", "branch", "localized", "residual")
REDUCED_HEADER = ("l", "x0", "lambda")
PERTURB_HEADER = ("delta", "epsilon_pencil", "epsilon_linear", "deviation")
DIRAC_HEADER = ("l", "x0", "nodes", "regular", "epsilon", "dirac_residual")


def fmt(value) -> str:
    """12 significant digits in scientific notation; None becomes an empty field."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    v = float(value)
    if not math.isfinite(v):
        raise ValueError(f"refusing to serialize non-finite value {v!r}")
    if v == 0.0:
        v = 0.0  # drop the sign of -0.0
    return f"{v:.11e}"


def render_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def sweep_rows(rows) -> list[tuple]:
    out = []
    for r in rows:
        s = r.solution
        if s is None:
            out.append((r.l, r.x0, None, None, "", False, None))
        else:
            out.append((r.l, r.x0, s.lam, s.epsilon, s.branch, bool(s.localized),
                         s.diagnostics.get("pencil_residual")))
    return out


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


# --------------------------------------------------------------------------
# SVG

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_W, _H, _M = 640, 420, 60


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    out, t = [], start
    while t <= hi + 1e-12 * step:
        out.append(round(t, 12))
        t += step
    return out


def render_svg(series: Mapping[str, tuple[Sequence[float], Sequence[float]]], title: str,
               xlabel: str, ylabel: str) -> str:
    """Polyline plot of labelled (x, y) series with axes and a legend.

    Series with None in y are split into separate polyline segments.
    """
    pts = [(x, y) for xs, ys in series.values() for x, y in zip(xs, ys) if y is not None]
    if pts:
        x_lo, x_hi = min(p[0] for p in pts), max(p[0] for p in pts)
        y_lo, y_hi = min(p[1] for p in pts), max(p[1] for p in pts)
    else:
        x_lo, x_hi, y_lo, y_hi = 0.0, 1.0, 0.0, 1.0
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def sx(x):
        return _M + (x - x_lo) / (x_hi - x_lo) * (_W - 2 * _M)

    def sy(y):
        return _H - _M - (y - y_lo) / (y_hi - y_lo) * (_H - 2 * _M)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="24" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{_M}" y1="{_H - _M}" x2="{_W - _M}" y2="{_H - _M}" stroke="black"/>',
        f'<line x1="{_M}" y1="{_M}" x2="{_M}" y2="{_H - _M}" stroke="black"/>',
    ]
    for t in _ticks(x_lo, x_hi):
        out.append(f'<line x1="{sx(t):.2f}" y1="{_H - _M}" x2="{sx(t):.2f}" '
                   f'y2="{_H - _M + 5}" stroke="black"/>')
        out.append(f'<text x="{sx(t):.2f}" y="{_H - _M + 18}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y_lo, y_hi):
        out.append(f'<line x1="{_M - 5}" y1="{sy(t):.2f}" x2="{_M}" y2="{sy(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{_M - 8}" y="{sy(t) + 4:.2f}" text-anchor="end">{t:g}</text>')
    if y_lo < 0 < y_hi:
        out.append(f'<line x1="{_M}" y1="{sy(0):.2f}" x2="{_W - _M}" y2="{sy(0):.2f}" '
                   'stroke="#999" stroke-dasharray="4 3"/>')
    out.append(f'<text x="{_W / 2:.1f}" y="{_H - 15}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="18" y="{_H / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {_H / 2:.1f})">{ylabel}</text>')
    for k, (label, (xs, ys)) in enumerate(series.items()):
        colour = _PALETTE[k % len(_PALETTE)]
        segment: list[str] = []
        segments = [segment]
        for x, y in zip(xs, ys):
            if y is None:
                segment = []
                segments.append(segment)
            else:
                segment.append(f"{sx(x):.2f},{sy(y):.2f}")
        for seg in segments:
            if len(seg) > 1:
                out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" '
                           f'points="{" ".join(seg)}"/>')
            elif seg:
                cx, cy = seg[0].split(",")
                out.append(f'<circle cx="{cx}" cy="{cy}" r="2" fill="{colour}"/>')
        ly = _M + 16 * k
        out.append(f'<line x1="{_W - _M - 70}" y1="{ly}" x2="{_W - _M - 50}" y2="{ly}" '
                   f'stroke="{colour}" stroke-width="2"/>')
        out.append(f'<text x="{_W - _M - 45}" y="{ly + 4}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
