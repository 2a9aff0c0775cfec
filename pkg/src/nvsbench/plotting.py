"""Standalone SVG line charts of median score vs. corruption axis.

Hand-assembled SVG keeps the output byte-deterministic: same summary rows,
same bytes. The y axis is pinned to [0, 1] so charts of different kinds and
metrics are directly comparable.
"""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

from .errors import NoData

_W, _H = 700, 440
_ML, _MR, _MT, _MB = 62, 180, 36, 54
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd",
            "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _tick_label(v) -> str:
    if float(v).is_integer():
        return str(int(v))
    return _fmt(float(v))


def emit_plot(rows, kind: str, path) -> None:
    """Write one chart for `kind`: a polyline per metric (and region)."""
    if hasattr(kind, "value"):
        kind = kind.value
    rows = [r for r in rows if r.kind == kind]
    if not rows:
        raise NoData(f"no summary rows for kind {kind!r}")
    axis_name = rows[0].axis_name

    series = {}
    for r in rows:
        label = f"{r.metric} ({r.region})" if r.region else r.metric
        series.setdefault(label, []).append(r)

    xs = sorted({float(r.axis_value) for r in rows})
    x_lo, x_hi = xs[0], xs[-1]
    span = (x_hi - x_lo) or 1.0
    plot_w = _W - _ML - _MR
    plot_h = _H - _MT - _MB

    def px(x):
        return _ML + (float(x) - x_lo) / span * plot_w

    def py(y):
        return _MT + (1.0 - float(y)) * plot_h

    parts = []
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">')
    parts.append(f'<rect width="{_W}" height="{_H}" fill="#ffffff"/>')
    parts.append(
        f'<text x="{_ML}" y="20" font-size="15" fill="#111111">'
        f'{escape(kind)}</text>')

    # Gridlines and y ticks at fixed quarters.
    for i in range(5):
        y = i / 4.0
        yy = py(y)
        parts.append(
            f'<line x1="{_ML}" y1="{yy:.2f}" x2="{_ML + plot_w}" '
            f'y2="{yy:.2f}" stroke="#dddddd" stroke-width="1"/>')
        parts.append(
            f'<text x="{_ML - 8}" y="{yy + 4:.2f}" text-anchor="end" '
            f'fill="#333333">{_fmt(y)}</text>')

    # X ticks: every value when few, else a deterministic stride.
    stride = max(1, (len(xs) + 10) // 11)
    for i, x in enumerate(xs):
        if i % stride and i != len(xs) - 1:
            continue
        xx = px(x)
        parts.append(
            f'<line x1="{xx:.2f}" y1="{_MT + plot_h}" x2="{xx:.2f}" '
            f'y2="{_MT + plot_h + 5}" stroke="#333333" stroke-width="1"/>')
        parts.append(
            f'<text x="{xx:.2f}" y="{_MT + plot_h + 20}" text-anchor="middle" '
            f'fill="#333333">{_tick_label(x)}</text>')

    parts.append(
        f'<rect x="{_ML}" y="{_MT}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#333333" stroke-width="1"/>')
    parts.append(
        f'<text x="{_ML + plot_w / 2:.2f}" y="{_H - 14}" text-anchor="middle" '
        f'fill="#333333">{escape(axis_name)}</text>')
    parts.append(
        f'<text x="16" y="{_MT + plot_h / 2:.2f}" text-anchor="middle" '
        f'fill="#333333" transform="rotate(-90 16 {_MT + plot_h / 2:.2f})">'
        f'median normalized score</text>')

    legend_y = _MT + 6
    for i, label in enumerate(sorted(series)):
        color = _PALETTE[i % len(_PALETTE)]
        pts = sorted(((float(r.axis_value), r.median_normalized)
                      for r in series[label]), key=lambda p: p[0])
        pts = [(x, y) for x, y in pts if y is not None]
        if pts:
            coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
            parts.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" '
                f'stroke-width="2"/>')
            for x, y in pts:
                parts.append(
                    f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2.5" '
                    f'fill="{color}"/>')
        lx = _ML + plot_w + 16
        parts.append(
            f'<line x1="{lx}" y1="{legend_y + 5}" x2="{lx + 22}" '
            f'y2="{legend_y + 5}" stroke="{color}" stroke-width="2"/>')
        parts.append(
            f'<text x="{lx + 28}" y="{legend_y + 9}" fill="#111111">'
            f'{escape(label)}</text>')
        legend_y += 20

    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")
