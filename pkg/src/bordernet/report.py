"""Result serialization: benchmark CSV files and hand-rolled SVG plots.

The CSV schema is fixed at twelve columns so downstream tooling can rely
on it; floats are written with repr precision and survive a round trip
through ``read_results_csv``.  The SVG writers emit self-contained
markup (rects, lines, text) with no external dependencies: a per-cell
colored table for benchmark sweeps and a polyline plot for planar
trajectory fans.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .harness import CellResult

CSV_COLUMNS = ("dataset", "kind", "w", "s",
               "mean_lenet5", "std_lenet5", "mean_bordernet", "std_bordernet",
               "imp_median_pct", "ci_low", "ci_high", "cycles")

IMPROVEMENT = "improvement"
LENET5 = "lenet5"
BORDERNET = "bordernet"
HEATMAP_FIELDS = (IMPROVEMENT, LENET5, BORDERNET)


def emit_csv(results: list[CellResult], path) -> None:
    """Write one row per cell; an empty result list leaves just the header."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in results:
            writer.writerow([
                r.dataset, r.kind, r.w, r.s,
                repr(r.mean_lenet5), repr(r.std_lenet5),
                repr(r.mean_bordernet), repr(r.std_bordernet),
                repr(r.imp_median_pct), repr(r.ci_low_pct), repr(r.ci_high_pct),
                r.cycles,
            ])


def read_results_csv(path) -> list[dict]:
    """Parse a benchmark CSV back into typed row dictionaries."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for raw in reader:
            row = dict(raw)
            for key in ("w", "s", "cycles"):
                row[key] = int(row[key])
            for key in CSV_COLUMNS[4:11]:
                row[key] = float(row[key])
            rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# Heatmap SVG

def _diverging_color(value: float, lo: float, hi: float, center: float) -> str:
    """Blue below the center, white at it, red above; clipped at lo/hi."""
    if not np.isfinite(value):
        return "#c8c8c8"
    if value >= center:
        span = max(hi - center, 1e-12)
        t = min((value - center) / span, 1.0)
        r, g, b = 255, round(255 * (1 - 0.75 * t)), round(255 * (1 - 0.75 * t))
    else:
        span = max(center - lo, 1e-12)
        t = min((center - value) / span, 1.0)
        r, g, b = round(255 * (1 - 0.75 * t)), round(255 * (1 - 0.75 * t)), 255
    return f"#{r:02x}{g:02x}{b:02x}"


def _sequential_color(value: float, lo: float, hi: float) -> str:
    """White at the low end shading to green at the high end."""
    if not np.isfinite(value):
        return "#c8c8c8"
    t = (value - lo) / max(hi - lo, 1e-12)
    t = min(max(t, 0.0), 1.0)
    other = round(255 * (1 - 0.8 * t))
    return f"#{other:02x}{round(255 - 40 * t):02x}{other:02x}"


def _cell_value(result: CellResult, field: str) -> float:
    if field == IMPROVEMENT:
        return result.imp_median_pct
    if field == LENET5:
        return result.mean_lenet5
    return result.mean_bordernet


def emit_heatmap_svg(results: list[CellResult], path, field: str = IMPROVEMENT) -> None:
    """Render one (w, s) table per occlusion kind present in the results.

    Rows are stripe widths w, columns spacings s.  The improvement field
    uses a diverging scale centered at 100 percent; accuracy fields use
    a sequential scale.  Each cell prints its numeric value; the scale
    extrema are annotated under each table.
    """
    if field not in HEATMAP_FIELDS:
        raise ValueError(f"field must be one of {HEATMAP_FIELDS}, got {field!r}")
    kinds = []
    for r in results:
        if r.kind not in kinds:
            kinds.append(r.kind)
    cell_px, left, top, gap = 52, 46, 34, 48
    ws = sorted({r.w for r in results}) or [1]
    ss = sorted({r.s for r in results}) or [1]
    grid_w = left + len(ss) * cell_px + 16
    block_h = top + len(ws) * cell_px + 36
    total_h = max(len(kinds), 1) * (block_h + gap)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{grid_w}" '
             f'height="{total_h}" font-family="monospace" font-size="11">']
    values = [_cell_value(r, field) for r in results]
    finite = [v for v in values if np.isfinite(v)]
    lo = min(finite) if finite else 0.0
    hi = max(finite) if finite else 1.0
    for bi, kind in enumerate(kinds):
        oy = bi * (block_h + gap)
        parts.append(f'<text x="{left}" y="{oy + 14}" font-size="13">'
                     f'{kind} / {field}</text>')
        lookup = {(r.w, r.s): r for r in results if r.kind == kind}
        for yi, w in enumerate(ws):
            parts.append(f'<text x="8" y="{oy + top + yi * cell_px + cell_px // 2 + 4}">'
                         f'w={w}</text>')
            for xi, s in enumerate(ss):
                if yi == 0:
                    parts.append(f'<text x="{left + xi * cell_px + 8}" '
                                 f'y="{oy + top - 6}">s={s}</text>')
                x0 = left + xi * cell_px
                y0 = oy + top + yi * cell_px
                r = lookup.get((w, s))
                if r is None:
                    parts.append(f'<rect x="{x0}" y="{y0}" width="{cell_px}" '
                                 f'height="{cell_px}" fill="#eeeeee" stroke="#999999"/>')
                    continue
                v = _cell_value(r, field)
                if field == IMPROVEMENT:
                    color = _diverging_color(v, lo, hi, 100.0)
                    label = f"{v:.1f}"
                else:
                    color = _sequential_color(v, lo, hi)
                    label = f"{v:.3f}"
                parts.append(f'<rect x="{x0}" y="{y0}" width="{cell_px}" '
                             f'height="{cell_px}" fill="{color}" stroke="#666666"/>')
                parts.append(f'<text x="{x0 + 4}" y="{y0 + cell_px // 2 + 4}">'
                             f'{label}</text>')
        parts.append(f'<text x="{left}" y="{oy + top + len(ws) * cell_px + 18}">'
                     f'scale min={lo:.3f} max={hi:.3f}'
                     + (' center=100.0' if field == IMPROVEMENT else '') + '</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts))


# ---------------------------------------------------------------------------
# Trajectory fan SVG

def fan_svg(trajectories, path, width: int = 640, height: int = 640) -> None:
    """Plot the (x, y) projection of each trajectory as one polyline."""
    if not trajectories:
        raise ValueError("no trajectories to plot")
    xs = np.concatenate([t.x for t in trajectories])
    ys = np.concatenate([t.y for t in trajectories])
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = float(ys.min()), float(ys.max())
    span = max(x_hi - x_lo, y_hi - y_lo, 1e-9)
    margin = 24
    scale = (min(width, height) - 2 * margin) / span
    palette = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
               "#8c564b", "#17becf", "#7f7f7f")

    def to_px(x, y):
        # SVG y grows downward; flip so the plot reads like graph paper.
        px = margin + (x - x_lo) * scale
        py = height - margin - (y - y_lo) * scale
        return px, py

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>']
    for i, traj in enumerate(trajectories):
        pts = " ".join(f"{px:.2f},{py:.2f}" for px, py
                       in (to_px(float(x), float(y))
                           for x, y in zip(traj.x, traj.y)))
        color = palette[i % len(palette)]
        parts.append(f'<polyline points="{pts}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"/>')
    ox, oy = to_px(0.0, 0.0)
    parts.append(f'<circle cx="{ox:.2f}" cy="{oy:.2f}" r="3" fill="black"/>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts))
