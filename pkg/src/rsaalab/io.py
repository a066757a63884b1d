"""Atomic CSV/JSON writers and dependency-free SVG charts."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def atomic_write_text(path, text: str) -> Path:
    """Write to a temporary sibling, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    return atomic_write_text(path, csv_text(header, rows))


def write_json(path, obj) -> Path:
    return atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


# -- SVG --------------------------------------------------------------------

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]


def _scale(v, lo, hi, a, b):
    return a + (b - a) * (v - lo) / ((hi - lo) or 1.0)


def svg_line_chart(path, series, title: str = "", logy: bool = False, width: int = 640,
                   height: int = 400, xlabel: str = "", ylabel: str = "") -> Path:
    """``series`` is a list of (label, x, y). Non-positive y are dropped when ``logy``."""
    pad = 50
    prepared = []
    for label, x, y in series:
        x, y = np.asarray(x, float), np.asarray(y, float)
        keep = np.isfinite(y) & ((y > 0) if logy else True)
        prepared.append((label, x[keep], np.log10(y[keep]) if logy else y[keep]))
    xs = np.concatenate([p[1] for p in prepared]) if prepared else np.zeros(1)
    ys = np.concatenate([p[2] for p in prepared]) if prepared else np.zeros(1)
    if xs.size == 0:
        xs, ys = np.zeros(1), np.zeros(1)
    x0, x1, y0, y1 = xs.min(), xs.max(), ys.min(), ys.max()
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
             f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
             f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
             f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle" font-size="12">{xlabel}</text>',
             f'<text x="12" y="{height / 2}" font-size="12" transform="rotate(-90 12 {height / 2})">'
             f'{ylabel}{" (log10)" if logy else ""}</text>',
             f'<text x="{pad}" y="{height - pad + 15}" font-size="10">{x0:.3g}</text>',
             f'<text x="{width - pad}" y="{height - pad + 15}" font-size="10" text-anchor="end">{x1:.3g}</text>',
             f'<text x="{pad - 4}" y="{height - pad}" font-size="10" text-anchor="end">{y0:.3g}</text>',
             f'<text x="{pad - 4}" y="{pad + 4}" font-size="10" text-anchor="end">{y1:.3g}</text>']
    for i, (label, x, y) in enumerate(prepared):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{_scale(a, x0, x1, pad, width - pad):.2f},{_scale(b, y0, y1, height - pad, pad):.2f}"
                       for a, b in zip(x, y))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        for a, b in zip(x, y):
            parts.append(f'<circle cx="{_scale(a, x0, x1, pad, width - pad):.2f}" '
                         f'cy="{_scale(b, y0, y1, height - pad, pad):.2f}" r="2.5" fill="{color}"/>')
        parts.append(f'<text x="{width - pad - 120}" y="{pad + 16 * i}" font-size="12" fill="{color}">{label}</text>')
    parts.append("</svg>")
    return atomic_write_text(path, "\n".join(parts) + "\n")


def svg_heatmap(path, Z, extent, title: str = "", max_cells: int = 100) -> Path:
    """Grayscale-to-blue heat map of a 2D array, downsampled to ``max_cells`` per side."""
    Z = np.asarray(Z, dtype=float)
    sx = max(1, int(np.ceil(Z.shape[0] / max_cells)))
    sy = max(1, int(np.ceil(Z.shape[1] / max_cells)))
    Z = Z[::sx, ::sy]
    lo, hi = np.nanmin(Z), np.nanmax(Z)
    size = 400
    cw, ch = size / Z.shape[0], size / Z.shape[1]
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size + 20}" height="{size + 60}">',
             f'<text x="{size / 2}" y="18" text-anchor="middle" font-size="14">{title}</text>',
             f'<g transform="translate(10,30)">']
    for i in range(Z.shape[0]):
        for j in range(Z.shape[1]):
            t = 0.0 if hi == lo else (Z[i, j] - lo) / (hi - lo)
            c = int(255 * t)
            # x runs left to right, y bottom to top
            parts.append(f'<rect x="{i * cw:.2f}" y="{size - (j + 1) * ch:.2f}" width="{cw + 0.05:.2f}" '
                         f'height="{ch + 0.05:.2f}" fill="rgb({c},{c},255)"/>')
    parts.append("</g>")
    (x0, x1), (y0, y1) = extent
    parts.append(f'<text x="10" y="{size + 50}" font-size="10">x in [{x0:.3g}, {x1:.3g}], '
                 f'y in [{y0:.3g}, {y1:.3g}], value in [{lo:.3g}, {hi:.3g}]</text>')
    parts.append("</svg>")
    return atomic_write_text(path, "\n".join(parts) + "\n")
