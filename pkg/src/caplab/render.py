"""Tiny deterministic SVG writers for bodies, caps, heatmaps and line plots."""

from __future__ import annotations

import numpy as np


def _fmt(x):
    return f"{float(x):.6g}"


def _svg(width, height, parts):
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">'
    )
    return head + "".join(parts) + "</svg>\n"


def _polyline(points, stroke, width=1.0):
    coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
    return (
        f'<polyline fill="none" stroke="{stroke}" '
        f'stroke-width="{_fmt(width)}" points="{coords}"/>'
    )


def body_with_caps_svg(body, caps, path, size=640, samples=1024):
    """Boundary polyline with highlighted cap arcs."""
    pts = body.boundary_points(samples)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    pad = 0.08 * span

    def to_px(p):
        x = (p[..., 0] - lo[0] + pad) / (span + 2 * pad) * size
        y = size - (p[..., 1] - lo[1] + pad) / (span + 2 * pad) * size
        return np.stack([x, y], axis=-1)

    parts = [_polyline(to_px(np.vstack([pts, pts[:1]])), "#333333", 1.0)]
    colors = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd"]
    for ci, cap in enumerate(caps):
        for piece_idx, u0, u1 in cap.arcs:
            us = np.linspace(u0, u1, 64)
            arc = body.pieces[piece_idx].point(us)
            parts.append(_polyline(to_px(arc), colors[ci % len(colors)], 3.0))
    with open(path, "w", newline="\n") as fh:
        fh.write(_svg(size, size, parts))


def heatmap_svg(field, path, size=640, max_cells=128):
    """Block-averaged grayscale mosaic of a field."""
    v = np.abs(np.asarray(field.values, dtype=float))
    n = v.shape[0]
    step = max(1, n // max_cells)
    m = n // step
    blocks = v[: m * step, : m * step].reshape(m, step, m, step).mean(axis=(1, 3))
    top = blocks.max() or 1.0
    cell = size / m
    parts = []
    for i in range(m):
        for j in range(m):
            g = int(255 * (1.0 - blocks[i, j] / top))
            parts.append(
                f'<rect x="{_fmt(j * cell)}" y="{_fmt(size - (i + 1) * cell)}" '
                f'width="{_fmt(cell)}" height="{_fmt(cell)}" '
                f'fill="rgb({g},{g},{g})"/>'
            )
    with open(path, "w", newline="\n") as fh:
        fh.write(_svg(size, size, parts))


def line_plot_svg(series, path, size=(720, 480), logy=False):
    """Plot (xs, ys, label) series on shared axes."""
    w, h = size
    allx = np.concatenate([np.asarray(s[0], dtype=float) for s in series])
    ally = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    if logy:
        ally = np.log10(np.maximum(ally, 1e-300))
    x0, x1 = float(allx.min()), float(allx.max())
    y0, y1 = float(ally.min()), float(ally.max())
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0
    pad = 40.0

    def to_px(xs, ys):
        ys = np.log10(np.maximum(ys, 1e-300)) if logy else ys
        px = pad + (np.asarray(xs) - x0) / (x1 - x0) * (w - 2 * pad)
        py = h - pad - (np.asarray(ys) - y0) / (y1 - y0) * (h - 2 * pad)
        return np.stack([px, py], axis=-1)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"]
    parts = [
        _polyline([(pad, h - pad), (w - pad, h - pad)], "#000000", 1.0),
        _polyline([(pad, pad), (pad, h - pad)], "#000000", 1.0),
    ]
    for i, (xs, ys, label) in enumerate(series):
        parts.append(_polyline(to_px(xs, ys), colors[i % len(colors)], 1.5))
        parts.append(
            f'<text x="{_fmt(w - pad - 150)}" y="{_fmt(pad + 16 * (i + 1))}" '
            f'fill="{colors[i % len(colors)]}" font-size="12">{label}</text>'
        )
    with open(path, "w", newline="\n") as fh:
        fh.write(_svg(w, h, parts))
