"""Minimal standalone SVG output: scatter plots, line panels and heat maps."""
from __future__ import annotations

import base64
import math
import struct
import zlib
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


def color(k: int) -> str:
    return PALETTE[k % len(PALETTE)]


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class Canvas:
    def __init__(self, width: int, height: int):
        self.width, self.height = width, height
        self.parts: list[str] = []

    def add(self, s: str) -> None:
        self.parts.append(s)

    def text(self, x, y, s, size=12, anchor="middle", rotate=None):
        tr = f' transform="rotate({rotate} {_fmt(x)} {_fmt(y)})"' if rotate else ""
        self.add(f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{size}" font-family="sans-serif" '
                 f'text-anchor="{anchor}"{tr}>{escape(str(s))}</text>')

    def render(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
                f'viewBox="0 0 {self.width} {self.height}">')
        return "\n".join(['<?xml version="1.0" encoding="UTF-8"?>', head,
                          f'<rect width="{self.width}" height="{self.height}" fill="white"/>',
                          *self.parts, "</svg>"]) + "\n"

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.render())


class Panel:
    """An axes box mapping data coordinates onto a rectangle of a canvas."""

    def __init__(self, canvas, box, xlim, ylim, title="", xlabel="", ylabel="", equal=False):
        self.c = canvas
        self.x0, self.y0, self.w, self.h = box
        (a, b), (lo, hi) = xlim, ylim
        if b <= a:
            a, b = a - 0.5, a + 0.5
        if hi <= lo:
            lo, hi = lo - 0.5, lo + 0.5
        if equal:
            span = max((b - a) / self.w, (hi - lo) / self.h)
            cx, cy = (a + b) / 2, (lo + hi) / 2
            a, b = cx - span * self.w / 2, cx + span * self.w / 2
            lo, hi = cy - span * self.h / 2, cy + span * self.h / 2
        self.xlim, self.ylim = (a, b), (lo, hi)
        canvas.add(f'<rect x="{_fmt(self.x0)}" y="{_fmt(self.y0)}" width="{_fmt(self.w)}" height="{_fmt(self.h)}" '
                   'fill="none" stroke="black"/>')
        if title:
            canvas.text(self.x0 + self.w / 2, self.y0 - 8, title, 13)
        if xlabel:
            canvas.text(self.x0 + self.w / 2, self.y0 + self.h + 34, xlabel)
        if ylabel:
            canvas.text(self.x0 - 40, self.y0 + self.h / 2, ylabel, rotate=-90)
        self._ticks()

    def px(self, x):
        a, b = self.xlim
        return self.x0 + (np.asarray(x, float) - a) / (b - a) * self.w

    def py(self, y):
        lo, hi = self.ylim
        return self.y0 + self.h - (np.asarray(y, float) - lo) / (hi - lo) * self.h

    def _ticks(self):
        for v in _nice_ticks(*self.xlim):
            x = float(self.px(v))
            self.c.add(f'<line x1="{_fmt(x)}" y1="{_fmt(self.y0 + self.h)}" x2="{_fmt(x)}" '
                       f'y2="{_fmt(self.y0 + self.h + 4)}" stroke="black"/>')
            self.c.text(x, self.y0 + self.h + 16, _label(v), 10)
        for v in _nice_ticks(*self.ylim):
            y = float(self.py(v))
            self.c.add(f'<line x1="{_fmt(self.x0 - 4)}" y1="{_fmt(y)}" x2="{_fmt(self.x0)}" y2="{_fmt(y)}" stroke="black"/>')
            self.c.text(self.x0 - 6, y + 3, _label(v), 10, anchor="end")

    def points(self, x, y, fill="black", r=1.8, opacity=0.8):
        for a, b in zip(self.px(x), self.py(y)):
            self.c.add(f'<circle cx="{_fmt(a)}" cy="{_fmt(b)}" r="{r}" fill="{fill}" fill-opacity="{opacity}"/>')

    def polyline(self, x, y, stroke="black", width=1.5, dash=None):
        pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(self.px(x), self.py(y)))
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.c.add(f'<polyline points="{pts}" fill="none" stroke="{stroke}" stroke-width="{width}"{d}/>')

    def legend(self, entries):
        for j, (name, col) in enumerate(entries):
            y = self.y0 + 14 + 15 * j
            x = self.x0 + self.w - 120
            self.c.add(f'<line x1="{_fmt(x)}" y1="{_fmt(y - 4)}" x2="{_fmt(x + 18)}" y2="{_fmt(y - 4)}" '
                       f'stroke="{col}" stroke-width="2"/>')
            self.c.text(x + 24, y, name, 10, anchor="start")


def _nice_ticks(a, b, target=5):
    span = b - a
    if span <= 0 or not math.isfinite(span):
        return []
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10)), key=lambda s: abs(s - raw))
    start = math.ceil(a / step) * step
    return [start + k * step for k in range(int((b - start) / step) + 1)]


def _label(v):
    return f"{v:.3g}" if abs(v) > 1e-12 else "0"


def scatter_svg(points, labels=None, path=None, title="", boundaries=None, width=640, height=480):
    """Scatter of 2-D points coloured by label, with optional named boundary polylines."""
    pts = np.asarray(points, float)
    cv = Canvas(width, height)
    pad = 0.05 * (np.ptp(pts, axis=0) + 1e-9)
    xlim = (pts[:, 0].min() - pad[0], pts[:, 0].max() + pad[0])
    ylim = (pts[:, 1].min() - pad[1], pts[:, 1].max() + pad[1])
    if boundaries:
        allb = np.vstack([np.vstack(p) for p in boundaries.values() if p] or [pts[:1]])
        xlim = (min(xlim[0], allb[:, 0].min()), max(xlim[1], allb[:, 0].max()))
        ylim = (min(ylim[0], allb[:, 1].min()), max(ylim[1], allb[:, 1].max()))
    panel = Panel(cv, (60, 40, width - 90, height - 90), xlim, ylim, title, "x1", "x2", equal=True)
    if labels is None:
        panel.points(pts[:, 0], pts[:, 1], "black")
    else:
        labels = np.asarray(labels)
        for k in np.unique(labels):
            m = labels == k
            panel.points(pts[m, 0], pts[m, 1], color(int(k)))
    if boundaries:
        entries = []
        for j, (name, polys) in enumerate(boundaries.items()):
            col = color(j + 2)
            for poly in polys:
                panel.polyline(poly[:, 0], poly[:, 1], col, 2.0)
            entries.append((name, col))
        panel.legend(entries)
    if path:
        cv.save(path)
    return cv


def line_panels_svg(panels, path=None, width=900, height=380):
    """Side-by-side line plots; ``panels`` is a list of dicts with title, xlabel,
    ylabel and ``series`` mapping a name to (xs, ys)."""
    cv = Canvas(width, height)
    pw = (width - 80 * len(panels)) / len(panels)
    for j, spec in enumerate(panels):
        xs_all = np.concatenate([np.asarray(v[0], float) for v in spec["series"].values()] + [np.zeros(0)])
        ys_all = np.concatenate([np.asarray(v[1], float) for v in spec["series"].values()] + [np.zeros(0)])
        xs_all = xs_all if xs_all.size else np.zeros(1)
        ys_all = ys_all[np.isfinite(ys_all)] if np.isfinite(ys_all).any() else np.zeros(1)
        panel = Panel(cv, (70 + j * (pw + 80), 40, pw, height - 100),
                      (xs_all.min() - 0.5, xs_all.max() + 0.5),
                      (min(0.0, ys_all.min()), ys_all.max() * 1.08 + 1e-9),
                      spec.get("title", ""), spec.get("xlabel", ""), spec.get("ylabel", ""))
        entries = []
        for k, (name, (xs, ys)) in enumerate(spec["series"].items()):
            xs, ys = np.asarray(xs, float), np.asarray(ys, float)
            ok = np.isfinite(ys)
            panel.polyline(xs[ok], ys[ok], color(k))
            panel.points(xs[ok], ys[ok], color(k), r=3)
            entries.append((name, color(k)))
        if len(entries) > 1:
            panel.legend(entries)
    if path:
        cv.save(path)
    return cv


def _png(gray: np.ndarray) -> bytes:
    """8-bit grayscale PNG bytes."""
    h, w = gray.shape
    raw = b"".join(b"\x00" + row.tobytes() for row in gray.astype(np.uint8))

    def chunk(tag, data):
        return struct.pack(">I", len(data)) + tag + data + struct.pack(">I", zlib.crc32(tag + data) & 0xFFFFFFFF)

    return (b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", struct.pack(">IIBBBBB", w, h, 8, 0, 0, 0, 0))
            + chunk(b"IDAT", zlib.compress(raw, 9)) + chunk(b"IEND", b""))


def heatmap_svg(matrix, path=None, title="", xlabel="", ylabel="", width=900, height=420):
    """Matrix rendered as an embedded grayscale image (dark = large)."""
    m = np.asarray(matrix, float)
    top = m.max() if m.max() > 0 else 1.0
    gray = 255 - np.round(255 * m / top)
    cv = Canvas(width, height)
    x0, y0, w, h = 70, 40, width - 100, height - 100
    data = base64.b64encode(_png(gray)).decode()
    cv.add(f'<image x="{x0}" y="{y0}" width="{w}" height="{h}" preserveAspectRatio="none" '
           f'style="image-rendering:pixelated" href="data:image/png;base64,{data}"/>')
    cv.add(f'<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="black"/>')
    if title:
        cv.text(x0 + w / 2, y0 - 10, title, 13)
    cv.text(x0 + w / 2, y0 + h + 30, xlabel or f"cell (0..{m.shape[1] - 1})")
    cv.text(x0 - 30, y0 + h / 2, ylabel or f"data index (0..{m.shape[0] - 1})", rotate=-90)
    if path:
        cv.save(path)
    return cv
