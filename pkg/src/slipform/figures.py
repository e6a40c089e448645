"""Rendering: a hand-rolled SVG for meshes, matplotlib for sweep reports.

The mesh renderer writes plain SVG text so colors and coordinates are
reproducible to the byte. Cells are colored by their shear state: hue
follows the rotation angle, saturation the shear magnitude. Each cell
carries a dashed hatch along its slip direction, and a second panel shows
the deformed configuration. Reference cells are the only <polygon>
elements in the file (deformed outlines are paths), so polygon count ==
cell count. The matplotlib figures pin hashsalt and drop the date stamp.
"""

from __future__ import annotations

import colorsys
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

import numpy as np  # noqa: E402

from .errors import Infeasible  # noqa: E402
from .geometry import decompose, rot  # noqa: E402
from .maps import PiecewiseAffineMap  # noqa: E402
from .polygons import area, centroid  # noqa: E402

plt.rcParams["svg.hashsalt"] = "slipform"

_GRAY = "#b4b4b4"


def _state_color(theta: float, gamma: float, gmax: float) -> str:
    hue = (theta + math.pi) / (2.0 * math.pi) % 1.0
    sat = 0.85 * min(abs(gamma) / gmax, 1.0) if gmax > 0.0 else 0.0
    r, g, b = colorsys.hsv_to_rgb(hue, sat, 0.97)
    return "#%02x%02x%02x" % (round(255 * r), round(255 * g), round(255 * b))


def _fmt(x: float) -> str:
    return "%.9g" % (x + 0.0)  # +0.0 folds -0


class _Panel:
    """Collects world-coordinate draw ops, then emits them with one transform."""

    def __init__(self):
        self.polys: list[tuple[np.ndarray, str, bool]] = []  # verts, fill, as_path
        self.dashes: list[tuple[np.ndarray, np.ndarray]] = []
        self.guides: list[float] = []
        self.lo = np.array([math.inf, math.inf])
        self.hi = np.array([-math.inf, -math.inf])

    def add_cell(self, verts: np.ndarray, fill: str, direction: np.ndarray | None,
                 as_path: bool):
        self.polys.append((verts, fill, as_path))
        self.lo = np.minimum(self.lo, verts.min(axis=0))
        self.hi = np.maximum(self.hi, verts.max(axis=0))
        if direction is not None:
            c = centroid(verts)
            half = 0.38 * math.sqrt(max(area(verts), 0.0))
            d = direction / (np.linalg.norm(direction) or 1.0)
            self.dashes.append((c - half * d, c + half * d))


def mesh_svg(m: PiecewiseAffineMap, path, width_px: float = 900.0) -> Path:
    """Reference and deformed configuration, one polygon per cell."""
    ref = _Panel()
    defo = _Panel()
    states = []
    for c in m.cells:
        try:
            states.append(decompose(m.slip, c.gradient))
        except Infeasible:
            states.append(None)
    gmax = max((abs(st.gamma) for st in states if st is not None), default=0.0)

    s_dir = m.slip.s
    for c, st in zip(m.cells, states):
        fill = _GRAY if st is None else _state_color(st.theta, st.gamma, gmax)
        ref.add_cell(np.asarray(c.vertices, float), fill, s_dir, as_path=False)
        moved = c.vertices @ c.gradient.T + c.offset
        pushed = None if st is None else rot(st.theta) @ s_dir
        defo.add_cell(moved, fill, pushed, as_path=True)
    ref.guides = [m.core[0], m.core[1]]

    span = max(ref.hi[0] - ref.lo[0], defo.hi[0] - defo.lo[0])
    pad = 0.04 * span
    scale = width_px / (span + 2.0 * pad)
    gap_px = 0.05 * width_px

    parts = [""]  # placeholder for the <svg> header
    stroke = _fmt(max(0.6, 0.0012 * width_px))
    y_cursor = 0.0
    for panel in (ref, defo):
        h_px = (panel.hi[1] - panel.lo[1] + 2.0 * pad) * scale
        ox = -(panel.lo[0] - pad) * scale
        oy = y_cursor + (panel.hi[1] + pad) * scale

        def sx(x: float) -> str:
            return _fmt(ox + x * scale)

        def sy(y: float) -> str:
            return _fmt(oy - y * scale)  # svg y grows downward

        for verts, fill, as_path in panel.polys:
            pts = [f"{sx(vx)},{sy(vy)}" for vx, vy in verts]
            if as_path:
                parts.append(
                    f'<path d="M {" L ".join(pts)} Z" fill="{fill}" '
                    f'stroke="#303030" stroke-width="{stroke}" '
                    f'stroke-linejoin="round"/>'
                )
            else:
                parts.append(
                    f'<polygon points="{" ".join(pts)}" fill="{fill}" '
                    f'stroke="#303030" stroke-width="{stroke}" '
                    f'stroke-linejoin="round"/>'
                )
        for p, q in panel.dashes:
            parts.append(
                f'<line x1="{sx(p[0])}" y1="{sy(p[1])}" x2="{sx(q[0])}" '
                f'y2="{sy(q[1])}" stroke="#1a1a1a" stroke-width="{stroke}" '
                f'stroke-dasharray="4,3"/>'
            )
        for gx in panel.guides:
            parts.append(
                f'<line x1="{sx(gx)}" y1="{sy(panel.lo[1])}" x2="{sx(gx)}" '
                f'y2="{sy(panel.hi[1])}" stroke="#606060" '
                f'stroke-width="{stroke}" stroke-dasharray="7,5"/>'
            )
        y_cursor += h_px + gap_px

    total_h = y_cursor - gap_px
    parts[0] = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width_px)}" '
        f'height="{_fmt(total_h)}" viewBox="0 0 {_fmt(width_px)} {_fmt(total_h)}">'
        f'<rect width="100%" height="100%" fill="#ffffff"/>'
    )
    parts.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(parts) + "\n")
    return path


def sweep_figure(table, path) -> Path:
    """Log-log energy gap against strip height, with the fitted tail slope."""
    rows = table.rows
    h = np.array([r.h for r in rows])
    gap = np.array([r.gap for r in rows])
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    pos = gap > 0.0
    if np.any(pos):
        ax.loglog(h[pos], gap[pos], "o-", color="#1f77b4", label="gap")
    rate = table.rate
    if np.isfinite(rate) and np.any(pos):
        href = h[pos]
        guide = gap[pos][-1] * (href / href[-1]) ** rate
        ax.loglog(href, guide, "--", color="#888888", label=f"slope {rate:.3f}")
    ax.set_xlabel("strip half-height h")
    ax.set_ylabel("rescaled energy minus limit")
    ax.legend(frameon=False)
    ax.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, metadata=_svg_meta(path))
    plt.close(fig)
    return path


def gap_figure(result, path) -> Path:
    """Two panels: both branch energies, and their ratio against 1/h."""
    h = np.array([r.h for r in result.rows])
    kinked = np.array([r.kinked for r in result.rows])
    smooth = np.array([r.smooth for r in result.rows])
    ratio = np.array([r.ratio for r in result.rows])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.8))
    ax1.loglog(h, kinked, "o-", color="#1f77b4", label="kinked strip")
    ax1.loglog(h, smooth, "s-", color="#d62728", label="constrained field")
    ax1.set_xlabel("strip half-height h")
    ax1.set_ylabel("rescaled energy")
    ax1.legend(frameon=False)
    ax1.grid(True, which="both", alpha=0.25)
    ax2.loglog(h, ratio, "o-", color="#2ca02c", label="ratio")
    ax2.loglog(h, ratio[-1] * h / h[-1], "--", color="#888888", label="slope 1 guide")
    ax2.set_xlabel("strip half-height h")
    ax2.set_ylabel("kinked / constrained")
    ax2.legend(frameon=False)
    ax2.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, metadata=_svg_meta(path))
    plt.close(fig)
    return path


def _svg_meta(path: Path) -> dict | None:
    # the svg backend stamps the build date unless told otherwise
    return {"Date": None} if path.suffix.lower() == ".svg" else None
