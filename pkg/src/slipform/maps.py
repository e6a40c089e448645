"""Piecewise-affine maps on rectangular strip windows.

A map is a list of convex CCW cells tiling window = [x_lo, x_hi] x [-h, h],
each carrying an affine piece x -> G x + b. Builders create cells with
consistent gradients and recover the offsets by propagating continuity
across shared edges from an anchor cell, so the validator only has to
confirm what construction already guarantees.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from . import polygons
from .compatibility import check_interface
from .errors import SlipformError
from .geometry import ShearState, SlipSystem, membership_residual, state_matrix


@dataclass
class Cell:
    vertices: np.ndarray  # (k, 2) counterclockwise
    gradient: np.ndarray  # (2, 2)
    offset: np.ndarray  # (2,)

    def copy(self) -> "Cell":
        return Cell(self.vertices.copy(), self.gradient.copy(), self.offset.copy())


@dataclass(frozen=True)
class Window:
    x_lo: float
    x_hi: float
    half_height: float

    @property
    def width(self) -> float:
        return self.x_hi - self.x_lo

    @property
    def area(self) -> float:
        return self.width * 2.0 * self.half_height

    def rect(self) -> np.ndarray:
        return np.array(
            [
                [self.x_lo, -self.half_height],
                [self.x_hi, -self.half_height],
                [self.x_hi, self.half_height],
                [self.x_lo, self.half_height],
            ]
        )


@dataclass
class PiecewiseAffineMap:
    slip: SlipSystem
    cells: list[Cell]
    window: Window
    core: tuple[float, float]  # gradient constant for x1 <= core[0] and x1 >= core[1]
    left_state: ShearState
    right_state: ShearState

    @property
    def diameter(self) -> float:
        return math.hypot(self.window.width, 2.0 * self.window.half_height)

    def copy(self) -> "PiecewiseAffineMap":
        return replace(self, cells=[c.copy() for c in self.cells])

    def scale(self, factor: float) -> "PiecewiseAffineMap":
        """Scale domain and image together; gradients are untouched."""
        if not factor > 0.0:
            raise ValueError("scale factor must be positive")
        cells = [
            Cell(c.vertices * factor, c.gradient.copy(), c.offset * factor)
            for c in self.cells
        ]
        w = Window(self.window.x_lo * factor, self.window.x_hi * factor,
                   self.window.half_height * factor)
        return replace(self, cells=cells,
                       window=w, core=(self.core[0] * factor, self.core[1] * factor))

    def translate(self, dx: float) -> "PiecewiseAffineMap":
        """Shift the domain horizontally, transporting the map values."""
        d = np.array([dx, 0.0])
        cells = [
            Cell(c.vertices + d, c.gradient.copy(), c.offset - c.gradient @ d)
            for c in self.cells
        ]
        w = Window(self.window.x_lo + dx, self.window.x_hi + dx, self.window.half_height)
        return replace(self, cells=cells,
                       window=w, core=(self.core[0] + dx, self.core[1] + dx))

    def cell_containing(self, p, tol: float | None = None) -> int:
        p = np.asarray(p, dtype=float)
        if tol is None:
            tol = 1e-9 * max(self.diameter, 1.0)
        for i, c in enumerate(self.cells):
            if polygons.point_in(c.vertices, p, tol):
                return i
        raise ValueError(f"point {p} is not covered by any cell")

    def evaluate(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        c = self.cells[self.cell_containing(p)]
        return c.gradient @ p + c.offset

    def gradient_at(self, p) -> np.ndarray:
        return self.cells[self.cell_containing(np.asarray(p, float))].gradient.copy()


def interface_graph(cells: list[Cell], tol: float):
    """Shared-edge adjacency: list of (i, j, midpoint) with i < j."""
    boxes = [polygons.bbox(c.vertices) for c in cells]
    edges = []
    n = len(cells)
    for i in range(n):
        for j in range(i + 1, n):
            if not polygons.bbox_overlap(boxes[i], boxes[j], tol):
                continue
            seg = polygons.shared_segment(cells[i].vertices, cells[j].vertices, tol)
            if seg is not None:
                edges.append((i, j, 0.5 * (seg[0] + seg[1])))
    return edges


def propagate_offsets(m: PiecewiseAffineMap, anchor: int = 0,
                      anchor_offset=None, tol: float | None = None) -> None:
    """Recompute all offsets from continuity across shared edges, in place.

    Affine pieces that agree at a shared-edge midpoint with matching
    tangential gradients agree on the whole edge, so a spanning tree of the
    interface graph determines every offset from the anchor's.
    """
    if tol is None:
        tol = 1e-9 * max(m.diameter, 1.0)
    edges = interface_graph(m.cells, tol)
    adj: dict[int, list[tuple[int, np.ndarray]]] = {i: [] for i in range(len(m.cells))}
    for i, j, p in edges:
        adj[i].append((j, p))
        adj[j].append((i, p))
    if anchor_offset is not None:
        m.cells[anchor].offset = np.asarray(anchor_offset, dtype=float).copy()
    seen = {anchor}
    queue = deque([anchor])
    while queue:
        i = queue.popleft()
        ci = m.cells[i]
        for j, p in adj[i]:
            if j in seen:
                continue
            cj = m.cells[j]
            cj.offset = (ci.gradient - cj.gradient) @ p + ci.offset
            seen.add(j)
            queue.append(j)
    if len(seen) != len(m.cells):
        missing = sorted(set(range(len(m.cells))) - seen)
        raise SlipformError(f"cell complex is not edge-connected (unreached: {missing})")


@dataclass
class ValidationReport:
    """Worst-case residuals of a piecewise-affine map against its contracts."""

    n_cells: int
    n_interfaces: int
    admissibility: float
    value_jump: float
    tangent_defect: float
    det_defect: float
    tiling_defect: float
    overlap_area: float
    tail_defect: float
    height_defect: float
    failures: list[str] = field(default_factory=list)

    def passes(self, tol_member: float = 1e-9, tol_interface: float = 1e-9,
               tol_tiling: float = 1e-9) -> bool:
        return (
            self.admissibility <= tol_member
            and self.value_jump <= tol_interface
            and self.tangent_defect <= tol_interface
            and self.det_defect <= tol_interface
            and self.tiling_defect <= tol_tiling
            and self.overlap_area <= tol_tiling
            and self.tail_defect <= tol_interface
            and self.height_defect <= tol_interface
        )

    def summary(self) -> dict:
        return {
            "n_cells": self.n_cells,
            "n_interfaces": self.n_interfaces,
            "admissibility": self.admissibility,
            "value_jump": self.value_jump,
            "tangent_defect": self.tangent_defect,
            "det_defect": self.det_defect,
            "tiling_defect": self.tiling_defect,
            "overlap_area": self.overlap_area,
            "tail_defect": self.tail_defect,
            "height_defect": self.height_defect,
            "failures": list(self.failures),
        }


def validate_map(m: PiecewiseAffineMap, tol: float | None = None) -> ValidationReport:
    """Measure admissibility, continuity, tiling, and tail residuals.

    The geometric tolerance only controls edge detection; every reported
    number is a raw residual that the caller compares to its own bars.
    """
    scale = max(m.diameter, 1.0)
    if tol is None:
        tol = 1e-9 * scale
    failures: list[str] = []

    admiss = 0.0
    for i, c in enumerate(m.cells):
        r = membership_residual(m.slip, c.gradient)
        if r > admiss:
            admiss = r
        if polygons.area(c.vertices) <= 0.0:
            failures.append(f"cell {i} is not counterclockwise or degenerate")

    value_jump = tangent = det = 0.0
    edges = interface_graph(m.cells, tol)
    for i, j, _ in edges:
        chk = check_interface(m.cells[i], m.cells[j], tol)
        if chk is None:
            continue
        value_jump = max(value_jump, chk.value_jump)
        tangent = max(tangent, chk.tangent_defect)
        det = max(det, chk.det_defect)

    win = m.window
    rect = win.rect()
    covered = 0.0
    protrusion = 0.0
    height = 0.0
    boxes = []
    for c in m.cells:
        a = polygons.area(c.vertices)
        inside = polygons.clip_convex(c.vertices, rect)
        ain = polygons.area(inside) if len(inside) >= 3 else 0.0
        covered += ain
        protrusion += max(a - ain, 0.0)
        b = polygons.bbox(c.vertices)
        boxes.append(b)
        height = max(height, b[3] - win.half_height, -win.half_height - b[1], 0.0)
    tiling = (abs(covered - win.area) + protrusion) / win.area

    overlap = 0.0
    n = len(m.cells)
    for i in range(n):
        for j in range(i + 1, n):
            if not polygons.bbox_overlap(boxes[i], boxes[j], -tol):
                continue
            inter = polygons.clip_convex(m.cells[i].vertices, m.cells[j].vertices)
            if len(inter) >= 3:
                overlap += max(polygons.area(polygons.ensure_ccw(inter)), 0.0)
    overlap /= win.area

    tail = 0.0
    g_left = state_matrix(m.slip, m.left_state)
    g_right = state_matrix(m.slip, m.right_state)
    for c, b in zip(m.cells, boxes):
        if b[0] < m.core[0] - tol:
            tail = max(tail, float(np.abs(c.gradient - g_left).max()))
        if b[2] > m.core[1] + tol:
            tail = max(tail, float(np.abs(c.gradient - g_right).max()))

    return ValidationReport(
        n_cells=n,
        n_interfaces=len(edges),
        admissibility=admiss,
        value_jump=value_jump,
        tangent_defect=tangent,
        det_defect=det,
        tiling_defect=tiling,
        overlap_area=overlap,
        tail_defect=tail,
        height_defect=height / scale,
        failures=failures,
    )
