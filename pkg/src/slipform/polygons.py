"""Convex polygon helpers on raw (k, 2) float arrays.

Vertices are counterclockwise. All tolerances are absolute distances;
callers scale them to their window size.
"""

from __future__ import annotations

import numpy as np


def area(verts: np.ndarray) -> float:
    """Signed shoelace area, positive for counterclockwise vertices."""
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def ensure_ccw(verts: np.ndarray) -> np.ndarray:
    return verts if area(verts) >= 0.0 else verts[::-1].copy()


def centroid(verts: np.ndarray) -> np.ndarray:
    x, y = verts[:, 0], verts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cr = x * yn - xn * y
    a = 0.5 * float(np.sum(cr))
    if abs(a) < 1e-300:
        return verts.mean(axis=0)
    cx = float(np.sum((x + xn) * cr)) / (6.0 * a)
    cy = float(np.sum((y + yn) * cr)) / (6.0 * a)
    return np.array([cx, cy])


def clip_halfplane(verts: np.ndarray, normal: np.ndarray, offset: float) -> np.ndarray:
    """Sutherland-Hodgman step: keep the part with x . normal <= offset."""
    if len(verts) == 0:
        return verts
    d = verts @ np.asarray(normal, float) - offset
    out = []
    k = len(verts)
    for i in range(k):
        j = (i + 1) % k
        di, dj = d[i], d[j]
        if di <= 0.0:
            out.append(verts[i])
        if (di <= 0.0) != (dj <= 0.0):
            t = di / (di - dj)
            out.append(verts[i] + t * (verts[j] - verts[i]))
    return np.array(out) if out else np.zeros((0, 2))


def clip_rect(verts: np.ndarray, x0: float, x1: float, y0: float, y1: float) -> np.ndarray:
    v = clip_halfplane(verts, np.array([-1.0, 0.0]), -x0)
    v = clip_halfplane(v, np.array([1.0, 0.0]), x1)
    v = clip_halfplane(v, np.array([0.0, -1.0]), -y0)
    return clip_halfplane(v, np.array([0.0, 1.0]), y1)


def clip_convex(verts: np.ndarray, against: np.ndarray) -> np.ndarray:
    """Intersection of verts with a convex CCW polygon."""
    v = verts
    k = len(against)
    for i in range(k):
        a, b = against[i], against[(i + 1) % k]
        e = b - a
        n = np.array([e[1], -e[0]])  # outward for CCW
        v = clip_halfplane(v, n, float(n @ a))
        if len(v) == 0:
            break
    return v


def dedupe(verts: np.ndarray, tol: float) -> np.ndarray:
    """Drop repeated vertices and collinear middles (within distance tol)."""
    if len(verts) < 3:
        return verts
    keep = [verts[0]]
    for p in verts[1:]:
        if np.hypot(*(p - keep[-1])) > tol:
            keep.append(p)
    if len(keep) > 1 and np.hypot(*(keep[0] - keep[-1])) <= tol:
        keep.pop()
    if len(keep) < 3:
        return np.array(keep).reshape(-1, 2)
    out = []
    k = len(keep)
    for i in range(k):
        a, b, c = keep[i - 1], keep[i], keep[(i + 1) % k]
        ac = c - a
        nac = np.hypot(*ac)
        if nac <= tol:
            continue
        dist = abs(ac[0] * (b[1] - a[1]) - ac[1] * (b[0] - a[0])) / nac
        if dist > tol:
            out.append(b)
    return np.array(out) if len(out) >= 3 else np.array(keep)


def point_in(verts: np.ndarray, p: np.ndarray, tol: float) -> bool:
    """Membership in a convex CCW polygon, inclusive within tol of the boundary."""
    k = len(verts)
    for i in range(k):
        a, b = verts[i], verts[(i + 1) % k]
        e = b - a
        ln = np.hypot(*e)
        if ln <= tol:
            continue
        if (e[0] * (p[1] - a[1]) - e[1] * (p[0] - a[0])) / ln < -tol:
            return False
    return True


def bbox(verts: np.ndarray) -> tuple[float, float, float, float]:
    return (
        float(verts[:, 0].min()),
        float(verts[:, 1].min()),
        float(verts[:, 0].max()),
        float(verts[:, 1].max()),
    )


def bbox_overlap(a, b, tol: float) -> bool:
    return not (
        a[2] < b[0] - tol or b[2] < a[0] - tol or a[3] < b[1] - tol or b[3] < a[1] - tol
    )


def shared_segment(va: np.ndarray, vb: np.ndarray, tol: float):
    """Overlap segment of two boundaries lying on a common line.

    Returns (p, q) when an edge of va and an edge of vb are collinear within
    tol and overlap in more than a point, None otherwise. Convexity makes
    the overlap unique when it exists, up to touching corners.
    """
    best = None
    best_len = max(tol, 1e-14)
    ka, kb = len(va), len(vb)
    for i in range(ka):
        a1, a2 = va[i], va[(i + 1) % ka]
        e = a2 - a1
        ln = np.hypot(*e)
        if ln <= tol:
            continue
        u = e / ln
        for j in range(kb):
            b1, b2 = vb[j], vb[(j + 1) % kb]
            d1 = u[0] * (b1[1] - a1[1]) - u[1] * (b1[0] - a1[0])
            d2 = u[0] * (b2[1] - a1[1]) - u[1] * (b2[0] - a1[0])
            if abs(d1) > tol or abs(d2) > tol:
                continue
            t1 = float((b1 - a1) @ u)
            t2 = float((b2 - a1) @ u)
            lo = max(0.0, min(t1, t2))
            hi = min(ln, max(t1, t2))
            if hi - lo > best_len:
                best_len = hi - lo
                best = (a1 + lo * u, a1 + hi * u)
    return best
