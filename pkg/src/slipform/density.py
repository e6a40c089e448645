"""Energy densities for single-slip gradients.

Four levels:

* hard_density: the shear amount squared on the admissible family,
  infinite elsewhere.
* segment_density: the same quantity pushed to first columns, before
  relaxation; finite only where a column is exactly reachable.
* reduced_density: the relaxed cross-section density as a function of the
  first column xi alone. Zero on the closed unit disk; outside it a convex
  C^1 radial profile for oblique slip directions and infinite for slip
  along e1 (no transverse shear can absorb a longer column there).
* soft_density: the penalized relaxation over transverse shear amounts,

      W_eps(F) = min_t [ dist^2(F - t (F s) x m, SO(2)) / eps + t^2 ],

  finite for every F and every eps > 0.

Values that can be infinite are wrapped in DensityValue so callers never
meet a bare float sentinel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import polygons
from .errors import Infeasible, InvalidRange
from .geometry import SlipSystem, decompose, first_column, membership_residual


@dataclass(frozen=True)
class DensityValue:
    """A density evaluation; `finite` is the authoritative feasibility flag."""

    value: float
    finite: bool = True
    residual: float = 0.0

    @classmethod
    def infinite(cls, residual: float) -> "DensityValue":
        return cls(math.inf, False, float(residual))

    def __float__(self) -> float:
        return self.value


def hard_density(system: SlipSystem, F: np.ndarray, tol: float = 1e-9) -> DensityValue:
    """|F m|^2 - 1 on the admissible family, infinite off it."""
    res = membership_residual(system, F)
    if res > tol:
        return DensityValue.infinite(res)
    fm = F @ system.m
    return DensityValue(max(float(fm @ fm) - 1.0, 0.0))


def segment_density(system: SlipSystem, xi: np.ndarray, tol: float = 1e-9) -> DensityValue:
    """Smallest shear amount squared over gradients with first column xi.

    This is the cross-section density before relaxation: infinite whenever
    no admissible gradient has xi as its first column, gamma^2 of the
    minimal lift otherwise. Its convexification is reduced_density.
    """
    try:
        state = first_column(system, xi, tol=tol)
    except Infeasible as exc:
        return DensityValue.infinite(getattr(exc, "residual", math.nan))
    return DensityValue(state.gamma * state.gamma)


def reduced_density(system: SlipSystem, xi: np.ndarray, tol: float = 1e-12) -> DensityValue:
    """Relaxed density of the first column alone.

    Zero for |xi| <= 1. Beyond the unit disk, slip along e1 is infeasible;
    otherwise the value is the radial profile

        f(r) = ( r^2 - 2 |s1| sqrt(r^2 - s2^2) + s1^2 ) / s2^2 - 1,

    which vanishes to first order at r = 1 and is convex in r.
    """
    xi = np.asarray(xi, dtype=float)
    r = math.hypot(float(xi[0]), float(xi[1]))
    if r <= 1.0 + tol:
        return DensityValue(0.0)
    if system.axis_aligned() == "e1":
        return DensityValue.infinite(r - 1.0)
    a1, a2 = abs(float(system.s[0])), abs(float(system.s[1]))
    f = (r * r - 2.0 * a1 * math.sqrt(r * r - a2 * a2) + a1 * a1) / (a2 * a2) - 1.0
    return DensityValue(max(f, 0.0))


def _lower_hull(t: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Monotone-chain lower hull of points sorted by t; collinear points are
    # dropped (they do not change the piecewise-linear envelope).
    pts: list[tuple[float, float]] = []
    for tj, yj in zip(t, y):
        while len(pts) >= 2:
            (t1, y1), (t2, y2) = pts[-2], pts[-1]
            if (t2 - t1) * (yj - y1) - (y2 - y1) * (tj - t1) <= 0.0:
                pts.pop()
            else:
                break
        pts.append((float(tj), float(yj)))
    arr = np.array(pts)
    return arr[:, 0], arr[:, 1]


def convexify_oracle(system: SlipSystem, r_max: float, n_samples: int = 4096) -> np.ndarray:
    """Numerical convexification of the segment density, radius by radius.

    The segment density depends on xi only through |xi|, so its planar
    convex envelope can be read off a diameter: sample the signed radial
    profile on [-r_max, r_max], take the lower convex hull of the finite
    samples, and interpolate the hull back onto the positive radii. Rows
    of the result are (radius, envelope value). The construction never
    touches the closed form in reduced_density, which it cross-checks.
    """
    if r_max <= 1.0:
        raise InvalidRange("r_max must exceed the unit radius where the envelope detaches")
    if n_samples < 100:
        raise ValueError("n_samples must be at least 100")
    if system.axis_aligned() == "e1":
        raise ValueError("slip along e1 leaves nothing finite to convexify off the unit circle")
    radii = np.linspace(0.0, float(r_max), int(n_samples))
    vals = np.array([float(segment_density(system, (r, 0.0))) for r in radii])
    t = np.concatenate([-radii[::-1], radii[1:]])
    y = np.concatenate([vals[::-1], vals[1:]])
    finite = np.isfinite(y)
    hull_t, hull_y = _lower_hull(t[finite], y[finite])
    env = np.interp(radii, hull_t, hull_y)
    return np.column_stack([radii, env])


def _dist2_rotations(a11: float, a12: float, a21: float, a22: float) -> float:
    # Squared distance of a 2x2 matrix to SO(2) via its signed singular
    # values. The two sums of squares equal |A|^2 +- 2 det A but never
    # cancel, so the distance vanishes exactly at rotations.
    qp = (a11 + a22) ** 2 + (a21 - a12) ** 2
    qm = (a11 - a22) ** 2 + (a21 + a12) ** 2
    big, small = (qp, qm) if qp >= qm else (qm, qp)
    rb, rs = math.sqrt(big), math.sqrt(small)
    s1 = 0.5 * (rb + rs)
    s2 = 0.5 * (rb - rs)
    if qp >= qm:
        return (s1 - 1.0) ** 2 + (s2 - 1.0) ** 2
    return (s1 - 1.0) ** 2 + (s2 + 1.0) ** 2


def soft_density(system: SlipSystem, F: np.ndarray, eps: float) -> float:
    """Penalized relaxation over the transverse shear amount.

    The inner minimization is solved in closed form. With
    A(t) = F - t (F s) x m one has dist^2(A, SO(2)) = |A|^2 + 2 - 2 sqrt(q)
    where q(t) = |A|^2 + 2 det A is a nonnegative quadratic, so stationary
    points satisfy P(t) sqrt(q(t)) = q'(t)/eps with P linear. Squaring
    yields a quartic; its real roots plus the vertices of q and P and the
    exact decomposition shear (when F is admissible) are evaluated and the
    smallest objective wins.
    """
    if not eps > 0.0:
        raise ValueError("eps must be positive")
    F = np.asarray(F, dtype=float)
    s, m = system.s, system.m
    fs = F @ s
    fm = F @ m
    # trace and antisymmetric part of A(t) are linear in t
    t0 = F[0, 0] + F[1, 1]
    t1 = -(fs[0] * m[0] + fs[1] * m[1])
    w0 = F[1, 0] - F[0, 1]
    w1 = fs[0] * m[1] - fs[1] * m[0]
    q2 = t1 * t1 + w1 * w1
    q1 = 2.0 * (t0 * t1 + w0 * w1)
    q0 = t0 * t0 + w0 * w0
    # |A(t)|^2 = c2 t^2 + c1 t + c0
    c2 = float(fs @ fs)
    c1 = -2.0 * float(fs @ fm)
    c0 = float((F * F).sum())
    p1 = 2.0 * c2 / eps + 2.0
    p0 = c1 / eps
    r1 = 2.0 * q2 / eps
    r0 = q1 / eps
    quart = np.polysub(
        np.polymul([p1 * p1, 2.0 * p1 * p0, p0 * p0], [q2, q1, q0]),
        np.polymul([r1, r0], [r1, r0]),
    )
    cands = [0.0, -p0 / p1]
    if q2 > 0.0:
        cands.append(-q1 / (2.0 * q2))
    lead = float(np.max(np.abs(quart)))
    if lead > 0.0:
        poly = np.trim_zeros(quart / lead, "f")
        if len(poly) > 1:
            for z in np.roots(poly):
                if abs(z.imag) <= 1e-8 * (1.0 + abs(z.real)):
                    cands.append(float(z.real))
    if membership_residual(system, F) <= 1e-9:
        cands.append(decompose(system, F).gamma)
    fsm = np.outer(fs, m)
    best = math.inf
    for t in cands:
        A = F - t * fsm
        g = _dist2_rotations(A[0, 0], A[0, 1], A[1, 0], A[1, 1]) / eps + t * t
        if g < best:
            best = g
    return best


def soft_density_many(system: SlipSystem, Fs: np.ndarray, eps: float) -> np.ndarray:
    """soft_density over a stack of gradients, shape (n, 2, 2).

    Same closed form as the scalar routine; the quartics are solved for
    the whole stack at once through batched companion eigenvalues. Rows
    with a degenerate quartic or an admissible gradient (where the exact
    decomposition shear joins the candidate list) take the scalar path.
    """
    if not eps > 0.0:
        raise ValueError("eps must be positive")
    Fs = np.asarray(Fs, dtype=float).reshape(-1, 2, 2)
    n = len(Fs)
    s, m = system.s, system.m
    fs = Fs @ s
    fm = Fs @ m
    t0 = Fs[:, 0, 0] + Fs[:, 1, 1]
    t1 = -(fs[:, 0] * m[0] + fs[:, 1] * m[1])
    w0 = Fs[:, 1, 0] - Fs[:, 0, 1]
    w1 = fs[:, 0] * m[1] - fs[:, 1] * m[0]
    q2 = t1 * t1 + w1 * w1
    q1 = 2.0 * (t0 * t1 + w0 * w1)
    q0 = t0 * t0 + w0 * w0
    c2 = (fs * fs).sum(axis=1)
    c1 = -2.0 * (fs * fm).sum(axis=1)
    p1 = 2.0 * c2 / eps + 2.0
    p0 = c1 / eps
    r1 = 2.0 * q2 / eps
    r0 = q1 / eps
    K = np.stack(
        [
            p1 * p1 * q2,
            p1 * p1 * q1 + 2.0 * p1 * p0 * q2,
            p1 * p1 * q0 + 2.0 * p1 * p0 * q1 + p0 * p0 * q2 - r1 * r1,
            2.0 * p1 * p0 * q0 + p0 * p0 * q1 - 2.0 * r1 * r0,
            p0 * p0 * q0 - r0 * r0,
        ],
        axis=1,
    )
    lead = np.abs(K).max(axis=1)
    det = Fs[:, 0, 0] * Fs[:, 1, 1] - Fs[:, 0, 1] * Fs[:, 1, 0]
    res = np.maximum(
        np.abs(det - 1.0), np.abs(np.hypot(fs[:, 0], fs[:, 1]) - 1.0)
    )
    slow = (lead <= 0.0) | (np.abs(K[:, 0]) <= 1e-12 * lead) | (res <= 1e-9)
    out = np.empty(n)
    for i in np.flatnonzero(slow):
        out[i] = soft_density(system, Fs[i], eps)
    idx = np.flatnonzero(~slow)
    if len(idx) == 0:
        return out

    monic = K[idx, 1:] / K[idx, :1]
    comp = np.zeros((len(idx), 4, 4))
    comp[:, 0, :] = -monic
    comp[:, 1, 0] = comp[:, 2, 1] = comp[:, 3, 2] = 1.0
    roots = np.linalg.eigvals(comp)
    real = np.abs(roots.imag) <= 1e-8 * (1.0 + np.abs(roots.real))
    cand = np.empty((len(idx), 7))
    cand[:, :4] = np.where(real, roots.real, 0.0)
    cand[:, 4] = 0.0
    cand[:, 5] = -p0[idx] / p1[idx]
    with np.errstate(divide="ignore", invalid="ignore"):
        vq = np.where(q2[idx] > 0.0, -q1[idx] / (2.0 * q2[idx]), 0.0)
    cand[:, 6] = vq

    t = cand[..., None, None]
    A = Fs[idx, None, :, :] - t * (fs[idx, :, None] * m[None, :])[:, None, :, :]
    qp = (A[..., 0, 0] + A[..., 1, 1]) ** 2 + (A[..., 1, 0] - A[..., 0, 1]) ** 2
    qm = (A[..., 0, 0] - A[..., 1, 1]) ** 2 + (A[..., 1, 0] + A[..., 0, 1]) ** 2
    rb = np.sqrt(np.maximum(qp, qm))
    rs = np.sqrt(np.minimum(qp, qm))
    s1 = 0.5 * (rb + rs)
    s2 = np.where(qp >= qm, 0.5 * (rb - rs), 0.5 * (rs - rb))
    g = ((s1 - 1.0) ** 2 + (s2 - 1.0) ** 2) / eps + cand * cand
    out[idx] = g.min(axis=1)
    return out


@dataclass
class CellEnergy:
    cell: int
    area: float
    value: float
    finite: bool


@dataclass
class EnergyReport:
    """Cellwise energy of a piecewise-affine map.

    `total` integrates the density over the physical strip; `rescaled`
    divides by the strip half-height. Infinite cells make the report
    infinite and are listed in `offenders`.
    """

    mode: str
    half_height: float
    total: float
    rescaled: float
    finite: bool
    per_cell: list[CellEnergy] = field(default_factory=list)
    offenders: list[int] = field(default_factory=list)


def energy_of_map(m, mode: str = "hard", eps: float | None = None, tol: float = 1e-9) -> EnergyReport:
    """Integrate a density over the cells of a PiecewiseAffineMap."""
    if mode not in ("hard", "soft"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "soft" and (eps is None or not eps > 0.0):
        raise ValueError("soft mode needs a positive eps")
    rows: list[CellEnergy] = []
    offenders: list[int] = []
    total = 0.0
    finite = True
    for i, cell in enumerate(m.cells):
        a = polygons.area(cell.vertices)
        if mode == "hard":
            d = hard_density(m.slip, cell.gradient, tol)
            v, fin = d.value, d.finite
        else:
            v, fin = soft_density(m.slip, cell.gradient, eps), True
        rows.append(CellEnergy(i, a, v, fin))
        if fin:
            total += a * v
        else:
            finite = False
            offenders.append(i)
    if not finite:
        total = math.inf
    h = m.window.half_height
    return EnergyReport(
        mode=mode,
        half_height=h,
        total=total,
        rescaled=total / h,
        finite=finite,
        per_cell=rows,
        offenders=offenders,
    )
