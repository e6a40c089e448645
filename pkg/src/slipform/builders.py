"""Explicit piecewise-affine building blocks on rectangular windows.

Every builder returns a PiecewiseAffineMap whose cells tile the window,
whose gradients belong to the map's slip family, and whose offsets make
the deformation continuous. The blocks compose:

    kink_axis     one bending fan for an axis-aligned slip direction
    change_slip   carry a construction into a rotated slip system
    change_shear  adjust the two tail shears with two oblique slabs
    rotate_global left-compose the deformation with a rotation
    kink_any      one kink for an arbitrary slip direction
    transition    connect two arbitrary shear states by a chain of kinks

Transitions are assembled at unit half-height and rescaled at the end, so
their window/core ratio r is bitwise independent of the height and their
energy scales exactly quadratically.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from . import polygons
from .errors import AngleTooLarge, AxisShearUnsupported, SlipformError
from .geometry import (
    ShearState,
    SlipSystem,
    canonical_angle_difference,
    make_shear,
    rot,
    state_matrix,
)
from .maps import Cell, PiecewiseAffineMap, Window, propagate_offsets

PHI_CAP = math.atan(0.25)
# Largest kink angle one fan can carry, per axis family. Both are exact
# consequences of the ray-slope bound tan(phi) <= 1/4.
THETA_MAX_E1 = 4.0 * math.atan(0.25) - 2.0 * math.atan(0.5)
THETA_MAX_E2 = 4.0 * math.atan(0.25)

_ANGLE_TOL = 1e-12


def axis_family(system: SlipSystem) -> str:
    """Nearest axis family; ties go to e1."""
    return "e1" if abs(system.s[0]) >= abs(system.s[1]) else "e2"


def max_kink_angle(system: SlipSystem) -> float:
    return THETA_MAX_E1 if axis_family(system) == "e1" else THETA_MAX_E2


def _omega_e1(phi: float) -> float:
    return 4.0 * phi - 2.0 * math.atan(2.0 * math.tan(phi))


def _fan_states(family: str, phi: float):
    """Interior shear states and total rotation of the positive-angle fan."""
    tn = math.tan(phi)
    if family == "e1":
        st2 = (2.0 * phi, 2.0 * tn)
        st3 = (2.0 * phi - 2.0 * math.atan(2.0 * tn), -2.0 * tn)
        omega = _omega_e1(phi)
    else:
        st2 = (2.0 * phi - math.pi, -2.0 / tn)
        st3 = (2.0 * phi - math.pi, 2.0 / tn)
        omega = 4.0 * phi
    return st2, st3, omega


def _uniform_map(system: SlipSystem, half_height: float) -> PiecewiseAffineMap:
    B = half_height
    verts = np.array([[-B, -B], [B, -B], [B, B], [-B, B]])
    cell = Cell(verts, np.eye(2), np.zeros(2))
    return PiecewiseAffineMap(
        slip=system,
        cells=[cell],
        window=Window(-B, B, B),
        core=(-0.5 * B, 0.5 * B),
        left_state=ShearState(0.0, 0.0),
        right_state=ShearState(0.0, 0.0),
    )


def kink_axis(system: SlipSystem, theta: float, half_height: float) -> PiecewiseAffineMap:
    """One bending fan across the square window [-B, B]^2.

    Parameters
    ----------
    system : SlipSystem
        Must be axis aligned; the family fixes which shears the fan uses.
    theta : float
        Total kink angle. The gradient is the identity left of -B/2 and
        the rotation by theta right of B/2.
    half_height : float
        B above.

    The fan apex sits on the bottom boundary at (0, -B) and sends two rays
    to (+-2 B tan(phi), B), enclosing two constant-shear triangles between
    two rotated quads. Raises AngleTooLarge when |theta| exceeds the family
    capacity; the capacity itself is the ray-slope bound tan(phi) <= 1/4.
    """
    family = system.axis_aligned()
    if family is None:
        raise SlipformError("kink_axis needs an axis-aligned slip direction")
    B = float(half_height)
    if not B > 0.0:
        raise ValueError("half_height must be positive")
    theta = float(theta)
    cap = THETA_MAX_E1 if family == "e1" else THETA_MAX_E2
    if abs(theta) > cap + _ANGLE_TOL:
        raise AngleTooLarge(
            f"|theta| = {abs(theta):.8g} exceeds the {family} fan capacity {cap:.8g}"
        )
    if theta == 0.0:
        return _uniform_map(system, B)

    t = min(abs(theta), cap)
    if family == "e1":
        phi = PHI_CAP if t >= THETA_MAX_E1 else brentq(
            lambda p: _omega_e1(p) - t, 0.0, PHI_CAP, xtol=1e-16, rtol=8.9e-16
        )
    else:
        phi = t / 4.0
    st2, st3, omega = _fan_states(family, phi)

    w = 2.0 * B * math.tan(phi)
    quad_l = np.array([[-B, -B], [0.0, -B], [-w, B], [-B, B]])
    tri_l = np.array([[0.0, -B], [0.0, B], [-w, B]])
    tri_r = np.array([[0.0, -B], [w, B], [0.0, B]])
    quad_r = np.array([[0.0, -B], [B, -B], [B, B], [w, B]])
    grads = [
        np.eye(2),
        make_shear(system, *st2),
        make_shear(system, *st3),
        rot(omega),
    ]
    verts = [quad_l, tri_l, tri_r, quad_r]

    if theta < 0.0:
        flip = np.array([1.0, -1.0])
        mirror = np.diag([1.0, -1.0])
        verts = [(v * flip)[::-1].copy() for v in verts]
        grads = [mirror @ g @ mirror for g in grads]
        omega = -omega

    cells = [Cell(v, g, np.zeros(2)) for v, g in zip(verts, grads)]
    m = PiecewiseAffineMap(
        slip=system,
        cells=cells,
        window=Window(-B, B, B),
        core=(-0.5 * B, 0.5 * B),
        left_state=ShearState(0.0, 0.0),
        right_state=ShearState(omega, 0.0),
    )
    propagate_offsets(m, anchor=0, anchor_offset=np.zeros(2))
    return m


def _tail_offset(m: PiecewiseAffineMap, side: str) -> np.ndarray:
    # All cells in a tail share one affine piece, so any of them supplies
    # the offset of the extension rectangle.
    if side == "left":
        idx = min(range(len(m.cells)), key=lambda i: polygons.bbox(m.cells[i].vertices)[0])
    else:
        idx = max(range(len(m.cells)), key=lambda i: polygons.bbox(m.cells[i].vertices)[2])
    return m.cells[idx].offset.copy()


def extend_tails(m: PiecewiseAffineMap, x_lo: float, x_hi: float) -> PiecewiseAffineMap:
    """Widen the window by appending constant-gradient tail rectangles."""
    out = m.copy()
    B = m.window.half_height
    cells = out.cells
    if x_lo < m.window.x_lo:
        verts = np.array([[x_lo, -B], [m.window.x_lo, -B], [m.window.x_lo, B], [x_lo, B]])
        cells.append(Cell(verts, state_matrix(m.slip, m.left_state), _tail_offset(m, "left")))
    if x_hi > m.window.x_hi:
        verts = np.array([[m.window.x_hi, -B], [x_hi, -B], [x_hi, B], [m.window.x_hi, B]])
        cells.append(Cell(verts, state_matrix(m.slip, m.right_state), _tail_offset(m, "right")))
    out.window = Window(min(x_lo, m.window.x_lo), max(x_hi, m.window.x_hi), B)
    return out


def change_slip(
    inner: PiecewiseAffineMap,
    new_slip,
    *,
    out_core: float | None = None,
    tail: float | None = None,
) -> PiecewiseAffineMap:
    """Carry a construction into a rotated slip system.

    The deformation becomes v(x) = R w(R^-1 x) with R the (short-way)
    rotation taking the old slip axis to the new one; conjugation sends the
    old shear family onto the new one state by state. The rotated strip is
    re-cut to a flat window of one eighth the original half-height, so
    every output cell is a clipped rotated input cell. The two axes must be
    within 45 degrees (inclusive).
    """
    new_sys = new_slip if isinstance(new_slip, SlipSystem) else SlipSystem(new_slip)
    a, s = inner.slip.s, new_sys.s
    d = float(a @ s)
    c = float(a[0] * s[1] - a[1] * s[0])
    if d < 0.0:  # slip directions are axes; rotate the short way
        d, c = -d, -c
    if d < math.sqrt(0.5) - _ANGLE_TOL:
        raise AngleTooLarge(
            f"slip axes are {math.degrees(math.acos(min(d, 1.0))):.3f} deg apart; 45 is the limit"
        )
    R = np.array([[d, -c], [c, d]])

    B_in = inner.window.half_height
    b = B_in / 8.0
    in_core = max(-inner.core[0], inner.core[1])
    needed = (in_core + b * abs(c)) / d
    core = needed if out_core is None else float(out_core)
    if core < needed - 1e-12 * B_in:
        raise ValueError(f"out_core = {core:.6g} is below the containment bound {needed:.6g}")
    W = core + (b if tail is None else float(tail))

    reach = W * d + b * abs(c)
    height_need = W * abs(c) + b * d
    if height_need > B_in * (1.0 + 1e-12):
        raise SlipformError("rotated window is too wide to cut from the inner strip")
    pad = 1e-9 * B_in
    src = inner
    if reach + pad > min(-inner.window.x_lo, inner.window.x_hi):
        src = extend_tails(inner, -(reach + pad), reach + pad)

    tol = 1e-12 * B_in
    cells = []
    for cell in src.cells:
        verts = cell.vertices @ R.T
        verts = polygons.clip_rect(verts, -W, W, -b, b)
        verts = polygons.dedupe(verts, tol)
        if len(verts) < 3 or polygons.area(verts) <= (1e-10 * B_in) ** 2:
            continue
        cells.append(Cell(verts, R @ cell.gradient @ R.T, R @ cell.offset))
    cells.sort(key=lambda cl: (polygons.centroid(cl.vertices)[0], polygons.centroid(cl.vertices)[1]))

    out = PiecewiseAffineMap(
        slip=new_sys,
        cells=cells,
        window=Window(-W, W, b),
        core=(-core, core),
        left_state=inner.left_state,
        right_state=inner.right_state,
    )
    _assert_tails(out)
    return out


def _assert_tails(m: PiecewiseAffineMap) -> None:
    # Containment conditions are geometric; check them numerically rather
    # than trusting the inequality chain that produced the core radius.
    gl = state_matrix(m.slip, m.left_state)
    gr = state_matrix(m.slip, m.right_state)
    tol_geo = 1e-12 * max(m.diameter, 1.0)
    worst = 0.0
    for c in m.cells:
        bx = polygons.bbox(c.vertices)
        if bx[0] < m.core[0] - tol_geo:
            worst = max(worst, float(np.abs(c.gradient - gl).max()))
        if bx[2] > m.core[1] + tol_geo:
            worst = max(worst, float(np.abs(c.gradient - gr).max()))
    if worst > 1e-9:
        raise SlipformError(f"tail region is not gradient-constant (defect {worst:.3e})")


def change_shear(
    inner: PiecewiseAffineMap,
    gamma_left: float,
    gamma_right: float,
    *,
    tail: float | None = None,
) -> PiecewiseAffineMap:
    """Replace the tail shears with two oblique constant slabs.

    The slab boundaries run parallel to the slip direction, so they meet
    the strip only beyond the core radius and cut nothing but tail cells;
    across them the shear jump is rank-one compatible with normal m. Slip
    along e1 has no transverse reach and raises AxisShearUnsupported.
    """
    system = inner.slip
    if system.axis_aligned() == "e1":
        raise AxisShearUnsupported("slip along e1 admits no shear adjustment slabs")
    gamma_left = float(gamma_left)
    gamma_right = float(gamma_right)
    if gamma_left == inner.left_state.gamma and gamma_right == inner.right_state.gamma:
        return inner.copy()

    m_vec = system.m
    sigma = 1.0 if m_vec[0] > 0.0 else -1.0
    nrm = sigma * m_vec
    B = inner.window.half_height
    A = max(-inner.core[0], inner.core[1])
    mu = A + abs(m_vec[1]) * B
    a_new = (mu + abs(m_vec[1]) * B) / abs(m_vec[0])
    W = a_new + (B if tail is None else float(tail))

    src = extend_tails(inner, -W, W)
    tol = 1e-12 * max(B, W)
    cells = []
    for cell in src.cells:
        verts = polygons.clip_halfplane(cell.vertices, nrm, mu)
        verts = polygons.clip_halfplane(verts, -nrm, mu)
        verts = polygons.dedupe(verts, tol)
        if len(verts) < 3 or polygons.area(verts) <= (1e-10 * B) ** 2:
            continue
        cells.append(Cell(verts, cell.gradient.copy(), cell.offset.copy()))

    rect = np.array([[-W, -B], [W, -B], [W, B], [-W, B]])
    th1 = inner.left_state.theta
    th2 = inner.right_state.theta
    for nsign, theta, gamma in ((-1.0, th1, gamma_left), (1.0, th2, gamma_right)):
        verts = polygons.clip_halfplane(rect, -nsign * nrm, -mu)
        verts = polygons.dedupe(polygons.ensure_ccw(verts), tol)
        if len(verts) < 3:
            raise SlipformError("shear slab does not intersect the window; widen the tail")
        cells.append(Cell(verts, make_shear(system, theta, gamma), np.zeros(2)))

    cells.sort(key=lambda cl: (polygons.centroid(cl.vertices)[0], polygons.centroid(cl.vertices)[1]))
    out = PiecewiseAffineMap(
        slip=system,
        cells=cells,
        window=Window(-W, W, B),
        core=(-a_new, a_new),
        left_state=ShearState(th1, gamma_left),
        right_state=ShearState(th2, gamma_right),
    )
    # anchor at a middle cell that kept its exact offset
    mid = next(i for i, cl in enumerate(out.cells)
               if abs(float(polygons.centroid(cl.vertices) @ nrm)) < mu)
    propagate_offsets(out, anchor=mid)
    _assert_tails(out)
    return out


def rotate_global(inner: PiecewiseAffineMap, angle: float) -> PiecewiseAffineMap:
    """Left-compose the deformation with a rotation; the domain is untouched."""
    R = rot(angle)
    cells = [Cell(c.vertices.copy(), R @ c.gradient, R @ c.offset) for c in inner.cells]
    return PiecewiseAffineMap(
        slip=inner.slip,
        cells=cells,
        window=inner.window,
        core=inner.core,
        left_state=ShearState(inner.left_state.theta + angle, inner.left_state.gamma),
        right_state=ShearState(inner.right_state.theta + angle, inner.right_state.gamma),
    )


def _axis_for(system: SlipSystem) -> SlipSystem:
    if axis_family(system) == "e1":
        return SlipSystem(np.array([math.copysign(1.0, system.s[0]), 0.0]))
    return SlipSystem(np.array([0.0, math.copysign(1.0, system.s[1])]))


def kink_any(system: SlipSystem, theta: float, half_height: float) -> PiecewiseAffineMap:
    """One kink of angle theta for an arbitrary slip direction.

    Axis directions use the bending fan directly, re-windowed so that the
    constant tails start at 7B as in the general case. Oblique directions
    build the fan in the nearest axis family at eight times the height and
    rotate it into place with change_slip.
    """
    B = float(half_height)
    if system.axis_aligned() is not None:
        fan = kink_axis(system, theta, B)
        fan = extend_tails(fan, -8.0 * B, 8.0 * B)
        fan.core = (-7.0 * B, 7.0 * B)
        return fan
    axis = _axis_for(system)
    inner = kink_axis(axis, theta, 8.0 * B)
    return change_slip(inner, system, out_core=7.0 * B)


def _axis_chain(system: SlipSystem, dtheta: float, half_height: float) -> PiecewiseAffineMap:
    """Chain of equal kinks absorbing dtheta, windows tiling side by side."""
    H = half_height
    if dtheta == 0.0:
        return _uniform_map(system, H)
    cap = THETA_MAX_E1 if system.axis_aligned() == "e1" else THETA_MAX_E2
    n = max(1, math.ceil(abs(dtheta) / cap - 1e-12))
    step = dtheta / n
    cells = []
    phase = 0.0
    right_theta = 0.0
    for k in range(n):
        block = kink_axis(system, step, H)
        block = rotate_global(block, phase)
        right_theta = block.right_state.theta
        block = block.translate((2 * k - (n - 1)) * H)
        cells.extend(block.cells)
        phase += step
    m = PiecewiseAffineMap(
        slip=system,
        cells=cells,
        window=Window(-n * H, n * H, H),
        core=(-(n - 0.5) * H, (n - 0.5) * H),
        left_state=ShearState(0.0, 0.0),
        right_state=ShearState(right_theta, 0.0),
    )
    propagate_offsets(m, anchor=0, anchor_offset=cells[0].offset)
    return m


def _oblique_chain(system: SlipSystem, dtheta: float, half_height: float) -> PiecewiseAffineMap:
    """Chain of kink_any blocks for a non-axis slip direction.

    Each block rotates one axis kink on its own, so the re-cut stays
    within the tall inner strip no matter how many kinks the total angle
    needs. Blocks span 16H and tile side by side like the axis chain.
    """
    H = half_height
    cap = max_kink_angle(system)
    n = max(1, math.ceil(abs(dtheta) / cap - 1e-12))
    step = dtheta / n
    cells = []
    phase = 0.0
    right_theta = 0.0
    for k in range(n):
        block = kink_any(system, step, H)
        block = rotate_global(block, phase)
        right_theta = block.right_state.theta
        block = block.translate((2 * k - (n - 1)) * 8.0 * H)
        cells.extend(block.cells)
        phase += step
    W = 8.0 * n * H
    m = PiecewiseAffineMap(
        slip=system,
        cells=cells,
        window=Window(-W, W, H),
        core=(-(W - H), W - H),
        left_state=ShearState(0.0, 0.0),
        right_state=ShearState(right_theta, 0.0),
    )
    propagate_offsets(m, anchor=0, anchor_offset=cells[0].offset)
    return m


def transition(
    system: SlipSystem,
    left: ShearState,
    right: ShearState,
    half_height: float,
) -> tuple[PiecewiseAffineMap, float]:
    """Connect two shear states across a finite window.

    Returns (map, r): outside |x1| <= r * half_height the gradients are
    exactly the two requested states. Built at unit half-height and
    rescaled, which makes r bitwise independent of half_height and the
    energy exactly quadratic in it. Slip along e1 carries no shear, so
    nonzero gammas raise AxisShearUnsupported there.
    """
    B = float(half_height)
    if not B > 0.0:
        raise ValueError("half_height must be positive")
    family = system.axis_aligned()
    d = canonical_angle_difference(right.theta - left.theta)
    if family == "e1" and (left.gamma != 0.0 or right.gamma != 0.0):
        raise AxisShearUnsupported(
            "slip along e1 admits no finite-energy shear; gammas must vanish"
        )

    if d == 0.0:
        base = _uniform_map(system, 1.0)
    elif family is not None:
        base = _axis_chain(system, d, 1.0)
    else:
        base = _oblique_chain(system, d, 1.0)

    base = rotate_global(base, left.theta)
    if family != "e1" and (left.gamma != base.left_state.gamma
                           or right.gamma != base.right_state.gamma):
        base = change_shear(base, left.gamma, right.gamma)
    r = max(-base.core[0], base.core[1])
    return base.scale(B), r
