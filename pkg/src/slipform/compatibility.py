"""Rank-one compatibility between shear states.

Two gradients from the same slip family can meet along a straight
interface iff their difference is a rank-one matrix a x n. Equal rotations
are always compatible across the slip plane (normal m); unequal rotations
need the twin relation gamma2 - gamma1 = 2 tan((theta2 - theta1)/2), and
opposite rotations (difference pi) are never connected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import polygons
from .errors import NotConnected
from .geometry import ShearState, SlipSystem, canonical_angle_difference, rot


def kink_shear_for_angle(theta: float) -> float:
    """Shear jump that makes a pure kink of angle theta rank-one compatible."""
    if not -math.pi < theta < math.pi:
        raise ValueError("kink angle must lie in (-pi, pi)")
    return 2.0 * math.tan(0.5 * theta)


def rank_one_gap(
    system: SlipSystem,
    state1: ShearState,
    state2: ShearState,
    tol: float = 1e-9,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectors (a, n) with M(state2) - M(state1) = a x n.

    Raises NotConnected when the states admit no straight interface. The
    returned normal n is not normalized; its direction is what matters.
    """
    s, m = system.s, system.m
    d = canonical_angle_difference(state2.theta - state1.theta)
    dg = state2.gamma - state1.gamma
    if abs(d) <= tol:
        a = dg * (rot(state1.theta) @ s)
        return a, m.copy()
    if abs(abs(d) - math.pi) <= tol:
        raise NotConnected("opposite rotations cannot meet along a straight interface")
    need = kink_shear_for_angle(d)
    if abs(dg - need) > tol * (1.0 + abs(need)):
        raise NotConnected(
            f"twin relation fails: shear jump {dg:.6g}, angle {d:.6g} needs {need:.6g}"
        )
    a = dg / (4.0 + dg * dg) * (rot(state2.theta) @ (dg * s + 2.0 * m))
    n = 2.0 * s + (state1.gamma + state2.gamma) * m
    return a, n


@dataclass(frozen=True)
class InterfaceCheck:
    """Residuals along one shared edge; all should vanish for a valid map."""

    p: np.ndarray
    q: np.ndarray
    value_jump: float
    tangent_defect: float
    det_defect: float


def check_interface(cell_a, cell_b, tol: float) -> InterfaceCheck | None:
    """Continuity and rank-one residuals across the edge two cells share.

    Returns None when the cells do not share a segment longer than tol.
    Affine pieces agree on a segment iff they agree at its endpoints, so
    the value jump is measured there; the gradient jump must kill the edge
    tangent for the interface to be a rank-one line.
    """
    seg = polygons.shared_segment(cell_a.vertices, cell_b.vertices, tol)
    if seg is None:
        return None
    p, q = seg
    t = q - p
    t = t / np.hypot(*t)
    J = cell_b.gradient - cell_a.gradient
    jp = (cell_a.gradient @ p + cell_a.offset) - (cell_b.gradient @ p + cell_b.offset)
    jq = (cell_a.gradient @ q + cell_a.offset) - (cell_b.gradient @ q + cell_b.offset)
    return InterfaceCheck(
        p=p,
        q=q,
        value_jump=max(float(np.hypot(*jp)), float(np.hypot(*jq))),
        tangent_defect=float(np.hypot(*(J @ t))),
        det_defect=abs(float(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])),
    )
