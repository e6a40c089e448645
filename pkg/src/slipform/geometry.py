"""Slip systems, shear states, and the planar simple-shear family.

A slip system is a unit direction s with in-plane normal m (s rotated by
+90 degrees). The admissible gradients along s form the two-parameter
family

    M(theta, gamma) = R(theta) (Id + gamma s x m),

which is exactly the set of 2x2 matrices with det F = 1 and |F s| = 1.
Replacing s by -s leaves the family pointwise unchanged, so the sign of
the slip direction carries no information.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import Infeasible

TWO_PI = 2.0 * math.pi

# Components below this size count as exactly zero when deciding whether a
# slip direction is axis aligned. The reduced density divides by s2, so the
# cutoff has to sit well above machine noise.
AXIS_TOL = 1e-12


def rot(theta: float) -> np.ndarray:
    """Counterclockwise rotation by theta."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def perp(v: np.ndarray) -> np.ndarray:
    """Rotate a vector by +90 degrees."""
    return np.array([-v[1], v[0]])


def canonical_angle(theta: float) -> float:
    """Reduce an angle to the canonical interval [-pi, pi)."""
    t = math.fmod(theta + math.pi, TWO_PI)
    if t < 0.0:
        t += TWO_PI
    return t - math.pi


def canonical_angle_difference(d: float) -> float:
    """Reduce an angle difference to (-pi, pi]; a half turn counts as +pi."""
    t = canonical_angle(d)
    if t == -math.pi:
        t = math.pi
    return t


@dataclass(frozen=True, eq=False)
class SlipSystem:
    """Unit slip direction with its +90 degree normal."""

    s: np.ndarray
    m: np.ndarray = None

    def __post_init__(self):
        v = np.asarray(self.s, dtype=float).reshape(2).copy()
        n = math.hypot(v[0], v[1])
        if not n > 0.0:
            raise ValueError("slip direction must be nonzero")
        v /= n
        v.setflags(write=False)
        w = perp(v)
        w.setflags(write=False)
        object.__setattr__(self, "s", v)
        object.__setattr__(self, "m", w)

    def __repr__(self):
        return f"SlipSystem([{self.s[0]:+.6f}, {self.s[1]:+.6f}])"

    @property
    def angle(self) -> float:
        return math.atan2(self.s[1], self.s[0])

    def axis_aligned(self) -> str | None:
        """'e1' or 'e2' when the direction lies on a coordinate axis, else None."""
        if abs(self.s[1]) <= AXIS_TOL:
            return "e1"
        if abs(self.s[0]) <= AXIS_TOL:
            return "e2"
        return None


@dataclass(frozen=True)
class ShearState:
    """Rotation angle and shear amount; theta is stored canonically in [-pi, pi)."""

    theta: float
    gamma: float

    def __post_init__(self):
        object.__setattr__(self, "theta", canonical_angle(float(self.theta)))
        object.__setattr__(self, "gamma", float(self.gamma))


def make_shear(system: SlipSystem, theta: float, gamma: float) -> np.ndarray:
    """Shear by gamma along the slip direction, then rotate by theta."""
    return rot(theta) @ (np.eye(2) + gamma * np.outer(system.s, system.m))


def state_matrix(system: SlipSystem, state: ShearState) -> np.ndarray:
    return make_shear(system, state.theta, state.gamma)


def membership_residual(system: SlipSystem, F: np.ndarray) -> float:
    """Distance from the two defining constraints det F = 1, |F s| = 1."""
    det = F[0, 0] * F[1, 1] - F[0, 1] * F[1, 0]
    fs = F @ system.s
    return max(abs(det - 1.0), abs(math.hypot(fs[0], fs[1]) - 1.0))


def is_admissible(system: SlipSystem, F: np.ndarray, tol: float = 1e-9) -> bool:
    return membership_residual(system, F) <= tol


def decompose(system: SlipSystem, F: np.ndarray, tol: float = 1e-9) -> ShearState:
    """Recover (theta, gamma) from an admissible gradient.

    Raises Infeasible when F is farther than tol from the shear family.
    The rotation is read off from where F sends s (the family fixes |F s|),
    the shear from the remaining upper-triangular part.
    """
    res = membership_residual(system, F)
    if res > tol:
        raise Infeasible(f"matrix is not a slip shear (residual {res:.3e})")
    s, m = system.s, system.m
    fs = F @ s
    theta = math.atan2(s[0] * fs[1] - s[1] * fs[0], s[0] * fs[0] + s[1] * fs[1])
    gamma = float((rot(theta).T @ (F @ m)) @ s)
    return ShearState(theta, gamma)


def first_column(system: SlipSystem, xi: np.ndarray, tol: float = 1e-9) -> ShearState:
    """Minimal-shear state whose gradient has first column xi.

    M(theta, gamma) e1 = xi forces |xi|^2 = 1 - 2 gamma s1 s2 + gamma^2 s2^2.
    Of the (at most two) real roots the one of smallest magnitude is taken,
    the positive one on ties. Axis directions along e1 have a unit first
    column for every state, so |xi| = 1 is required there and the canonical
    representative gamma = 0 is returned.
    """
    xi = np.asarray(xi, dtype=float)
    r2 = float(xi @ xi)
    s1, s2 = float(system.s[0]), float(system.s[1])
    if system.axis_aligned() == "e1":
        if abs(math.sqrt(r2) - 1.0) > tol:
            raise Infeasible(
                f"axis slip along e1 reaches only unit first columns, got |xi| = {math.sqrt(r2):.6g}"
            )
        return ShearState(math.atan2(xi[1], xi[0]), 0.0)
    disc = r2 - s2 * s2
    if disc < -tol * max(1.0, r2):
        raise Infeasible(
            f"|xi| = {math.sqrt(r2):.6g} below the reachable minimum |s2| = {abs(s2):.6g}"
        )
    root = math.sqrt(max(disc, 0.0))
    lo, hi = sorted(((s1 - root) / s2, (s1 + root) / s2), key=abs)
    gamma = lo
    if abs(abs(lo) - abs(hi)) <= 1e-14 * max(1.0, abs(lo)):
        gamma = max(lo, hi)
    u = np.array([1.0, 0.0]) + (gamma * system.m[0]) * system.s
    theta = math.atan2(u[0] * xi[1] - u[1] * xi[0], u[0] * xi[0] + u[1] * xi[1])
    return ShearState(theta, gamma)
