"""C^1 deformations for the penalized energy: smoothed kinks in narrow windows.

Instead of piecewise-affine cells, each profile jump is blended over a
one-sided window [t, t + h^beta) with the C^2 quintic step
p(t) = 6 t^5 - 15 t^4 + 10 t^3 (zero first and second derivatives at both
ends, which keeps the rescaled gradient C^1). Between windows the
deformation is affine. In rescaled coordinates (x1, x2) on (0, L) x (-1, 1)
it reads

    constant run:  u = M (x1, h x2) + b
    blend window:  u = I(x1) + d + h x2 M(theta(x1), gamma(x1)) e2

with I the running integral of the moving first column, so the rescaled
gradient is M + h x2 (M' e2) x e1: exactly the run matrix away from the
windows and admissible up to O(h) inside them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .density import soft_density, soft_density_many
from .errors import AxisShearUnsupported, BadAlpha, ShortSegment
from .geometry import (
    ShearState,
    SlipSystem,
    canonical_angle_difference,
    make_shear,
    rot,
)
from .recovery import ConvergenceTable, LimitProfile, SweepRow, lift_profile

_GL_BASE = 48  # base integration points for first-column integrals


def smootherstep(t):
    t = np.clip(t, 0.0, 1.0)
    return ((6.0 * t - 15.0) * t + 10.0) * t**3


def smootherstep_d(t):
    t = np.clip(t, 0.0, 1.0)
    return ((30.0 * t - 60.0) * t + 30.0) * t * t


@dataclass(frozen=True)
class Zone:
    kind: str  # "const" or "blend"
    x_lo: float
    x_hi: float
    index: int  # run index for const zones, junction index for blends


@dataclass
class SmoothEnergy:
    eps: float
    h: float
    rescaled: float
    total: float
    limit: float
    gap: float
    zone_values: list[float] = field(default_factory=list)
    quadrature_points: int = 0


class SmoothRecovery:
    """Callable C^1 recovery for one profile at one (h, eps, alpha)."""

    def __init__(self, system: SlipSystem, profile: LimitProfile, h: float,
                 eps: float, alpha: float):
        if system.axis_aligned() == "e1":
            raise AxisShearUnsupported("the blended construction needs transverse slip reach")
        if not 0.0 < alpha < 2.0:
            raise BadAlpha(f"alpha = {alpha} must lie in (0, 2)")
        if not (h > 0.0 and eps > 0.0):
            raise ValueError("h and eps must be positive")
        self.system = system
        self.profile = profile
        self.h = float(h)
        self.eps = float(eps)
        self.alpha = float(alpha)
        self.beta = 2.0 - float(alpha)
        self.width = self.h**self.beta
        self.states = lift_profile(system, profile)

        # junctions between runs of equal states
        self.junctions: list[tuple[float, ShearState, ShearState]] = []
        for k in range(len(self.states) - 1):
            if self.states[k] != self.states[k + 1]:
                self.junctions.append(
                    (float(profile.breaks[k + 1]), self.states[k], self.states[k + 1])
                )

        L = profile.length
        stops = [t for t, _, _ in self.junctions] + [L]
        for i, (t, _, _) in enumerate(self.junctions):
            room = stops[i + 1] - t
            if self.width >= room:
                raise ShortSegment(
                    f"blend window h^beta = {self.width:.6g} at t = {t:.6g} does not "
                    f"fit before the next junction ({room:.6g} available)"
                )

        zones: list[Zone] = []
        run_states: list[ShearState] = []
        cursor = 0.0
        run = 0
        for j, (t, sl, _) in enumerate(self.junctions):
            zones.append(Zone("const", cursor, t, run))
            run_states.append(sl)
            zones.append(Zone("blend", t, t + self.width, j))
            cursor = t + self.width
            run += 1
        zones.append(Zone("const", cursor, L, run))
        run_states.append(self.states[-1])
        self.zones = zones
        self.run_states = run_states
        self._bounds = np.array([z.x_lo for z in zones] + [L])

        self._gl = np.polynomial.legendre.leggauss(_GL_BASE)
        self._offsets = self._book_keep()

    # -- profile of theta, gamma along the strip -------------------------------

    def angle_shear(self, x1: float) -> tuple[float, float, float, float]:
        """theta, gamma and their x1-derivatives at a point."""
        z = self.zones[self._zone_of(x1)]
        if z.kind == "const":
            st = self.run_states[z.index]
            return st.theta, st.gamma, 0.0, 0.0
        _, sl, sr = self.junctions[z.index]
        dth = canonical_angle_difference(sr.theta - sl.theta)
        dga = sr.gamma - sl.gamma
        tau = (x1 - z.x_lo) / self.width
        p = float(smootherstep(tau))
        dp = float(smootherstep_d(tau)) / self.width
        return sl.theta + dth * p, sl.gamma + dga * p, dth * dp, dga * dp

    def _zone_of(self, x1: float) -> int:
        i = int(np.searchsorted(self._bounds, x1, side="right")) - 1
        return min(max(i, 0), len(self.zones) - 1)

    def _column(self, x1: float) -> np.ndarray:
        th, ga, _, _ = self.angle_shear(float(x1))
        return make_shear(self.system, th, ga)[:, 0]

    def _integral_over(self, lo: float, hi: float) -> np.ndarray:
        # first-column integral on [lo, hi] inside one blend window
        gl_x, gl_w = self._gl
        mid, rad = 0.5 * (lo + hi), 0.5 * (hi - lo)
        acc = np.zeros(2)
        for xx, ww in zip(gl_x, gl_w):
            acc += ww * self._column(mid + rad * xx)
        return rad * acc

    def _book_keep(self) -> list[np.ndarray]:
        # continuity along the midline x2 = 0, anchored at the profile anchor
        offsets: list[np.ndarray] = []
        value = self.profile.anchor.copy()  # deformation at (x_lo of zone, 0)
        for z in self.zones:
            if z.kind == "const":
                st = self.run_states[z.index]
                M = make_shear(self.system, st.theta, st.gamma)
                b = value - M @ np.array([z.x_lo, 0.0])
                offsets.append(b)
                value = M @ np.array([z.x_hi, 0.0]) + b
            else:
                offsets.append(value.copy())
                value = value + self._integral_over(z.x_lo, z.x_hi)
        return offsets

    # -- evaluation -------------------------------------------------------------

    def evaluate(self, x1: float, x2: float) -> np.ndarray:
        """Physical deformation at (x1, h * x2); x2 runs over (-1, 1)."""
        zi = self._zone_of(x1)
        z = self.zones[zi]
        th, ga, _, _ = self.angle_shear(x1)
        M = make_shear(self.system, th, ga)
        if z.kind == "const":
            return M @ np.array([x1, self.h * x2]) + self._offsets[zi]
        mid = self._integral_over(z.x_lo, x1) + self._offsets[zi]
        return mid + (self.h * x2) * M[:, 1]

    def _tangent(self, x1: float) -> tuple[np.ndarray, np.ndarray]:
        """State matrix and its x1-derivative along the midline."""
        th, ga, dth, dga = self.angle_shear(x1)
        M = make_shear(self.system, th, ga)
        if dth == 0.0 and dga == 0.0:
            return M, np.zeros((2, 2))
        s, m = self.system.s, self.system.m
        dM = rot(th + 0.5 * math.pi) @ (np.eye(2) + ga * np.outer(s, m)) * dth \
            + rot(th) @ np.outer(s, m) * dga
        return M, dM

    def rescaled_gradient(self, x1: float, x2: float) -> np.ndarray:
        M, dM = self._tangent(x1)
        out = M.copy()
        out[:, 0] += (self.h * x2) * dM[:, 1]
        return out

    # -- energy -------------------------------------------------------------------

    def energy(self) -> SmoothEnergy:
        """Rescaled penalized energy: runs in closed form, blends by quadrature."""
        total = 0.0
        zone_values = []
        points = 0
        for zi, z in enumerate(self.zones):
            if z.kind == "const":
                st = self.run_states[z.index]
                M = make_shear(self.system, st.theta, st.gamma)
                val = 2.0 * (z.x_hi - z.x_lo) * soft_density(self.system, M, self.eps)
            else:
                val, used = self._blend_energy(z)
                points += used
            zone_values.append(val)
            total += val
        lens = self.profile.segment_lengths()
        limit = 2.0 * float(
            sum(ln * st.gamma**2 for ln, st in zip(lens, self.states))
        )
        return SmoothEnergy(
            eps=self.eps,
            h=self.h,
            rescaled=total,
            total=self.h * total,
            limit=limit,
            gap=total - limit,
            zone_values=zone_values,
            quadrature_points=points,
        )

    def _blend_energy(self, z: Zone, tol: float = 1e-8, cap: int = 512):
        n1, n2 = 32, 4
        prev = None
        while True:
            val = self._blend_quad(z, n1, n2)
            used = n1 * n2
            if prev is not None and abs(val - prev) <= tol * max(abs(val), 1e-300):
                return val, used
            if n1 >= cap:
                return val, used
            prev = val
            n1 *= 2
            n2 *= 2

    def _blend_quad(self, z: Zone, n1: int, n2: int) -> float:
        x_nodes, x_w = np.polynomial.legendre.leggauss(n1)
        y_nodes, y_w = np.polynomial.legendre.leggauss(n2)
        mid, rad = 0.5 * (z.x_lo + z.x_hi), 0.5 * (z.x_hi - z.x_lo)
        Fs = np.empty((n1, n2, 2, 2))
        for i, xx in enumerate(x_nodes):
            M, dM = self._tangent(mid + rad * xx)
            Fs[i] = M
            Fs[i, :, :, 0] += np.outer(self.h * y_nodes, dM[:, 1])
        vals = soft_density_many(self.system, Fs, self.eps).reshape(n1, n2)
        return rad * float(x_w @ vals @ y_w)


def smooth_soft_recovery(
    system: SlipSystem,
    profile: LimitProfile,
    half_height: float,
    eps: float,
    alpha: float,
) -> SmoothRecovery:
    """Build the blended C^1 recovery for one height and penalty."""
    return SmoothRecovery(system, profile, half_height, eps, alpha)


def soft_sweep(
    system: SlipSystem,
    profile: LimitProfile,
    h_list,
    alpha: float,
    eps_rule="sqrt",
) -> ConvergenceTable:
    """Energy table of the blended recovery over a ladder of heights.

    eps_rule is either the string "sqrt" (eps = sqrt(h)) or a number held
    fixed across the ladder.
    """
    rows = []
    for h in h_list:
        h = float(h)
        eps = math.sqrt(h) if eps_rule == "sqrt" else float(eps_rule)
        rec = smooth_soft_recovery(system, profile, h, eps, alpha)
        en = rec.energy()
        rows.append(SweepRow(h, eps, en.rescaled, en.limit, en.gap))
    return ConvergenceTable(rows)
