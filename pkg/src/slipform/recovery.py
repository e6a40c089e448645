"""Assemble strip constructions from one-dimensional limit profiles.

A limit profile is a piecewise-constant derivative field xi on (0, L).
Each segment lifts to a shear state through its first column; interior
jumps are bridged by transition windows, and what remains are constant
runs. The result is a continuous piecewise-affine map on (0, L) x (-h, h)
whose rescaled energy exceeds the limit energy by the transition cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .builders import transition
from .density import EnergyReport, energy_of_map
from .errors import HTooLarge, Infeasible, ShortSegment
from .geometry import ShearState, SlipSystem, first_column, state_matrix
from .maps import Cell, PiecewiseAffineMap, Window, propagate_offsets


@dataclass(frozen=True, eq=False)
class LimitProfile:
    """Breakpoints 0 = t_0 < ... < t_N = L and one derivative xi per segment."""

    breaks: np.ndarray
    xis: np.ndarray
    anchor: np.ndarray = None

    def __post_init__(self):
        br = np.asarray(self.breaks, dtype=float).reshape(-1)
        xi = np.asarray(self.xis, dtype=float).reshape(-1, 2)
        if len(br) < 2 or len(xi) != len(br) - 1:
            raise ValueError("need N+1 breakpoints and N derivatives")
        if br[0] != 0.0:
            raise ValueError("profiles start at t = 0")
        if not np.all(np.diff(br) > 0.0):
            raise ValueError("breakpoints must be strictly increasing")
        anc = np.zeros(2) if self.anchor is None else np.asarray(self.anchor, float).reshape(2)
        object.__setattr__(self, "breaks", br)
        object.__setattr__(self, "xis", xi)
        object.__setattr__(self, "anchor", anc.copy())

    @property
    def length(self) -> float:
        return float(self.breaks[-1])

    @property
    def n_segments(self) -> int:
        return len(self.xis)

    def segment_lengths(self) -> np.ndarray:
        return np.diff(self.breaks)


def lift_profile(system: SlipSystem, profile: LimitProfile, tol: float = 1e-9) -> list[ShearState]:
    """Lift each segment derivative to a shear state.

    Slip along e1 cannot lift sub-unit derivatives; those raise
    ShortSegment and point at zigzag_approximate, which trades them for
    unit-speed oscillations. Everything else out of range is Infeasible.
    """
    states = []
    for n, xi in enumerate(profile.xis):
        r = float(np.hypot(xi[0], xi[1]))
        if system.axis_aligned() == "e1" and r < 1.0 - tol:
            raise ShortSegment(
                f"segment {n} has |xi| = {r:.6g} < 1, unreachable for slip along e1; "
                "zigzag_approximate replaces such segments by unit-speed oscillations"
            )
        try:
            states.append(first_column(system, xi, tol))
        except Infeasible as exc:
            raise Infeasible(f"segment {n}: {exc}") from exc
    return states


def limit_energy(system: SlipSystem, profile: LimitProfile) -> float:
    """Twice the length-weighted sum of squared shears of the lift."""
    states = lift_profile(system, profile)
    lens = profile.segment_lengths()
    return 2.0 * float(sum(ln * st.gamma * st.gamma for ln, st in zip(lens, states)))


@dataclass
class TransitionInfo:
    t: float
    r: float
    half_width: float


@dataclass
class RecoveryResult:
    map: PiecewiseAffineMap
    states: list[ShearState]
    limit_energy: float
    report: EnergyReport
    gap: float
    transitions: list[TransitionInfo] = field(default_factory=list)
    h_max: float = math.inf


def _events(breaks: np.ndarray, states: list[ShearState]):
    ev = []
    for k in range(1, len(states)):
        if states[k] != states[k - 1]:
            ev.append((float(breaks[k]), states[k - 1], states[k]))
    return ev


def build_recovery(
    system: SlipSystem,
    profile: LimitProfile,
    half_height: float,
    tol: float = 1e-9,
) -> RecoveryResult:
    """Glue transition windows and constant runs along the profile.

    Raises HTooLarge when the windows would overlap each other or leave
    (0, L); the message carries the largest admissible half-height for
    this profile so callers can rescale.
    """
    h = float(half_height)
    if not h > 0.0:
        raise ValueError("half_height must be positive")
    L = profile.length
    states = lift_profile(system, profile, tol)
    events = _events(profile.breaks, states)

    built = []
    for t, sl, sr in events:
        tm, r = transition(system, sl, sr, h)
        built.append((t, sl, tm, r))
    h_max = math.inf
    if built:
        wu = [tm.window.x_hi / h for _, _, tm, _ in built]
        ts = [t for t, _, _, _ in built]
        bounds = [ts[0] / wu[0], (L - ts[-1]) / wu[-1]]
        for k in range(len(built) - 1):
            bounds.append((ts[k + 1] - ts[k]) / (wu[k] + wu[k + 1]))
        h_max = float(min(bounds))

    def _too_large(t):
        raise HTooLarge(
            f"transition window at t = {t:.6g} does not fit in (0, {L:.6g}) "
            f"at half-height {h:.6g}; the largest admissible value is {h_max:.6g}"
        )

    tol_len = 1e-12 * L
    cells: list[Cell] = []
    transitions: list[TransitionInfo] = []
    prev = 0.0
    for t, sl, tm, r in built:
        half_w = tm.window.x_hi
        lo = t - half_w
        if lo < prev - tol_len:
            _too_large(t)
        # between windows every segment carries the same state, namely the
        # one left of this event
        if lo - prev > tol_len:
            verts = np.array([[prev, -h], [lo, -h], [lo, h], [prev, h]])
            cells.append(Cell(verts, state_matrix(system, sl), np.zeros(2)))
        placed = tm.translate(t)
        cells.extend(placed.cells)
        transitions.append(TransitionInfo(t=t, r=r, half_width=half_w))
        prev = t + half_w
    if prev > L + tol_len:
        _too_large(built[-1][0])
    if L - prev > tol_len:
        verts = np.array([[prev, -h], [L, -h], [L, h], [prev, h]])
        cells.append(Cell(verts, state_matrix(system, states[-1]), np.zeros(2)))

    m = PiecewiseAffineMap(
        slip=system,
        cells=cells,
        window=Window(0.0, L, h),
        core=(
            built[0][0] - built[0][2].window.x_hi if built else L,
            built[-1][0] + built[-1][2].window.x_hi if built else 0.0,
        ),
        left_state=states[0],
        right_state=states[-1],
    )
    anchor = min(range(len(cells)), key=lambda i: float(cells[i].vertices[:, 0].min()))
    propagate_offsets(m, anchor=anchor, anchor_offset=np.zeros(2))
    shift = profile.anchor - m.evaluate(np.array([0.0, 0.0]))
    for c in m.cells:
        c.offset += shift

    lim = 2.0 * float(
        sum(ln * st.gamma**2 for ln, st in zip(profile.segment_lengths(), states))
    )
    report = energy_of_map(m, mode="hard", tol=tol)
    return RecoveryResult(
        map=m,
        states=states,
        limit_energy=lim,
        report=report,
        gap=report.rescaled - lim,
        transitions=transitions,
        h_max=h_max,
    )


def suggest_max_height(system: SlipSystem, profile: LimitProfile) -> float:
    """Largest strip half-height whose transition windows fit this profile."""
    states = lift_profile(system, profile)
    events = _events(profile.breaks, states)
    if not events:
        return math.inf
    L = profile.length
    wu, ts = [], []
    for t, sl, sr in events:
        tm, _ = transition(system, sl, sr, 1.0)
        wu.append(tm.window.x_hi)
        ts.append(t)
    bounds = [ts[0] / wu[0], (L - ts[-1]) / wu[-1]]
    for k in range(len(events) - 1):
        bounds.append((ts[k + 1] - ts[k]) / (wu[k] + wu[k + 1]))
    return min(bounds)


def zigzag_approximate(system: SlipSystem, profile: LimitProfile, count: int) -> LimitProfile:
    """Replace sub-unit segments by unit-speed oscillations.

    Each segment with |xi| < 1 becomes `count` periods of two equal halves
    whose derivatives are the unit vectors at angle +-arccos|xi| to xi, so
    the mean over every period is xi itself (the transverse parts cancel
    exactly). The uniform distance to the original limit map is
    (len / (2 count)) sin(arccos |xi|), which halves exactly when count
    doubles. Segments with |xi| >= 1 pass through unchanged.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    breaks = [0.0]
    xis = []
    for k, xi in enumerate(profile.xis):
        t0, t1 = float(profile.breaks[k]), float(profile.breaks[k + 1])
        r = float(np.hypot(xi[0], xi[1]))
        if r >= 1.0 - 1e-12:
            breaks.append(t1)
            xis.append(xi.copy())
            continue
        direction = xi / r if r > 0.0 else np.array([1.0, 0.0])
        transverse = math.sqrt(max(1.0 - r * r, 0.0)) * np.array([-direction[1], direction[0]])
        u_plus = r * direction + transverse
        u_minus = r * direction - transverse
        half = (t1 - t0) / (2 * count)
        for p in range(2 * count):
            breaks.append(t1 if p == 2 * count - 1 else t0 + (p + 1) * half)
            xis.append(u_plus if p % 2 == 0 else u_minus)
    return LimitProfile(np.array(breaks), np.array(xis), profile.anchor)


def zigzag_deviation(system: SlipSystem, profile: LimitProfile, count: int) -> float:
    """Uniform distance between a profile's limit map and its zigzag."""
    worst = 0.0
    for k, xi in enumerate(profile.xis):
        r = float(np.hypot(xi[0], xi[1]))
        if r >= 1.0 - 1e-12:
            continue
        length = float(profile.breaks[k + 1] - profile.breaks[k])
        worst = max(worst, (length / (2 * count)) * math.sqrt(max(1.0 - r * r, 0.0)))
    return worst


@dataclass
class SweepRow:
    h: float
    eps: float
    rescaled: float
    limit: float
    gap: float


@dataclass
class ConvergenceTable:
    rows: list[SweepRow]

    @property
    def rate(self) -> float:
        """OLS slope of log gap against log h over the last three rows."""
        tail = self.rows[-3:]
        if len(tail) < 3 or any(not row.gap > 0.0 for row in tail):
            return math.nan
        x = np.log([row.h for row in tail])
        y = np.log([row.gap for row in tail])
        return float(np.polyfit(x, y, 1)[0])


def recovery_sweep(system: SlipSystem, profile: LimitProfile, h_list) -> ConvergenceTable:
    rows = []
    for h in h_list:
        res = build_recovery(system, profile, float(h))
        rows.append(SweepRow(float(h), math.nan, res.report.rescaled, res.limit_energy, res.gap))
    return ConvergenceTable(rows)
