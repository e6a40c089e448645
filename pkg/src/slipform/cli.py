"""Command line front end.

Exit codes: 0 success, 1 failed verification, 2 malformed input or usage,
3 construction refused on mathematical grounds (infeasible data, angle or
height out of range, unstable evolution).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .density import (
    energy_of_map,
    hard_density,
    reduced_density,
    segment_density,
    soft_density,
)
from .errors import (
    AngleTooLarge,
    AxisShearUnsupported,
    BadAlpha,
    BlowUp,
    CFLViolation,
    GridTooSmall,
    HTooLarge,
    Infeasible,
    MeshFormatError,
    NotConnected,
    ProfileFormatError,
    ShortSegment,
)
from .figures import gap_figure, mesh_svg, sweep_figure
from .geometry import SlipSystem
from .lavrentiev import gap_experiment
from .maps import validate_map
from .recovery import build_recovery, recovery_sweep, zigzag_approximate
from .serialization import (
    load_mesh,
    load_profile,
    save_mesh,
    write_gap_csv,
    write_sweep_csv,
)
from .smooth import soft_sweep

_DOMAIN_ERRORS = (
    Infeasible,
    NotConnected,
    AngleTooLarge,
    AxisShearUnsupported,
    HTooLarge,
    ShortSegment,
    BadAlpha,
    CFLViolation,
    BlowUp,
    GridTooSmall,
)


class _UsageError(Exception):
    """Bad invocation detected after argparse; exits 2 like a parse error."""


def _system_from(args) -> SlipSystem:
    try:
        return SlipSystem(args.slip)
    except ValueError as exc:
        raise _UsageError(f"--slip: {exc}") from None


def _parse_pair(text: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma separated numbers, got {text!r}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _parse_mat(text: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(f"expected four comma separated numbers, got {text!r}")
    try:
        vals = [float(p) for p in parts]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return np.array(vals).reshape(2, 2)


def _parse_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected lo:hi:n, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not (0.0 < lo < hi and n >= 2):
        raise argparse.ArgumentTypeError("need 0 < lo < hi and n >= 2")
    # swept from the coarsest height down so trailing rows carry the rate
    return np.geomspace(hi, lo, n)


def _parse_eps(text: str):
    if text == "sqrt":
        return "sqrt"
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("eps must be a positive number or 'sqrt'") from None
    if val <= 0.0:
        raise argparse.ArgumentTypeError("eps must be positive")
    return val


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slipform",
        description="Shear microstructures on thin strips: densities, meshes, sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_den = sub.add_parser("density", help="evaluate energy densities")
    p_den.add_argument("--slip", type=_parse_pair, required=True, metavar="S1,S2")
    p_den.add_argument("--xi", type=_parse_pair, action="append", default=[],
                       metavar="X1,X2", help="first column for the reduced density")
    p_den.add_argument("--mat", type=_parse_mat, action="append", default=[],
                       metavar="A,B,C,D", help="row-major matrix for the full densities")
    p_den.add_argument("--eps", type=_parse_eps, default=None,
                       help="also evaluate the penalized density at this eps")
    p_den.set_defaults(func=_cmd_density)

    p_build = sub.add_parser("build", help="build a recovery mesh for a profile")
    p_build.add_argument("--slip", type=_parse_pair, required=True, metavar="S1,S2")
    p_build.add_argument("--profile", required=True, help="profile CSV (t_end,xi1,xi2)")
    p_build.add_argument("--h", type=float, required=True, help="strip half-height")
    p_build.add_argument("--mode", choices=["hard", "soft"], default="hard",
                         help="energy accounting for the summary line")
    p_build.add_argument("--eps", type=_parse_eps, default=None,
                         help="penalty scale, required for --mode soft")
    p_build.add_argument("--out", required=True, help="mesh JSON destination")
    p_build.add_argument("--svg", default=None, help="also draw the mesh to this SVG")
    p_build.add_argument("--zigzag", type=int, default=None, metavar="N",
                         help="replace short segments by N-period zigzags first")
    p_build.set_defaults(func=_cmd_build)

    p_ver = sub.add_parser("verify", help="validate a mesh file")
    p_ver.add_argument("--mesh", required=True, help="mesh JSON to check")
    p_ver.add_argument("--tol", type=float, default=1e-9, help="acceptance tolerance")
    p_ver.set_defaults(func=_cmd_verify)

    p_swp = sub.add_parser("sweep", help="run a height sweep and write CSV plus figure")
    p_swp.add_argument("--experiment", choices=["recovery", "soft", "lavrentiev"],
                       default="recovery")
    p_swp.add_argument("--grid", type=_parse_grid, required=True, metavar="LO:HI:N",
                       help="geometric height ladder, swept from HI down to LO")
    p_swp.add_argument("--out", required=True, help="CSV destination")
    p_swp.add_argument("--svg", default=None,
                       help="figure destination (default: CSV path with .svg)")
    p_swp.add_argument("--slip", type=_parse_pair, default=None, metavar="S1,S2")
    p_swp.add_argument("--profile", default=None, help="profile CSV for recovery/soft")
    p_swp.add_argument("--alpha", type=float, default=1.0,
                       help="blend window exponent for the soft experiment")
    p_swp.add_argument("--eps", type=_parse_eps, default="sqrt",
                       help="penalty scale for the soft experiment, number or 'sqrt'")
    p_swp.add_argument("--delta", type=float, default=0.5,
                       help="end squeeze for the lavrentiev experiment")
    p_swp.add_argument("--seed", type=int, default=0)
    p_swp.add_argument("--restarts", type=int, default=20)
    p_swp.set_defaults(func=_cmd_sweep)

    return parser


def _fmt_value(val: float) -> str:
    if math.isinf(val):
        return "+inf" if val > 0 else "-inf"
    return repr(float(val))


def _cmd_density(args) -> int:
    system = _system_from(args)
    if not args.xi and not args.mat:
        print("nothing to evaluate: pass --xi and/or --mat", file=sys.stderr)
        return 2
    for xi in args.xi:
        tag = f"xi=({float(xi[0])!r},{float(xi[1])!r})"
        print(f"segment {tag} value={_fmt_value(float(segment_density(system, xi)))}")
        print(f"relaxed {tag} value={_fmt_value(float(reduced_density(system, xi)))}")
    for mat in args.mat:
        flat = ",".join(repr(float(v)) for v in mat.reshape(-1))
        val = hard_density(system, mat)
        print(f"hard mat=({flat}) value={_fmt_value(float(val))}")
        if args.eps is not None:
            eps = float(args.eps)
            sval = soft_density(system, mat, eps)
            print(f"soft mat=({flat}) eps={eps!r} value={_fmt_value(sval)}")
    return 0


def _cmd_build(args) -> int:
    system = _system_from(args)
    if args.mode == "soft" and args.eps is None:
        print("--mode soft needs --eps", file=sys.stderr)
        return 2
    profile = load_profile(args.profile)
    if args.zigzag is not None:
        profile = zigzag_approximate(system, profile, args.zigzag)
    res = build_recovery(system, profile, args.h)
    report = res.report
    if args.mode == "soft":
        report = energy_of_map(res.map, mode="soft", eps=float(args.eps))
    gap = report.rescaled - res.limit_energy
    save_mesh(
        res.map,
        args.out,
        provenance={
            "builder": "build_recovery",
            "parameters": {
                "slip": [float(system.s[0]), float(system.s[1])],
                "profile": str(args.profile),
                "h": float(args.h),
                "mode": args.mode,
                "eps": None if args.eps is None else float(args.eps),
                "zigzag": args.zigzag,
            },
        },
        meta={
            "half_height": float(args.h),
            "limit": res.limit_energy,
            "rescaled": report.rescaled,
            "gap": gap,
            "h_max": float(res.h_max),
        },
    )
    if args.svg:
        mesh_svg(res.map, args.svg)
    print(
        f"cells={len(res.map.cells)} mode={args.mode} "
        f"rescaled={report.rescaled!r} limit={res.limit_energy!r} "
        f"gap={gap!r} h_max={float(res.h_max)!r}"
    )
    return 0


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)  # 'inf'/'nan' as strings
    if isinstance(obj, (int, np.integer, str, bool)) or obj is None:
        return obj
    return repr(obj)


def _cmd_verify(args) -> int:
    m = load_mesh(args.mesh)
    report = validate_map(m)
    energy = energy_of_map(m, mode="hard")
    ok = report.passes(args.tol, args.tol, args.tol)
    summary = report.summary()
    over = [
        k for k, v in summary.items()
        if isinstance(v, float) and v > args.tol
    ]
    payload = {
        "pass": bool(ok),
        "tol": float(args.tol),
        "residuals": _jsonable(summary),
        "exceeded": over,
        "rescaled": _jsonable(energy.rescaled),
    }
    print(json.dumps(payload, indent=2))
    return 0 if ok else 1


def _cmd_sweep(args) -> int:
    heights = args.grid
    svg = args.svg if args.svg else str(Path(args.out).with_suffix(".svg"))
    if args.experiment == "lavrentiev":
        result = gap_experiment(args.delta, heights, seed=args.seed,
                                restarts=args.restarts)
        write_gap_csv(result, args.out)
        gap_figure(result, svg)
        last = min(result.rows, key=lambda r: r.h)
        print(
            f"floor={result.floor!r} ratio_at_smallest_h={last.ratio!r} "
            f"infeasible_squeeze={result.infeasible_squeeze} "
            f"wrote={args.out} figure={svg}"
        )
        return 0
    if args.slip is None or args.profile is None:
        print("recovery and soft sweeps need --slip and --profile", file=sys.stderr)
        return 2
    system = _system_from(args)
    profile = load_profile(args.profile)
    if args.experiment == "recovery":
        table = recovery_sweep(system, profile, heights)
    else:
        table = soft_sweep(system, profile, heights, args.alpha, args.eps)
    write_sweep_csv(table, args.out)
    sweep_figure(table, svg)
    print(f"rate={table.rate!r} wrote={args.out} figure={svg}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except (MeshFormatError, ProfileFormatError, _UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
