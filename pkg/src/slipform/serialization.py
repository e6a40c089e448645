"""File formats: mesh JSON, profile CSV, sweep and gap tables.

Meshes are stored under the schema id "slipform-mesh/1". Every number is
written through Python's float repr, so a save / load / save cycle is
byte identical.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MeshFormatError, ProfileFormatError
from .geometry import ShearState, SlipSystem
from .maps import Cell, PiecewiseAffineMap, Window
from .recovery import ConvergenceTable, LimitProfile

MESH_SCHEMA = "slipform-mesh/1"
PROFILE_HEADER = ["t_end", "xi1", "xi2"]
SWEEP_HEADER = ["h", "eps", "rescaled", "limit", "gap", "rate"]
GAP_HEADER = ["h", "kinked", "smooth", "ratio", "kinked_delta", "smooth_delta"]


def _state_dict(st: ShearState) -> dict:
    return {"theta": float(st.theta), "gamma": float(st.gamma)}


def _pairs(a: np.ndarray) -> list:
    return [[float(p) for p in row] for row in np.asarray(a)]


@dataclass(frozen=True)
class MeshDocument:
    """A mesh together with the record of how it was produced."""

    map: PiecewiseAffineMap
    provenance: dict
    meta: dict


def mesh_to_dict(
    m: PiecewiseAffineMap,
    provenance: dict | None = None,
    meta: dict | None = None,
) -> dict:
    prov = dict(provenance or {})
    prov.setdefault("builder", "unspecified")
    prov.setdefault("parameters", {})
    return {
        "schema": MESH_SCHEMA,
        "slip": [float(m.slip.s[0]), float(m.slip.s[1])],
        "window": {
            "x_lo": float(m.window.x_lo),
            "x_hi": float(m.window.x_hi),
            "half_height": float(m.window.half_height),
        },
        "core": [float(m.core[0]), float(m.core[1])],
        "left_state": _state_dict(m.left_state),
        "right_state": _state_dict(m.right_state),
        "provenance": prov,
        "cells": [
            {
                "vertices": _pairs(c.vertices),
                "gradient": _pairs(c.gradient),
                "offset": [float(c.offset[0]), float(c.offset[1])],
            }
            for c in m.cells
        ],
        "meta": dict(meta or {}),
    }


def mesh_from_dict(d: dict) -> PiecewiseAffineMap:
    try:
        if d["schema"] != MESH_SCHEMA:
            raise MeshFormatError(f"unknown schema {d.get('schema')!r}")
        slip = SlipSystem(np.array([float(v) for v in d["slip"]]))
        win = d["window"]
        window = Window(
            float(win["x_lo"]), float(win["x_hi"]), float(win["half_height"])
        )
        core = (float(d["core"][0]), float(d["core"][1]))
        left = ShearState(**{k: float(v) for k, v in d["left_state"].items()})
        right = ShearState(**{k: float(v) for k, v in d["right_state"].items()})
        cells = []
        for raw in d["cells"]:
            verts = np.asarray(raw["vertices"], dtype=float)
            grad = np.asarray(raw["gradient"], dtype=float)
            off = np.asarray(raw["offset"], dtype=float)
            if verts.ndim != 2 or verts.shape[0] < 3 or verts.shape[1] != 2:
                raise MeshFormatError("cell vertices must be an (k >= 3, 2) table")
            if grad.shape != (2, 2) or off.shape != (2,):
                raise MeshFormatError("cell gradient must be 2x2 and offset length 2")
            cells.append(Cell(verts, grad, off))
        if not cells:
            raise MeshFormatError("mesh has no cells")
    except MeshFormatError:
        raise
    except (KeyError, TypeError, ValueError, IndexError, AttributeError) as exc:
        raise MeshFormatError(f"malformed mesh payload: {exc}") from exc
    return PiecewiseAffineMap(slip, cells, window, core, left, right)


def save_mesh(
    m: PiecewiseAffineMap,
    path,
    provenance: dict | None = None,
    meta: dict | None = None,
) -> Path:
    path = Path(path)
    payload = mesh_to_dict(m, provenance=provenance, meta=meta)
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path


def _read_payload(path) -> dict:
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MeshFormatError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise MeshFormatError("mesh file must hold a JSON object")
    return payload


def load_mesh(path) -> PiecewiseAffineMap:
    return mesh_from_dict(_read_payload(path))


def load_mesh_document(path) -> MeshDocument:
    """Like load_mesh, but keeps provenance and meta for a lossless resave."""
    payload = _read_payload(path)
    m = mesh_from_dict(payload)
    prov = payload.get("provenance", {})
    meta = payload.get("meta", {})
    if not isinstance(prov, dict) or not isinstance(meta, dict):
        raise MeshFormatError("provenance and meta must be JSON objects")
    return MeshDocument(map=m, provenance=prov, meta=meta)


def save_profile(profile: LimitProfile, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PROFILE_HEADER)
        for t, xi in zip(profile.breaks[1:], profile.xis):
            w.writerow([repr(float(t)), repr(float(xi[0])), repr(float(xi[1]))])
    return path


def load_profile(path) -> LimitProfile:
    try:
        with Path(path).open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ProfileFormatError(f"cannot read {path}: {exc}") from exc
    if not rows or rows[0] != PROFILE_HEADER:
        raise ProfileFormatError(f"profile files start with {','.join(PROFILE_HEADER)}")
    breaks = [0.0]
    xis = []
    for i, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ProfileFormatError(f"line {i}: expected 3 fields, got {len(row)}")
        try:
            t, x1, x2 = (float(v) for v in row)
        except ValueError as exc:
            raise ProfileFormatError(f"line {i}: {exc}") from exc
        breaks.append(t)
        xis.append([x1, x2])
    try:
        return LimitProfile(breaks, xis)
    except ValueError as exc:
        raise ProfileFormatError(str(exc)) from exc


def write_sweep_csv(table: ConvergenceTable, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for i, row in enumerate(table.rows):
            rate = ConvergenceTable(table.rows[: i + 1]).rate
            w.writerow(
                [
                    repr(float(row.h)),
                    repr(float(row.eps)),
                    repr(float(row.rescaled)),
                    repr(float(row.limit)),
                    repr(float(row.gap)),
                    repr(float(rate)) if not math.isnan(rate) else "nan",
                ]
            )
    return path


def write_gap_csv(result, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GAP_HEADER)
        for row in result.rows:
            w.writerow(
                [
                    repr(float(row.h)),
                    repr(float(row.kinked)),
                    repr(float(row.smooth)),
                    repr(float(row.ratio)),
                    repr(float(row.kinked_delta)),
                    repr(float(row.smooth_delta)),
                ]
            )
    return path
